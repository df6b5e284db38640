// Acceptance checks, one per criterion: acceptance --criterion N (or --all).
// Each criterion prints a single PASS/FAIL line followed by indented details.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "ipw/biascorrect.hpp"
#include "ipw/error.hpp"
#include "ipw/estimator.hpp"
#include "ipw/nsw.hpp"
#include "ipw/oracle.hpp"
#include "ipw/propensity.hpp"
#include "ipw/resample.hpp"
#include "ipw/stable.hpp"
#include "ipw/trimming.hpp"
#include "oracles.hpp"

using namespace ipw;

namespace {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Check bound(const std::string& name, double value, double target, double tol) {
  return {name, std::abs(value - target) <= tol,
          fmt("%.6g (target %.6g, tolerance %.3g)", value, target, tol)};
}

Check at_most(const std::string& name, double value, double limit) {
  return {name, value < limit, fmt("%.6g (must be < %.6g)", value, limit)};
}

Check at_least(const std::string& name, double value, double limit) {
  return {name, value >= limit, fmt("%.6g (must be >= %.6g)", value, limit)};
}

Check runtime(double seconds, double limit) {
  return {"runtime", seconds < limit, fmt("%.1f s (limit %.0f s)", seconds, limit)};
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. NSW replication
std::vector<Check> criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const auto data = build_nsw_features(load_nsw(IPW_TEST_DATA_DIR));
  const auto model = fit(data, ModelKind::logit);
  const auto e = predict(model, data);
  const auto source = WeightSource::fitted(ModelKind::logit, e);

  PipelineConfig untrimmed;
  untrimmed.estimand = Estimand::att;
  untrimmed.trimming = TrimmingSpec::none(Orientation::upper_tail);
  untrimmed.bias.enabled = false;
  const auto raw = estimate(data, e, untrimmed);

  PipelineConfig automatic;
  automatic.estimand = Estimand::att;
  automatic.trimming = TrimmingSpec::automatic(1.0, Orientation::upper_tail);
  const auto trimmed = estimate(data, e, automatic);

  SubsamplingConfig sc;
  sc.replications = 1000;
  sc.seed = 20240601;
  sc.threads = threads();
  std::vector<Check> checks = {
      bound("untrimmed ATT", raw.theta_hat, 1451.0, 50.0),
      {"comparison units trimmed", trimmed.n_trimmed == 5,
       fmt("%.0f (target 5)", static_cast<double>(trimmed.n_trimmed))},
      bound("weight threshold 1 - b", 1.0 - trimmed.b, 0.96, 0.01),
      bound("bandwidth h", trimmed.bandwidth, 0.29, 0.03)};
  try {
    const auto sub = subsample_statistics(data, source, untrimmed, raw, sc);
    const bool overlap = sub.ci.lower <= 2739.0 && sub.ci.upper >= -1763.0;
    checks.push_back({"CI overlaps [-1763, 2739]", overlap,
                      fmt("[%.1f, %.1f], %.0f subsamples failed", sub.ci.lower, sub.ci.upper,
                          static_cast<double>(sub.failed))});
    checks.push_back(bound("CI lower endpoint", sub.ci.lower, -1763.0, 400.0));
    checks.push_back(bound("CI upper endpoint", sub.ci.upper, 2739.0, 400.0));
  } catch (const ResamplingError& ex) {
    checks.push_back({"untrimmed subsampling CI", false, ex.what()});
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  checks.push_back(runtime(seconds, 120.0));
  return checks;
}

// 2. Theorem 1 regime suite
std::vector<Check> criterion2() {
  const auto start = std::chrono::steady_clock::now();
  RegimeOptions o;
  o.replications = 1000;
  o.threads = threads();

  SimulationDesign thin;
  thin.gamma0 = 3.0;
  thin.n = 5000;
  const auto gauss = regime_experiment(thin, Regime::none, o);

  SimulationDesign heavy_tail;
  heavy_tail.n = 20000;
  const auto stable = regime_experiment(heavy_tail, Regime::none, o);
  const auto heavy = regime_experiment(heavy_tail, Regime::heavy, o);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  return {at_most("gamma0=3 untrimmed, KS to fitted Gaussian", gauss.ks_gaussian_fitted.value(), 0.03),
          at_most("gamma0=1.5 untrimmed, KS to stable sample", stable.ks_stable.value(), 0.05),
          at_most("gamma0=1.5 heavy trimming, studentized KS to N(0,1)",
                  heavy.ks_gaussian.value(), 0.05),
          runtime(seconds, 600.0)};
}

// 3. Lemma 2 bias oracle
std::vector<Check> criterion3() {
  const auto start = std::chrono::steady_clock::now();
  SimulationDesign d;
  d.n = 50000;
  PipelineConfig pc;
  pc.trimming = TrimmingSpec::automatic(1.0);
  pc.bias.order = 1;
  const auto rep = bias_oracle(d, pc, 200, 0.15, threads());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto frac = at_least("fraction within 15% relative error", rep.fraction_within, 0.9);
  frac.detail += fmt(", %.0f failed replications", static_cast<double>(rep.failed));
  return {frac, runtime(seconds, 180.0)};
}

// 4. Theorem 3 selector consistency
std::vector<Check> criterion4() {
  const auto start = std::chrono::steady_clock::now();
  SimulationDesign d;
  d.n = 100000;
  const auto rep = selector_consistency(d, 1.0, 200, 0.9, 1.1, threads());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto frac = at_least("fraction of b_hat/b_dagger in [0.9, 1.1]", rep.fraction_within, 0.9);
  frac.detail += fmt(", b_dagger %.4g", rep.b_dagger);
  return {frac, runtime(seconds, 120.0)};
}

// 5. Theorem 5 coverage and the bias-correction ablation
std::vector<Check> criterion5() {
  const auto start = std::chrono::steady_clock::now();
  SimulationDesign d;
  d.n = 5000;
  CoverageOptions co;
  co.replications = 300;
  co.subsampling.replications = 500;
  co.subsampling.seed = d.seed;
  co.threads = threads();

  PipelineConfig automatic;
  automatic.trimming = TrimmingSpec::automatic(1.0);
  const auto cov = coverage_experiment(d, automatic, co);

  PipelineConfig heavy;
  heavy.trimming = TrimmingSpec::rate_rule(1.0, 1.0 / d.gamma0, 1.0);
  const auto heavy_bc = coverage_experiment(d, heavy, co);
  heavy.bias.enabled = false;
  const auto heavy_raw = coverage_experiment(d, heavy, co);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double loss = cov.coverage - heavy_raw.coverage;
  return {{"auto trimming + bias correction coverage in [0.90, 0.98]",
           cov.coverage >= 0.90 && cov.coverage <= 0.98,
           fmt("%.4f (Monte Carlo se %.4f, mean b %.4g)", cov.coverage, cov.mc_se, cov.mean_b)},
          {"ablation: heavy trimming without correction loses >= 5pp", loss >= 0.05,
           fmt("%.4f vs %.4f, loss %.1f pp", cov.coverage, heavy_raw.coverage, 100.0 * loss) +
               fmt(" (heavy with correction %.4f)", heavy_bc.coverage)},
          runtime(seconds, 1800.0)};
}

// 6. Deterministic micro-oracles
std::vector<Check> criterion6() {
  const auto start = std::chrono::steady_clock::now();
  using oracle::make_data;
  using oracle::vec;
  std::vector<Check> out;
  const auto exact = [&](const std::string& name, double got, double want, double tol = 1e-10) {
    out.push_back(bound(name, got, want, tol));
  };

  const auto mean_data = make_data({2, 4, 1, 3}, {1, 1, 0, 1});
  const auto mean_e = vec({0.5, 0.25, 0.9, 0.5});
  exact("ipw_mean b=0", ipw_mean(mean_data, mean_e, 0.0), 6.5);
  exact("ipw_mean b=0.3", ipw_mean(mean_data, mean_e, 0.3), 2.5);
  exact("self-normalizer", self_normalizer(Estimand::mean, mean_data, mean_e, 0.0, 6.5),
        std::sqrt(139.0 / 3.0));
  const auto att_data = make_data({5, 2, 4}, {1, 0, 0});
  exact("att b=0", att(att_data, vec({0.5, 0.5, 0.8}), 0.0), -13.0);
  exact("att b=0.3", att(att_data, vec({0.5, 0.5, 0.8}), 0.3), 3.0);

  exact("select_threshold grid", select_threshold(vec({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}),
                                                  1.0, 1.0, 2.0),
        1.0 / 3.0);

  const auto fit = local_poly_fit(make_data({1, 3, 2, 5, 4, 100}, {1, 1, 1, 1, 1, 1}),
                                  vec({0.1, 0.2, 0.3, 0.4, 0.5, 0.8}), 0.5, 1, FitTarget::y,
                                  Orientation::lower_tail);
  exact("local fit intercept", fit.coefficients[0], 0.6);
  exact("local fit slope", fit.coefficients[1], 8.0);
  LocalPolyFit line;
  line.coefficients = vec({1.0, 2.0});
  line.order = 1;
  line.bandwidth = 0.5;
  exact("estimate_bias", estimate_bias(line, vec({0.1, 0.2, 0.5, 0.9}), 0.3, 4, Orientation::lower_tail),
        -0.65);

  const auto ci = confidence_interval(1.0, 2.0, 100, -1.5, 2.5);
  exact("CI lower", ci.lower, 0.5);
  exact("CI upper", ci.upper, 1.3);

  // subsample enumeration at n = 6, m = 2
  const std::vector<double> y = {1.0, 2.5, 3.0, 4.5, 6.0, 7.25};
  const std::vector<double> e = {0.5, 0.25, 0.75, 0.5, 0.8, 0.4};
  std::vector<double> terms;
  for (std::size_t i = 0; i < 6; ++i) terms.push_back(y[i] / e[i]);
  double theta = 0.0;
  for (double t : terms) theta += t / 6.0;
  std::vector<double> enumerated;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) {
      const double s = std::abs(terms[i] - terms[j]) / std::sqrt(2.0);
      enumerated.push_back((0.5 * (terms[i] + terms[j]) - theta) / (s / std::sqrt(2.0)));
    }
  const auto data = make_data(y, std::vector<double>(6, 1.0));
  PipelineConfig pc;
  pc.trimming = TrimmingSpec::none();
  pc.bias.enabled = false;
  const auto full = estimate(data, vec(e), pc);
  SubsamplingConfig sc;
  sc.m = 2;
  sc.replications = 20000;
  sc.alpha = 0.2;
  sc.seed = 424242;
  const auto sub = subsample_statistics(data, WeightSource::fixed(vec(e)), pc, full, sc);
  exact("enumeration q_low", sub.q_low, oracle::type1_quantile(enumerated, 0.1), 0.02);
  exact("enumeration q_high", sub.q_high, oracle::type1_quantile(enumerated, 0.9), 0.02);

  const auto at_zero = stable_cf(0.0, StableParams{1.5, 1.0, 1.0});
  exact("stable_cf(0) real part", at_zero.real(), 1.0, 1e-12);
  exact("stable_cf(0) imaginary part", at_zero.imag(), 0.0, 1e-12);
  for (double z : {0.5, 1.0, 2.0}) {
    const auto g = stable_cf(z, StableParams{2.0, 1.0, 1.0});
    exact(fmt("Gaussian limit at zeta=%.1f", z), g.real(), std::exp(-0.5 * z * z), 1e-12);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.push_back(runtime(seconds, 60.0));
  return out;
}

const std::vector<std::pair<const char*, std::function<std::vector<Check>()>>> kCriteria = {
    {"NSW replication", criterion1},
    {"Theorem 1 regime suite", criterion2},
    {"Lemma 2 bias oracle", criterion3},
    {"Theorem 3 selector consistency", criterion4},
    {"Theorem 5 coverage", criterion5},
    {"deterministic micro-oracles", criterion6},
};

bool run_criterion(int k) {
  const auto& [title, body] = kCriteria[static_cast<std::size_t>(k - 1)];
  std::vector<Check> checks;
  try {
    checks = body();
  } catch (const std::exception& ex) {
    checks.push_back({"no exception", false, ex.what()});
  }
  const bool pass = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  std::printf("criterion %d: %s: %s\n", k, pass ? "PASS" : "FAIL", title);
  for (const auto& c : checks)
    std::printf("  [%s] %s: %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--all") == 0) {
      for (int k = 1; k <= 6; ++k) which.push_back(k);
    } else {
      std::fprintf(stderr, "usage: acceptance --criterion N | --all\n");
      return 2;
    }
  }
  if (which.empty())
    for (int k = 1; k <= 6; ++k) which.push_back(k);
  bool ok = true;
  for (int k : which) {
    if (k < 1 || k > 6) {
      std::fprintf(stderr, "criterion must be 1..6\n");
      return 2;
    }
    ok = run_criterion(k) && ok;
  }
  return ok ? 0 : 1;
}
