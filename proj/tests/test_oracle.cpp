#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"
#include "ipw/oracle.hpp"
#include "ipw/stable.hpp"
#include "oracles.hpp"

using namespace ipw;

namespace {

double bowley(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double q1 = quantile_type1(v, 0.25), q2 = quantile_type1(v, 0.5),
               q3 = quantile_type1(v, 0.75);
  return (q3 + q1 - 2.0 * q2) / (q3 - q1);
}

// Batch means of Bowley's quartile skewness with a between-batch standard error.
std::pair<double, double> batched_bowley(const std::vector<double>& x, std::size_t batches) {
  const std::size_t size = x.size() / batches;
  std::vector<double> b;
  for (std::size_t k = 0; k < batches; ++k)
    b.push_back(bowley({x.begin() + static_cast<std::ptrdiff_t>(k * size),
                        x.begin() + static_cast<std::ptrdiff_t>((k + 1) * size)}));
  const double m = mean(b);
  return {m, sd_about(b, m) / std::sqrt(static_cast<double>(batches))};
}

TailMoment constant(double v) {
  return [v](double) { return v; };
}

}  // namespace

TEST_CASE("stable_cf closed forms") {
  const StableParams sym{1.5, 1.0, 1.0};
  CHECK(stable_cf(0.0, sym) == std::complex<double>(1.0, 0.0));

  const StableParams gauss{2.0, 1.0, 1.0};
  for (double z : {-2.0, -0.5, 0.3, 1.0, 3.0}) {
    const auto l = stable_log_cf(z, gauss);
    CHECK(std::abs(l.real() - (-0.5 * z * z)) < 1e-12);
    CHECK(std::abs(l.imag()) < 1e-12);
  }
  // a skewed law still reduces to the Gaussian at gamma0 = 2
  CHECK(std::abs(stable_log_cf(1.3, StableParams{2.0, 3.0, 1.0}) - (-0.5 * 1.69)) < 1e-12);

  const double expected = -std::tgamma(1.5) / 0.75 * -std::cos(0.75 * std::numbers::pi);
  CHECK(std::abs(stable_log_cf(1.0, sym).real() - expected) < 1e-12);
  CHECK(std::abs(expected - (-0.83554)) < 1e-5);
  CHECK(std::abs(stable_log_cf(1.0, sym).imag()) < 1e-15);

  // skewness flips the sign of the imaginary part with zeta
  const StableParams skew{1.5, 3.0, 1.0};
  CHECK(stable_log_cf(1.0, skew).imag() == doctest::Approx(-stable_log_cf(-1.0, skew).imag()));
  CHECK_THROWS_AS(stable_cf(1.0, StableParams{1.0, 1.0, 1.0}), ContractError);
  CHECK_THROWS_AS(stable_cf(1.0, StableParams{1.5, 0.0, 0.0}), ContractError);
}

TEST_CASE("levy_cf_moderate") {
  SUBCASE("t = 0 reduces to the stable CF") {
    for (double g : {1.2, 1.5, 1.8}) {
      for (double z : {-2.0, -0.5, 0.25, 1.0, 3.0}) {
        CAPTURE(g);
        CAPTURE(z);
        const auto got = levy_cf_moderate(z, 0.0, g, constant(2.0), constant(0.5));
        const auto want = stable_cf(z, StableParams{g, 2.0, 0.5});
        CHECK(std::abs(got - want) < 1e-6);
      }
    }
  }
  SUBCASE("symmetric constant tail moments give a real CF") {
    for (double z : {0.3, 1.0, 4.0}) CHECK(std::abs(levy_cf_moderate(z, 0.7, 1.5, constant(1.0), constant(1.0)).imag()) < 1e-10);
  }
  SUBCASE("normal outcome law matches a Riemann-sum oracle") {
    const OutcomeLaw law{OutcomeFamily::normal, 0.0, 1.0};
    const auto ap = tail_moment(law, 1.5, true);
    const auto am = tail_moment(law, 1.5, false);
    const auto got = levy_cf_moderate(1.0, 1.0, 1.5, ap, am);
    const auto want = std::exp(oracle::riemann_levy_log_cf(1.0, 1.0, 1.5));
    CHECK(std::abs(got - want) < 1e-4);
    // trimming thins the Levy measure, so the law is more concentrated than the stable one
    CHECK(std::abs(got) > std::abs(stable_cf(1.0, StableParams{1.5, ap(0.0), am(0.0)})));
  }
  SUBCASE("contracts") {
    CHECK_THROWS_AS(levy_cf_moderate(1.0, -1.0, 1.5, constant(1.0), constant(1.0)), ContractError);
    CHECK_THROWS_AS(levy_cf_moderate(1.0, 1.0, 2.0, constant(1.0), constant(1.0)), ContractError);
    CHECK_THROWS_AS(levy_cf_moderate(1.0, 1.0, 1.5, constant(0.0), constant(0.0)), ContractError);
  }
}

TEST_CASE("tail_moment of a normal law") {
  const OutcomeLaw law{OutcomeFamily::normal, 0.0, 1.0};
  // E|Z|^2 1{Z > 0} = 1/2
  CHECK(tail_moment(law, 2.0, true)(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(tail_moment(law, 2.0, false)(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(tail_moment(law, 1.5, true)(50.0) == 0.0);
  const OutcomeLaw point{OutcomeFamily::normal, 2.0, 0.0};
  CHECK(tail_moment(point, 1.5, true)(1.0) == doctest::Approx(std::pow(2.0, 1.5)));
  CHECK(tail_moment(point, 1.5, false)(0.0) == 0.0);
}

TEST_CASE("stable_sample") {
  const std::size_t count = 100000;
  SUBCASE("empirical CF matches stable_cf on the grid") {
    for (const auto& p : {StableParams{1.5, 1.0, 1.0}, StableParams{1.3, 2.0, 0.5}}) {
      const auto x = stable_sample(p, count, 31);
      double worst = 0.0;
      for (double z = 0.1; z <= 3.0 + 1e-9; z += 0.1) {
        worst = std::max(worst, std::abs(empirical_cf(x, z) - stable_cf(z, p)));
        worst = std::max(worst, std::abs(empirical_cf(x, -z) - stable_cf(-z, p)));
      }
      CHECK(worst < 5.0 / std::sqrt(static_cast<double>(count)));
    }
  }
  SUBCASE("symmetric parameters give zero quartile skewness") {
    const auto x = stable_sample(StableParams{1.5, 1.0, 1.0}, count, 77);
    const auto [m, se] = batched_bowley(x, 100);
    CHECK(std::abs(m) < 3.0 * se);
    const auto y = stable_sample(StableParams{1.5, 1.0, 0.0}, count, 77);
    const auto [my, sey] = batched_bowley(y, 100);
    CHECK(std::abs(my) > 3.0 * sey);
  }
  SUBCASE("near-Gaussian index matches Gaussian quantiles") {
    const StableParams p{1.9, 1.0, 1.0};
    auto x = stable_sample(p, count, 5);
    std::sort(x.begin(), x.end());
    const double target = 1.96 * std::sqrt(2.0) * stable_scale(p);
    CHECK(std::abs(quantile_type1(x, 0.975) / target - 1.0) < 0.1);
  }
  SUBCASE("same seed, same sample") {
    CHECK(stable_sample(StableParams{}, 100, 9) == stable_sample(StableParams{}, 100, 9));
  }
}

TEST_CASE("simulation design") {
  SUBCASE("gamma0 = 2 gives uniform weights") {
    SimulationDesign d;
    d.gamma0 = 2.0;
    d.n = 10000;
    const auto e = oracle_weights(generate(d, 0));
    std::vector<double> v(e.data(), e.data() + e.size());
    CHECK(ks_distance(v, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 1.36 / 100.0);
  }
  SUBCASE("gamma0 = 1.5 tail mass") {
    SimulationDesign d;
    d.n = 100000;
    const auto e = oracle_weights(generate(d, 0));
    const double p = (e.array() <= 0.01).cast<double>().mean();
    const double se = std::sqrt(0.1 * 0.9 / 1e5);
    CHECK(std::abs(p - 0.1) < 3.0 * se);
    CHECK(d.weight_cdf(0.01) == doctest::Approx(0.1));
  }
  SUBCASE("closed-form truth and bias") {
    SimulationDesign d;
    CHECK(d.theta0() == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    for (double b : {1e-4, 1e-3, 0.01, 0.1})
      CHECK(d.trimming_bias(b) == doctest::Approx(oracle::design_bias(d.mu1, d.gamma0, b)).epsilon(1e-12));
    // b * F(b) = R at the optimal threshold
    const double b = d.optimal_threshold();
    CHECK(b * d.weight_cdf(b) == doctest::Approx(d.selector_target()).epsilon(1e-10));
  }
  SUBCASE("logit mode stores logit(e)") {
    SimulationDesign d;
    d.n = 100;
    d.weight_mode = WeightMode::logit;
    const auto data = generate(d, 0);
    d.weight_mode = WeightMode::oracle;
    const auto ref = generate(d, 0);
    CHECK((oracle_weights(data) - oracle_weights(ref)).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(data.covariate_names() == std::vector<std::string>{"x"});
  }
  SUBCASE("invalid designs") {
    SimulationDesign d;
    d.gamma0 = 1.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
  }
}

TEST_CASE("limit scale") {
  // kappa^g = (g - 1)(a+ + a-)/(2 - g)
  CHECK(limit_scale(StableParams{1.5, 0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(limit_scale(StableParams{1.5, 1.0, 1.0}) == doctest::Approx(std::pow(2.0, 1.0 / 1.5)));
}

TEST_CASE("Hill estimator") {
  SUBCASE("recovers the tail index on the exact design") {
    SimulationDesign d;
    d.n = 100000;
    int hits = 0;
    for (std::uint64_t r = 0; r < 200; ++r) {
      const double g = tail_index_hill(oracle_weights(generate(d, r)), 1000);
      if (std::abs(g - 1.5) <= 0.1) ++hits;
    }
    CHECK(hits >= 190);
  }
  SUBCASE("equals the Pareto maximum-likelihood estimate") {
    auto rng = rng_stream(12, 0);
    Eigen::VectorXd w(2000);
    for (auto& v : w) v = std::pow(uniform_open(rng), 1.0 / 0.7);
    const std::size_t k = 300;
    std::vector<double> s(w.data(), w.data() + w.size());
    std::sort(s.begin(), s.end());
    const double anchor = s[k];
    // log-likelihood of x_i = w_(i)/anchor under density a x^{a-1} on (0,1)
    const auto ll = [&](double a) {
      double v = 0.0;
      for (std::size_t i = 0; i < k; ++i) v += std::log(a) + (a - 1.0) * std::log(s[i] / anchor);
      return v;
    };
    double lo = 0.01, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      (ll(m1) < ll(m2) ? lo : hi) = ll(m1) < ll(m2) ? m1 : m2;
    }
    CHECK(tail_index_hill(w, k) - 1.0 == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
  }
  SUBCASE("gamma0 = 2 is recognised as roughly uniform") {
    SimulationDesign d;
    d.gamma0 = 2.0;
    d.n = 100000;
    CHECK(std::abs(tail_index_hill(oracle_weights(generate(d, 0)), 1000) - 2.0) < 0.15);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(tail_index_hill(Eigen::VectorXd::Constant(10, 0.5), 2), NumericalError);
    CHECK_THROWS_AS(tail_index_hill(Eigen::VectorXd::Constant(10, 0.5), 5), ContractError);
  }
}

TEST_CASE("Lemma 1: tail of DY/e") {
  SimulationDesign d;
  d.n = 2000000;
  d.mu1 = {1.0};
  d.noise_sd = 0.0;
  // Y = 1 makes alpha+(0) = 1 and the target (g - 1)/g = 1/3
  const auto pts = lemma1_check(d, {50.0, 200.0});
  for (const auto& p : pts) {
    CHECK(p.target == doctest::Approx(1.0 / 3.0));
    CHECK(std::abs(p.ratio - p.target) < 4.0 * p.standard_error + 0.02);
  }
}

TEST_CASE("Lemma 2: bias and variance orders") {
  SimulationDesign d;
  d.n = 5000;
  const auto rep = lemma2_check(d, {0.001, 0.01, 0.05}, 400);
  for (const auto& p : rep.points) {
    CAPTURE(p.b);
    CHECK(std::abs(p.mc_bias - p.analytic_bias) < 4.0 * p.mc_bias_se);
  }
  // B^2/V is proportional to n b F(b)
  CHECK(rep.slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("regime experiment sanity") {
  SimulationDesign d;
  d.n = 2000;
  RegimeOptions o;
  o.replications = 200;
  o.reference_count = 20000;
  const auto none = regime_experiment(d, Regime::none, o);
  REQUIRE(none.ks_stable.has_value());
  CHECK(*none.ks_stable < 0.15);
  CHECK(none.b_n == 0.0);
  const auto heavy = regime_experiment(d, Regime::heavy, o);
  REQUIRE(heavy.ks_gaussian.has_value());
  CHECK(*heavy.ks_gaussian < 0.15);
  o.cf_grid = {0.5, 1.0};
  const auto moderate = regime_experiment(d, Regime::moderate, o);
  REQUIRE(moderate.cf_distance.has_value());
  CHECK(*moderate.cf_distance < 0.2);
  d.gamma0 = 3.0;
  CHECK_THROWS_AS(regime_experiment(d, Regime::light, o), ConfigError);
}

TEST_CASE("experiments are deterministic across thread counts") {
  SimulationDesign d;
  d.n = 2000;
  RegimeOptions o;
  o.replications = 50;
  o.reference_count = 1000;
  const auto a = regime_experiment(d, Regime::heavy, o);
  o.threads = 3;
  const auto b = regime_experiment(d, Regime::heavy, o);
  CHECK(a.statistics == b.statistics);
  const auto sa = selector_consistency(d, 1.0, 20, 0.9, 1.1, 1);
  const auto sb = selector_consistency(d, 1.0, 20, 0.9, 1.1, 3);
  CHECK(sa.ratios == sb.ratios);
}
