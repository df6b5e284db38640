#include "ipw/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"
#include "ipw/propensity.hpp"

namespace ipw {

OutcomeFamily parse_outcome_family(const std::string& s) {
  if (s == "normal") return OutcomeFamily::normal;
  if (s == "shifted_exponential") return OutcomeFamily::shifted_exponential;
  throw ConfigError("unknown outcome family '" + s + "'");
}

const char* to_string(OutcomeFamily f) {
  return f == OutcomeFamily::normal ? "normal" : "shifted_exponential";
}

WeightMode parse_weight_mode(const std::string& s) {
  if (s == "oracle") return WeightMode::oracle;
  if (s == "logit") return WeightMode::logit;
  throw ConfigError("unknown weight mode '" + s + "'");
}

const char* to_string(WeightMode m) { return m == WeightMode::oracle ? "oracle" : "logit"; }

Regime parse_regime(const std::string& s) {
  if (s == "none") return Regime::none;
  if (s == "light") return Regime::light;
  if (s == "moderate") return Regime::moderate;
  if (s == "heavy") return Regime::heavy;
  throw ConfigError("unknown regime '" + s + "' (expected none, light, moderate or heavy)");
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::none: return "none";
    case Regime::light: return "light";
    case Regime::moderate: return "moderate";
    case Regime::heavy: return "heavy";
  }
  return "?";
}

double OutcomeLaw::pdf(double y) const {
  if (family == OutcomeFamily::normal) return normal_pdf((y - location) / scale) / scale;
  const double z = (y - location) / scale + 1.0;
  return z < 0.0 ? 0.0 : std::exp(-z) / scale;
}

double OutcomeLaw::noise(std::mt19937_64& rng) const {
  if (scale == 0.0) return 0.0;
  if (family == OutcomeFamily::normal) return scale * std::normal_distribution<double>()(rng);
  return scale * (-std::log(uniform_open(rng)) - 1.0);
}

TailMoment tail_moment(const OutcomeLaw& law, double gamma0, bool upper) {
  if (law.scale == 0.0) {
    const double v = law.location;
    return [v, gamma0, upper](double u) {
      const bool in = upper ? v > u : v < -u;
      return in ? std::pow(std::abs(v), gamma0) : 0.0;
    };
  }
  double lo = law.family == OutcomeFamily::normal ? law.location - 40.0 * law.scale
                                                  : law.location - law.scale;
  double hi = law.family == OutcomeFamily::normal ? law.location + 40.0 * law.scale
                                                  : law.location - law.scale + 80.0 * law.scale;
  return [law, gamma0, upper, lo, hi](double u) {
    // Integrate y^g f(+-y) over y > max(u, 0), i.e. over the matching half-line.
    const double a = std::max(u, 0.0);
    const double from = upper ? std::max(a, lo) : std::max(a, -hi);
    const double to = upper ? hi : -lo;
    if (from >= to) return 0.0;
    const auto f = [&](double y) {
      return std::pow(y, gamma0) * law.pdf(upper ? y : -y);
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, from, to, 15, 1e-12,
                                                                         &err);
  };
}

void SimulationDesign::validate() const {
  if (!(gamma0 > 1.0)) throw ConfigError("tail index gamma0 must exceed 1");
  if (n < 2) throw ConfigError("design sample size must be at least 2");
  if (mu1.empty()) throw ConfigError("mu1 needs at least one coefficient");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise sd must be nonnegative");
}

double SimulationDesign::theta0() const {
  double v = 0.0;
  for (std::size_t k = 0; k < mu1.size(); ++k)
    v += mu1[k] * (gamma0 - 1.0) / (gamma0 - 1.0 + static_cast<double>(k));
  return v;
}

double SimulationDesign::mu1_at(double e) const {
  double v = 0.0;
  for (auto it = mu1.rbegin(); it != mu1.rend(); ++it) v = v * e + *it;
  return v;
}

double SimulationDesign::weight_cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return std::pow(x, gamma0 - 1.0);
}

double SimulationDesign::trimming_bias(double b) const {
  if (b <= 0.0) return 0.0;
  b = std::min(b, 1.0);
  double v = 0.0;
  for (std::size_t k = 0; k < mu1.size(); ++k) {
    const double p = gamma0 - 1.0 + static_cast<double>(k);
    v += mu1[k] * (gamma0 - 1.0) / p * std::pow(b, p);
  }
  return -v;
}

double SimulationDesign::estimator_variance(double b) const {
  // mu2(e) = mu1(e)^2 + sd^2; E[DY^2/e^2 1{e >= b}] = int_b^1 mu2(e)/e dF(e).
  std::vector<double> mu2(2 * mu1.size() - 1, 0.0);
  for (std::size_t i = 0; i < mu1.size(); ++i)
    for (std::size_t j = 0; j < mu1.size(); ++j) mu2[i + j] += mu1[i] * mu1[j];
  mu2[0] += noise_sd * noise_sd;
  double second = 0.0;
  for (std::size_t k = 0; k < mu2.size(); ++k) {
    if (mu2[k] == 0.0) continue;
    const double p = gamma0 - 2.0 + static_cast<double>(k);
    double integral;
    if (std::abs(p) < 1e-14) {
      if (b <= 0.0) return std::numeric_limits<double>::infinity();
      integral = -std::log(b);
    } else if (p < 0.0 && b <= 0.0) {
      return std::numeric_limits<double>::infinity();
    } else {
      integral = (1.0 - std::pow(b, p)) / p;
    }
    second += mu2[k] * (gamma0 - 1.0) * integral;
  }
  const double first = theta0() + trimming_bias(b);
  return (second - first * first) / static_cast<double>(n);
}

double SimulationDesign::selector_target() const {
  const double m1 = mu1.front();
  return (m1 * m1 + noise_sd * noise_sd) / (2.0 * static_cast<double>(n) * m1 * m1);
}

double SimulationDesign::optimal_threshold(double s) const {
  return std::min(1.0, std::pow(selector_target(), 1.0 / (s + gamma0 - 1.0)));
}

OutcomeLaw SimulationDesign::law_at_zero() const { return {family, mu1.front(), noise_sd}; }

StableParams SimulationDesign::stable_params() const {
  const auto law = law_at_zero();
  StableParams p;
  p.gamma0 = gamma0;
  p.alpha_plus = tail_moment(law, gamma0, true)(0.0);
  p.alpha_minus = tail_moment(law, gamma0, false)(0.0);
  return p;
}

Dataset generate(const SimulationDesign& design, std::uint64_t replication) {
  design.validate();
  auto rng = rng_stream(design.seed, replication);
  const auto n = static_cast<Eigen::Index>(design.n);
  Eigen::VectorXd y(n), d(n);
  Eigen::MatrixXd x(n, 1);
  const double power = 1.0 / (design.gamma0 - 1.0);
  OutcomeLaw law{design.family, 0.0, design.noise_sd};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = std::max(std::pow(uniform_open(rng), power),
                              std::numeric_limits<double>::min());
    d[i] = uniform_open(rng) < e ? 1.0 : 0.0;
    y[i] = design.mu1_at(e) + law.noise(rng);
    x(i, 0) = design.weight_mode == WeightMode::oracle ? e : std::log(e) - std::log1p(-e);
  }
  return Dataset(std::move(y), std::move(d), std::move(x),
                 {design.weight_mode == WeightMode::oracle ? "e" : "x"});
}

Eigen::VectorXd oracle_weights(const Dataset& data) {
  if (data.has_covariate("e")) return data.x().col(static_cast<Eigen::Index>(data.covariate_index("e")));
  const Eigen::VectorXd x = data.x().col(static_cast<Eigen::Index>(data.covariate_index("x")));
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

double limit_scale(const StableParams& params) {
  params.validate();
  const double g = params.gamma0;
  if (g >= 2.0) return 1.0;
  return std::pow((g - 1.0) * (params.alpha_plus + params.alpha_minus) / (2.0 - g), 1.0 / g);
}

double regime_threshold(Regime regime, std::size_t n, double gamma0, double t) {
  const auto nn = static_cast<double>(n);
  const double inv_a = std::pow(nn, -1.0 / gamma0);
  switch (regime) {
    case Regime::none: return 0.0;
    case Regime::light: return inv_a / std::log(nn);
    case Regime::moderate: return t * inv_a;
    case Regime::heavy: return std::min(inv_a * std::log(nn), 1.0 - 1e-12);
  }
  return 0.0;
}

RegimeReport regime_experiment(const SimulationDesign& design, Regime regime,
                               const RegimeOptions& options) {
  design.validate();
  if (options.replications < 2) throw ConfigError("regime experiment needs at least 2 replications");
  const bool stable_limit = design.gamma0 < 2.0;
  if (!stable_limit && regime != Regime::none && regime != Regime::heavy)
    throw ConfigError("light and moderate regimes need gamma0 < 2");

  RegimeReport rep;
  rep.regime = regime;
  rep.gamma0 = design.gamma0;
  rep.n = design.n;
  rep.replications = options.replications;
  rep.b_n = regime_threshold(regime, design.n, design.gamma0, options.t);
  const auto nn = static_cast<double>(design.n);
  rep.a_n = std::pow(nn, 1.0 / std::min(design.gamma0, 2.0));
  const double center = design.theta0() + design.trimming_bias(rep.b_n);

  rep.statistics.assign(options.replications, 0.0);
  rep.studentized.assign(options.replications, 0.0);
  parallel_for(options.replications, options.threads, [&](std::size_t r) {
    const Dataset data = generate(design, r);
    const Eigen::VectorXd e = oracle_weights(data);
    const Eigen::VectorXd terms = ipw_terms(Estimand::mean, data, e, rep.b_n);
    const double theta = terms.mean();
    const double s = sd_about({terms.data(), static_cast<std::size_t>(terms.size())}, theta);
    rep.statistics[r] = nn / rep.a_n * (theta - center);
    rep.studentized[r] = (theta - center) / (s / std::sqrt(nn));
  });

  if (!stable_limit) {
    const double m = mean(rep.statistics);
    const double sd = sd_about(rep.statistics, m);
    rep.ks_gaussian_fitted =
        ks_distance(rep.statistics, [&](double v) { return normal_cdf((v - m) / sd); });
    rep.ks_gaussian = ks_distance(rep.studentized, normal_cdf);
    return rep;
  }

  const auto params = design.stable_params();
  rep.limit_scale = limit_scale(params);
  switch (regime) {
    case Regime::none:
    case Regime::light: {
      auto ref = stable_sample(params, options.reference_count, options.reference_seed);
      for (auto& v : ref) v *= rep.limit_scale;
      rep.ks_stable = ks_distance(rep.statistics, ref);
      break;
    }
    case Regime::moderate: {
      const auto law = design.law_at_zero();
      const auto ap = tail_moment(law, design.gamma0, true);
      const auto am = tail_moment(law, design.gamma0, false);
      double worst = 0.0;
      for (double z : options.cf_grid) {
        const auto target =
            levy_cf_moderate(rep.limit_scale * z, options.t * rep.limit_scale, design.gamma0, ap, am);
        worst = std::max(worst, std::abs(empirical_cf(rep.statistics, z) - target));
      }
      rep.cf_distance = worst;
      break;
    }
    case Regime::heavy:
      rep.ks_gaussian = ks_distance(rep.studentized, normal_cdf);
      break;
  }
  return rep;
}

double tail_index_hill(const Eigen::VectorXd& weights, std::size_t k) {
  const auto n = static_cast<std::size_t>(weights.size());
  if (k < 2 || 2 * k >= n) throw ContractError("Hill estimator needs 2 <= k < n/2");
  std::vector<double> w(weights.data(), weights.data() + n);
  std::partial_sort(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k + 1), w.end());
  const double anchor = w[k];
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(w[i] > 0.0)) throw NumericalError("Hill estimator: nonpositive order statistic");
    sum += std::log(anchor / w[i]);
  }
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw NumericalError("Hill estimator: tied or degenerate lower order statistics");
  return 1.0 + static_cast<double>(k) / sum;
}

std::vector<Lemma1Point> lemma1_check(const SimulationDesign& design,
                                      const std::vector<double>& xs) {
  const Dataset data = generate(design, 0);
  const Eigen::VectorXd e = oracle_weights(data);
  const auto n = static_cast<double>(data.size());
  const double target =
      (design.gamma0 - 1.0) / design.gamma0 * tail_moment(design.law_at_zero(), design.gamma0, true)(0.0);
  std::vector<Lemma1Point> out;
  for (double x : xs) {
    std::size_t above = 0, small = 0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (data.d()[i] == 1.0 && data.y()[i] / e[i] > x) ++above;
      if (e[i] < 1.0 / x) ++small;
    }
    Lemma1Point p;
    p.x = x;
    p.target = target;
    if (small == 0 || above == 0) {
      p.ratio = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double pa = static_cast<double>(above) / n;
      const double ps = static_cast<double>(small) / n;
      p.ratio = x * pa / ps;
      p.standard_error = p.ratio * std::sqrt(1.0 / static_cast<double>(above) +
                                             1.0 / static_cast<double>(small));
    }
    out.push_back(p);
  }
  return out;
}

Lemma2Report lemma2_check(const SimulationDesign& design, const std::vector<double>& b_grid,
                          std::size_t replications, unsigned threads) {
  if (replications < 10) throw ConfigError("Lemma 2 check needs at least 10 replications");
  const std::size_t nb = b_grid.size();
  std::vector<std::vector<double>> est(nb, std::vector<double>(replications));
  parallel_for(replications, threads, [&](std::size_t r) {
    const Dataset data = generate(design, r);
    const Eigen::VectorXd e = oracle_weights(data);
    for (std::size_t j = 0; j < nb; ++j) est[j][r] = ipw_mean(data, e, b_grid[j]);
  });

  Lemma2Report rep;
  const auto rr = static_cast<double>(replications);
  const auto nn = static_cast<double>(design.n);
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < nb; ++j) {
    Lemma2Point p;
    p.b = b_grid[j];
    p.analytic_bias = design.trimming_bias(p.b);
    p.analytic_variance = design.estimator_variance(p.b);
    const double m = mean(est[j]);
    double m2 = 0.0, m4 = 0.0;
    for (double v : est[j]) {
      const double c = (v - m) * (v - m);
      m2 += c;
      m4 += c * c;
    }
    m2 /= rr;
    m4 /= rr;
    p.mc_bias = m - design.theta0();
    p.mc_variance = m2 * rr / (rr - 1.0);
    p.mc_bias_se = std::sqrt(p.mc_variance / rr);
    p.mc_variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / rr);
    p.rate_product = nn * p.b * design.weight_cdf(p.b);
    p.bias_variance_ratio = p.analytic_bias * p.analytic_bias / p.analytic_variance;
    if (p.b > 0.0 && std::isfinite(p.bias_variance_ratio) && p.bias_variance_ratio > 0.0) {
      lx.push_back(std::log(p.rate_product));
      ly.push_back(std::log(p.bias_variance_ratio));
    }
    rep.points.push_back(p);
  }
  if (lx.size() >= 2) {
    const double mx = mean(lx), my = mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.slope = sxy / sxx;
  }
  return rep;
}

SelectorReport selector_consistency(const SimulationDesign& design, double s,
                                    std::size_t replications, double lo, double hi,
                                    unsigned threads) {
  SelectorReport rep;
  rep.b_dagger = design.optimal_threshold(s);
  const double mu1 = design.mu1.front();
  const double mu2 = mu1 * mu1 + design.noise_sd * design.noise_sd;
  rep.ratios.assign(replications, 0.0);
  parallel_for(replications, threads, [&](std::size_t r) {
    const Dataset data = generate(design, r);
    rep.ratios[r] = select_threshold(oracle_weights(data), s, mu1, mu2) / rep.b_dagger;
  });
  std::size_t inside = 0;
  for (double v : rep.ratios)
    if (v >= lo && v <= hi) ++inside;
  rep.fraction_within = static_cast<double>(inside) / static_cast<double>(replications);
  return rep;
}

BiasOracleReport bias_oracle(const SimulationDesign& design, const PipelineConfig& pipeline,
                             std::size_t replications, double tolerance, unsigned threads) {
  BiasOracleReport rep;
  rep.tolerance = tolerance;
  rep.relative_errors.assign(replications, std::numeric_limits<double>::quiet_NaN());
  rep.thresholds.assign(replications, 0.0);
  parallel_for(replications, threads, [&](std::size_t r) {
    const Dataset data = generate(design, r);
    try {
      const auto est = estimate(data, oracle_weights(data), pipeline);
      const double truth = design.trimming_bias(est.b);
      rep.thresholds[r] = est.b;
      if (truth != 0.0) rep.relative_errors[r] = std::abs(est.bias_hat - truth) / std::abs(truth);
    } catch (const ContractError&) {
      throw;
    } catch (const Error&) {
    }
  });
  std::size_t inside = 0;
  for (double v : rep.relative_errors) {
    if (std::isnan(v))
      ++rep.failed;
    else if (v <= tolerance)
      ++inside;
  }
  rep.fraction_within = static_cast<double>(inside) / static_cast<double>(replications);
  return rep;
}

CoverageReport coverage_experiment(const SimulationDesign& design, const PipelineConfig& pipeline,
                                   const CoverageOptions& options) {
  const std::size_t reps = options.replications;
  if (reps == 0) throw ConfigError("coverage experiment needs at least one replication");
  const double theta0 = design.theta0();
  std::vector<int> covered(reps, -1);
  std::vector<double> width(reps, 0.0), bs(reps, 0.0);
  parallel_for(reps, options.threads, [&](std::size_t r) {
    const Dataset data = generate(design, r);
    try {
      WeightSource source;
      if (design.weight_mode == WeightMode::oracle) {
        source = WeightSource::fixed(oracle_weights(data));
      } else {
        source = WeightSource::fitted(ModelKind::logit,
                                      predict(fit(data, ModelKind::logit), data));
      }
      const auto full = estimate(data, source.weights, pipeline);
      SubsamplingConfig sc = options.subsampling;
      sc.threads = 1;
      sc.seed = rng_stream(options.subsampling.seed, r)();
      const auto sub = subsample_statistics(data, source, pipeline, full, sc);
      covered[r] = sub.ci.lower <= theta0 && theta0 <= sub.ci.upper ? 1 : 0;
      width[r] = sub.ci.upper - sub.ci.lower;
      bs[r] = full.b;
    } catch (const ContractError&) {
      throw;
    } catch (const Error&) {
    }
  });

  CoverageReport rep;
  rep.replications = reps;
  rep.level = 1.0 - options.subsampling.alpha;
  double wsum = 0.0, bsum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (covered[r] < 0) {
      ++rep.failed;
      continue;
    }
    rep.covered += static_cast<std::size_t>(covered[r]);
    wsum += width[r];
    bsum += bs[r];
  }
  const auto ok = static_cast<double>(reps - rep.failed);
  if (ok > 0) {
    rep.coverage = static_cast<double>(rep.covered) / ok;
    rep.mc_se = std::sqrt(rep.coverage * (1.0 - rep.coverage) / ok);
    rep.mean_width = wsum / ok;
    rep.mean_b = bsum / ok;
  }
  return rep;
}

}  // namespace ipw
