#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ipw/dataset.hpp"
#include "ipw/estimator.hpp"
#include "ipw/resample.hpp"
#include "ipw/stable.hpp"

namespace ipw {

enum class OutcomeFamily { normal, shifted_exponential };
/// oracle: the covariate column "e" is the true weight.
/// logit: the covariate column "x" = logit(e), so a logit fit recovers e.
enum class WeightMode { oracle, logit };
enum class Regime { none, light, moderate, heavy };

OutcomeFamily parse_outcome_family(const std::string& s);
const char* to_string(OutcomeFamily f);
WeightMode parse_weight_mode(const std::string& s);
const char* to_string(WeightMode m);
Regime parse_regime(const std::string& s);
const char* to_string(Regime r);

/// Law of Y given e: location mu1(e) plus mean-zero noise with sd `scale`.
struct OutcomeLaw {
  OutcomeFamily family = OutcomeFamily::normal;
  double location = 0.0;
  double scale = 1.0;

  double pdf(double y) const;
  double noise(std::mt19937_64& rng) const;
};

/// u -> E[|Y|^g 1{Y > u}] (upper) or E[|Y|^g 1{Y < -u}] (lower) by
/// adaptive quadrature.
TailMoment tail_moment(const OutcomeLaw& law, double gamma0, bool upper);

/// e = U^{1/(g0-1)} so P[e <= x] = x^{g0-1}; D | e ~ Bernoulli(e);
/// Y | e ~ mu1(e) + noise, with mu1 a polynomial in e.
struct SimulationDesign {
  double gamma0 = 1.5;
  std::size_t n = 5000;
  std::vector<double> mu1 = {1.0, 2.0};  // coefficients c_0, c_1, ...
  double noise_sd = 1.0;
  OutcomeFamily family = OutcomeFamily::normal;
  WeightMode weight_mode = WeightMode::oracle;
  std::uint64_t seed = 1;

  void validate() const;
  /// sum_k c_k (g0-1)/(g0-1+k).
  double theta0() const;
  double mu1_at(double e) const;
  double weight_cdf(double x) const;
  /// B = -int_0^b mu1(e) (g0-1) e^{g0-2} de.
  double trimming_bias(double b) const;
  /// Var of the trimmed estimator, (1/n) Var(DY/e 1{e >= b}); infinite at
  /// b = 0 when g0 <= 2.
  double estimator_variance(double b) const;
  /// mu2(0) / (2 n mu1(0)^2).
  double selector_target() const;
  /// Solution of b^s P[e <= b] = selector_target().
  double optimal_threshold(double s = 1.0) const;
  OutcomeLaw law_at_zero() const;
  StableParams stable_params() const;
};

/// Replication `replication` of the design; streams are derived from
/// (design.seed, replication).
Dataset generate(const SimulationDesign& design, std::uint64_t replication = 0);

/// True weights of a generated dataset.
Eigen::VectorXd oracle_weights(const Dataset& data);

/// Scale kappa with (n / n^{1/g})(theta_hat - theta0 - B) -> kappa * L, L
/// the law of stable_cf: kappa^g = (g-1)(a+ + a-)/(2-g).
double limit_scale(const StableParams& params);

/// Threshold of a trimming regime at sample size n, with a_n = n^{1/g0}:
/// none 0, light a_n^{-1}/log n, moderate t a_n^{-1}, heavy a_n^{-1} log n.
double regime_threshold(Regime regime, std::size_t n, double gamma0, double t = 1.0);

struct RegimeOptions {
  std::size_t replications = 1000;
  double t = 1.0;
  unsigned threads = 1;
  std::size_t reference_count = 100000;
  std::uint64_t reference_seed = 7;
  std::vector<double> cf_grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
};

struct RegimeReport {
  Regime regime = Regime::none;
  double gamma0 = 0.0;
  std::size_t n = 0;
  std::size_t replications = 0;
  double b_n = 0.0;
  double a_n = 0.0;
  double limit_scale = 0.0;
  std::vector<double> statistics;   // (n/a_n)(theta_hat - theta0 - B)
  std::vector<double> studentized;  // (theta_hat - theta0 - B)/(S/sqrt n)
  std::optional<double> ks_stable;
  std::optional<double> cf_distance;
  std::optional<double> ks_gaussian;         // studentized vs N(0,1)
  std::optional<double> ks_gaussian_fitted;  // statistics vs N(mean, sd)
};

/// Monte Carlo check of the Theorem 1 trichotomy on oracle weights.
RegimeReport regime_experiment(const SimulationDesign& design, Regime regime,
                               const RegimeOptions& options);

/// 1 + [(1/k) sum_{i<=k} log(e_(k+1)/e_(i))]^{-1} over ascending order
/// statistics.
double tail_index_hill(const Eigen::VectorXd& weights, std::size_t k);

struct Lemma1Point {
  double x = 0.0;
  double ratio = 0.0;   // x P[DY/e > x] / P[e < 1/x]
  double target = 0.0;  // (g0-1)/g0 * a+(0)
  double standard_error = 0.0;
};

/// Tail of DY/e against the weight tail on one sample of size design.n.
std::vector<Lemma1Point> lemma1_check(const SimulationDesign& design,
                                      const std::vector<double>& xs);

struct Lemma2Point {
  double b = 0.0;
  double analytic_bias = 0.0;
  double mc_bias = 0.0;
  double mc_bias_se = 0.0;
  double analytic_variance = 0.0;
  double mc_variance = 0.0;
  double mc_variance_se = 0.0;
  double rate_product = 0.0;  // n b P[e <= b]
  double bias_variance_ratio = 0.0;  // B^2 / V, analytic
};

struct Lemma2Report {
  std::vector<Lemma2Point> points;
  /// Log-log slope of B^2/V against n b P[e <= b].
  double slope = 0.0;
};

Lemma2Report lemma2_check(const SimulationDesign& design, const std::vector<double>& b_grid,
                          std::size_t replications, unsigned threads = 1);

struct SelectorReport {
  double b_dagger = 0.0;
  std::vector<double> ratios;  // b_hat / b_dagger
  double fraction_within = 0.0;
};

/// b_hat from select_threshold with the true mu-ratio, against the analytic
/// b_dagger; fraction of ratios inside [lo, hi].
SelectorReport selector_consistency(const SimulationDesign& design, double s,
                                    std::size_t replications, double lo = 0.9,
                                    double hi = 1.1, unsigned threads = 1);

struct BiasOracleReport {
  std::vector<double> relative_errors;  // |B_hat - B| / |B| at the selected b
  std::vector<double> thresholds;
  double fraction_within = 0.0;
  double tolerance = 0.15;
  std::size_t failed = 0;
};

/// Algorithm 1 against the analytic bias at the pipeline's threshold.
BiasOracleReport bias_oracle(const SimulationDesign& design, const PipelineConfig& pipeline,
                             std::size_t replications, double tolerance = 0.15,
                             unsigned threads = 1);

struct CoverageOptions {
  std::size_t replications = 300;
  SubsamplingConfig subsampling;
  unsigned threads = 1;
};

struct CoverageReport {
  std::size_t replications = 0;
  std::size_t covered = 0;
  std::size_t failed = 0;  // replications without an interval
  double coverage = 0.0;
  double mc_se = 0.0;
  double level = 0.95;
  double mean_width = 0.0;
  double mean_b = 0.0;
};

/// Fraction of subsampling intervals that cover design.theta0(). Oracle
/// designs reuse the true weights; logit designs refit on every subsample.
CoverageReport coverage_experiment(const SimulationDesign& design, const PipelineConfig& pipeline,
                                   const CoverageOptions& options);

}  // namespace ipw
