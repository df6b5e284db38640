#pragma once

#include <Eigen/Core>

#include <string>

#include "ipw/dataset.hpp"
#include "ipw/orientation.hpp"

namespace ipw {

enum class TrimMode {
  none,
  fixed,
  /// Empirical MSE-balance selector b^s F(b) = mu2 / (2 n mu1^2).
  automatic,
  /// Deterministic rate rule b_n = coef * n^{-rate} * (log n)^{log_power};
  /// used to realise the asymptotic trimming regimes in simulations.
  rate,
};

struct TrimmingSpec {
  TrimMode mode = TrimMode::none;
  double b = 0.0;      // fixed mode
  double s = 1.0;      // automatic mode exponent
  double coef = 1.0;   // rate mode
  double rate = 0.5;
  double log_power = 0.0;
  Orientation orientation = Orientation::lower_tail;

  static TrimmingSpec none(Orientation o = Orientation::lower_tail);
  static TrimmingSpec fixed(double b, Orientation o = Orientation::lower_tail);
  static TrimmingSpec automatic(double s = 1.0, Orientation o = Orientation::lower_tail);
  static TrimmingSpec rate_rule(double coef, double rate, double log_power,
                                Orientation o = Orientation::lower_tail);

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  /// Threshold of the rate rule at sample size n.
  double rate_threshold(std::size_t n) const;
};

/// Parses "none", "fixed=<b>", "auto" or "auto:s=<s>".
TrimmingSpec parse_trimming(const std::string& text, Orientation orientation);
std::string to_string(const TrimmingSpec& spec);

/// Smallest b in [0,1] with b^s F(b) >= mu2 / (2 n mu1^2), F the empirical
/// CDF of the oriented weights. Throws ThresholdError when even b = 1 falls
/// short.
double select_threshold(const Eigen::VectorXd& weights, double s, double mu1, double mu2,
                        Orientation orientation = Orientation::lower_tail);

/// Right-hand side mu2 / (2 n mu1^2) of the selector equation.
double threshold_target(std::size_t n, double mu1, double mu2);

struct MuEstimate {
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::size_t n_local = 0;
};

/// Boundary values of E[Y | e, group] and E[Y^2 | e, group] from the
/// intercepts of order-p local fits on [0, h]. mu2 is floored at
/// mu1^2 + 1e-12.
MuEstimate mu_ratio(const Dataset& data, const Eigen::VectorXd& weights, double h, int p,
                    Orientation orientation = Orientation::lower_tail);

}  // namespace ipw
