#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ipw/dataset.hpp"
#include "ipw/orientation.hpp"

namespace ipw {

enum class FitTarget { y, y_squared };

/// Uniform-kernel local polynomial fit of the outcome (or its square) on the
/// oriented weight over the window [0, h].
struct LocalPolyFit {
  Eigen::VectorXd coefficients;  // beta_0 .. beta_p, in powers of the oriented weight
  int order = 1;                 // order actually fitted
  int requested_order = 1;
  double bandwidth = 0.0;
  std::size_t n_local = 0;
  Orientation orientation = Orientation::lower_tail;
  std::vector<std::string> warnings;

  double evaluate(double oriented_weight) const;
  double intercept() const { return coefficients[0]; }
};

LocalPolyFit local_poly_fit(const Dataset& data, const Eigen::VectorXd& weights, double h,
                            int p, FitTarget target, Orientation orientation);

/// Estimated trimming bias from the fitted conditional mean.
///
/// lower_tail: -(1/n) sum_i m(e_i) 1{e_i < b}
/// upper_tail: +(1/n) sum_i e_i m(1 - e_i) 1{1 - e_i < b}
///
/// The upper-tail form is the comparison-group term removed from the ATT
/// numerator; the caller rescales by n/n1. Requires b <= fit bandwidth.
double estimate_bias(const LocalPolyFit& fit, const Eigen::VectorXd& weights, double b,
                     std::size_t n, Orientation orientation);

struct BandwidthChoice {
  double h = 1.0;
  bool capped = false;
  std::vector<std::string> warnings;
};

/// Smallest h in (0, 1] with n h^{2p+3} F(h) >= c, F the empirical CDF of
/// the oriented weights. Caps at 1 (with a warning) when unattainable.
BandwidthChoice select_bandwidth(const Eigen::VectorXd& weights, int p, double c,
                                 Orientation orientation);

/// n b^{2p+3} F(b); the bias correction is only first-order negligible when
/// this is small.
double rate_statistic(const Eigen::VectorXd& weights, double b, int p, Orientation orientation);

}  // namespace ipw
