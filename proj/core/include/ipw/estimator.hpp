#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "ipw/dataset.hpp"
#include "ipw/orientation.hpp"
#include "ipw/propensity.hpp"
#include "ipw/trimming.hpp"

namespace ipw {

enum class Estimand {
  mean,  // E[DY / e(X)]
  att,   // average treatment effect on the treated
};

Estimand parse_estimand(const std::string& s);
const char* to_string(Estimand e);

inline Orientation orientation_for(Estimand e) {
  return e == Estimand::mean ? Orientation::lower_tail : Orientation::upper_tail;
}

struct BiasConfig {
  bool enabled = true;
  int order = 1;                   // local polynomial order p
  double bandwidth_c = 1.0;        // constant of the bandwidth equation
  std::optional<double> bandwidth; // overrides the bandwidth rule
  int pilot_order = 0;             // order of the boundary-moment fits feeding the selector
};

struct PipelineConfig {
  Estimand estimand = Estimand::mean;
  TrimmingSpec trimming;
  BiasConfig bias;
};

struct IpwEstimate {
  Estimand estimand = Estimand::mean;
  double theta_hat = 0.0;
  double b = 0.0;
  double bias_hat = 0.0;
  double theta_bc = 0.0;  // theta_hat - bias_hat
  double s_n = 0.0;
  std::size_t n_trimmed = 0;
  std::size_t n = 0;
  std::size_t n1 = 0;
  /// Local-fit bandwidth; NaN when neither bias correction nor automatic
  /// trimming needed one.
  double bandwidth = 0.0;
  int fitted_order = -1;       // -1 when no local fit was run
  double mu1 = 0.0;            // automatic trimming only
  double mu2 = 0.0;
  double rate_statistic = 0.0; // n b^{2p+3} F(b)
  std::vector<std::string> warnings;
};

/// (1/n) sum d_i y_i / e_i 1{e_i >= b}.
double ipw_mean(const Dataset& data, const Eigen::VectorXd& weights, double b);

/// (1/n1) sum [d_i y_i - e_i/(1-e_i) (1-d_i) y_i 1{1-e_i >= b}].
double att(const Dataset& data, const Eigen::VectorXd& weights, double b);

/// Per-observation summands whose sample mean is the estimate. For the ATT
/// they carry the factor n/n1.
Eigen::VectorXd ipw_terms(Estimand estimand, const Dataset& data, const Eigen::VectorXd& weights,
                          double b);

/// Square root of the (n-1)-divisor variance of the summands about theta_hat.
double self_normalizer(Estimand estimand, const Dataset& data, const Eigen::VectorXd& weights,
                       double b, double theta_hat);

/// Units removed by trimming: treated with e < b (mean) or comparison units
/// with 1 - e < b (ATT).
std::size_t trimmed_count(Estimand estimand, const Dataset& data, const Eigen::VectorXd& weights,
                          double b);

/// Threshold selection, point estimate, bias estimate and self-normaliser
/// for the given weights.
IpwEstimate estimate(const Dataset& data, const Eigen::VectorXd& weights,
                     const PipelineConfig& config);

IpwEstimate estimate(const Dataset& data, const PropensityModel& model,
                     const PipelineConfig& config);

}  // namespace ipw
