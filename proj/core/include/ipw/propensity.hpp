#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include "ipw/dataset.hpp"

namespace ipw {

enum class ModelKind { logit, probit };

ModelKind parse_model_kind(const std::string& s);
const char* to_string(ModelKind kind);

inline constexpr double kWeightFloor = 1e-12;

struct FitOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  int max_step_halvings = 40;
};

/// Fitted e(X, pi). Coefficients are on the original covariate scale,
/// intercept first.
struct PropensityModel {
  ModelKind kind = ModelKind::logit;
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  /// Max-norm of the score on the internally standardised design at exit.
  double gradient_norm = 0.0;

  std::size_t covariate_count() const {
    return coefficients.size() == 0 ? 0 : static_cast<std::size_t>(coefficients.size() - 1);
  }
};

/// Maximum likelihood by Newton-Raphson (logit) or Fisher scoring (probit)
/// with step-halving. Columns are centred and scaled internally; the
/// convergence test is applied to the score of that standardised problem.
///
/// Throws EstimationError on a rank-deficient design (naming the columns)
/// and SeparationError when iterations fail to converge while fitted
/// weights leave [1e-12, 1 - 1e-12].
PropensityModel fit(const Dataset& data, ModelKind kind, const FitOptions& options = {});

/// Link applied to a linear index, unclamped.
double link(ModelKind kind, double index);

/// Predicted weight clamped to [1e-12, 1 - 1e-12].
double predict(const PropensityModel& model, std::span<const double> x);
Eigen::VectorXd predict(const PropensityModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd predict(const PropensityModel& model, const Dataset& data);

double log_likelihood(const PropensityModel& model, const Dataset& data);

/// Score of the log-likelihood on the original scale, summed over rows.
Eigen::VectorXd score(const PropensityModel& model, const Dataset& data);

/// Per-observation influence vectors I^{-1} x_i (d_i - e_i) w_i, where I is
/// the average Fisher information and w_i = 1 (logit) or
/// phi/(Phi(1-Phi)) (probit). Row i of the result belongs to observation i.
Eigen::MatrixXd influence(const PropensityModel& model, const Dataset& data);

}  // namespace ipw
