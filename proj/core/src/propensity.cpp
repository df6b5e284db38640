#include "ipw/propensity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"

namespace ipw {

ModelKind parse_model_kind(const std::string& s) {
  if (s == "logit") return ModelKind::logit;
  if (s == "probit") return ModelKind::probit;
  throw ConfigError("unknown model kind '" + s + "' (expected logit or probit)");
}

const char* to_string(ModelKind kind) {
  return kind == ModelKind::logit ? "logit" : "probit";
}

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double log_normal_cdf(double t) {
  if (t > -30.0) return std::log(normal_cdf(t));
  // Asymptotic expansion of log Phi in the far left tail.
  const double t2 = t * t;
  return -0.5 * t2 - std::log(-t) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

/// phi(t) / Phi(t), stable in the left tail.
double mills(double t) {
  if (t > -30.0) return normal_pdf(t) / normal_cdf(t);
  const double t2 = t * t;
  return -t / (1.0 - 1.0 / t2 + 3.0 / (t2 * t2));
}

struct Standardised {
  Eigen::MatrixXd z;          // intercept + centred/scaled covariates
  Eigen::VectorXd centre;     // per covariate
  Eigen::VectorXd scale;      // per covariate
};

Standardised standardise(const Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto k = static_cast<Eigen::Index>(data.covariate_count());
  Standardised s;
  s.z.resize(n, k + 1);
  s.centre.resize(k);
  s.scale.resize(k);
  s.z.col(0).setOnes();
  std::vector<std::string> constant;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto col = data.x().col(j);
    const double m = col.mean();
    const double sd = std::sqrt((col.array() - m).square().mean());
    if (!(sd > 0.0)) constant.push_back(data.covariate_names()[static_cast<std::size_t>(j)]);
    s.centre[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
    s.z.col(j + 1) = (col.array() - m) / s.scale[j];
  }
  if (!constant.empty()) {
    std::string names;
    for (const auto& c : constant) names += (names.empty() ? "" : ", ") + c;
    throw EstimationError("design is rank deficient: constant (collinear with intercept) columns: " +
                          names);
  }
  return s;
}

void check_rank(const Standardised& s, const Dataset& data) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.z);
  qr.setThreshold(1e-10);
  const auto p = s.z.cols();
  const auto rank = qr.rank();
  if (rank == p) return;
  // null vectors of Z are [-R11^{-1} R12; I] in pivoted order; every column
  // with a nonzero entry takes part in a dependency
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(rank, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd null_top = r.leftCols(rank).triangularView<Eigen::Upper>().solve(
      r.rightCols(p - rank));
  const auto perm = qr.colsPermutation().indices();
  std::vector<bool> involved(static_cast<std::size_t>(p), false);
  for (Eigen::Index c = 0; c < p - rank; ++c) {
    involved[static_cast<std::size_t>(perm[rank + c])] = true;
    for (Eigen::Index j = 0; j < rank; ++j)
      if (std::abs(null_top(j, c)) > 1e-8) involved[static_cast<std::size_t>(perm[j])] = true;
  }
  std::string names;
  for (Eigen::Index c = 0; c < p; ++c) {
    if (!involved[static_cast<std::size_t>(c)]) continue;
    const std::string nm =
        c == 0 ? std::string("(intercept)") : data.covariate_names()[static_cast<std::size_t>(c - 1)];
    names += (names.empty() ? "" : ", ") + nm;
  }
  throw EstimationError("design is rank deficient; collinear columns: " + names);
}

double loglik(ModelKind kind, const Eigen::VectorXd& eta, const Eigen::VectorXd& d) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (kind == ModelKind::logit) {
      ll += d[i] * eta[i] - softplus(eta[i]);
    } else {
      ll += d[i] > 0.5 ? log_normal_cdf(eta[i]) : log_normal_cdf(-eta[i]);
    }
  }
  return ll;
}

/// Per-row score multiplier r_i (score = Z' r) and information weight w_i.
void score_terms(ModelKind kind, const Eigen::VectorXd& eta, const Eigen::VectorXd& d,
                 Eigen::VectorXd& r, Eigen::VectorXd& w) {
  r.resize(eta.size());
  w.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (kind == ModelKind::logit) {
      const double p = link(ModelKind::logit, eta[i]);
      r[i] = d[i] - p;
      w[i] = p * (1.0 - p);
    } else {
      const double m1 = mills(eta[i]);    // phi/Phi
      const double m0 = mills(-eta[i]);   // phi/(1-Phi)
      r[i] = d[i] > 0.5 ? m1 : -m0;
      w[i] = m1 * m0;
    }
  }
}

struct NewtonState {
  Eigen::VectorXd beta, eta;
  double ll = 0.0;
};

enum class StepOutcome { moved, stalled, singular };

// One Newton step with step-halving on likelihood decrease; `step_norm`
// receives the max-norm of the full Newton step.
StepOutcome newton_step(ModelKind kind, const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                        const Eigen::VectorXd& grad, const Eigen::VectorXd& w, int max_halvings,
                        NewtonState& state, double& step_norm) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(z.transpose() * w.asDiagonal() * z);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return StepOutcome::singular;
  const Eigen::VectorXd step = ldlt.solve(grad);
  step_norm = step.lpNorm<Eigen::Infinity>();
  double t = 1.0;
  for (int h = 0; h <= max_halvings; ++h) {
    Eigen::VectorXd beta = state.beta + t * step;
    Eigen::VectorXd eta = z * beta;
    const double ll = loglik(kind, eta, d);
    if (std::isfinite(ll) && ll >= state.ll) {
      state = {std::move(beta), std::move(eta), ll};
      return StepOutcome::moved;
    }
    t *= 0.5;
  }
  return StepOutcome::stalled;  // no ascent direction left at machine precision
}

// Continues Newton from a stopping point with weights past the floor: a
// finite MLE settles (negligible steps), separation keeps the coefficients
// moving off to infinity.
bool coefficients_diverge(ModelKind kind, const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                          NewtonState state, int max_halvings) {
  Eigen::VectorXd r, w;
  for (int k = 0; k < 50; ++k) {
    score_terms(kind, state.eta, d, r, w);
    double step_norm = 0.0;
    switch (newton_step(kind, z, d, z.transpose() * r, w, max_halvings, state, step_norm)) {
      case StepOutcome::singular: return true;
      case StepOutcome::stalled: return step_norm > 1.0;
      case StepOutcome::moved:
        if (step_norm <= 1e-6) return false;
        break;
    }
  }
  return true;
}

/// Maps standardised-scale coefficients (or influence vectors) back to the
/// original covariate scale.
Eigen::MatrixXd back_transform(const Standardised& s) {
  const auto p = s.z.cols();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
  t(0, 0) = 1.0;
  for (Eigen::Index j = 1; j < p; ++j) {
    t(j, j) = 1.0 / s.scale[j - 1];
    t(0, j) = -s.centre[j - 1] / s.scale[j - 1];
  }
  return t;
}

}  // namespace

double link(ModelKind kind, double index) {
  if (kind == ModelKind::logit) {
    if (index >= 0) return 1.0 / (1.0 + std::exp(-index));
    const double e = std::exp(index);
    return e / (1.0 + e);
  }
  return normal_cdf(index);
}

PropensityModel fit(const Dataset& data, ModelKind kind, const FitOptions& options) {
  const auto s = standardise(data);
  check_rank(s, data);
  const Eigen::VectorXd& d = data.d();
  const auto p = s.z.cols();

  NewtonState state{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(s.z.rows()), 0.0};
  state.ll = loglik(kind, state.eta, d);
  Eigen::VectorXd r, w, grad;

  PropensityModel model;
  model.kind = kind;
  int it = 0;
  for (;; ++it) {
    score_terms(kind, state.eta, d, r, w);
    grad = s.z.transpose() * r;
    model.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (model.gradient_norm <= options.tolerance) {
      model.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;
    double step_norm = 0.0;
    const auto outcome =
        newton_step(kind, s.z, d, grad, w, options.max_step_halvings, state, step_norm);
    if (outcome == StepOutcome::singular)
      throw EstimationError("information matrix is singular during " +
                            std::string(to_string(kind)) + " fit");
    if (outcome == StepOutcome::stalled) break;
  }
  model.iterations = it;
  model.log_likelihood = state.ll;

  bool extreme = false;
  for (Eigen::Index i = 0; i < state.eta.size(); ++i) {
    const double e = link(kind, state.eta[i]);
    if (e < kWeightFloor || e > 1.0 - kWeightFloor) extreme = true;
  }
  // Weights past the floor also occur at a finite MLE; separation needs the
  // coefficients to be diverging as well.
  if (extreme && coefficients_diverge(kind, s.z, d, state, options.max_step_halvings))
    throw SeparationError(std::string(to_string(kind)) +
                          " fit drove fitted weights to 0 or 1 with diverging coefficients; "
                          "treatment appears separated by the covariates");

  model.coefficients = back_transform(s) * state.beta;
  return model;
}

double predict(const PropensityModel& model, std::span<const double> x) {
  if (x.size() != model.covariate_count())
    throw ContractError("covariate vector has length " + std::to_string(x.size()) +
                        ", model expects " + std::to_string(model.covariate_count()));
  double index = model.coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j)
    index += model.coefficients[static_cast<Eigen::Index>(j + 1)] * x[j];
  return std::clamp(link(model.kind, index), kWeightFloor, 1.0 - kWeightFloor);
}

Eigen::VectorXd predict(const PropensityModel& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.covariate_count())
    throw ContractError("covariate matrix has " + std::to_string(x.cols()) +
                        " columns, model expects " + std::to_string(model.covariate_count()));
  const Eigen::VectorXd index =
      (x * model.coefficients.tail(x.cols())).array() + model.coefficients[0];
  Eigen::VectorXd e(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i)
    e[i] = std::clamp(link(model.kind, index[i]), kWeightFloor, 1.0 - kWeightFloor);
  return e;
}

Eigen::VectorXd predict(const PropensityModel& model, const Dataset& data) {
  return predict(model, data.x());
}

namespace {
Eigen::VectorXd linear_index(const PropensityModel& model, const Dataset& data) {
  if (data.covariate_count() != model.covariate_count())
    throw ContractError("dataset covariate dimension does not match the model");
  return (data.x() * model.coefficients.tail(data.x().cols())).array() + model.coefficients[0];
}
}  // namespace

double log_likelihood(const PropensityModel& model, const Dataset& data) {
  return loglik(model.kind, linear_index(model, data), data.d());
}

Eigen::VectorXd score(const PropensityModel& model, const Dataset& data) {
  Eigen::VectorXd r, w;
  score_terms(model.kind, linear_index(model, data), data.d(), r, w);
  Eigen::VectorXd g(model.coefficients.size());
  g[0] = r.sum();
  g.tail(data.x().cols()) = data.x().transpose() * r;
  return g;
}

Eigen::MatrixXd influence(const PropensityModel& model, const Dataset& data) {
  const auto s = standardise(data);
  const Eigen::MatrixXd t = back_transform(s);
  // Coefficients on the standardised scale: beta = t^{-1} gamma.
  const Eigen::VectorXd eta = linear_index(model, data);
  Eigen::VectorXd r, w;
  score_terms(model.kind, eta, data.d(), r, w);
  const auto n = static_cast<double>(data.size());
  const Eigen::MatrixXd info = s.z.transpose() * w.asDiagonal() * s.z / n;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw EstimationError("information matrix is singular");
  // Row i: I^{-1} z_i r_i on the standardised scale, mapped back.
  const Eigen::MatrixXd h_std = lu.solve((s.z.array().colwise() * r.array()).matrix().transpose());
  return (t * h_std).transpose();
}

}  // namespace ipw
