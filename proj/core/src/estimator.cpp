#include "ipw/estimator.hpp"

#include <cmath>
#include <limits>

#include "ipw/biascorrect.hpp"
#include "ipw/error.hpp"
#include "ipw/numeric.hpp"

namespace ipw {

Estimand parse_estimand(const std::string& s) {
  if (s == "mean") return Estimand::mean;
  if (s == "att") return Estimand::att;
  throw ConfigError("unknown estimand '" + s + "' (expected mean or att)");
}

const char* to_string(Estimand e) { return e == Estimand::mean ? "mean" : "att"; }

namespace {

void check_inputs(const Dataset& data, const Eigen::VectorXd& weights, double b) {
  if (static_cast<std::size_t>(weights.size()) != data.size())
    throw ContractError("weights have length " + std::to_string(weights.size()) +
                        ", data has " + std::to_string(data.size()) + " rows");
  if (!(b >= 0.0 && b < 1.0)) throw ContractError("trimming threshold must lie in [0, 1)");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0 && weights[i] <= 1.0))
      throw ContractError("weight " + std::to_string(i + 1) + " is outside (0, 1]");
}

std::size_t treated(const Dataset& data) {
  const auto n1 = data.treated_count();
  if (n1 == 0) throw EstimationError("no treated units; the ATT is undefined");
  return n1;
}

}  // namespace

Eigen::VectorXd ipw_terms(Estimand estimand, const Dataset& data, const Eigen::VectorXd& weights,
                          double b) {
  check_inputs(data, weights, b);
  const auto& y = data.y();
  const auto& d = data.d();
  Eigen::VectorXd t(y.size());
  if (estimand == Estimand::mean) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      t[i] = (d[i] == 1.0 && weights[i] >= b) ? y[i] / weights[i] : 0.0;
    return t;
  }
  const double scale = static_cast<double>(data.size()) / static_cast<double>(treated(data));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = weights[i];
    if (d[i] == 1.0) {
      t[i] = y[i];
    } else if (1.0 - e >= b) {
      if (e >= 1.0) throw ContractError("comparison unit with weight 1 cannot be reweighted");
      t[i] = -e / (1.0 - e) * y[i];
    } else {
      t[i] = 0.0;
    }
    t[i] *= scale;
  }
  return t;
}

double ipw_mean(const Dataset& data, const Eigen::VectorXd& weights, double b) {
  return ipw_terms(Estimand::mean, data, weights, b).mean();
}

double att(const Dataset& data, const Eigen::VectorXd& weights, double b) {
  return ipw_terms(Estimand::att, data, weights, b).mean();
}

double self_normalizer(Estimand estimand, const Dataset& data, const Eigen::VectorXd& weights,
                       double b, double theta_hat) {
  if (data.size() < 2) throw ContractError("self-normaliser needs n >= 2");
  const Eigen::VectorXd t = ipw_terms(estimand, data, weights, b);
  return sd_about({t.data(), static_cast<std::size_t>(t.size())}, theta_hat);
}

std::size_t trimmed_count(Estimand estimand, const Dataset& data, const Eigen::VectorXd& weights,
                          double b) {
  check_inputs(data, weights, b);
  const auto o = orientation_for(estimand);
  const Eigen::VectorXd w = oriented(weights, o);
  const double group = local_group(o);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (data.d()[i] == group && w[i] < b) ++count;
  return count;
}

IpwEstimate estimate(const Dataset& data, const Eigen::VectorXd& weights,
                     const PipelineConfig& config) {
  config.trimming.validate();
  const auto& bias = config.bias;
  if (bias.order < 0 || bias.order > 3) throw ConfigError("local polynomial order must be in {0,1,2,3}");
  if (bias.pilot_order < 0 || bias.pilot_order > 3)
    throw ConfigError("pilot order must be in {0,1,2,3}");

  const auto o = orientation_for(config.estimand);
  const auto mode = config.trimming.mode;
  IpwEstimate est;
  est.estimand = config.estimand;
  est.n = data.size();
  est.n1 = data.treated_count();
  est.bandwidth = std::numeric_limits<double>::quiet_NaN();

  const bool need_bandwidth = bias.enabled || mode == TrimMode::automatic;
  if (need_bandwidth) {
    if (bias.bandwidth) {
      if (!(*bias.bandwidth > 0.0 && *bias.bandwidth <= 1.0))
        throw ConfigError("bandwidth must lie in (0, 1]");
      est.bandwidth = *bias.bandwidth;
    } else {
      auto choice = select_bandwidth(weights, bias.order, bias.bandwidth_c, o);
      est.bandwidth = choice.h;
      for (auto& w : choice.warnings) est.warnings.push_back(std::move(w));
    }
  }

  switch (mode) {
    case TrimMode::none: est.b = 0.0; break;
    case TrimMode::fixed: est.b = config.trimming.b; break;
    case TrimMode::rate: est.b = config.trimming.rate_threshold(data.size()); break;
    case TrimMode::automatic: {
      const auto mu = mu_ratio(data, weights, est.bandwidth, bias.pilot_order, o);
      est.mu1 = mu.mu1;
      est.mu2 = mu.mu2;
      est.b = select_threshold(weights, config.trimming.s, mu.mu1, mu.mu2, o);
      break;
    }
  }

  const Eigen::VectorXd terms = ipw_terms(config.estimand, data, weights, est.b);
  est.theta_hat = terms.mean();
  est.n_trimmed = trimmed_count(config.estimand, data, weights, est.b);
  est.s_n = data.size() >= 2
                ? sd_about({terms.data(), static_cast<std::size_t>(terms.size())}, est.theta_hat)
                : 0.0;

  if (bias.enabled && est.b > 0.0) {
    const Eigen::VectorXd w = oriented(weights, o);
    const bool any_trimmed = (w.array() < est.b).any();
    if (any_trimmed) {
      double window = est.bandwidth;
      if (est.b > window) {
        est.warnings.push_back("trimming threshold exceeds the bandwidth; local fit window widened to b");
        window = est.b;
      }
      const auto lp = local_poly_fit(data, weights, window, bias.order, FitTarget::y, o);
      for (const auto& w_ : lp.warnings) est.warnings.push_back(w_);
      est.fitted_order = lp.order;
      double b_hat = estimate_bias(lp, weights, est.b, data.size(), o);
      if (config.estimand == Estimand::att)
        b_hat *= static_cast<double>(data.size()) / static_cast<double>(treated(data));
      est.bias_hat = b_hat;
    }
    est.rate_statistic = rate_statistic(weights, est.b, bias.order, o);
    if (est.rate_statistic > 1.0)
      est.warnings.push_back("n b^(2p+3) F(b) = " + std::to_string(est.rate_statistic) +
                             " exceeds 1; trimming may be too heavy for valid bias correction");
  }
  est.theta_bc = est.theta_hat - est.bias_hat;
  return est;
}

IpwEstimate estimate(const Dataset& data, const PropensityModel& model,
                     const PipelineConfig& config) {
  return estimate(data, predict(model, data), config);
}

}  // namespace ipw
