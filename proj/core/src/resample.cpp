#include "ipw/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"

namespace ipw {

WeightSource WeightSource::fitted(ModelKind kind, Eigen::VectorXd full_sample_weights) {
  WeightSource w;
  w.model = kind;
  w.weights = std::move(full_sample_weights);
  return w;
}

WeightSource WeightSource::fixed(Eigen::VectorXd weights) {
  WeightSource w;
  w.weights = std::move(weights);
  return w;
}

void SubsamplingConfig::validate(std::size_t n) const {
  const auto mm = m == 0 ? default_subsample_size(n) : m;
  if (mm < 2 || mm >= n)
    throw ContractError("subsample size m = " + std::to_string(mm) + " must satisfy 2 <= m < n = " +
                        std::to_string(n));
  if (replications < 100) throw ConfigError("at least 100 subsampling replications are required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(max_failure_rate >= 0.0 && max_failure_rate < 1.0))
    throw ConfigError("failure ceiling must lie in [0, 1)");
}

std::size_t default_subsample_size(std::size_t n) {
  if (n < 3) throw ContractError("default subsample size needs n >= 3");
  const auto nn = static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(nn / std::log(nn)));
}

std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t m,
                                                  std::mt19937_64& rng) {
  if (m > n) throw ContractError("cannot draw more indices than rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  return idx;
}

Interval confidence_interval(double theta_bc, double s_n, std::size_t n, double q_low,
                             double q_high) {
  if (q_low > q_high) throw ContractError("lower quantile exceeds upper quantile");
  if (!(s_n >= 0.0)) throw ContractError("self-normaliser must be nonnegative");
  if (n < 2) throw ContractError("confidence interval needs n >= 2");
  const double se = s_n / std::sqrt(static_cast<double>(n));
  return {theta_bc - q_high * se, theta_bc - q_low * se};
}

SubsamplingResult subsample_statistics(const Dataset& data, const WeightSource& weights,
                                       const PipelineConfig& pipeline, const IpwEstimate& full,
                                       const SubsamplingConfig& config) {
  const std::size_t n = data.size();
  config.validate(n);
  if (static_cast<std::size_t>(weights.weights.size()) != n)
    throw ContractError("full-sample weights do not match the data");
  const std::size_t m = config.m == 0 ? default_subsample_size(n) : config.m;
  const bool refit = weights.model.has_value() && config.refit_propensity;

  PipelineConfig sub = pipeline;
  if (!config.reselect_threshold) {
    sub.trimming = TrimmingSpec::fixed(full.b, orientation_for(pipeline.estimand));
    if (std::isfinite(full.bandwidth)) sub.bias.bandwidth = full.bandwidth;
  }

  const double sqrt_m = std::sqrt(static_cast<double>(m));
  std::vector<double> stat(config.replications, std::numeric_limits<double>::quiet_NaN());
  parallel_for(config.replications, config.threads, [&](std::size_t r) {
    auto rng = rng_stream(config.seed, r);
    const auto idx = draw_without_replacement(n, m, rng);
    try {
      const Dataset part = data.subset(idx);
      Eigen::VectorXd w(static_cast<Eigen::Index>(m));
      if (refit) {
        w = predict(fit(part, *weights.model, weights.fit_options), part);
      } else {
        for (std::size_t i = 0; i < m; ++i)
          w[static_cast<Eigen::Index>(i)] = weights.weights[static_cast<Eigen::Index>(idx[i])];
      }
      const auto est = estimate(part, w, sub);
      if (!(est.s_n > 0.0) || !std::isfinite(est.theta_bc)) return;
      const double t = (est.theta_bc - full.theta_bc) / (est.s_n / sqrt_m);
      if (std::isfinite(t)) stat[r] = t;
    } catch (const ContractError&) {
      throw;
    } catch (const Error&) {
      // counted as a failed replication
    }
  });

  SubsamplingResult out;
  out.replications = config.replications;
  out.m = m;
  out.level = 1.0 - config.alpha;
  for (double t : stat) {
    if (std::isnan(t))
      ++out.failed;
    else
      out.statistics.push_back(t);
  }
  const double rate = static_cast<double>(out.failed) / static_cast<double>(config.replications);
  if (rate > config.max_failure_rate || out.statistics.size() < 2)
    throw ResamplingError(std::to_string(out.failed) + " of " +
                          std::to_string(config.replications) +
                          " subsamples failed (ceiling " +
                          std::to_string(std::lround(100.0 * config.max_failure_rate)) +
                          "%); subsample size m = " +
                          std::to_string(m) + " is too small for the model");

  std::vector<double> sorted = out.statistics;
  std::sort(sorted.begin(), sorted.end());
  out.q_low = quantile_type1(sorted, config.alpha / 2.0);
  out.q_high = quantile_type1(sorted, 1.0 - config.alpha / 2.0);
  out.ci = confidence_interval(full.theta_bc, full.s_n, n, out.q_low, out.q_high);
  return out;
}

}  // namespace ipw
