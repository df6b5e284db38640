#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ipw/dataset.hpp"
#include "ipw/estimator.hpp"
#include "ipw/propensity.hpp"

namespace ipw {

/// Where the weights of a subsample come from. With a model kind set and
/// refitting enabled, the propensity model is refit on every subsample;
/// otherwise the full-sample weights are reused (oracle or frozen mode).
struct WeightSource {
  std::optional<ModelKind> model;
  Eigen::VectorXd weights;  // full-sample weights, one per row
  FitOptions fit_options;

  static WeightSource fitted(ModelKind kind, Eigen::VectorXd full_sample_weights);
  static WeightSource fixed(Eigen::VectorXd weights);
};

struct SubsamplingConfig {
  std::size_t m = 0;  // 0 selects floor(n / log n)
  std::size_t replications = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 20240601;
  bool refit_propensity = true;
  bool reselect_threshold = true;
  unsigned threads = 1;
  double max_failure_rate = 0.1;

  void validate(std::size_t n) const;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct SubsamplingResult {
  std::vector<double> statistics;  // successful T* values in replication order
  std::size_t failed = 0;
  std::size_t replications = 0;
  std::size_t m = 0;
  double q_low = 0.0;
  double q_high = 0.0;
  Interval ci;
  double level = 0.95;
};

/// floor(n / log n).
std::size_t default_subsample_size(std::size_t n);

/// Algorithm 2: T* = (theta*_bc - theta_bc) / (S* / sqrt(m)) over B
/// subsamples drawn without replacement. Replications whose fit fails or
/// whose self-normaliser is zero are skipped and counted; more than
/// max_failure_rate * B failures raise ResamplingError. Replication r uses
/// rng_stream(seed, r), so results do not depend on the thread count.
SubsamplingResult subsample_statistics(const Dataset& data, const WeightSource& weights,
                                       const PipelineConfig& pipeline, const IpwEstimate& full,
                                       const SubsamplingConfig& config);

/// [theta_bc - q_high s_n / sqrt(n), theta_bc - q_low s_n / sqrt(n)].
Interval confidence_interval(double theta_bc, double s_n, std::size_t n, double q_low,
                             double q_high);

/// Draws m distinct indices from [0, n) by a partial Fisher-Yates shuffle.
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t m,
                                                  std::mt19937_64& rng);

}  // namespace ipw
