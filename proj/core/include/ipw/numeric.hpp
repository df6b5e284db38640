#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace ipw {

/// Right-continuous empirical distribution function F(x) = #{v <= x} / n.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::span<const double> values);

  double operator()(double x) const;
  std::size_t count_at_most(double x) const;
  std::size_t count_below(double x) const;
  std::size_t size() const { return sorted_.size(); }
  /// Sorted support; these are the only jump points of F.
  const std::vector<double>& support() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct CrossingResult {
  double value = 0.0;
  bool attained = true;  // false when g(hi) < target
};

/// Smallest x in [lo, hi] with g(x) >= target, for g nondecreasing and
/// right-continuous with jumps only at `jumps` (sorted). Bisection brackets
/// the crossing to `tol`; a jump inside the final bracket is returned
/// exactly so the infimum is attained at data points.
CrossingResult smallest_crossing(const std::function<double(double)>& g,
                                 double target, double lo, double hi,
                                 double tol, std::span<const double> jumps);

/// Inverse of the empirical CDF (type 1): smallest x with F(x) >= p.
/// `sorted` must be ascending and nonempty.
double quantile_type1(std::span<const double> sorted, double p);

double mean(std::span<const double> v);
/// Sample standard deviation about `center` with an (n-1) divisor.
double sd_about(std::span<const double> v, double center);

double normal_cdf(double x);
double normal_pdf(double x);

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
double ks_distance(std::span<const double> sample,
                   const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Deterministic RNG stream for replication `index` under a master seed.
/// Streams are independent of evaluation order, so parallel runs reduce to
/// the same result as sequential ones.
std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t index);

/// Uniform draw on the open interval (0, 1).
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means
/// hardware concurrency). Work is handed out by index; the first exception
/// by index is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace ipw
