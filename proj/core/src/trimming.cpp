#include "ipw/trimming.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "ipw/biascorrect.hpp"
#include "ipw/error.hpp"
#include "ipw/numeric.hpp"

namespace ipw {

TrimmingSpec TrimmingSpec::none(Orientation o) {
  TrimmingSpec t;
  t.mode = TrimMode::none;
  t.orientation = o;
  return t;
}

TrimmingSpec TrimmingSpec::fixed(double b, Orientation o) {
  TrimmingSpec t;
  t.mode = TrimMode::fixed;
  t.b = b;
  t.orientation = o;
  return t;
}

TrimmingSpec TrimmingSpec::automatic(double s, Orientation o) {
  TrimmingSpec t;
  t.mode = TrimMode::automatic;
  t.s = s;
  t.orientation = o;
  return t;
}

TrimmingSpec TrimmingSpec::rate_rule(double coef, double rate, double log_power, Orientation o) {
  TrimmingSpec t;
  t.mode = TrimMode::rate;
  t.coef = coef;
  t.rate = rate;
  t.log_power = log_power;
  t.orientation = o;
  return t;
}

void TrimmingSpec::validate() const {
  if (mode == TrimMode::fixed && !(b >= 0.0 && b < 1.0))
    throw ConfigError("fixed trimming threshold must lie in [0, 1)");
  if (mode == TrimMode::automatic && !(s > 0.0))
    throw ConfigError("trimming exponent s must be positive");
  if (mode == TrimMode::rate && !(coef > 0.0 && rate > 0.0))
    throw ConfigError("rate trimming rule needs positive coefficient and rate");
}

double TrimmingSpec::rate_threshold(std::size_t n) const {
  const auto nn = static_cast<double>(n);
  const double b_n = coef * std::pow(nn, -rate) * std::pow(std::log(nn), log_power);
  return std::min(b_n, 1.0 - 1e-12);
}

TrimmingSpec parse_trimming(const std::string& text, Orientation orientation) {
  TrimmingSpec spec;
  if (text == "none") {
    spec = TrimmingSpec::none(orientation);
  } else if (text.rfind("fixed=", 0) == 0) {
    try {
      spec = TrimmingSpec::fixed(std::stod(text.substr(6)), orientation);
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse trimming threshold in '" + text + "'");
    }
  } else if (text == "auto") {
    spec = TrimmingSpec::automatic(1.0, orientation);
  } else if (text.rfind("auto:s=", 0) == 0) {
    try {
      spec = TrimmingSpec::automatic(std::stod(text.substr(7)), orientation);
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse trimming exponent in '" + text + "'");
    }
  } else {
    throw ConfigError("unknown trimming spec '" + text +
                      "' (expected none, fixed=<b>, auto or auto:s=<s>)");
  }
  spec.validate();
  return spec;
}

std::string to_string(const TrimmingSpec& spec) {
  std::ostringstream os;
  switch (spec.mode) {
    case TrimMode::none: os << "none"; break;
    case TrimMode::fixed: os << "fixed=" << spec.b; break;
    case TrimMode::automatic: os << "auto:s=" << spec.s; break;
    case TrimMode::rate:
      os << "rate:" << spec.coef << "*n^-" << spec.rate << "*log(n)^" << spec.log_power;
      break;
  }
  return os.str();
}

double threshold_target(std::size_t n, double mu1, double mu2) {
  return mu2 / (2.0 * static_cast<double>(n) * mu1 * mu1);
}

double select_threshold(const Eigen::VectorXd& weights, double s, double mu1, double mu2,
                        Orientation orientation) {
  if (weights.size() == 0) throw ContractError("no weights supplied");
  if (!(s > 0.0)) throw ContractError("trimming exponent s must be positive");
  if (mu1 == 0.0 || !std::isfinite(mu1))
    throw ThresholdError("boundary mean mu1 is zero or not finite; the selector is undefined");
  if (!(mu2 > 0.0) || !std::isfinite(mu2))
    throw ThresholdError("boundary second moment mu2 must be positive");

  const Eigen::VectorXd w = oriented(weights, orientation);
  const EmpiricalCdf cdf({w.data(), static_cast<std::size_t>(w.size())});
  const double target = threshold_target(static_cast<std::size_t>(w.size()), mu1, mu2);
  const auto g = [&](double b) { return std::pow(b, s) * cdf(b); };
  const auto root = smallest_crossing(g, target, 0.0, 1.0, 1e-12, cdf.support());
  if (!root.attained)
    throw ThresholdError("threshold equation has no solution in [0,1] (required trimming exceeds "
                         "the data); use a fixed threshold instead");
  return root.value;
}

MuEstimate mu_ratio(const Dataset& data, const Eigen::VectorXd& weights, double h, int p,
                    Orientation orientation) {
  const Eigen::VectorXd w = oriented(weights, orientation);
  const double group = local_group(orientation);
  std::set<double> distinct;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (data.d()[i] == group && w[i] <= h) distinct.insert(w[i]);
  if (distinct.size() < static_cast<std::size_t>(p + 2))
    throw BandwidthError("boundary moment estimate of order " + std::to_string(p) + " needs " +
                         std::to_string(p + 2) + " distinct weights in [0, " +
                         std::to_string(h) + "], found " + std::to_string(distinct.size()) +
                         "; use a larger bandwidth");

  const auto fy = local_poly_fit(data, weights, h, p, FitTarget::y, orientation);
  const auto fy2 = local_poly_fit(data, weights, h, p, FitTarget::y_squared, orientation);
  MuEstimate out;
  out.mu1 = fy.intercept();
  out.mu2 = std::max(fy2.intercept(), out.mu1 * out.mu1 + 1e-12);
  out.n_local = fy.n_local;
  return out;
}

}  // namespace ipw
