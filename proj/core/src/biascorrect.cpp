#include "ipw/biascorrect.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"

namespace ipw {

double LocalPolyFit::evaluate(double w) const {
  double v = 0.0;
  for (Eigen::Index j = coefficients.size() - 1; j >= 0; --j) v = v * w + coefficients[j];
  return v;
}

LocalPolyFit local_poly_fit(const Dataset& data, const Eigen::VectorXd& weights, double h,
                            int p, FitTarget target, Orientation orientation) {
  if (static_cast<std::size_t>(weights.size()) != data.size())
    throw ContractError("weights and data have different lengths");
  if (!(h > 0.0 && h <= 1.0)) throw ContractError("bandwidth must lie in (0, 1]");
  if (p < 0 || p > 3) throw ContractError("local polynomial order must be in {0,1,2,3}");

  const Eigen::VectorXd w = oriented(weights, orientation);
  const double group = local_group(orientation);
  std::vector<Eigen::Index> local;
  std::set<double> distinct;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (data.d()[i] == group && w[i] <= h) {
      local.push_back(i);
      distinct.insert(w[i]);
    }
  }
  const auto need = static_cast<std::size_t>(p + 2);
  if (local.size() < need)
    throw BandwidthError("local polynomial of order " + std::to_string(p) + " needs " +
                         std::to_string(need) + " points in [0, " + std::to_string(h) +
                         "], found " + std::to_string(local.size()) +
                         "; use a larger bandwidth");

  LocalPolyFit fit;
  fit.requested_order = p;
  fit.bandwidth = h;
  fit.n_local = local.size();
  fit.orientation = orientation;

  int order = std::min<int>(p, static_cast<int>(distinct.size()) - 1);
  const auto m = static_cast<Eigen::Index>(local.size());
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double y = data.y()[local[static_cast<std::size_t>(r)]];
    rhs[r] = target == FitTarget::y ? y : y * y;
  }

  // Powers of w/h keep the design well scaled; coefficients are rescaled below.
  while (true) {
    Eigen::MatrixXd design(m, order + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
      const double u = w[local[static_cast<std::size_t>(r)]] / h;
      double pw = 1.0;
      for (int j = 0; j <= order; ++j) {
        design(r, j) = pw;
        pw *= u;
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() == order + 1) {
      Eigen::VectorXd beta = qr.solve(rhs);
      double scale = 1.0;
      for (int j = 0; j <= order; ++j) {
        beta[j] /= scale;
        scale *= h;
      }
      fit.coefficients = std::move(beta);
      break;
    }
    if (order == 0) throw NumericalError("local polynomial design is singular");
    --order;
  }
  fit.order = order;
  if (order < p)
    fit.warnings.push_back("local polynomial order reduced from " + std::to_string(p) + " to " +
                           std::to_string(order) + " (tied or too few distinct weights)");
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j)
    if (!std::isfinite(fit.coefficients[j]))
      throw NumericalError("local polynomial coefficients are not finite");
  return fit;
}

double estimate_bias(const LocalPolyFit& fit, const Eigen::VectorXd& weights, double b,
                     std::size_t n, Orientation orientation) {
  if (b > fit.bandwidth)
    throw ContractError("trimming threshold " + std::to_string(b) +
                        " exceeds the local fit window " + std::to_string(fit.bandwidth) +
                        "; refusing to extrapolate");
  if (n == 0) throw ContractError("sample size must be positive");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double e = weights[i];
    if (orientation == Orientation::lower_tail) {
      if (e < b) sum -= fit.evaluate(e);
    } else {
      const double w = 1.0 - e;
      if (w < b) sum += e * fit.evaluate(w);
    }
  }
  return sum / static_cast<double>(n);
}

BandwidthChoice select_bandwidth(const Eigen::VectorXd& weights, int p, double c,
                                 Orientation orientation) {
  if (!(c > 0.0)) throw ContractError("bandwidth constant must be positive");
  if (p < 0 || p > 3) throw ContractError("local polynomial order must be in {0,1,2,3}");
  const Eigen::VectorXd w = oriented(weights, orientation);
  const EmpiricalCdf cdf({w.data(), static_cast<std::size_t>(w.size())});
  const auto n = static_cast<double>(w.size());
  const double power = 2.0 * p + 3.0;
  const auto g = [&](double h) { return n * std::pow(h, power) * cdf(h); };

  BandwidthChoice out;
  const auto root = smallest_crossing(g, c, 0.0, 1.0, 1e-12, cdf.support());
  if (!root.attained) {
    out.h = 1.0;
    out.capped = true;
    out.warnings.push_back("bandwidth equation has no root in (0,1]; bandwidth capped at 1");
    return out;
  }
  out.h = root.value;
  if (cdf(0.5 * out.h) == 0.0)
    out.warnings.push_back("no weights in the lower half of the bandwidth window [0, " +
                           std::to_string(out.h) +
                           "]; the local fit extrapolates to the boundary");
  return out;
}

double rate_statistic(const Eigen::VectorXd& weights, double b, int p, Orientation orientation) {
  const Eigen::VectorXd w = oriented(weights, orientation);
  const auto n = static_cast<double>(w.size());
  std::size_t below = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] <= b) ++below;
  return n * std::pow(b, 2.0 * p + 3.0) * static_cast<double>(below) / n;
}

}  // namespace ipw
