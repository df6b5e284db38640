#pragma once

#include <Eigen/Core>

namespace ipw {

/// Which tail of the weight distribution is hazardous.
///  - lower_tail: weights near 0 (population mean of DY/e(X)); the local
///    regressions use the treated group.
///  - upper_tail: weights near 1 (ATT); everything operates on 1 - e and
///    the local regressions use the comparison group.
enum class Orientation { lower_tail, upper_tail };

inline Eigen::VectorXd oriented(const Eigen::VectorXd& weights, Orientation o) {
  if (o == Orientation::lower_tail) return weights;
  return (1.0 - weights.array()).matrix();
}

/// Treatment value of the group whose outcomes feed the local regressions.
inline double local_group(Orientation o) { return o == Orientation::lower_tail ? 1.0 : 0.0; }

inline const char* to_string(Orientation o) {
  return o == Orientation::lower_tail ? "lower_tail" : "upper_tail";
}

}  // namespace ipw
