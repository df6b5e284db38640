#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace ipw {

/// Limit law of the untrimmed estimator for 1 < gamma0 < 2.
struct StableParams {
  double gamma0 = 1.5;
  double alpha_plus = 1.0;
  double alpha_minus = 1.0;

  double skew() const { return (alpha_plus - alpha_minus) / (alpha_plus + alpha_minus); }
  void validate() const;
};

/// exp(-|z|^g Gamma(3-g)/(g(g-1)) [-cos(g pi/2) + i skew sgn(z) sin(g pi/2)]).
/// gamma0 = 2 is accepted and gives the standard Gaussian CF.
std::complex<double> stable_cf(double zeta, const StableParams& params);
/// The exponent of stable_cf.
std::complex<double> stable_log_cf(double zeta, const StableParams& params);

/// Truncated moment u -> E[|Y|^g 1{Y > u}] (plus) or E[|Y|^g 1{Y < -u}]
/// (minus), for u >= 0.
using TailMoment = std::function<double(double)>;

/// CF of the moderate-trimming limit, exp of
///   int (e^{izx} - 1 - izx) / x^2 M(dx),
///   M(dx) = (2-g)/(a+(0)+a-(0)) |x|^{1-g} a_{sgn x}(t|x|) dx.
/// Near zero the kernel is replaced by its series; the singular factor
/// |x|^{1-g} is removed by substitution. Throws NumericalError when the
/// quadrature misses its tolerance.
std::complex<double> levy_cf_moderate(double zeta, double t, double gamma0,
                                      const TailMoment& alpha_plus,
                                      const TailMoment& alpha_minus,
                                      double rel_tol = 1e-8);

/// Chambers-Mallows-Stuck draws with the parameterisation of stable_cf:
/// index gamma0, skewness beta = skew(), scale sigma with
/// sigma^g = Gamma(3-g)/(g(g-1)) * (-cos(g pi/2)).
std::vector<double> stable_sample(const StableParams& params, std::size_t count,
                                  std::uint64_t seed);
double stable_scale(const StableParams& params);

/// Empirical characteristic function (1/n) sum exp(i z x_k).
std::complex<double> empirical_cf(const std::vector<double>& sample, double zeta);

}  // namespace ipw
