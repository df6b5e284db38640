#include "ipw/stable.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"

namespace ipw {

namespace {

using cplx = std::complex<double>;
using boost::math::quadrature::gauss_kronrod;

constexpr double kPi = std::numbers::pi;

double stable_constant(double g) { return std::tgamma(3.0 - g) / (g * (g - 1.0)); }

// (e^{i z x} - 1 - i z x) / x^2 for z > 0, x > 0.
cplx levy_kernel(double z, double x) {
  const double y = z * x;
  if (y < 0.1) {
    const double y2 = y * y;
    const double re = -0.5 + y2 / 24.0 - y2 * y2 / 720.0 + y2 * y2 * y2 / 40320.0;
    const double im = -y / 6.0 + y * y2 / 120.0 - y * y2 * y2 / 5040.0 + y * y2 * y2 * y2 / 362880.0;
    return z * z * cplx(re, im);
  }
  const double s = std::sin(0.5 * y);
  return cplx(-2.0 * s * s, std::sin(y) - y) / (x * x);
}

struct Quad {
  cplx value;
  double error = 0.0;
};

Quad gk(const std::function<cplx(double)>& f, double a, double b, double tol) {
  Quad q;
  const auto re = [&](double x) { return f(x).real(); };
  const auto im = [&](double x) { return f(x).imag(); };
  double er = 0.0, ei = 0.0;
  const double r = gauss_kronrod<double, 61>::integrate(re, a, b, 20, tol, &er);
  const double i = gauss_kronrod<double, 61>::integrate(im, a, b, 20, tol, &ei);
  q.value = {r, i};
  q.error = std::hypot(er, ei);
  return q;
}

// int_0^inf (e^{izx} - 1 - izx) x^{-1-g} a(tx) dx for z > 0.
Quad one_sided(double z, double t, double g, const TailMoment& a, double tol) {
  const double x1 = 1.0 / z;
  const auto at = [&](double x) { return t == 0.0 ? a(0.0) : a(t * x); };

  // [0, x1]: x = u^{1/(2-g)} turns x^{1-g} dx into du / (2-g).
  const double p = 1.0 / (2.0 - g);
  const Quad near = gk(
      [&](double u) {
        if (u <= 0.0) return cplx(-0.5 * z * z, 0.0) * at(0.0);
        const double x = std::pow(u, p);
        return levy_kernel(z, x) * at(x);
      },
      0.0, std::pow(x1, 2.0 - g), tol);

  // [x1, inf), non-oscillating part -(1 + izx) x^{-1-g} a(tx).
  // s = x^{-g} maps int x^{-1-g} a dx to (1/g) int_0^{x1^{-g}} a ds;
  // s = x^{1-g} maps int x^{-g} a dx to (1/(g-1)) int_0^{x1^{1-g}} a ds.
  const auto tail = [&](double s, double power) {
    if (s <= 0.0) return t == 0.0 ? a(0.0) : 0.0;
    return at(std::pow(s, -1.0 / power));
  };
  double e1 = 0.0, e2 = 0.0;
  const double r1 = gauss_kronrod<double, 61>::integrate(
                        [&](double s) { return tail(s, g); }, 0.0, std::pow(x1, -g), 20, tol,
                        &e1) /
                    g;
  const double r2 = gauss_kronrod<double, 61>::integrate(
                        [&](double s) { return tail(s, g - 1.0); }, 0.0, std::pow(x1, 1.0 - g),
                        20, tol, &e2) /
                    (g - 1.0);
  const cplx smooth(-r1, -z * r2);

  // [x1, inf), oscillating part e^{izx} x^{-1-g} a(tx), shifted to [0, inf).
  const auto h = [&](double s) {
    const double x = x1 + s;
    return std::pow(x, -1.0 - g) * at(x);
  };
  boost::math::quadrature::ooura_fourier_cos<double> fc(tol);
  boost::math::quadrature::ooura_fourier_sin<double> fs(tol);
  const auto c = fc.integrate(h, z);
  const auto s = fs.integrate(h, z);
  const cplx osc = std::exp(cplx(0.0, z * x1)) * cplx(c.first, s.first);

  Quad out;
  out.value = p * near.value + smooth + osc;
  out.error = p * near.error + e1 / g + z * e2 / (g - 1.0) +
              std::abs(osc) * (c.second + s.second);
  return out;
}

}  // namespace

void StableParams::validate() const {
  if (!(gamma0 > 1.0 && gamma0 <= 2.0)) throw ContractError("stable index must lie in (1, 2]");
  if (!(alpha_plus >= 0.0 && alpha_minus >= 0.0) || !(alpha_plus + alpha_minus > 0.0))
    throw ContractError("tail weights must be nonnegative and not both zero");
}

cplx stable_log_cf(double zeta, const StableParams& params) {
  params.validate();
  if (zeta == 0.0) return {0.0, 0.0};
  const double g = params.gamma0;
  const double k = std::pow(std::abs(zeta), g) * stable_constant(g);
  const double sgn = zeta > 0.0 ? 1.0 : -1.0;
  return -k * cplx(-std::cos(g * kPi / 2.0), params.skew() * sgn * std::sin(g * kPi / 2.0));
}

cplx stable_cf(double zeta, const StableParams& params) {
  return std::exp(stable_log_cf(zeta, params));
}

cplx levy_cf_moderate(double zeta, double t, double gamma0, const TailMoment& alpha_plus,
                      const TailMoment& alpha_minus, double rel_tol) {
  if (!(gamma0 > 1.0 && gamma0 < 2.0)) throw ContractError("Levy index must lie in (1, 2)");
  if (!(t >= 0.0)) throw ContractError("moderate-trimming constant t must be nonnegative");
  if (zeta == 0.0) return {1.0, 0.0};
  const double total = alpha_plus(0.0) + alpha_minus(0.0);
  if (!(total > 0.0)) throw ContractError("tail moments at zero must not both vanish");

  const double z = std::abs(zeta);
  const Quad qp = one_sided(z, t, gamma0, alpha_plus, rel_tol);
  const Quad qm = one_sided(z, t, gamma0, alpha_minus, rel_tol);
  const double c = (2.0 - gamma0) / total;
  const cplx log_cf = c * (qp.value + std::conj(qm.value));
  const double err = c * (qp.error + qm.error);
  if (!std::isfinite(log_cf.real()) || !std::isfinite(log_cf.imag()) ||
      err > 100.0 * rel_tol * std::max(std::abs(log_cf), 1e-8)) {
    std::ostringstream os;
    os << "Levy CF quadrature did not converge at zeta=" << zeta << ", t=" << t
       << ": value " << log_cf << ", error estimate " << err;
    throw NumericalError(os.str());
  }
  return zeta > 0.0 ? std::exp(log_cf) : std::conj(std::exp(log_cf));
}

double stable_scale(const StableParams& params) {
  params.validate();
  const double g = params.gamma0;
  return std::pow(stable_constant(g) * -std::cos(g * kPi / 2.0), 1.0 / g);
}

std::vector<double> stable_sample(const StableParams& params, std::size_t count,
                                  std::uint64_t seed) {
  const double g = params.gamma0;
  const double beta = params.skew();
  const double sigma = stable_scale(params);
  const double tan_term = beta * std::tan(kPi * g / 2.0);
  const double b = std::atan(tan_term) / g;
  const double s = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * g));

  auto rng = rng_stream(seed, 0);
  std::vector<double> out(count);
  for (auto& x : out) {
    const double v = kPi * (uniform_open(rng) - 0.5);
    const double w = -std::log(uniform_open(rng));
    const double core = s * std::sin(g * (v + b)) / std::pow(std::cos(v), 1.0 / g) *
                        std::pow(std::cos(v - g * (v + b)) / w, (1.0 - g) / g);
    x = sigma * core;
  }
  return out;
}

cplx empirical_cf(const std::vector<double>& sample, double zeta) {
  if (sample.empty()) throw ContractError("empirical CF of an empty sample");
  double re = 0.0, im = 0.0;
  for (double x : sample) {
    re += std::cos(zeta * x);
    im += std::sin(zeta * x);
  }
  const auto n = static_cast<double>(sample.size());
  return {re / n, im / n};
}

}  // namespace ipw
