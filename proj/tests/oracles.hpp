#pragma once

// Reference values computed independently of the library's closed forms:
// tanh-sinh quadrature of the defining integrals, Bessel-function integral
// representations, and extended-precision series.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "roughquant/special_functions.hpp"

namespace oracle {

using boost::math::quadrature::tanh_sinh;

/// int_a^b (t-s)^{H-1/2} f(s) ds for b <= t, via v = (t-s)^{H+1/2}, which
/// turns the weight into the constant 1/(H+1/2); the v-range is split into
/// `pieces` parts so oscillatory f stays resolved.
template <class F>
double singular_weight_integral(F&& f, double t, double H, double a, double b, int pieces = 1) {
  const double e = H + 0.5;
  const double v0 = std::pow(t - b, e);
  const double v1 = std::pow(t - a, e);
  tanh_sinh<double> ts;
  auto g = [&](double v) { return f(t - std::pow(v, 1.0 / e)); };
  double acc = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double lo = v0 + (v1 - v0) * k / pieces;
    const double hi = v0 + (v1 - v0) * (k + 1) / pieces;
    acc += ts.integrate(g, lo, hi);
  }
  return acc / e;
}

/// sqrt(2/L) int_0^cut (t-s)^{H-1/2} cos(s / (sqrt(lambda_n) L)) ds.
inline double kernel_coefficient(std::size_t n, double t, double H, double cut, double L = 1.0) {
  const double m = static_cast<double>(n) - 0.5;
  const double w = m * std::numbers::pi / L;
  const int pieces = 4 + static_cast<int>(4.0 * w * cut);
  auto f = [&](double s) { return std::cos(w * s); };
  return std::sqrt(2.0 / L) * singular_weight_integral(f, t, H, 0.0, cut, pieces);
}

/// int_0^upper (t-u)^{H-1/2} (s-u)^{H-1/2} du for s <= t, upper <= s.
inline double cross_covariance(double s, double t, double H, double upper) {
  if (t == s) return singular_weight_integral([](double) { return 1.0; }, s, 2.0 * H - 0.5, 0.0, upper, 8);
  auto f = [&](double u) { return std::pow(t - u, H - 0.5); };
  return singular_weight_integral(f, s, H, 0.0, upper, 8);
}

/// 1F2(1; b, c; x) = (c-1) int_0^1 (1-u)^{c-2} 0F1(;b; x u) du with
/// 0F1(;b;-y) = Gamma(b) y^{(1-b)/2} J_{b-1}(2 sqrt y), x < 0.
inline double hyp1f2_one(double b, double c, double x) {
  auto f0f1 = [&](double u) {
    const double y = -x * u;
    if (y < 1e-8) return 1.0 - y / b;
    return std::tgamma(b) * std::pow(y, 0.5 * (1.0 - b)) * boost::math::cyl_bessel_j(b - 1.0, 2.0 * std::sqrt(y));
  };
  tanh_sinh<double> ts;
  // For u > 1/2 the second argument is 1 - u without cancellation; on the
  // left half it is the (negative) distance to 0.
  auto g = [&](double u, double uc) {
    const double w = u > 0.5 ? uc : 1.0 - u;
    return std::pow(w, c - 2.0) * f0f1(u);
  };
  return (c - 1.0) * ts.integrate(g, 0.0, 1.0);
}

using big = boost::multiprecision::cpp_bin_float_100;

/// zeta_k(z,h) by its defining series in 100-digit arithmetic.
inline double zeta_series_mp(double z, double h, roughquant::ZetaOrder k) {
  const big r = roughquant::zeta_k_series<big>(big(z), big(h), k, big("1e-40"));
  return static_cast<double>(r);
}

/// Panelled tanh-sinh quadrature over [a,b] for smooth integrands.
template <class F>
double smooth_integral(F&& f, double a, double b, int panels = 64) {
  tanh_sinh<double> ts;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + (b - a) * k / panels;
    const double hi = a + (b - a) * (k + 1) / panels;
    acc += ts.integrate(f, lo, hi);
  }
  return acc;
}

}  // namespace oracle
