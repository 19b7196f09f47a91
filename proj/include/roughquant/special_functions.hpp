#pragma once

// Generalised hypergeometric series and the zeta_k auxiliary functions
// used by the closed forms of the Riemann-Liouville expansion coefficients.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "roughquant/errors.hpp"
#include "roughquant/quadrature.hpp"

namespace roughquant {

/// Rising factorial (a)_k = a (a+1) ... (a+k-1), with (a)_0 = 1.
template <class Real>
Real pochhammer(const Real& a, unsigned k) {
  Real r = 1;
  for (unsigned j = 0; j < k; ++j) r *= a + Real(j);
  return r;
}

struct HypergeometricParams {
  std::vector<double> numerator_params;    // a_1..a_p
  std::vector<double> denominator_params;  // c_1..c_q
  double argument = 0.0;                   // z
};

namespace detail {

inline bool is_nonpositive_integer(double c) {
  return c <= 0.0 && std::nearbyint(c) == c;
}

}  // namespace detail

/// Series controls. A term is "small" when |term| <= tol * (1 + |partial|);
/// the series stops after `guard` consecutive small terms.
struct SeriesControl {
  unsigned guard = 3;
  unsigned max_terms = 10000;
};

/// pFq(a; c; z) by direct summation. Templated on the arithmetic type so
/// the same routine runs in double or in extended precision.
template <class Real>
Real pfq(std::span<const Real> a, std::span<const Real> c, const Real& z, const Real& tol,
         SeriesControl ctl = {}) {
  using std::abs;
  using std::round;
  for (const Real& ci : c) {
    if (ci <= 0 && ci == round(ci)) {
      fail(ErrorKind::InvalidParams, "pfq: denominator parameter is a nonpositive integer");
    }
  }
  const std::size_t p = a.size();
  const std::size_t q = c.size();
  if (p > q + 1) fail(ErrorKind::InvalidParams, "pfq: p > q+1 is not supported");
  if (p == q + 1 && !(abs(z) < 1)) {
    fail(ErrorKind::InvalidParams, "pfq: p = q+1 requires |z| < 1");
  }
  if (z == 0) return Real(1);

  Real term = 1;
  Real sum = 1;
  unsigned small = 0;
  for (unsigned k = 0; k < ctl.max_terms; ++k) {
    Real ratio = z / Real(k + 1);
    for (const Real& ai : a) ratio *= ai + Real(k);
    for (const Real& ci : c) ratio /= ci + Real(k);
    term *= ratio;
    sum += term;
    if (abs(term) <= tol * (1 + abs(sum))) {
      if (++small >= ctl.guard) return sum;
    } else {
      small = 0;
    }
  }
  fail(ErrorKind::NonConvergent, "pfq: series did not meet the stopping rule within " +
                                     std::to_string(ctl.max_terms) + " terms");
}

inline double pfq(const HypergeometricParams& params, double tol = 1e-17) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidParams, "pfq: tol must be positive");
  for (double ci : params.denominator_params) {
    if (detail::is_nonpositive_integer(ci)) {
      fail(ErrorKind::InvalidParams, "pfq: denominator parameter is a nonpositive integer");
    }
  }
  return pfq<double>(params.numerator_params, params.denominator_params, params.argument, tol);
}

/// Which of the two auxiliary functions: k = 1/2 or k = 3/2.
enum class ZetaOrder { Half, ThreeHalves };

inline double zeta_order_value(ZetaOrder k) { return k == ZetaOrder::Half ? 0.5 : 1.5; }

struct ZetaArgs {
  double z = 0.0;  // >= 0
  double h = 0.5;  // in (0, 1]
  ZetaOrder k = ZetaOrder::Half;
};

namespace detail {

inline void check_zeta_args(const ZetaArgs& args) {
  if (!(args.z >= 0.0)) fail(ErrorKind::InvalidParams, "zeta_k: z must be >= 0");
  if (!(args.h > 0.0 && args.h <= 1.0)) fail(ErrorKind::InvalidParams, "zeta_k: h must lie in (0,1]");
}

// Above this argument pi*z the production route switches from panel
// quadrature to the Gamma-function limit minus an asymptotic tail.
inline constexpr double kAsymptoticFrom = 40.0;
// Largest pi^2 z^2 / 4 evaluated by the double-precision series.
inline constexpr double kSeriesUpTo = 10.0;

// Integral of x^b cos(x) (Half, needs b > -1) or x^b sin(x) (ThreeHalves,
// needs b > -2) over [0, X], by Gauss-Legendre panels split every pi/2.
// The first panel [0, min(X, pi/2)] uses x = y^(1/s) with s = b+1 (cos) or
// s = b+2 (sin), which turns the algebraic endpoint factor into a constant.
inline double oscillatory_panels(double b, double X, ZetaOrder k) {
  if (X <= 0.0) return 0.0;
  const bool is_cos = (k == ZetaOrder::Half);
  const double s = is_cos ? b + 1.0 : b + 2.0;
  const double p = 1.0 / s;
  const double x0 = std::min(X, 0.5 * std::numbers::pi);
  auto first = [&](double y) {
    const double x = std::pow(y, p);
    if (is_cos) return std::cos(x);
    return x == 0.0 ? 1.0 : std::sin(x) / x;
  };
  double acc = quad::graded_left(first, 0.0, std::pow(x0, s), 6, 0.25) / s;
  auto f = [&](double x) { return std::pow(x, b) * (is_cos ? std::cos(x) : std::sin(x)); };
  const double step = 0.5 * std::numbers::pi;
  double lo = x0;
  while (lo < X) {
    const double hi = std::min(X, lo + step);
    acc += quad::panel(f, lo, hi, 16);
    lo = hi;
  }
  return acc;
}

// Integral of x^b e^{ix} over [X, inf) for b <= 0 by the asymptotic
// expansion i e^{iX} X^b sum_k b(b-1)..(b-k+1) (i/X)^k, truncated at its
// smallest term.
inline std::complex<double> oscillatory_tail(double b, double X) {
  const std::complex<double> iox(0.0, 1.0 / X);
  std::complex<double> term = 1.0;
  std::complex<double> sum = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (b - (k - 1)) * iox;
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += term;
    if (mag < 1e-18 * std::abs(sum)) break;
    last = mag;
  }
  return std::complex<double>(0.0, 1.0) * std::polar(std::pow(X, b), X) * sum;
}

// Integral of x^b e^{ix} over [0, X] for -1 < b <= 0 and large X: the
// improper integral Gamma(b+1) e^{i pi (b+1)/2} minus the tail.
inline std::complex<double> oscillatory_asymptotic(double b, double X) {
  const std::complex<double> full =
      std::tgamma(b + 1.0) * std::polar(1.0, 0.5 * std::numbers::pi * (b + 1.0));
  return full - oscillatory_tail(b, X);
}

}  // namespace detail

/// zeta_k(z,h) = z^{2h}/(2h) 1F2(h; k, 1+h; -pi^2 z^2/4), summed in the
/// arithmetic type Real. In double precision the alternating series loses
/// roughly 2 pi z / ln(10) digits; use an extended type for large z.
template <class Real>
Real zeta_k_series(const Real& z, const Real& h, ZetaOrder k, const Real& tol) {
  using std::pow;
  if (z == 0) return Real(0);
  const Real pi = boost::math::constants::pi<Real>();
  const std::vector<Real> a{h};
  const std::vector<Real> c{Real(zeta_order_value(k)), Real(1) + h};
  const Real chi = -pi * pi * z * z / 4;
  return pow(z, 2 * h) / (2 * h) * pfq<Real>(a, c, chi, tol, SeriesControl{3, 100000});
}

inline double zeta_k_series(const ZetaArgs& args) {
  detail::check_zeta_args(args);
  return zeta_k_series<double>(args.z, args.h, args.k, 1e-17);
}

/// zeta_k through its oscillatory-integral form
/// zeta_{1/2}(z,h) = pi^{-2h} int_0^{pi z} x^{2h-1} cos x dx,
/// zeta_{3/2}(z,h) = pi^{-2h} int_0^{pi z} x^{2h-2} sin x dx.
inline double zeta_k_quadrature(const ZetaArgs& args) {
  detail::check_zeta_args(args);
  const double b = args.k == ZetaOrder::Half ? 2.0 * args.h - 1.0 : 2.0 * args.h - 2.0;
  const double X = std::numbers::pi * args.z;
  return std::pow(std::numbers::pi, -2.0 * args.h) * detail::oscillatory_panels(b, X, args.k);
}

/// Large-argument route, valid when the exponent b is <= 0 (always for
/// k = 3/2; h <= 1/2 for k = 1/2).
inline double zeta_k_asymptotic(const ZetaArgs& args) {
  detail::check_zeta_args(args);
  const double b = args.k == ZetaOrder::Half ? 2.0 * args.h - 1.0 : 2.0 * args.h - 2.0;
  if (b > 0.0) fail(ErrorKind::InvalidParams, "zeta_k_asymptotic: requires a non-positive exponent");
  const double X = std::numbers::pi * args.z;
  const std::complex<double> v = detail::oscillatory_asymptotic(b, X);
  const double part = args.k == ZetaOrder::Half ? v.real() : v.imag();
  return std::pow(std::numbers::pi, -2.0 * args.h) * part;
}

/// Production evaluation: series for small z, panel quadrature in the
/// middle range, asymptotic tail for large z when it applies.
inline double zeta_k(const ZetaArgs& args) {
  detail::check_zeta_args(args);
  const double pi = std::numbers::pi;
  const double chi = 0.25 * pi * pi * args.z * args.z;
  if (chi <= detail::kSeriesUpTo) return zeta_k_series(args);
  const double b = args.k == ZetaOrder::Half ? 2.0 * args.h - 1.0 : 2.0 * args.h - 2.0;
  const bool asymptotic_ok = b <= 0.0 && b > -1.0;
  if (asymptotic_ok && pi * args.z >= detail::kAsymptoticFrom) return zeta_k_asymptotic(args);
  return zeta_k_quadrature(args);
}

/// E(z) = int_0^z v^alpha e^{-i pi v} dv = zeta_{1/2}(z,h1) - i pi zeta_{3/2}(z,h2)
/// with h1 = (alpha+1)/2 and h2 = h1 + 1/2. Every Riemann-Liouville
/// coefficient closed form is a combination of values of this function.
inline std::complex<double> rl_phase_integral(double alpha, double z) {
  if (z <= 0.0) return {0.0, 0.0};
  const double h1 = 0.5 * (alpha + 1.0);
  const double h2 = h1 + 0.5;
  const double re = zeta_k({z, h1, ZetaOrder::Half});
  const double im = zeta_k({z, h2, ZetaOrder::ThreeHalves});
  return {re, -std::numbers::pi * im};
}

/// Limits of zeta_k as z -> infinity (exist for the exponents used by the
/// kernels): cos(pi h) Gamma(2h) / pi^{2h} and -cos(pi h) Gamma(2h-1) / pi^{2h}.
inline double zeta_k_limit(double h, ZetaOrder k) {
  const double pi = std::numbers::pi;
  if (k == ZetaOrder::Half) return std::cos(pi * h) * std::tgamma(2.0 * h) / std::pow(pi, 2.0 * h);
  return -std::cos(pi * h) * std::tgamma(2.0 * h - 1.0) / std::pow(pi, 2.0 * h);
}

}  // namespace roughquant
