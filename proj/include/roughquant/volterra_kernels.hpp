#pragma once

// Coefficient functions K[psi_n](t) of the cosine-basis expansion of the
// Riemann-Liouville process and of its truncated variants, together with
// their L2 norms and the covariance functions they reproduce.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "roughquant/errors.hpp"
#include "roughquant/quadrature.hpp"
#include "roughquant/special_functions.hpp"

namespace roughquant {

enum class KernelVariant {
  RlFull,       // Z^H on [0, 1]
  RlTruncated,  // Z^{H,T}_t = int_0^T (t-s)^{H-1/2} dW_s on [T, 1]
  RlWindow,     // Z^{T,Delta} on [T, T+Delta], basis on [0, T+Delta]
};

struct KernelSpec {
  double hurst = 0.1;
  KernelVariant variant = KernelVariant::RlFull;
  double T = 0.0;
  double delta = 0.0;

  static KernelSpec rl_full(double H) { return {H, KernelVariant::RlFull, 0.0, 0.0}; }
  static KernelSpec rl_truncated(double H, double T) {
    return {H, KernelVariant::RlTruncated, T, 1.0 - T};
  }
  static KernelSpec rl_window(double H, double T, double delta) {
    return {H, KernelVariant::RlWindow, T, delta};
  }

  /// Length of the interval carrying the cosine basis.
  double domain_length() const { return variant == KernelVariant::RlWindow ? T + delta : 1.0; }
  double t_begin() const { return variant == KernelVariant::RlFull ? 0.0 : T; }
  double t_end() const { return variant == KernelVariant::RlWindow ? T + delta : 1.0; }

  void validate() const {
    if (!(hurst > 0.0 && hurst <= 0.5)) fail(ErrorKind::InvalidParams, "KernelSpec: H must lie in (0, 1/2]");
    switch (variant) {
      case KernelVariant::RlFull: break;
      case KernelVariant::RlTruncated:
        if (!(T > 0.0 && T < 1.0)) fail(ErrorKind::InvalidParams, "KernelSpec: truncated variant needs 0 < T < 1");
        break;
      case KernelVariant::RlWindow:
        if (!(T > 0.0 && delta > 0.0)) fail(ErrorKind::InvalidParams, "KernelSpec: window variant needs T, Delta > 0");
        break;
    }
  }
};

inline std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::RlFull: return "rl_full";
    case KernelVariant::RlTruncated: return "rl_truncated";
    case KernelVariant::RlWindow: return "rl_window";
  }
  return "unknown";
}

/// lambda_n = 4 / ((2n-1)^2 pi^2).
inline double lambda_n(std::size_t n) {
  const double k = (2.0 * static_cast<double>(n) - 1.0) * std::numbers::pi;
  return 4.0 / (k * k);
}

/// sqrt(2/L) cos(t / (sqrt(lambda_n) L)), orthonormal on [0, L].
inline double basis_fn(std::size_t n, double t, double domain_length = 1.0) {
  const double L = domain_length;
  return std::sqrt(2.0 / L) * std::cos(t / (std::sqrt(lambda_n(n)) * L));
}

namespace detail {

inline double half_index(std::size_t n) { return static_cast<double>(n) - 0.5; }

// Re(e^{i pi z} [E(z) - E(zc)]) with E the phase integral; this is
// int_{0}^{z - zc} of the rescaled kernel against cos(pi u), the common
// core of all three coefficient closed forms.
inline double phase_core(double alpha, double z, double zc) {
  std::complex<double> e = rl_phase_integral(alpha, z);
  if (zc > 0.0) e -= rl_phase_integral(alpha, zc);
  return (std::polar(1.0, std::numbers::pi * z) * e).real();
}

// sqrt(2) L^H m^{-(H+1/2)} Re(e^{i pi z}[E(z) - E(z - m cut / L)]) with
// z = m t / L; `cut` is the upper integration limit in s (t for the full
// process, T for the truncated ones).
inline double coefficient(double H, double L, double cut, std::size_t n, double t) {
  const double m = half_index(n);
  const double z = m * t / L;
  const double zc = m * (t - cut) / L;
  return std::numbers::sqrt2 * std::pow(L, H) * std::pow(m, -(H + 0.5)) *
         phase_core(H - 0.5, z, zc);
}

inline void check_hurst(double H) {
  if (!(H > 0.0 && H <= 0.5)) fail(ErrorKind::InvalidParams, "H must lie in (0, 1/2]");
}

}  // namespace detail

/// K_H[psi_n](t) = sqrt(2) int_0^t (t-s)^{H-1/2} cos(s / sqrt(lambda_n)) ds.
/// Small arguments use 2 sqrt(2)/(1+2H) t^{H+1/2} 1F2(1; 3/4+H/2, 5/4+H/2; -t^2/(4 lambda_n));
/// larger ones the zeta-based closed form.
inline double coeff_rl(std::size_t n, double t, double H) {
  detail::check_hurst(H);
  if (!(t >= 0.0 && t <= 1.0 + 1e-12)) fail(ErrorKind::InvalidParams, "coeff_rl: t must lie in [0,1]");
  if (t == 0.0) return 0.0;
  const double chi = t * t / (4.0 * lambda_n(n));
  if (chi <= detail::kSeriesUpTo) {
    const std::vector<double> a{1.0};
    const std::vector<double> c{0.75 + 0.5 * H, 1.25 + 0.5 * H};
    return 2.0 * std::numbers::sqrt2 / (1.0 + 2.0 * H) * std::pow(t, H + 0.5) *
           pfq<double>(a, c, -chi, 1e-17);
  }
  return detail::coefficient(H, 1.0, t, n, t);
}

/// K_H^T[psi_n](t) = sqrt(2) int_0^T (t-s)^{H-1/2} cos(s / sqrt(lambda_n)) ds, t in [T, 1].
inline double coeff_truncated(std::size_t n, double t, double H, double T) {
  detail::check_hurst(H);
  if (!(T > 0.0 && T <= t && t <= 1.0 + 1e-12)) {
    fail(ErrorKind::InvalidParams, "coeff_truncated: need 0 < T <= t <= 1");
  }
  return detail::coefficient(H, 1.0, T, n, t);
}

/// K_H^{T,Delta}[psi_n^{T,Delta}](t), t in [T, T+Delta], basis on [0, T+Delta].
inline double coeff_window(std::size_t n, double t, double H, double T, double delta) {
  detail::check_hurst(H);
  if (!(T > 0.0 && delta > 0.0 && T <= t && t <= T + delta + 1e-12)) {
    fail(ErrorKind::InvalidParams, "coeff_window: need T <= t <= T+Delta");
  }
  return detail::coefficient(H, T + delta, T, n, t);
}

inline double coeff(const KernelSpec& spec, std::size_t n, double t) {
  switch (spec.variant) {
    case KernelVariant::RlFull: return coeff_rl(n, t, spec.hurst);
    case KernelVariant::RlTruncated: return coeff_truncated(n, t, spec.hurst, spec.T);
    case KernelVariant::RlWindow: return coeff_window(n, t, spec.hurst, spec.T, spec.delta);
  }
  return 0.0;
}

/// Experimental: coefficient for the Gamma kernel K(u) = e^{-beta u} u^{H-1/2}
/// on [0,1], by quadrature after the substitution v = (t-s)^{H+1/2}.
inline double coeff_gamma_kernel(std::size_t n, double t, double H, double beta) {
  detail::check_hurst(H);
  if (t <= 0.0) return 0.0;
  const double p = 1.0 / (H + 0.5);
  const double w = 1.0 / std::sqrt(lambda_n(n));
  auto f = [&](double y) {
    const double v = std::pow(y, p);  // v = t - s
    return std::exp(-beta * v) * std::cos((t - v) * w);
  };
  const double upper = std::pow(t, H + 0.5);
  // y^p is not smooth at y = 0, so the first panel is graded there.
  const std::size_t panels = static_cast<std::size_t>(std::max(4.0, std::ceil(t * w)));
  const double h = upper / static_cast<double>(panels);
  double acc = quad::graded_left(f, 0.0, h, 16);
  if (panels > 1) acc += quad::composite(f, h, upper, panels - 1, 16);
  return std::numbers::sqrt2 * p * acc;
}

// ---------------------------------------------------------------------------
// L2 norms

namespace detail {

// Integral of phase_core(alpha, z, z - zc_shift)^2 over [z0, z1], where the
// second term is dropped when `full` (zc = 0). Graded near z0, then panels
// of width 1/(2 refine).
inline double core_square_integral(double alpha, double z0, double z1, double shift, bool full,
                                   int refine) {
  auto f = [&](double z) {
    const double v = phase_core(alpha, z, full ? 0.0 : z - shift);
    return v * v;
  };
  const double step = 0.5 / static_cast<double>(refine);
  const double first = std::min(z1, z0 + step);
  double acc = quad::graded_left(f, z0, first, 8, 0.25, 16);
  double lo = first;
  while (lo < z1 - 1e-15) {
    const double hi = std::min(z1, lo + step);
    acc += quad::panel(f, lo, hi, 16);
    lo = hi;
  }
  return acc;
}

}  // namespace detail

/// Squared L2 norm of the n-th coefficient function over the variant's
/// domain ([0,1], [T,1] or [T,T+Delta]). `refine` > 1 shrinks the panels.
inline double coeff_l2_norm_sq(std::size_t n, const KernelSpec& spec, int refine = 1) {
  spec.validate();
  if (n < 1) fail(ErrorKind::InvalidParams, "coeff_l2_norm_sq: n must be >= 1");
  const double H = spec.hurst;
  const double L = spec.domain_length();
  const double m = detail::half_index(n);
  const bool full = spec.variant == KernelVariant::RlFull;
  const double z0 = m * spec.t_begin() / L;
  const double z1 = m * spec.t_end() / L;
  const double shift = m * spec.T / L;
  const double integral = detail::core_square_integral(H - 0.5, z0, z1, shift, full, refine);
  return 2.0 * std::pow(L, 2.0 * H + 1.0) * std::pow(m, -(2.0 * H + 2.0)) * integral;
}

/// Norms of the first n_max full-process coefficients in one sweep: all of
/// them are rescalings 2 m^{-(2H+2)} int_0^m phi(z)^2 dz of a single
/// function phi, so the integral is accumulated once along z.
inline std::vector<double> rl_full_norms(double H, std::size_t n_max) {
  detail::check_hurst(H);
  const double alpha = H - 0.5;
  std::vector<double> out(n_max);
  auto f = [&](double z) {
    const double v = detail::phase_core(alpha, z, 0.0);
    return v * v;
  };
  double acc = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double lo = static_cast<double>(n) - 1.5;
    const double hi = static_cast<double>(n) - 0.5;
    if (n == 1) {
      acc += quad::graded_left(f, 0.0, 0.5, 8, 0.25, 16);
    } else {
      acc += quad::panel(f, lo, lo + 0.5, 16) + quad::panel(f, lo + 0.5, hi, 16);
    }
    const double m = hi;
    out[n - 1] = 2.0 * std::pow(m, -(2.0 * H + 2.0)) * acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Covariances

namespace detail {

// int_0^{upper} (t-u)^alpha (s-u)^alpha du for s <= t and upper <= s, after
// w = s - u and y = w^{alpha+1}, which absorbs the (s-u)^alpha factor. The
// remaining factor (d + y^p)^alpha varies on the scale max(y, d^{alpha+1}),
// so panels are graded geometrically towards the lower limit down to a
// fraction of that scale.
inline double rl_cross_integral(double s, double t, double H, double upper) {
  const double alpha = H - 0.5;
  const double p = 1.0 / (alpha + 1.0);
  const double d = t - s;
  auto f = [&](double y) { return std::pow(d + std::pow(y, p), alpha); };
  const double y0 = std::pow(s - upper, alpha + 1.0);
  const double y1 = std::pow(s, alpha + 1.0);
  if (y1 <= y0) return 0.0;
  const double scale = std::max(y0, std::pow(d, alpha + 1.0));
  const double ratio = (y1 - y0) / (0.1 * scale);
  const int levels = ratio <= 1.0 ? 0 : std::min(80, static_cast<int>(std::ceil(std::log(ratio) / std::log(4.0))));
  return p * quad::graded_left(f, y0, y1, levels, 0.25, 16);
}

}  // namespace detail

/// R(s,t) = int_0^{s^t} (t-u)^{H-1/2} (s-u)^{H-1/2} du for the
/// Riemann-Liouville process, through
/// (s^t)^{H+1/2} (s v t)^{H-1/2} 2F1(1, 1/2-H; H+3/2; (s^t)/(s v t)) / (H+1/2).
inline double covariance_rl(double s, double t, double H) {
  detail::check_hurst(H);
  if (!(s > 0.0 && t > 0.0)) fail(ErrorKind::InvalidParams, "covariance_rl: s, t must be positive");
  const double lo = std::min(s, t), hi = std::max(s, t);
  if (lo == hi) return std::pow(lo, 2.0 * H) / (2.0 * H);
  const double r = lo / hi;
  if (r > 0.9) {
    // The 2F1 series converges like r^k; near the diagonal integrate instead.
    return detail::rl_cross_integral(lo, hi, H, lo);
  }
  const std::vector<double> a{1.0, 0.5 - H};
  const std::vector<double> c{H + 1.5};
  const double f = pfq<double>(a, c, r, 1e-17);
  return std::pow(lo, H + 0.5) * std::pow(hi, H - 0.5) * f / (H + 0.5);
}

/// R(s,t) = int_0^T (t-u)^{H-1/2} (s-u)^{H-1/2} du for s, t >= T.
inline double covariance_window(double s, double t, double H, double T) {
  detail::check_hurst(H);
  if (!(T > 0.0 && s >= T && t >= T)) fail(ErrorKind::InvalidParams, "covariance_window: need s, t >= T > 0");
  const double lo = std::min(s, t), hi = std::max(s, t);
  if (lo == hi) return (std::pow(lo, 2.0 * H) - std::pow(lo - T, 2.0 * H)) / (2.0 * H);
  return detail::rl_cross_integral(lo, hi, H, T);
}

inline double covariance(const KernelSpec& spec, double s, double t) {
  if (spec.variant == KernelVariant::RlFull) return covariance_rl(s, t, spec.hurst);
  return covariance_window(s, t, spec.hurst, spec.T);
}

/// Variance R(t,t) of the process at time t.
inline double variance(const KernelSpec& spec, double t) {
  const double H = spec.hurst;
  if (spec.variant == KernelVariant::RlFull) return std::pow(t, 2.0 * H) / (2.0 * H);
  return (std::pow(t, 2.0 * H) - std::pow(t - spec.T, 2.0 * H)) / (2.0 * H);
}

/// int R(t,t) dt over the variant's domain, which equals the sum of all
/// squared coefficient norms.
inline double trace(const KernelSpec& spec) {
  spec.validate();
  const double H = spec.hurst;
  const double k = 2.0 * H * (2.0 * H + 1.0);
  if (spec.variant == KernelVariant::RlFull) return 1.0 / k;
  auto antiderivative = [&](double t) {
    return (std::pow(t, 2.0 * H + 1.0) - std::pow(t - spec.T, 2.0 * H + 1.0)) / k;
  };
  return antiderivative(spec.t_end()) - antiderivative(spec.t_begin());
}

}  // namespace roughquant
