#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "roughquant/errors.hpp"

namespace roughquant::quad {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

template <unsigned N>
Rule expand_boost_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  r.nodes.reserve(N);
  r.weights.reserve(N);
  // boost stores the non-negative half; index 0 is the centre node for odd N.
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    r.nodes.push_back(-x[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

}  // namespace detail

/// Rules used by the library. Only a fixed menu of orders is offered.
inline const Rule& rule(unsigned n) {
  static const Rule r1{{0.0}, {2.0}};
  static const Rule r2 = detail::expand_boost_rule<2>();
  static const Rule r3 = detail::expand_boost_rule<3>();
  static const Rule r4 = detail::expand_boost_rule<4>();
  static const Rule r5 = detail::expand_boost_rule<5>();
  static const Rule r6 = detail::expand_boost_rule<6>();
  static const Rule r8 = detail::expand_boost_rule<8>();
  static const Rule r10 = detail::expand_boost_rule<10>();
  static const Rule r16 = detail::expand_boost_rule<16>();
  static const Rule r20 = detail::expand_boost_rule<20>();
  switch (n) {
    case 1: return r1;
    case 2: return r2;
    case 3: return r3;
    case 4: return r4;
    case 5: return r5;
    case 6: return r6;
    case 8: return r8;
    case 10: return r10;
    case 16: return r16;
    case 20: return r20;
    default: fail(ErrorKind::InvalidParams, "unsupported Gauss-Legendre order");
  }
}

/// One Gauss-Legendre panel over [a, b].
template <class F>
auto panel(F&& f, double a, double b, unsigned order = 16) {
  const Rule& r = rule(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  using R = decltype(f(mid));
  R acc{};
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    acc += r.weights[i] * f(mid + half * r.nodes[i]);
  }
  return acc * half;
}

/// Composite rule with `panels` equal panels.
template <class F>
auto composite(F&& f, double a, double b, std::size_t panels, unsigned order = 16) {
  const double h = (b - a) / static_cast<double>(panels);
  using R = decltype(f(a));
  R acc{};
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + h * static_cast<double>(k);
    const double hi = (k + 1 == panels) ? b : lo + h;
    acc += panel(f, lo, hi, order);
  }
  return acc;
}

/// Composite rule whose panels shrink geometrically towards `a`, for
/// integrands with an algebraic endpoint singularity at `a`.
template <class F>
auto graded_left(F&& f, double a, double b, int levels = 12, double ratio = 0.25,
                 unsigned order = 16) {
  using R = decltype(f(a));
  R acc{};
  double hi = b;
  for (int k = 0; k < levels; ++k) {
    const double lo = a + (hi - a) * ratio;
    acc += panel(f, lo, hi, order);
    hi = lo;
  }
  acc += panel(f, a, hi, order);
  return acc;
}

/// Nodes and weights of a composite rule, materialised for reuse.
struct Grid {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Grid composite_grid(double a, double b, std::size_t panels, unsigned order) {
  const Rule& r = rule(order);
  Grid g;
  g.nodes.reserve(panels * r.nodes.size());
  g.weights.reserve(panels * r.nodes.size());
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + h * static_cast<double>(k);
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      g.nodes.push_back(mid + 0.5 * h * r.nodes[i]);
      g.weights.push_back(0.5 * h * r.weights[i]);
    }
  }
  return g;
}

}  // namespace roughquant::quad
