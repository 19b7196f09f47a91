#pragma once

// VIX futures and VIX options in the rough Bergomi model, priced by
// deterministic summation over a product quantizer of the window process
// Z^{T,Delta}_t = int_0^T (t-s)^{H-1/2} dW_s, t in [T, T+Delta].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "roughquant/errors.hpp"
#include "roughquant/gaussian_quantizer.hpp"
#include "roughquant/product_quantizer.hpp"
#include "roughquant/quadrature.hpp"
#include "roughquant/volterra_kernels.hpp"

namespace roughquant {

// ---------------------------------------------------------------------------
// Vol-of-vol parametrisations

/// C_H = sqrt(2H Gamma(3/2-H) / (Gamma(H+1/2) Gamma(2-2H))).
inline double c_h(double H) {
  return std::sqrt(2.0 * H * std::tgamma(1.5 - H) / (std::tgamma(H + 0.5) * std::tgamma(2.0 - 2.0 * H)));
}

enum class VolOfVolKind { Nu, Eta, Gamma };

struct VolOfVol {
  VolOfVolKind kind = VolOfVolKind::Eta;
  double value = 1.9;

  static VolOfVol nu(double v) { return {VolOfVolKind::Nu, v}; }
  static VolOfVol eta(double v) { return {VolOfVolKind::Eta, v}; }
  static VolOfVol gamma(double v) { return {VolOfVolKind::Gamma, v}; }
};

/// All three parametrisations, linked by gamma = 2 nu C_H and nu = eta sqrt(2H) / (2 C_H).
struct VolParams {
  double nu = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
};

inline VolParams resolve(const VolOfVol& v, double H) {
  if (!(v.value >= 0.0)) fail(ErrorKind::InvalidParams, "vol-of-vol must be non-negative");
  const double c = c_h(H);
  const double root = std::sqrt(2.0 * H);
  VolParams p;
  switch (v.kind) {
    case VolOfVolKind::Nu: p.nu = v.value; break;
    case VolOfVolKind::Eta: p.nu = v.value * root / (2.0 * c); break;
    case VolOfVolKind::Gamma: p.nu = v.value / (2.0 * c); break;
  }
  p.gamma = 2.0 * p.nu * c;
  p.eta = p.gamma / root;
  if (v.kind == VolOfVolKind::Gamma) p.gamma = v.value;
  if (v.kind == VolOfVolKind::Eta) p.eta = v.value;
  return p;
}

// ---------------------------------------------------------------------------
// Forward variance curves

class ForwardCurve {
 public:
  /// Scenario 1: 0.234^2; 2: 0.234^2 (1+t)^2; 3: 0.234^2 sqrt(1+t).
  static ForwardCurve scenario(int id) {
    constexpr double v = 0.234 * 0.234;
    ForwardCurve c;
    c.scenario_ = id;
    switch (id) {
      case 1: c.fn_ = [](double) { return v; }; break;
      case 2: c.fn_ = [](double t) { return v * (1.0 + t) * (1.0 + t); }; break;
      case 3: c.fn_ = [](double t) { return v * std::sqrt(1.0 + t); }; break;
      default: fail(ErrorKind::InvalidParams, "unknown forward-curve scenario " + std::to_string(id));
    }
    c.name_ = "scenario" + std::to_string(id);
    return c;
  }

  static ForwardCurve flat(double v) {
    ForwardCurve c;
    c.fn_ = [v](double) { return v; };
    c.name_ = "flat";
    return c;
  }

  /// Piecewise-linear interpolation through (t_i, v_i); t strictly increasing.
  /// Evaluation outside [t_0, t_last] is a CurveError.
  static ForwardCurve tabulated(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.size() < 2) fail(ErrorKind::CurveError, "tabulated curve needs >= 2 matching points");
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (!(t[i] > t[i - 1])) fail(ErrorKind::CurveError, "tabulated curve times must increase strictly");
    }
    auto tt = std::make_shared<const std::vector<double>>(std::move(t));
    auto vv = std::make_shared<const std::vector<double>>(std::move(v));
    ForwardCurve c;
    c.fn_ = [tt, vv](double x) {
      const auto& ts = *tt;
      if (x < ts.front() - 1e-12 || x > ts.back() + 1e-12) {
        fail(ErrorKind::CurveError, "time " + std::to_string(x) + " outside the tabulated curve");
      }
      const auto it = std::upper_bound(ts.begin(), ts.end(), x);
      const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - ts.begin()), 1, ts.size() - 1);
      const double w = (x - ts[j - 1]) / (ts[j] - ts[j - 1]);
      return (1.0 - w) * (*vv)[j - 1] + w * (*vv)[j];
    };
    c.name_ = "tabulated";
    return c;
  }

  double operator()(double t) const { return fn_(t); }
  const std::string& name() const { return name_; }
  int scenario_id() const { return scenario_; }

 private:
  std::function<double(double)> fn_;
  std::string name_;
  int scenario_ = 0;
};

// ---------------------------------------------------------------------------
// Configuration

enum class AllocationMode { Optimized, RateOptimal };

/// Graded: Gauss-Legendre panels in y with t = T + Delta y^q, q = 1/(2H),
/// which smooths the (t-T)^{2H} endpoint behaviour. Uniform: equally
/// spaced nodes with trapezoidal weights.
enum class TimeGridKind { Graded, Uniform };

inline std::string to_string(AllocationMode m) { return m == AllocationMode::Optimized ? "optimized" : "rate_optimal"; }
inline std::string to_string(TimeGridKind k) { return k == TimeGridKind::Graded ? "graded" : "uniform"; }

struct PricingConfig {
  double hurst = 0.1;
  VolOfVol vol = VolOfVol::eta(1.9);
  double maturity = 0.25;  // years
  double delta = 30.0 / 365.0;
  ForwardCurve curve = ForwardCurve::scenario(1);
  std::uint64_t budget = 1000;
  std::size_t grid_size = 300;
  AllocationMode allocation_mode = AllocationMode::Optimized;
  RateMode rate_mode = RateMode::FloorLog;
  TimeGridKind grid_kind = TimeGridKind::Graded;
  std::size_t max_atoms = 50'000'000;

  void validate() const {
    if (!(hurst > 0.0 && hurst <= 0.5)) fail(ErrorKind::InvalidParams, "PricingConfig: H must lie in (0, 1/2]");
    if (!(maturity > 0.0)) fail(ErrorKind::InvalidParams, "PricingConfig: maturity must be positive");
    if (!(delta > 0.0)) fail(ErrorKind::InvalidParams, "PricingConfig: Delta must be positive");
    if (budget < 1) fail(ErrorKind::InvalidBudget, "PricingConfig: budget must be >= 1");
    if (grid_size < 2) fail(ErrorKind::InvalidParams, "PricingConfig: grid_size must be >= 2");
    (void)resolve(vol, hurst);
  }

  KernelSpec kernel() const { return KernelSpec::rl_window(hurst, maturity, delta); }
  double gamma() const { return resolve(vol, hurst).gamma; }
};

inline nlohmann::json to_json(const PricingConfig& c) {
  const VolParams v = resolve(c.vol, c.hurst);
  return {{"H", c.hurst},        {"nu", v.nu},
          {"eta", v.eta},        {"gamma", v.gamma},
          {"T", c.maturity},     {"delta", c.delta},
          {"curve", c.curve.name()}, {"N", c.budget},
          {"grid_size", c.grid_size}, {"grid_kind", to_string(c.grid_kind)},
          {"allocation_mode", to_string(c.allocation_mode)},
          {"rate_mode", to_string(c.rate_mode)}};
}

// ---------------------------------------------------------------------------
// Time grid and integrand

struct PricingGrid {
  std::vector<double> nodes;    // in (T, T+Delta) or [T, T+Delta]
  std::vector<double> weights;  // sum to Delta
};

namespace detail {

// Largest supported Gauss-Legendre order dividing `size`.
inline unsigned panel_order(std::size_t size) {
  for (unsigned k : {10u, 8u, 6u, 5u, 4u, 3u, 2u}) {
    if (size % k == 0) return k;
  }
  return 1;
}

}  // namespace detail

inline PricingGrid pricing_grid(double T, double delta, double H, std::size_t size,
                                TimeGridKind kind = TimeGridKind::Graded) {
  if (size < 2) fail(ErrorKind::InvalidParams, "pricing_grid: need at least 2 nodes");
  PricingGrid g;
  g.nodes.resize(size);
  g.weights.resize(size);
  if (kind == TimeGridKind::Uniform) {
    const double h = delta / static_cast<double>(size - 1);
    for (std::size_t i = 0; i < size; ++i) {
      g.nodes[i] = T + h * static_cast<double>(i);
      g.weights[i] = (i == 0 || i + 1 == size) ? 0.5 * h : h;
    }
    g.nodes.back() = T + delta;
    return g;
  }
  const double q = std::min(1.0 / (2.0 * H), 10.0);
  const unsigned order = detail::panel_order(size);
  const quad::Grid y = quad::composite_grid(0.0, 1.0, size / order, order);
  for (std::size_t i = 0; i < size; ++i) {
    const double yi = y.nodes[i];
    g.nodes[i] = T + delta * std::pow(yi, q);
    g.weights[i] = y.weights[i] * delta * q * std::pow(yi, q - 1.0);
  }
  return g;
}

inline PricingGrid pricing_grid(const PricingConfig& c) {
  return pricing_grid(c.maturity, c.delta, c.hurst, c.grid_size, c.grid_kind);
}

/// (gamma^2/2) (int_0^{t-T} K(s)^2 ds - int_0^t K(s)^2 ds) for K(s) = s^{H-1/2}.
inline double drift_correction(double t, double T, double H, double gamma) {
  if (!(t >= T)) fail(ErrorKind::InvalidParams, "drift_correction: need t >= T");
  return 0.5 * gamma * gamma * (std::pow(t - T, 2.0 * H) - std::pow(t, 2.0 * H)) / (2.0 * H);
}

/// Per-node factors w_i v0(t_i) exp(drift(t_i)) / Delta, so that
/// VIX^2 = sum_i factor_i exp(gamma z(t_i)).
inline std::vector<double> vix_integrand_weights(const PricingConfig& c, const PricingGrid& g) {
  const double gamma = c.gamma();
  std::vector<double> f(g.nodes.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = g.nodes[i];
    const double v0 = c.curve(t);
    if (!(v0 > 0.0) || !std::isfinite(v0)) {
      fail(ErrorKind::CurveError, "forward variance is not positive at t = " + std::to_string(t));
    }
    f[i] = g.weights[i] * v0 * std::exp(drift_correction(t, c.maturity, c.hurst, gamma)) / c.delta;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Quantized law

struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probabilities;

  std::size_t size() const { return values.size(); }
};

struct QuantizedVix {
  DiscreteLaw law;
  Allocation allocation;
  double quantization_error_sq = 0.0;  // E||Z - Z^d||^2 over the window
};

inline Allocation pricing_allocation(const PricingConfig& c) {
  const KernelSpec spec = c.kernel();
  if (c.budget < 2) return Allocation{1, {1}, c.budget};
  if (c.allocation_mode == AllocationMode::Optimized) return optimize_allocation(c.budget, spec);
  return rate_optimal_allocation(c.budget, c.hurst, c.rate_mode);
}

/// Law of the quantized VIX: one atom per trajectory of the window
/// quantizer, streamed so that only the atoms are stored.
inline QuantizedVix quantized_vix_law(const PricingConfig& c, const Allocation& allocation) {
  c.validate();
  allocation.validate();
  const std::uint64_t rows = allocation.trajectories();
  if (rows > c.max_atoms) {
    fail(ErrorKind::CapacityExceeded, "quantized_vix_law: " + std::to_string(rows) +
                                          " atoms exceed the cap of " + std::to_string(c.max_atoms));
  }
  const KernelSpec spec = c.kernel();
  const PricingGrid g = pricing_grid(c);
  const std::vector<double> factor = vix_integrand_weights(c, g);
  const double gamma = c.gamma();
  const std::size_t G = g.nodes.size();
  const std::size_t m = allocation.m;
  const auto& d = allocation.d;

  QuantizedVix out;
  out.allocation = allocation;
  out.quantization_error_sq = quantization_error_sq_exact(allocation, spec);
  if (gamma == 0.0) {
    // Deterministic variance: the law is a single point whatever the quantizer.
    double vix2 = 0.0;
    for (std::size_t k = 0; k < G; ++k) vix2 += factor[k];
    out.law.values.assign(1, std::sqrt(vix2));
    out.law.probabilities.assign(1, 1.0);
    return out;
  }

  std::vector<std::shared_ptr<const QuantizerGrid1D>> grids(m);
  for (std::size_t n = 0; n < m; ++n) grids[n] = GridCache::global().get(d[n]);
  const std::vector<double> coef = coefficient_matrix(spec, m, g.nodes);
  out.law.values.resize(rows);
  out.law.probabilities.resize(rows);
  std::vector<std::uint32_t> idx(m);
  std::vector<double> z(G);
  for (std::uint64_t r = 0; r < rows; ++r) {
    detail::unrank(r, d, idx.data());
    std::fill(z.begin(), z.end(), 0.0);
    double p = 1.0;
    for (std::size_t n = 0; n < m; ++n) {
      p *= grids[n]->probabilities[idx[n]];
      if (d[n] == 1) continue;
      const double x = grids[n]->points[idx[n]];
      const double* cn = coef.data() + n * G;
      for (std::size_t k = 0; k < G; ++k) z[k] += cn[k] * x;
    }
    double vix2 = 0.0;
    for (std::size_t k = 0; k < G; ++k) vix2 += factor[k] * std::exp(gamma * z[k]);
    out.law.values[r] = std::sqrt(vix2);
    out.law.probabilities[r] = p;
  }
  return out;
}

inline QuantizedVix quantized_vix_law(const PricingConfig& c) {
  c.validate();
  return quantized_vix_law(c, pricing_allocation(c));
}

// ---------------------------------------------------------------------------
// Prices

struct Payoff {
  enum class Kind { Call, Put, Custom };
  Kind kind = Kind::Call;
  double strike = 0.0;
  std::function<double(double)> custom;

  static Payoff call(double K) { return {Kind::Call, K, {}}; }
  static Payoff put(double K) { return {Kind::Put, K, {}}; }
  static Payoff custom_fn(std::function<double(double)> f) { return {Kind::Custom, 0.0, std::move(f)}; }

  double operator()(double x) const {
    switch (kind) {
      case Kind::Call: return std::max(x - strike, 0.0);
      case Kind::Put: return std::max(strike - x, 0.0);
      case Kind::Custom: return custom(x);
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Call: return "call";
      case Kind::Put: return "put";
      case Kind::Custom: return "custom";
    }
    return "unknown";
  }
};

struct PriceReport {
  std::string method;  // "quantization" or "monte_carlo"
  double price = 0.0;
  double error_metric = 0.0;  // quantizer L2 error (squared) or MC standard error
  double standard_error = 0.0;
  std::uint64_t n_trajectories = 0;
  double runtime_ms = 0.0;
  std::string allocation;
  double bound_shape = 0.0;  // log(N)^{-H}, up to an unfitted constant
  nlohmann::json params;
};

inline nlohmann::json to_json(const PriceReport& r) {
  nlohmann::json j{{"method", r.method},
                   {"price", r.price},
                   {"params", r.params},
                   {"n_trajectories", r.n_trajectories},
                   {"error_metric", r.error_metric},
                   {"runtime_ms", r.runtime_ms}};
  if (r.method == "monte_carlo") j["standard_error"] = r.standard_error;
  if (!r.allocation.empty()) j["allocation"] = r.allocation;
  if (r.bound_shape > 0.0) j["bound_shape"] = r.bound_shape;
  return j;
}

inline double expectation(const DiscreteLaw& law, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) acc += law.probabilities[i] * f(law.values[i]);
  return acc;
}

namespace detail {

inline PriceReport quantized_report(const PricingConfig& c, const QuantizedVix& q, double price,
                                    std::chrono::steady_clock::time_point start) {
  PriceReport r;
  r.method = "quantization";
  r.price = price;
  r.error_metric = q.quantization_error_sq;
  r.n_trajectories = q.allocation.trajectories();
  r.allocation = to_string(q.allocation);
  if (c.budget >= 2) r.bound_shape = std::pow(std::log(static_cast<double>(c.budget)), -c.hurst);
  r.params = to_json(c);
  r.params["m"] = q.allocation.m;
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

inline PriceReport vix_future_price(const PricingConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const QuantizedVix q = quantized_vix_law(c);
  const double price = expectation(q.law, [](double x) { return x; });
  return detail::quantized_report(c, q, price, start);
}

inline PriceReport vix_option_price(const PricingConfig& c, const Payoff& payoff) {
  if (payoff.kind != Payoff::Kind::Custom && !(payoff.strike >= 0.0)) {
    fail(ErrorKind::InvalidParams, "vix_option_price: strike must be non-negative");
  }
  if (payoff.kind == Payoff::Kind::Custom && !payoff.custom) {
    fail(ErrorKind::InvalidParams, "vix_option_price: custom payoff is empty");
  }
  const auto start = std::chrono::steady_clock::now();
  const QuantizedVix q = quantized_vix_law(c);
  const double price = expectation(q.law, [&](double x) { return payoff(x); });
  PriceReport r = detail::quantized_report(c, q, price, start);
  r.params["payoff"] = payoff.name();
  if (payoff.kind != Payoff::Kind::Custom) r.params["strike"] = payoff.strike;
  return r;
}

// ---------------------------------------------------------------------------
// Maturity table

struct MaturityPrice {
  int maturity_months = 0;
  double price = 0.0;
};

inline std::vector<MaturityPrice> price_by_maturity(PricingConfig c, const std::vector<int>& months) {
  std::vector<MaturityPrice> out;
  out.reserve(months.size());
  for (int mo : months) {
    if (mo <= 0) fail(ErrorKind::InvalidParams, "price_by_maturity: maturities must be positive");
    c.maturity = mo / 12.0;
    out.push_back({mo, vix_future_price(c).price});
  }
  return out;
}

inline void write_maturity_csv(std::ostream& os, const std::vector<MaturityPrice>& rows) {
  os << "maturity_months,price\n";
  for (const auto& r : rows) os << r.maturity_months << ',' << detail::format_double(r.price) << '\n';
}

}  // namespace roughquant
