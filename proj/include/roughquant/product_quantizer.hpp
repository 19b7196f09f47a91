#pragma once

// Size allocation and assembly of product functional quantizers: every
// trajectory is sum_n K[psi_n](t) x_{i_n}^{d(n)}, one optimal Gaussian grid
// per expansion coordinate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "roughquant/errors.hpp"
#include "roughquant/gaussian_quantizer.hpp"
#include "roughquant/volterra_kernels.hpp"

namespace roughquant {

struct Allocation {
  std::size_t m = 1;
  std::vector<std::size_t> d{1};
  std::uint64_t budget = 1;

  /// Number of trajectories, prod d(n).
  std::uint64_t trajectories() const {
    std::uint64_t p = 1;
    for (std::size_t v : d) p *= v;
    return p;
  }

  void validate() const {
    if (m == 0 || d.size() != m) fail(ErrorKind::InvalidParams, "Allocation: d must have length m >= 1");
    for (std::size_t i = 0; i < m; ++i) {
      if (d[i] == 0) fail(ErrorKind::InvalidParams, "Allocation: entries of d must be >= 1");
      if (i > 0 && d[i] > d[i - 1]) fail(ErrorKind::InvalidParams, "Allocation: d must be non-increasing");
    }
    if (trajectories() > budget) fail(ErrorKind::InvalidParams, "Allocation: prod d exceeds the budget");
  }
};

inline std::string to_string(const Allocation& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.d.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(a.d[i]);
  }
  return s + ")";
}

// ---------------------------------------------------------------------------
// Rate-optimal allocation

enum class RateMode {
  Asymptotic,      // m*(N) = max{m : a_m <= log N}
  FloorLog,        // m = floor(log N)
  FloorLogMinus1,  // m = floor(log N) - 1
  FloorLogMinus2,  // m = floor(log N) - 2
};

inline std::string to_string(RateMode mode) {
  switch (mode) {
    case RateMode::Asymptotic: return "asymptotic";
    case RateMode::FloorLog: return "floor-log";
    case RateMode::FloorLogMinus1: return "floor-log-1";
    case RateMode::FloorLogMinus2: return "floor-log-2";
  }
  return "unknown";
}

/// a_m = 1/2 log prod_{j<=m} (m/j)^{2H+1}.
inline double rate_threshold(std::size_t m, double H) {
  const double mm = static_cast<double>(m);
  return 0.5 * (2.0 * H + 1.0) * (mm * std::log(mm) - std::lgamma(mm + 1.0));
}

inline std::size_t rate_optimal_length(std::uint64_t N, double H, RateMode mode) {
  const double logN = std::log(static_cast<double>(N));
  long m = 0;
  switch (mode) {
    case RateMode::Asymptotic: {
      std::size_t k = 1;
      while (rate_threshold(k + 1, H) <= logN) ++k;
      return k;
    }
    case RateMode::FloorLog: m = static_cast<long>(std::floor(logN)); break;
    case RateMode::FloorLogMinus1: m = static_cast<long>(std::floor(logN)) - 1; break;
    case RateMode::FloorLogMinus2: m = static_cast<long>(std::floor(logN)) - 2; break;
  }
  if (m < 1) {
    fail(ErrorKind::InvalidBudget, "rate_optimal_allocation: budget " + std::to_string(N) +
                                       " gives an empty expansion in mode " + to_string(mode));
  }
  return static_cast<std::size_t>(m);
}

/// d(n) = floor(N^{1/m} n^{-(H+1/2)} (m!)^{(2H+1)/(2m)}), clamped below at 1.
inline Allocation rate_optimal_allocation(std::uint64_t N, double H,
                                          RateMode mode = RateMode::Asymptotic) {
  if (N < 2) fail(ErrorKind::InvalidBudget, "rate_optimal_allocation: N must be >= 2");
  if (!(H > 0.0 && H <= 0.5)) fail(ErrorKind::InvalidParams, "rate_optimal_allocation: H must lie in (0, 1/2]");
  const std::size_t m = rate_optimal_length(N, H, mode);
  const double mm = static_cast<double>(m);
  const double log_scale =
      std::log(static_cast<double>(N)) / mm + (2.0 * H + 1.0) / (2.0 * mm) * std::lgamma(mm + 1.0);
  Allocation a;
  a.m = m;
  a.budget = N;
  a.d.resize(m);
  for (std::size_t n = 1; n <= m; ++n) {
    const double v = std::exp(log_scale - (H + 0.5) * std::log(static_cast<double>(n)));
    // Guard against v landing a few ulps below an integer.
    const double f = std::floor(v * (1.0 + 1e-12));
    a.d[n - 1] = static_cast<std::size_t>(std::max(1.0, f));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Objective and error

/// ||K[psi_n]||^2 for n = 1..count over the variant's domain.
inline std::vector<double> coefficient_norms(const KernelSpec& spec, std::size_t count) {
  spec.validate();
  if (spec.variant == KernelVariant::RlFull) return rl_full_norms(spec.hurst, count);
  std::vector<double> out(count);
  for (std::size_t n = 1; n <= count; ++n) out[n - 1] = coeff_l2_norm_sq(n, spec);
  return out;
}

/// A(m,d) = sum_n ||K[psi_n]||^2 (eps^2(d(n)) - 1), with norms[n-1] = ||K[psi_n]||^2.
inline double allocation_objective(const std::vector<std::size_t>& d, const std::vector<double>& norms) {
  if (norms.size() < d.size()) fail(ErrorKind::InvalidParams, "allocation_objective: too few norms");
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0) fail(ErrorKind::InvalidParams, "allocation_objective: entries of d must be >= 1");
    if (d[i] > 1) acc += norms[i] * (optimal_distortion(d[i]) - 1.0);
  }
  return acc;
}

inline double allocation_objective(const Allocation& a, const KernelSpec& spec) {
  return allocation_objective(a.d, coefficient_norms(spec, a.d.size()));
}

struct QuantizationError {
  double partial = 0.0;     // explicit sum up to tail_terms
  double tail_bound = 0.0;  // bound on the omitted terms
  std::size_t tail_terms = 0;

  double upper() const { return partial + tail_bound; }
};

/// E||Z - Z^d||^2 = sum_{n<=m} ||K_n||^2 eps^2(d(n)) + sum_{n>m} ||K_n||^2.
/// Terms up to tail_terms are summed; the rest is bounded by
/// C sum_{k>K} (k-1/2)^{-(2H+1)} <= C (K-1/2)^{-2H} / (2H), with C the largest
/// ||K_k||^2 (k-1/2)^{2H+1} seen over the upper half of the explicit range.
inline QuantizationError quantization_error_sq(const Allocation& a, const KernelSpec& spec,
                                               std::size_t tail_terms = 10000) {
  a.validate();
  if (tail_terms < a.m) fail(ErrorKind::InvalidParams, "quantization_error_sq: tail_terms must be >= m");
  const double H = spec.hurst;
  const std::vector<double> norms = coefficient_norms(spec, tail_terms);
  QuantizationError e;
  e.tail_terms = tail_terms;
  for (std::size_t n = 1; n <= tail_terms; ++n) {
    const double w = norms[n - 1];
    e.partial += n <= a.m ? w * optimal_distortion(a.d[n - 1]) : w;
  }
  double C = 0.0;
  for (std::size_t k = tail_terms / 2 + 1; k <= tail_terms; ++k) {
    C = std::max(C, norms[k - 1] * std::pow(static_cast<double>(k) - 0.5, 2.0 * H + 1.0));
  }
  e.tail_bound = C * std::pow(static_cast<double>(tail_terms) - 0.5, -2.0 * H) / (2.0 * H);
  return e;
}

/// Same quantity through the exact identity sum_n ||K_n||^2 = trace, so
/// the error is trace + A(m,d) with no truncation.
inline double quantization_error_sq_exact(const Allocation& a, const KernelSpec& spec) {
  a.validate();
  return trace(spec) + allocation_objective(a, spec);
}

// ---------------------------------------------------------------------------
// Optimal allocation

struct OptimizeOptions {
  std::size_t extra_length = 3;  // m ranges over 1..floor(log N) + extra_length
};

namespace detail {

// Strict improvement beyond rounding noise.
inline bool improves(double candidate, double incumbent) {
  if (!std::isfinite(incumbent)) return true;
  return candidate < incumbent - 1e-14 * std::abs(incumbent);
}

// Minimises sum_i w_i (eps^2(d_i) - 1) over non-increasing d with all
// d_i >= 2 and prod d_i <= N, for fixed length m.
class AllocationSearch {
 public:
  AllocationSearch(std::uint64_t N, const std::vector<double>& w, std::size_t m)
      : N_(N), w_(w), m_(m), cur_(m) {}

  bool run() {
    if (pow2(m_) > N_) return false;
    best_value_ = std::numeric_limits<double>::infinity();
    visit(0, 1, N_, 0.0);
    return std::isfinite(best_value_);
  }

  double best_value() const { return best_value_; }
  const std::vector<std::size_t>& best() const { return best_; }

 private:
  static std::uint64_t pow2(std::size_t k) { return k >= 63 ? ~std::uint64_t{0} : std::uint64_t{1} << k; }

  double gain(std::size_t i, std::uint64_t d) const {
    return w_[i] * (optimal_distortion(static_cast<std::size_t>(d)) - 1.0);
  }

  void consider(double value) {
    // Strict improvement only: candidates arrive with larger d(1) first.
    if (improves(value, best_value_)) {
      best_value_ = value;
      best_ = cur_;
    }
  }

  void visit(std::size_t i, std::uint64_t prod, std::uint64_t prev, double acc) {
    const std::uint64_t room = N_ / prod;
    const std::size_t left = m_ - i - 1;
    const std::uint64_t hi = std::min<std::uint64_t>(prev, room / pow2(left));
    if (hi < 2) return;
    if (left == 0) {
      // eps is decreasing, so the last slot takes the largest feasible size.
      cur_[i] = hi;
      consider(acc + gain(i, hi));
      return;
    }
    for (std::uint64_t d = hi; d >= 2; --d) {
      const double here = acc + gain(i, d);
      // Bound: every later slot at its individually largest feasible size.
      double bound = here;
      std::uint64_t cap = std::min<std::uint64_t>(d, room / d);
      for (std::size_t j = i + 1; j < m_; ++j) {
        const std::uint64_t cj = std::min<std::uint64_t>(cap, (room / d) / pow2(m_ - j - 1));
        if (cj >= 2) bound += gain(j, cj);
      }
      if (bound >= best_value_) continue;
      cur_[i] = d;
      visit(i + 1, prod * d, d, here);
    }
  }

  std::uint64_t N_;
  const std::vector<double>& w_;
  std::size_t m_;
  std::vector<std::size_t> cur_;
  std::vector<std::size_t> best_;
  double best_value_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Exact minimiser of A(m,d) over m in 1..floor(log N)+3 and non-increasing
/// d with prod d <= N. Ties go to the shorter expansion, then to larger d(1).
inline Allocation optimize_allocation(std::uint64_t N, const KernelSpec& spec,
                                      const OptimizeOptions& opt = {}) {
  if (N < 2) fail(ErrorKind::InvalidBudget, "optimize_allocation: N must be >= 2");
  const std::size_t m_max =
      static_cast<std::size_t>(std::floor(std::log(static_cast<double>(N)))) + opt.extra_length;
  const std::vector<double> w = coefficient_norms(spec, m_max);
  Allocation best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= m_max; ++m) {
    detail::AllocationSearch search(N, w, m);
    if (!search.run()) continue;
    if (detail::improves(search.best_value(), best_value)) {
      best_value = search.best_value();
      best.m = m;
      best.d = search.best();
    }
  }
  best.budget = N;
  return best;
}

// ---------------------------------------------------------------------------
// Quantizer assembly

struct ProductQuantizer {
  KernelSpec spec;
  Allocation allocation;
  std::vector<double> time_grid;
  std::vector<double> trajectories;        // row-major, size() x time_grid.size()
  std::vector<double> probabilities;
  std::vector<std::uint32_t> multi_indices;  // row-major, size() x allocation.m, 0-based

  std::size_t size() const { return probabilities.size(); }
  std::size_t grid_size() const { return time_grid.size(); }
  const double* trajectory(std::size_t i) const { return trajectories.data() + i * grid_size(); }
  const std::uint32_t* multi_index(std::size_t i) const { return multi_indices.data() + i * allocation.m; }
};

/// Equally spaced grid of `points` nodes over the variant's domain, endpoints included.
inline std::vector<double> uniform_time_grid(const KernelSpec& spec, std::size_t points) {
  if (points < 2) fail(ErrorKind::InvalidParams, "uniform_time_grid: need at least 2 points");
  const double a = spec.t_begin(), b = spec.t_end();
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  g.back() = b;
  return g;
}

struct BuildOptions {
  std::size_t max_values = 100'000'000;  // cap on trajectories x grid points
  unsigned threads = 1;
};

/// Coefficient matrix K[psi_n](t_g), row n-1, for n = 1..m.
inline std::vector<double> coefficient_matrix(const KernelSpec& spec, std::size_t m,
                                              const std::vector<double>& time_grid) {
  const std::size_t G = time_grid.size();
  std::vector<double> c(m * G);
  for (std::size_t n = 1; n <= m; ++n) {
    for (std::size_t g = 0; g < G; ++g) c[(n - 1) * G + g] = coeff(spec, n, time_grid[g]);
  }
  return c;
}

namespace detail {

inline void unrank(std::uint64_t row, const std::vector<std::size_t>& d, std::uint32_t* idx) {
  for (std::size_t k = d.size(); k-- > 0;) {
    idx[k] = static_cast<std::uint32_t>(row % d[k]);
    row /= d[k];
  }
}

}  // namespace detail

inline ProductQuantizer build_quantizer(const Allocation& allocation, const KernelSpec& spec,
                                        const std::vector<double>& time_grid,
                                        const BuildOptions& opt = {}) {
  allocation.validate();
  spec.validate();
  const double lo = spec.t_begin(), hi = spec.t_end();
  for (double t : time_grid) {
    if (!(t >= lo - 1e-12 && t <= hi + 1e-12)) {
      fail(ErrorKind::InvalidParams, "build_quantizer: time grid leaves the variant's domain");
    }
  }
  const std::uint64_t rows = allocation.trajectories();
  const std::size_t G = time_grid.size();
  if (G != 0 && rows > opt.max_values / G) {
    fail(ErrorKind::CapacityExceeded, "build_quantizer: " + std::to_string(rows) + " trajectories x " +
                                          std::to_string(G) + " points exceeds the cap of " +
                                          std::to_string(opt.max_values) + " values");
  }
  const std::size_t m = allocation.m;
  const auto& d = allocation.d;

  ProductQuantizer q;
  q.spec = spec;
  q.allocation = allocation;
  q.time_grid = time_grid;
  q.trajectories.assign(rows * G, 0.0);
  q.probabilities.assign(rows, 0.0);
  q.multi_indices.assign(rows * m, 0);

  std::vector<std::shared_ptr<const QuantizerGrid1D>> grids(m);
  for (std::size_t n = 0; n < m; ++n) grids[n] = GridCache::global().get(d[n]);
  const std::vector<double> coef = coefficient_matrix(spec, m, time_grid);

  auto fill = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t r = begin; r < end; ++r) {
      std::uint32_t* idx = q.multi_indices.data() + r * m;
      detail::unrank(r, d, idx);
      double p = 1.0;
      double* row = q.trajectories.data() + r * G;
      for (std::size_t n = 0; n < m; ++n) {
        const QuantizerGrid1D& grid = *grids[n];
        p *= grid.probabilities[idx[n]];
        if (d[n] == 1) continue;  // grid {0}
        const double x = grid.points[idx[n]];
        const double* c = coef.data() + n * G;
        for (std::size_t g = 0; g < G; ++g) row[g] += c[g] * x;
      }
      q.probabilities[r] = p;
    }
  };

  const unsigned threads = std::max(1u, opt.threads);
  if (threads == 1 || rows < 2 * threads) {
    fill(0, rows);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (rows + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
      const std::uint64_t b = std::min<std::uint64_t>(rows, k * chunk);
      const std::uint64_t e = std::min<std::uint64_t>(rows, b + chunk);
      if (b < e) pool.emplace_back(fill, b, e);
    }
  }
  return q;
}

/// Probability-weighted mean and second moment at every grid point.
struct QuantizerMoments {
  std::vector<double> mean;
  std::vector<double> second;
};

inline QuantizerMoments weighted_moments(const ProductQuantizer& q) {
  const std::size_t G = q.grid_size();
  QuantizerMoments mo{std::vector<double>(G, 0.0), std::vector<double>(G, 0.0)};
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double p = q.probabilities[i];
    const double* row = q.trajectory(i);
    for (std::size_t g = 0; g < G; ++g) {
      mo.mean[g] += p * row[g];
      mo.second[g] += p * row[g] * row[g];
    }
  }
  return mo;
}

/// CSV: header `probability,i1..im,<time grid>`, one row per trajectory,
/// multi-indices 1-based.
inline void write_trajectories_csv(std::ostream& os, const ProductQuantizer& q) {
  os << "probability";
  for (std::size_t n = 1; n <= q.allocation.m; ++n) os << ",i" << n;
  for (double t : q.time_grid) os << ',' << detail::format_double(t);
  os << '\n';
  for (std::size_t i = 0; i < q.size(); ++i) {
    os << detail::format_double(q.probabilities[i]);
    const std::uint32_t* idx = q.multi_index(i);
    for (std::size_t n = 0; n < q.allocation.m; ++n) os << ',' << idx[n] + 1;
    const double* row = q.trajectory(i);
    for (std::size_t g = 0; g < q.grid_size(); ++g) os << ',' << detail::format_double(row[g]);
    os << '\n';
  }
}

}  // namespace roughquant
