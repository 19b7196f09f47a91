#pragma once

// Optimal quadratic quantizers of the standard normal distribution,
// computed by Lloyd iterations followed by a Newton solve of the
// centroid conditions.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "roughquant/errors.hpp"

namespace roughquant {

struct QuantizerGrid1D {
  std::size_t size = 0;
  std::vector<double> points;         // strictly increasing
  std::vector<double> probabilities;  // Voronoi cell masses
  double distortion = 0.0;            // E|xi - proj(xi)|^2
};

namespace normal {

inline double pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail P(xi > x).
inline double sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// P(a < xi <= b) without cancellation in either tail.
inline double mass(double a, double b) {
  if (a >= 0.0) return sf(a) - sf(b);
  if (b <= 0.0) return cdf(b) - cdf(a);
  return 1.0 - sf(b) - cdf(a);
}

}  // namespace normal

namespace detail {

struct CellStats {
  std::vector<double> lower;  // a_i, -inf for i = 0
  std::vector<double> upper;  // b_i, +inf for i = n-1
  std::vector<double> mass;
  std::vector<double> first_moment;  // E[xi ; cell] = pdf(a) - pdf(b)
};

inline CellStats cell_stats(const std::vector<double>& x) {
  const std::size_t n = x.size();
  CellStats s;
  s.lower.resize(n);
  s.upper.resize(n);
  s.mass.resize(n);
  s.first_moment.resize(n);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    s.lower[i] = i == 0 ? -inf : 0.5 * (x[i - 1] + x[i]);
    s.upper[i] = i + 1 == n ? inf : 0.5 * (x[i] + x[i + 1]);
    s.mass[i] = normal::mass(s.lower[i], s.upper[i]);
    s.first_moment[i] = normal::pdf(s.lower[i]) - normal::pdf(s.upper[i]);
  }
  return s;
}

// E|xi - proj(xi)|^2 = 1 - 2 sum x_i m1_i + sum x_i^2 p_i, with the second
// moment of each cell expressed through a*pdf(a) terms.
inline double distortion_of(const std::vector<double>& x, const CellStats& s) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = s.lower[i], b = s.upper[i];
    const double apdf = std::isinf(a) ? 0.0 : a * normal::pdf(a);
    const double bpdf = std::isinf(b) ? 0.0 : b * normal::pdf(b);
    const double m2 = s.mass[i] + apdf - bpdf;
    d += m2 - 2.0 * x[i] * s.first_moment[i] + x[i] * x[i] * s.mass[i];
  }
  return d;
}

inline double centroid_residual(const std::vector<double>& x, const CellStats& s) {
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r = std::max(r, std::abs(x[i] - s.first_moment[i] / s.mass[i]));
  }
  return r;
}

// Solves the tridiagonal system (sub, diag, sup) y = rhs in place (Thomas).
inline void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                              std::vector<double> sup, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

inline void symmetrize(std::vector<double>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -v;
    x[n - 1 - i] = v;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace detail

/// Controls for the grid solver.
struct GridSolverOptions {
  int lloyd_iterations = 200;
  int newton_iterations = 100;
  double target_residual = 1e-12;
  double accept_residual = 1e-10;
};

/// Records the distortion after every Lloyd sweep, for diagnostics.
struct LloydTrace {
  std::vector<double> distortions;
};

/// Optimal quadratic n-quantizer of N(0,1). Lloyd sweeps from the quantile
/// seed x_i = Phi^{-1}((i-1/2)/n), then Newton on the centroid residual
/// F_i(x) = x_i p_i - (pdf(a_i) - pdf(b_i)) with its tridiagonal Jacobian.
inline QuantizerGrid1D build_optimal_grid(std::size_t n, const GridSolverOptions& opt = {},
                                          LloydTrace* trace = nullptr) {
  if (n < 1 || n > 6000) fail(ErrorKind::InvalidParams, "build_optimal_grid: n must lie in 1..6000");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = normal::quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  detail::symmetrize(x);

  auto s = detail::cell_stats(x);
  for (int it = 0; it < opt.lloyd_iterations; ++it) {
    if (trace) trace->distortions.push_back(detail::distortion_of(x, s));
    for (std::size_t i = 0; i < n; ++i) x[i] = s.first_moment[i] / s.mass[i];
    detail::symmetrize(x);
    s = detail::cell_stats(x);
    if (detail::centroid_residual(x, s) < 1e-6) break;
  }
  if (trace) trace->distortions.push_back(detail::distortion_of(x, s));

  for (int it = 0; it < opt.newton_iterations && n > 1; ++it) {
    if (detail::centroid_residual(x, s) < opt.target_residual) break;
    std::vector<double> sub(n, 0.0), diag(n), sup(n, 0.0), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = s.lower[i], b = s.upper[i];
      const double pa = normal::pdf(a), pb = normal::pdf(b);
      const double left = std::isinf(a) ? 0.0 : 0.5 * pa * (x[i] - a);
      const double right = std::isinf(b) ? 0.0 : 0.5 * pb * (b - x[i]);
      diag[i] = s.mass[i] - left - right;
      if (i > 0) sub[i] = -left;
      if (i + 1 < n) sup[i] = -right;
      rhs[i] = -(x[i] * s.mass[i] - s.first_moment[i]);
    }
    detail::solve_tridiagonal(sub, diag, sup, rhs);
    // Damp the step so points stay ordered.
    double lambda = 1.0;
    for (int tries = 0; tries < 40; ++tries) {
      bool ordered = true;
      for (std::size_t i = 0; i + 1 < n && ordered; ++i) {
        ordered = x[i] + lambda * rhs[i] < x[i + 1] + lambda * rhs[i + 1];
      }
      if (ordered) break;
      lambda *= 0.5;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += lambda * rhs[i];
    detail::symmetrize(x);
    s = detail::cell_stats(x);
  }

  const double residual = detail::centroid_residual(x, s);
  if (!(residual < opt.accept_residual)) {
    fail(ErrorKind::NoConvergence, "build_optimal_grid: centroid residual " +
                                       std::to_string(residual) + " for n=" + std::to_string(n));
  }

  QuantizerGrid1D g;
  g.size = n;
  g.points = x;
  g.probabilities = s.mass;
  // Exact symmetry of the masses.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double p = 0.5 * (g.probabilities[i] + g.probabilities[n - 1 - i]);
    g.probabilities[i] = g.probabilities[n - 1 - i] = p;
  }
  g.distortion = detail::distortion_of(x, s);
  return g;
}

/// Index of the nearest grid point (0-based). Ties go to the lower index.
inline std::size_t quantize(double x, const QuantizerGrid1D& grid) {
  const auto& p = grid.points;
  // First midpoint >= x decides the cell; midpoints belong to the left cell.
  std::size_t lo = 0, hi = p.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const double boundary = 0.5 * (p[mid] + p[mid + 1]);
    if (x <= boundary) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

/// True iff sqrt(distortion) <= L / n.
inline bool pierce_bound_check(const QuantizerGrid1D& grid, double L) {
  if (!(L > 0.0)) fail(ErrorKind::InvalidParams, "pierce_bound_check: L must be positive");
  return std::sqrt(grid.distortion) <= L / static_cast<double>(grid.size);
}

// ---------------------------------------------------------------------------
// Grid cache

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) fail(ErrorKind::Io, "cannot parse number '" + s + "'");
  return v;
}

}  // namespace detail

/// CSV rows `n,index,point,probability,distortion` (index is 1-based),
/// numbers at 17 significant digits.
inline void write_grids_csv(std::ostream& os, const std::vector<const QuantizerGrid1D*>& grids,
                            bool header = true) {
  if (header) os << "n,index,point,probability,distortion\n";
  for (const QuantizerGrid1D* g : grids) {
    for (std::size_t i = 0; i < g->size; ++i) {
      os << g->size << ',' << (i + 1) << ',' << detail::format_double(g->points[i]) << ','
         << detail::format_double(g->probabilities[i]) << ','
         << detail::format_double(g->distortion) << '\n';
    }
  }
}

inline std::map<std::size_t, QuantizerGrid1D> read_grids_csv(std::istream& is) {
  std::map<std::size_t, QuantizerGrid1D> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string f[5];
    for (auto& field : f) {
      if (!std::getline(ss, field, ',')) fail(ErrorKind::Io, "malformed grid row: " + line);
    }
    const auto n = static_cast<std::size_t>(std::stoul(f[0]));
    auto& g = out[n];
    g.size = n;
    g.points.push_back(detail::parse_double(f[2]));
    g.probabilities.push_back(detail::parse_double(f[3]));
    g.distortion = detail::parse_double(f[4]);
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second.points.size() != it->first) it = out.erase(it);
    else ++it;
  }
  return out;
}

/// Memoised grids, shared between threads: readers take a shared lock,
/// construction takes the exclusive lock. An optional directory persists
/// grids as `gaussian_grid_<n>.csv`.
class GridCache {
 public:
  GridCache() = default;
  explicit GridCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::shared_ptr<const QuantizerGrid1D> get(std::size_t n) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = grids_.find(n); it != grids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = grids_.find(n); it != grids_.end()) return it->second;
    auto grid = load(n);
    if (!grid) {
      grid = std::make_shared<const QuantizerGrid1D>(build_optimal_grid(n));
      store(*grid);
    }
    grids_.emplace(n, grid);
    return grid;
  }

  /// Process-wide instance; honours ROUGHQUANT_CACHE when set.
  static GridCache& global() {
    static GridCache cache = [] {
      if (const char* dir = std::getenv("ROUGHQUANT_CACHE"); dir && *dir) return GridCache(dir);
      return GridCache();
    }();
    return cache;
  }

 private:
  std::filesystem::path file_for(std::size_t n) const {
    return dir_ / ("gaussian_grid_" + std::to_string(n) + ".csv");
  }

  std::shared_ptr<const QuantizerGrid1D> load(std::size_t n) const {
    if (dir_.empty()) return nullptr;
    std::ifstream in(file_for(n));
    if (!in) return nullptr;
    auto grids = read_grids_csv(in);
    auto it = grids.find(n);
    if (it == grids.end()) return nullptr;
    return std::make_shared<const QuantizerGrid1D>(std::move(it->second));
  }

  void store(const QuantizerGrid1D& g) const {
    if (dir_.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    std::ofstream out(file_for(g.size));
    if (out) write_grids_csv(out, {&g});
  }

  std::filesystem::path dir_;
  std::shared_mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const QuantizerGrid1D>> grids_;
};

// Largest size whose distortion is taken from an actual optimal grid.
inline constexpr std::size_t kExactDistortionUpTo = 1000;

/// Optimal distortion eps^2(n) of the standard normal. Beyond
/// kExactDistortionUpTo it is extended by the asymptotic n^{-2} law,
/// anchored at the last exact value.
inline double optimal_distortion(std::size_t n, GridCache& cache = GridCache::global()) {
  if (n == 0) fail(ErrorKind::InvalidParams, "optimal_distortion: n must be >= 1");
  if (n <= kExactDistortionUpTo) return cache.get(n)->distortion;
  const double anchor = cache.get(kExactDistortionUpTo)->distortion;
  const double r = static_cast<double>(kExactDistortionUpTo) / static_cast<double>(n);
  return anchor * r * r;
}

}  // namespace roughquant
