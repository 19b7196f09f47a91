#pragma once

// Monte Carlo reference prices for VIX futures: the window process is
// sampled on the pricing grid through a pivoted, truncated Cholesky factor
// of its covariance matrix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "roughquant/errors.hpp"
#include "roughquant/gaussian_quantizer.hpp"
#include "roughquant/rough_bergomi.hpp"
#include "roughquant/volterra_kernels.hpp"

namespace roughquant {

struct McConfig {
  std::size_t paths = 100'000;
  std::size_t grid_size = 300;
  std::uint64_t seed = 20240101;
  double regularization = 1e-12;  // relative pivot threshold
  unsigned threads = 1;
  std::size_t block_size = 4096;  // paths per RNG stream

  void validate() const {
    if (paths < 100) fail(ErrorKind::InvalidParams, "McConfig: at least 100 paths are required");
    if (grid_size < 2) fail(ErrorKind::InvalidParams, "McConfig: grid_size must be >= 2");
    if (!(regularization >= 0.0)) fail(ErrorKind::InvalidParams, "McConfig: regularization must be >= 0");
    if (block_size == 0) fail(ErrorKind::InvalidParams, "McConfig: block_size must be positive");
  }
};

/// Sigma_ij = R(t_i, t_j) for the window process; upper triangle computed, mirrored.
inline Eigen::MatrixXd window_covariance_matrix(double T, double H, const std::vector<double>& grid) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd S(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      S(i, j) = covariance_window(grid[i], grid[j], H, T);
      S(j, i) = S(i, j);
    }
  }
  return S;
}

/// Equally spaced grid over [T, T+Delta].
inline Eigen::MatrixXd window_covariance_matrix(double T, double delta, double H, std::size_t grid_size) {
  return window_covariance_matrix(T, H, uniform_time_grid(KernelSpec::rl_window(H, T, delta), grid_size));
}

struct CholeskyFactor {
  Eigen::MatrixXd L;  // n x rank, rows in the original order, L L^T ~ Sigma
  std::size_t rank = 0;
  double reconstruction_error = 0.0;  // max |L L^T - Sigma|
};

/// Pivoted Cholesky that stops once the largest remaining pivot drops below
/// `regularization` times the largest diagonal entry.
inline CholeskyFactor truncated_cholesky(const Eigen::MatrixXd& S, double regularization = 1e-12) {
  const Eigen::Index n = S.rows();
  if (S.cols() != n) fail(ErrorKind::InvalidParams, "truncated_cholesky: matrix must be square");
  CholeskyFactor f;
  f.L = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return f;
  Eigen::VectorXd diag = S.diagonal();
  const double scale = diag.cwiseAbs().maxCoeff();
  const double threshold = regularization * scale;
  const double tolerance = 1e-10 * std::max(scale, 1e-300);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  Eigen::Index k = 0;
  for (; k < n; ++k) {
    Eigen::Index p = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!used[static_cast<std::size_t>(i)] && diag(i) > best) {
        best = diag(i);
        p = i;
      }
    }
    if (best < -tolerance) fail(ErrorKind::IndefiniteMatrix, "truncated_cholesky: negative pivot " + std::to_string(best));
    if (best <= threshold) break;
    used[static_cast<std::size_t>(p)] = 1;
    const double piv = std::sqrt(best);
    f.L(p, k) = piv;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double v = (S(i, p) - f.L.row(i).head(k).dot(f.L.row(p).head(k))) / piv;
      f.L(i, k) = v;
      diag(i) -= v * v;
    }
  }
  f.rank = static_cast<std::size_t>(k);
  f.L.conservativeResize(n, k);
  f.reconstruction_error = (f.L * f.L.transpose() - S).cwiseAbs().maxCoeff();
  return f;
}

namespace detail {

// Uniform in (0,1) from the top 53 bits, never 0 or 1.
inline double open_uniform(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Welford accumulator; blocks are merged in block order.
struct RunningStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

}  // namespace detail

/// Sampled paths of the window process, one row per path. Used by tests and
/// by the pricer below; stream `block` of the seed yields the same rows
/// regardless of how blocks are scheduled.
inline Eigen::MatrixXd sample_window_paths(const CholeskyFactor& f, std::uint64_t seed, std::uint64_t block,
                                           std::size_t count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 rng(seq);
  const Eigen::Index r = static_cast<Eigen::Index>(f.rank);
  Eigen::MatrixXd xi(r, static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < xi.cols(); ++j) {
    for (Eigen::Index i = 0; i < r; ++i) xi(i, j) = normal::quantile(detail::open_uniform(rng()));
  }
  return (f.L * xi).transpose();
}

inline PriceReport mc_vix_future_price(const PricingConfig& pc, const McConfig& mc) {
  const auto start = std::chrono::steady_clock::now();
  pc.validate();
  mc.validate();
  PricingConfig grid_cfg = pc;
  grid_cfg.grid_size = mc.grid_size;
  const PricingGrid g = pricing_grid(grid_cfg);
  const std::vector<double> factor = vix_integrand_weights(grid_cfg, g);
  const double gamma = pc.gamma();
  const CholeskyFactor chol = truncated_cholesky(window_covariance_matrix(pc.maturity, pc.hurst, g.nodes),
                                                 mc.regularization);

  const std::size_t blocks = (mc.paths + mc.block_size - 1) / mc.block_size;
  std::vector<detail::RunningStats> stats(blocks);
  auto run_block = [&](std::size_t b) {
    const std::size_t count = std::min(mc.block_size, mc.paths - b * mc.block_size);
    const Eigen::MatrixXd Z = sample_window_paths(chol, mc.seed, b, count);
    detail::RunningStats s;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
      double vix2 = 0.0;
      for (Eigen::Index k = 0; k < Z.cols(); ++k) vix2 += factor[static_cast<std::size_t>(k)] * std::exp(gamma * Z(i, k));
      s.push(std::sqrt(vix2));
    }
    stats[b] = s;
  };

  const unsigned threads = std::max(1u, mc.threads);
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < blocks; b += threads) run_block(b);
      });
    }
  }
  detail::RunningStats total;
  for (const auto& s : stats) total.merge(s);

  PriceReport r;
  r.method = "monte_carlo";
  r.price = total.mean;
  const double var = total.n > 1 ? total.m2 / static_cast<double>(total.n - 1) : 0.0;
  r.standard_error = std::sqrt(var / static_cast<double>(total.n));
  r.error_metric = r.standard_error;
  r.n_trajectories = total.n;
  r.params = to_json(grid_cfg);
  r.params.erase("N");
  r.params.erase("allocation_mode");
  r.params.erase("rate_mode");
  r.params["paths"] = mc.paths;
  r.params["seed"] = mc.seed;
  r.params["regularization"] = mc.regularization;
  r.params["cholesky_rank"] = chol.rank;
  r.params["cholesky_error"] = chol.reconstruction_error;
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace roughquant
