#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "roughquant/product_quantizer.hpp"

using namespace roughquant;

namespace {

using Vec = std::vector<std::size_t>;

const KernelSpec kFull = KernelSpec::rl_full(0.1);

struct Row {
  std::uint64_t N;
  Vec d;
  std::uint64_t traj;
};

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(RateOptimal, FloorLogRows) {
  const std::vector<Row> rows{
      {10, {3, 2}, 6},
      {100, {5, 3, 2, 2}, 60},
      {1000, {6, 4, 3, 2, 2, 2}, 576},
      {10000, {6, 4, 3, 2, 2, 2, 2, 1, 1}, 1152},
      {100000, {7, 4, 3, 3, 2, 2, 2, 2, 1, 1, 1}, 4032},
      {1000000, {8, 5, 4, 3, 3, 2, 2, 2, 2, 2, 1, 1, 1}, 46080},
  };
  for (const auto& r : rows) {
    const Allocation a = rate_optimal_allocation(r.N, 0.1, RateMode::FloorLog);
    EXPECT_EQ(a.d, r.d) << r.N;
    EXPECT_EQ(a.m, r.d.size());
    EXPECT_EQ(a.trajectories(), r.traj);
  }
}

TEST(RateOptimal, ShorterExpansionVariants) {
  const std::vector<Row> minus1{
      {10, {10}, 10},
      {100, {6, 4, 3}, 72},
      {1000, {7, 4, 3, 3, 2}, 504},
      {10000, {7, 4, 3, 3, 2, 2, 2, 2}, 4032},
      {100000, {7, 5, 4, 3, 2, 2, 2, 2, 2, 1}, 13440},
      {1000000, {8, 5, 4, 3, 3, 2, 2, 2, 2, 2, 2, 1}, 92160},
  };
  for (const auto& r : minus1) {
    const Allocation a = rate_optimal_allocation(r.N, 0.1, RateMode::FloorLogMinus1);
    EXPECT_EQ(a.d, r.d) << r.N;
    EXPECT_EQ(a.trajectories(), r.traj);
  }
  const std::vector<Row> minus2{
      {100, {12, 8}, 96},
      {1000, {9, 5, 4, 3}, 540},
      {10000, {7, 5, 4, 3, 2, 2, 2}, 3360},
      {100000, {8, 5, 4, 3, 3, 2, 2, 2, 2}, 23040},
      {1000000, {9, 6, 4, 3, 3, 3, 2, 2, 2, 2, 2}, 186624},
  };
  for (const auto& r : minus2) {
    const Allocation a = rate_optimal_allocation(r.N, 0.1, RateMode::FloorLogMinus2);
    EXPECT_EQ(a.d, r.d) << r.N;
    EXPECT_EQ(a.trajectories(), r.traj);
  }
}

TEST(RateOptimal, AsymptoticLengthAndErrors) {
  for (std::uint64_t N : {2ull, 10ull, 1000ull, 1000000ull}) {
    const Allocation a = rate_optimal_allocation(N, 0.1);
    EXPECT_LE(rate_threshold(a.m, 0.1), std::log(static_cast<double>(N)));
    EXPECT_GT(rate_threshold(a.m + 1, 0.1), std::log(static_cast<double>(N)));
    EXPECT_LE(a.trajectories(), N);
    EXPECT_NO_THROW(a.validate());
  }
  EXPECT_EQ(rate_threshold(1, 0.1), 0.0);
  try {
    rate_optimal_allocation(1, 0.1);
    FAIL() << "expected InvalidBudget";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidBudget);
  }
  EXPECT_THROW(rate_optimal_allocation(10, 0.1, RateMode::FloorLogMinus2), Error);
  EXPECT_THROW(rate_optimal_allocation(10, 0.7), Error);
}

TEST(Objective, ElementaryProperties) {
  const auto norms = coefficient_norms(kFull, 4);
  EXPECT_EQ(allocation_objective(Vec{1}, norms), 0.0);
  EXPECT_EQ(allocation_objective(Vec{1, 1, 1}, norms), 0.0);
  EXPECT_LT(allocation_objective(Vec{5, 2}, norms), allocation_objective(Vec{2, 5}, norms));
  for (const Vec& d : {Vec{2}, Vec{5, 2}, Vec{10, 4, 3, 2}, Vec{200, 1}}) EXPECT_LE(allocation_objective(d, norms), 0.0);
  EXPECT_THROW(allocation_objective(Vec{2, 0}, norms), Error);
  EXPECT_THROW(allocation_objective(Vec{2, 2, 2, 2, 2}, norms), Error);
  Allocation a{2, {5, 2}, 10};
  EXPECT_DOUBLE_EQ(allocation_objective(a, kFull), allocation_objective(Vec{5, 2}, norms));
}

TEST(Optimize, ReferenceBudgets) {
  const std::vector<Row> rows{
      {10, {5, 2}, 10},
      {100, {8, 3, 2, 2}, 96},
      {1000, {10, 4, 3, 2, 2, 2}, 960},
      {10000, {10, 5, 4, 3, 2, 2, 2, 2}, 9600},
      {100000, {14, 6, 4, 3, 3, 2, 2, 2, 2, 2}, 96768},
      {1000000, {14, 6, 5, 4, 3, 3, 2, 2, 2, 2, 2, 2}, 967680},
  };
  for (const auto& r : rows) {
    const Allocation a = optimize_allocation(r.N, kFull);
    EXPECT_EQ(a.d, r.d) << r.N;
    EXPECT_EQ(a.m, r.d.size());
    EXPECT_EQ(a.trajectories(), r.traj);
    EXPECT_EQ(a.budget, r.N);
  }
}

TEST(Optimize, SmallBudgetsAndDominance) {
  const Allocation two = optimize_allocation(2, kFull);
  EXPECT_EQ(two.d, (Vec{2}));
  EXPECT_THROW(optimize_allocation(1, kFull), Error);
  for (std::uint64_t N : {3ull, 7ull, 20ull, 100ull, 1000ull, 5000ull}) {
    const Allocation opt = optimize_allocation(N, kFull);
    EXPECT_LE(opt.trajectories(), N);
    EXPECT_NO_THROW(opt.validate());
    const double best = allocation_objective(opt, kFull);
    for (RateMode mode : {RateMode::Asymptotic, RateMode::FloorLog, RateMode::FloorLogMinus1}) {
      Allocation r;
      try {
        r = rate_optimal_allocation(N, 0.1, mode);
      } catch (const Error&) {
        continue;
      }
      EXPECT_LE(best, allocation_objective(r, kFull) + 1e-15) << N << ' ' << to_string(mode);
    }
  }
}

TEST(Optimize, ExhaustiveCheckForSmallBudget) {
  // Brute force over every non-increasing d with prod <= 60 and m <= 7.
  const std::uint64_t N = 60;
  const auto norms = coefficient_norms(kFull, 7);
  double best = 0.0;
  std::vector<Vec> stack{{}};
  while (!stack.empty()) {
    Vec d = stack.back();
    stack.pop_back();
    if (!d.empty()) best = std::min(best, allocation_objective(d, norms));
    if (d.size() == 7) continue;
    std::uint64_t p = 1;
    for (auto v : d) p *= v;
    const std::size_t cap = d.empty() ? N : d.back();
    for (std::size_t v = 1; v <= cap && p * v <= N; ++v) {
      Vec e = d;
      e.push_back(v);
      stack.push_back(e);
    }
  }
  EXPECT_NEAR(allocation_objective(optimize_allocation(N, kFull), kFull), best, 1e-15);
}

TEST(Error, ZeroQuantizerEqualsTrace) {
  const Allocation ones{3, {1, 1, 1}, 1};
  EXPECT_DOUBLE_EQ(quantization_error_sq_exact(ones, kFull), trace(kFull));
  const auto e = quantization_error_sq(ones, kFull, 4000);
  EXPECT_LE(e.partial, trace(kFull));
  EXPECT_GE(e.upper(), trace(kFull));
  EXPECT_THROW(quantization_error_sq(Allocation{3, {2, 2, 2}, 8}, kFull, 2), Error);
}

TEST(Error, DecreasesWhenAnyLevelGrows) {
  const Allocation base{3, {6, 4, 2}, 1000};
  const double e0 = quantization_error_sq_exact(base, kFull);
  for (std::size_t i = 0; i < 3; ++i) {
    Allocation up = base;
    ++up.d[i];
    if (i > 0 && up.d[i] > up.d[i - 1]) continue;
    EXPECT_LT(quantization_error_sq_exact(up, kFull), e0) << i;
  }
  EXPECT_LT(quantization_error_sq(Allocation{3, {7, 4, 2}, 1000}, kFull, 2000).partial,
            quantization_error_sq(base, kFull, 2000).partial);
}

TEST(Error, RateAlongOptimizedAllocations) {
  std::vector<double> lx, ly;
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t N : {10ull, 100ull, 1000ull, 10000ull}) {
    const double e = quantization_error_sq_exact(optimize_allocation(N, kFull), kFull);
    EXPECT_LT(e, prev) << N;
    prev = e;
    lx.push_back(std::log(std::log(static_cast<double>(N))));
    ly.push_back(std::log(std::sqrt(e)));
  }
  EXPECT_LT(slope(lx, ly), -0.05);
}

TEST(Build, SinglePointQuantizer) {
  const auto grid = uniform_time_grid(kFull, 11);
  const auto q = build_quantizer(Allocation{1, {1}, 1}, kFull, grid);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q.probabilities[0], 1.0);
  for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_EQ(q.trajectory(0)[g], 0.0);
}

TEST(Build, TwoByTwoReflection) {
  const auto grid = uniform_time_grid(kFull, 21);
  const auto q = build_quantizer(Allocation{2, {2, 2}, 4}, kFull, grid);
  ASSERT_EQ(q.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(q.probabilities[i], 0.25, 1e-15);
    for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_NEAR(q.trajectory(i)[g], -q.trajectory(3 - i)[g], 1e-15);
  }
  // Row-major order: last coordinate fastest.
  EXPECT_EQ(q.multi_index(1)[0], 0u);
  EXPECT_EQ(q.multi_index(1)[1], 1u);
  EXPECT_EQ(q.multi_index(2)[0], 1u);
  const double x = std::sqrt(2.0 / std::numbers::pi);
  const double t = grid[7];
  EXPECT_NEAR(q.trajectory(3)[7], x * (coeff_rl(1, t, 0.1) + coeff_rl(2, t, 0.1)), 1e-12);
}

TEST(Build, StationarityInvariants) {
  for (const KernelSpec& spec : {kFull, KernelSpec::rl_truncated(0.1, 0.7), KernelSpec::rl_window(0.1, 0.25, 30.0 / 365.0)}) {
    const auto grid = uniform_time_grid(spec, 300);
    for (const Allocation& a : {Allocation{2, {5, 2}, 10}, Allocation{4, {8, 3, 2, 2}, 96}}) {
      BuildOptions opt;
      opt.threads = 3;
      const auto q = build_quantizer(a, spec, grid, opt);
      double mass = 0.0;
      for (double p : q.probabilities) mass += p;
      EXPECT_NEAR(mass, 1.0, 1e-12);
      const auto mo = weighted_moments(q);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        EXPECT_NEAR(mo.mean[g], 0.0, 1e-12);
        EXPECT_LE(mo.second[g], variance(spec, grid[g]) + 1e-12);
      }
    }
  }
}

TEST(Build, ThreadCountDoesNotChangeOutput) {
  const auto grid = uniform_time_grid(kFull, 50);
  const Allocation a{6, {10, 4, 3, 2, 2, 2}, 1000};
  BuildOptions many;
  many.threads = 4;
  const auto q1 = build_quantizer(a, kFull, grid);
  const auto q4 = build_quantizer(a, kFull, grid, many);
  EXPECT_EQ(q1.trajectories, q4.trajectories);
  EXPECT_EQ(q1.probabilities, q4.probabilities);
  EXPECT_EQ(q1.multi_indices, q4.multi_indices);
}

TEST(Build, Errors) {
  const auto grid = uniform_time_grid(kFull, 100);
  BuildOptions tight;
  tight.max_values = 999;
  try {
    build_quantizer(Allocation{2, {5, 2}, 10}, kFull, grid, tight);
    FAIL() << "expected CapacityExceeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapacityExceeded);
  }
  EXPECT_THROW(build_quantizer(Allocation{2, {2, 5}, 10}, kFull, grid), Error);
  EXPECT_THROW(build_quantizer(Allocation{2, {5, 2}, 9}, kFull, grid), Error);
  EXPECT_THROW(build_quantizer(Allocation{1, {2}, 2}, KernelSpec::rl_window(0.1, 0.25, 0.1), grid), Error);
}

TEST(Build, ConvexFunctionalsBelowMonteCarlo) {
  // E f(Z_t) >= E f(Z^d_t) for convex f, checked against sampled Z_t at t = 0.5.
  const double t = 0.5;
  const std::vector<double> grid{t};
  const auto q = build_quantizer(Allocation{6, {10, 4, 3, 2, 2, 2}, 1000}, kFull, grid);
  const double sd = std::sqrt(variance(kFull, t));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  const int M = 200000;
  double s1 = 0, s1q = 0, s2 = 0, s2q = 0;
  for (int k = 0; k < M; ++k) {
    const double z = sd * gauss(rng);
    s1 += z * z;
    s1q += z * z * z * z;
    s2 += std::exp(z);
    s2q += std::exp(2.0 * z);
  }
  const double m1 = s1 / M, se1 = std::sqrt((s1q / M - m1 * m1) / M);
  const double m2 = s2 / M, se2 = std::sqrt((s2q / M - m2 * m2) / M);
  double q1 = 0, q2 = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double x = q.trajectory(i)[0];
    q1 += q.probabilities[i] * x * x;
    q2 += q.probabilities[i] * std::exp(x);
  }
  EXPECT_LE(q1, m1 + 3.0 * se1);
  EXPECT_LE(q2, m2 + 3.0 * se2);
  EXPECT_GT(q1, 0.5 * m1);
}

TEST(Export, TrajectoryCsv) {
  const auto grid = uniform_time_grid(kFull, 3);
  const auto q = build_quantizer(Allocation{2, {3, 2}, 6}, kFull, grid);
  std::ostringstream os;
  write_trajectories_csv(os, q);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "probability,i1,i2,0,0.5,1");
  int rows = 0;
  std::string first;
  while (std::getline(is, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(first.substr(first.find(',') + 1, 4), "1,1,");
  EXPECT_EQ(to_string(q.allocation), "(3,2)");
}
