#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "roughquant/rough_bergomi.hpp"

using namespace roughquant;

namespace {

PricingConfig base(std::uint64_t N = 1000) {
  PricingConfig c;
  c.budget = N;
  return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidParams;
}

}  // namespace

TEST(VolOfVol, Conversions) {
  const double H = 0.1;
  EXPECT_NEAR(c_h(H), 0.357686, 1e-6);
  const VolParams p = resolve(VolOfVol::eta(1.9), H);
  EXPECT_NEAR(p.nu, 1.18778, 1e-5);
  EXPECT_EQ(p.eta, 1.9);
  EXPECT_NEAR(p.gamma, 2.0 * p.nu * c_h(H), 1e-15);
  EXPECT_NEAR(p.gamma, p.eta * std::sqrt(2.0 * H), 1e-15);
  const VolParams q = resolve(VolOfVol::nu(p.nu), H);
  EXPECT_NEAR(q.eta, 1.9, 1e-14);
  const VolParams r = resolve(VolOfVol::gamma(p.gamma), H);
  EXPECT_NEAR(r.nu, p.nu, 1e-14);
  EXPECT_EQ(resolve(VolOfVol::nu(0.0), H).gamma, 0.0);
  EXPECT_THROW(resolve(VolOfVol::eta(-1.0), H), Error);
  // At H = 1/2, C_H = 1 so gamma = 2 nu.
  EXPECT_NEAR(c_h(0.5), 1.0, 1e-15);
}

TEST(Drift, ClosedFormCases) {
  const double H = 0.1, T = 0.25, g = 0.8;
  EXPECT_NEAR(drift_correction(T, T, H, g), -g * g * std::pow(T, 2.0 * H) / (4.0 * H), 1e-15);
  for (double f : {0.0, 0.1, 0.5, 1.0}) EXPECT_LE(drift_correction(T + f * 0.1, T, H, g), 0.0);
  EXPECT_EQ(drift_correction(0.3, T, H, 0.0), 0.0);
  EXPECT_THROW(drift_correction(0.2, T, H, g), Error);
}

TEST(Drift, MatchesQuadrature) {
  const double H = 0.1, T = 0.25, D = 30.0 / 365.0;
  const double g = resolve(VolOfVol::nu(1.18778), H).gamma;
  const double t = T + D;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto k2 = [&](double s) { return std::pow(s, 2.0 * H - 1.0); };
  const double ref = 0.5 * g * g * (ts.integrate(k2, 0.0, t - T) - ts.integrate(k2, 0.0, t));
  EXPECT_NEAR(drift_correction(t, T, H, g), ref, 1e-10);
}

TEST(Curves, ScenariosAndTabulated) {
  const double v = 0.234 * 0.234;
  EXPECT_EQ(ForwardCurve::scenario(1)(0.7), v);
  EXPECT_NEAR(ForwardCurve::scenario(2)(1.0), 4.0 * v, 1e-15);
  EXPECT_NEAR(ForwardCurve::scenario(3)(3.0), 2.0 * v, 1e-15);
  EXPECT_EQ(ForwardCurve::scenario(2).scenario_id(), 2);
  EXPECT_EQ(kind_of([] { ForwardCurve::scenario(4); }), ErrorKind::InvalidParams);
  const auto tab = ForwardCurve::tabulated({0.0, 1.0, 2.0}, {0.04, 0.06, 0.05});
  EXPECT_NEAR(tab(0.5), 0.05, 1e-15);
  EXPECT_NEAR(tab(1.5), 0.055, 1e-15);
  EXPECT_EQ(tab(2.0), 0.05);
  EXPECT_EQ(kind_of([&] { tab(2.5); }), ErrorKind::CurveError);
  EXPECT_EQ(kind_of([] { ForwardCurve::tabulated({0.0, 0.0}, {1.0, 1.0}); }), ErrorKind::CurveError);
}

TEST(Curves, ErrorsSurfaceDuringPricing) {
  PricingConfig c = base(10);
  c.curve = ForwardCurve::tabulated({0.0, 0.3}, {0.04, 0.04});
  EXPECT_EQ(kind_of([&] { vix_future_price(c); }), ErrorKind::CurveError);
  c.curve = ForwardCurve::tabulated({0.0, 1.0}, {0.04, -0.2});
  EXPECT_EQ(kind_of([&] { vix_future_price(c); }), ErrorKind::CurveError);
}

TEST(PricingGrid, WeightsIntegrateExactly) {
  for (TimeGridKind k : {TimeGridKind::Graded, TimeGridKind::Uniform}) {
    const PricingGrid g = pricing_grid(0.25, 30.0 / 365.0, 0.1, 300, k);
    double sum = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      EXPECT_GE(g.nodes[i], 0.25);
      EXPECT_LE(g.nodes[i], 0.25 + 30.0 / 365.0);
      sum += g.weights[i];
      lin += g.weights[i] * (g.nodes[i] - 0.25);
    }
    EXPECT_NEAR(sum, 30.0 / 365.0, 1e-14);
    EXPECT_NEAR(lin, 0.5 * std::pow(30.0 / 365.0, 2), 1e-12);
  }
  EXPECT_THROW(pricing_grid(0.25, 0.1, 0.1, 1), Error);
}

TEST(Law, DeterministicWhenGammaVanishes) {
  PricingConfig c = base();
  c.vol = VolOfVol::nu(0.0);
  const auto q = quantized_vix_law(c);
  ASSERT_EQ(q.law.size(), 1u);
  EXPECT_EQ(q.law.probabilities[0], 1.0);
  EXPECT_NEAR(q.law.values[0], 0.234, 1e-12);
  EXPECT_NEAR(vix_future_price(c).price, 0.234, 1e-12);
  // Scenario 3: sqrt of the window average of v0.
  c.curve = ForwardCurve::scenario(3);
  const double T = c.maturity, D = c.delta;
  const double avg = 0.234 * 0.234 * (std::pow(1.0 + T + D, 1.5) - std::pow(1.0 + T, 1.5)) / (1.5 * D);
  EXPECT_NEAR(vix_future_price(c).price, std::sqrt(avg), 1e-12);
}

TEST(Law, SingleAtomBelowDeterministicValue) {
  const PricingConfig c = base();
  const auto q = quantized_vix_law(c, Allocation{1, {1}, 1});
  ASSERT_EQ(q.law.size(), 1u);
  EXPECT_EQ(q.law.probabilities[0], 1.0);
  EXPECT_LT(q.law.values[0], 0.234);
  EXPECT_GT(q.law.values[0], 0.0);
}

TEST(Law, ProbabilitiesAndCapacity) {
  PricingConfig c = base();
  const auto q = quantized_vix_law(c);
  double mass = 0.0;
  for (double p : q.law.probabilities) mass += p;
  EXPECT_NEAR(mass, 1.0, 1e-12);
  EXPECT_EQ(q.law.size(), 960u);
  EXPECT_GT(q.quantization_error_sq, 0.0);
  c.max_atoms = 100;
  EXPECT_EQ(kind_of([&] { quantized_vix_law(c); }), ErrorKind::CapacityExceeded);
}

TEST(Price, CurveScalingIsExact) {
  PricingConfig c = base(100);
  const double scale = 2.7;
  const auto q1 = quantized_vix_law(c);
  c.curve = ForwardCurve::flat(scale * 0.234 * 0.234);
  const auto q2 = quantized_vix_law(c);
  ASSERT_EQ(q1.law.size(), q2.law.size());
  for (std::size_t i = 0; i < q1.law.size(); ++i) {
    EXPECT_NEAR(q2.law.values[i], std::sqrt(scale) * q1.law.values[i], 1e-14);
  }
}

TEST(Price, IncreasesAlongNestedBudgets) {
  for (int s : {1, 2, 3}) {
    PricingConfig c = base();
    c.curve = ForwardCurve::scenario(s);
    double prev = 0.0;
    for (std::uint64_t N : {10ull, 100ull, 1000ull}) {
      c.budget = N;
      const double p = vix_future_price(c).price;
      EXPECT_GT(p, prev) << s << ' ' << N;
      prev = p;
    }
  }
  // Same under the rate-optimal allocations, whose d vectors are also nested.
  PricingConfig c = base();
  c.allocation_mode = AllocationMode::RateOptimal;
  c.budget = 100;
  const double p100 = vix_future_price(c).price;
  c.budget = 1000;
  EXPECT_GT(vix_future_price(c).price, p100);
}

TEST(Price, GridRefinementIsStable) {
  PricingConfig c = base();
  const double p300 = vix_future_price(c).price;
  c.grid_size = 600;
  const double p600 = vix_future_price(c).price;
  EXPECT_NEAR(p600 / p300, 1.0, 1e-6);
  c.grid_kind = TimeGridKind::Uniform;
  c.grid_size = 2000;
  EXPECT_NEAR(vix_future_price(c).price / p300, 1.0, 1e-4);
}

TEST(Options, ParityAndMonotonicity) {
  const PricingConfig c = base(100);
  const double fut = vix_future_price(c).price;
  EXPECT_NEAR(vix_option_price(c, Payoff::call(0.0)).price, fut, 1e-15);
  double prev = std::numeric_limits<double>::infinity();
  for (double K : {0.1, 0.2, 0.3}) {
    const double call = vix_option_price(c, Payoff::call(K)).price;
    const double put = vix_option_price(c, Payoff::put(K)).price;
    EXPECT_NEAR(call - put, fut - K, 1e-12) << K;
    EXPECT_LE(call, prev);
    prev = call;
  }
  const double sq = vix_option_price(c, Payoff::custom_fn([](double x) { return x * x; })).price;
  EXPECT_GE(sq, fut * fut);
  EXPECT_THROW(vix_option_price(c, Payoff::call(-1.0)), Error);
  EXPECT_THROW(vix_option_price(c, Payoff::custom_fn({})), Error);
}

TEST(Report, JsonAndMaturityTable) {
  const PricingConfig c = base(10);
  const PriceReport r = vix_future_price(c);
  EXPECT_GT(r.price, 0.0);
  EXPECT_EQ(r.allocation, "(5,2)");
  EXPECT_EQ(r.n_trajectories, 10u);
  const auto j = to_json(r);
  for (const char* key : {"method", "price", "params", "n_trajectories", "error_metric", "runtime_ms"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["method"], "quantization");
  EXPECT_NEAR(j["params"]["nu"].get<double>(), 1.18778, 1e-5);

  const auto rows = price_by_maturity(c, {1, 2, 3, 6, 9, 12});
  ASSERT_EQ(rows.size(), 6u);
  std::ostringstream os;
  write_maturity_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, 21), "maturity_months,price");
  EXPECT_NEAR(rows[2].price, r.price, 1e-15);
  EXPECT_THROW(price_by_maturity(c, {0}), Error);
}

TEST(Config, Validation) {
  PricingConfig c = base();
  c.hurst = 0.6;
  EXPECT_THROW(c.validate(), Error);
  c = base();
  c.delta = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = base();
  c.budget = 0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidBudget);
}
