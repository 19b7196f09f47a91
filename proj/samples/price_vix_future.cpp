// Prices a 3-month VIX future in the rough Bergomi model (H = 0.1,
// eta = 1.9, flat forward variance 0.234^2) by quantization and compares
// it with a Monte Carlo estimate.

#include <cstdio>

#include "roughquant/roughquant.hpp"

int main() {
  using namespace roughquant;

  PricingConfig cfg;  // H = 0.1, eta = 1.9, T = 3 months, Delta = 30 days
  cfg.curve = ForwardCurve::scenario(1);

  for (std::uint64_t N : {10, 100, 1000}) {
    cfg.budget = N;
    const PriceReport q = vix_future_price(cfg);
    std::printf("quantization N=%-5llu d=%-16s price %.6f\n", static_cast<unsigned long long>(N),
                q.allocation.c_str(), q.price);
  }

  McConfig mc;
  mc.paths = 100000;
  const PriceReport ref = mc_vix_future_price(cfg, mc);
  std::printf("monte carlo  M=%-6zu %17s price %.6f +- %.6f\n", mc.paths, "", ref.price, ref.standard_error);

  // A single quantizer of the process itself, for plotting.
  const KernelSpec spec = KernelSpec::rl_full(0.1);
  const ProductQuantizer pq = build_quantizer(optimize_allocation(10, spec), spec, uniform_time_grid(spec, 5));
  std::printf("\n%zu trajectories of the RL process, H = 0.1:\n", pq.size());
  for (std::size_t i = 0; i < pq.size(); ++i) {
    std::printf("p=%.4f ", pq.probabilities[i]);
    for (std::size_t g = 0; g < pq.grid_size(); ++g) std::printf(" %+.4f", pq.trajectory(i)[g]);
    std::printf("\n");
  }
}
