#pragma once

#include "roughquant/errors.hpp"
#include "roughquant/quadrature.hpp"
#include "roughquant/special_functions.hpp"
#include "roughquant/gaussian_quantizer.hpp"
#include "roughquant/volterra_kernels.hpp"
#include "roughquant/product_quantizer.hpp"
#include "roughquant/rough_bergomi.hpp"
#include "roughquant/mc_benchmark.hpp"

namespace roughquant {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace roughquant
