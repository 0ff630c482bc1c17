#pragma once

#include <functional>
#include <span>

#include "deepref/nn/layers.hpp"

namespace deepref::nn {

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
};

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Compares analytic gradients against central differences of `loss`, which
// must read the current values of `params`. Every `stride`-th coordinate of
// each tensor is perturbed by +-h and restored.
GradientCheckResult gradient_check(const std::function<double()>& loss, std::span<Tensor> params,
                                   std::span<const Tensor> analytic, double h = 1e-5,
                                   std::size_t stride = 1);

}  // namespace deepref::nn
