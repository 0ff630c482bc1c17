#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepref/nn/layers.hpp"

namespace deepref::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment estimates, one buffer per parameter tensor.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::span<const Tensor> params);

  std::int64_t steps() const { return t_; }

  // Throws before touching params if any gradient is non-finite.
  void update(std::span<Tensor> params, std::span<const Tensor> grads, const AdamConfig& config);

 private:
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

void sgd_update(std::span<Tensor> params, std::span<const Tensor> grads, double learning_rate);

double global_norm(std::span<const Tensor> grads);
// Scales grads so their global L2 norm is at most max_norm. Returns the norm
// before clipping. max_norm <= 0 disables clipping.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

bool all_finite(std::span<const Tensor> tensors);

void scale(std::span<Tensor> tensors, double factor);
void copy_values(std::span<const Tensor> from, std::span<Tensor> to);

}  // namespace deepref::nn
