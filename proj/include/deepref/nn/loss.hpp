#pragma once

#include <cstddef>

#include "deepref/nn/layers.hpp"

namespace deepref::nn {

struct LossResult {
  double loss = 0.0;
  Vector grad;  // same size as the Q row, zero except at the chosen action
};

// Squared error on one action: (q[action] - target)^2.
LossResult q_loss(const Vector& q_row, std::size_t action, double target);

}  // namespace deepref::nn
