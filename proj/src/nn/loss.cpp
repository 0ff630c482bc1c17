#include "deepref/nn/loss.hpp"

#include "deepref/error.hpp"

namespace deepref::nn {

LossResult q_loss(const Vector& q_row, std::size_t action, double target) {
  if (action >= static_cast<std::size_t>(q_row.size())) throw UsageError("q_loss: action out of range");
  const auto a = static_cast<Eigen::Index>(action);
  const double diff = q_row[a] - target;
  LossResult out;
  out.loss = diff * diff;
  out.grad = Vector::Zero(q_row.size());
  out.grad[a] = 2.0 * diff;
  return out;
}

}  // namespace deepref::nn
