#include "deepref/nn/optim.hpp"

#include <cmath>

#include "deepref/error.hpp"

namespace deepref::nn {

namespace {

void check_same_shapes(std::span<const Tensor> a, std::span<const Tensor> b) {
  if (a.size() != b.size()) throw UsageError("optimizer: tensor count mismatch");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].data.size() != b[k].data.size()) throw UsageError("optimizer: tensor shape mismatch");
  }
}

std::span<const Tensor> as_const(std::span<Tensor> s) { return {s.data(), s.size()}; }

}  // namespace

AdamState::AdamState(std::span<const Tensor> params) {
  for (const auto& p : params) {
    m_.emplace_back(p.data.size(), 0.0);
    v_.emplace_back(p.data.size(), 0.0);
  }
}

void AdamState::update(std::span<Tensor> params, std::span<const Tensor> grads,
                       const AdamConfig& config) {
  check_same_shapes(as_const(params), grads);
  if (m_.size() != params.size()) throw UsageError("adam: state built for a different model");
  if (!all_finite(grads)) throw Error("adam: non-finite gradient");
  ++t_;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data;
    const auto g = grads[k].data;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      p[j] -= config.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.epsilon);
    }
  }
}

void sgd_update(std::span<Tensor> params, std::span<const Tensor> grads, double learning_rate) {
  check_same_shapes(as_const(params), grads);
  if (!all_finite(grads)) throw Error("sgd: non-finite gradient");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data;
    const auto g = grads[k].data;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= learning_rate * g[j];
  }
}

double global_norm(std::span<const Tensor> grads) {
  double s = 0.0;
  for (const auto& g : grads) {
    for (double x : g.data) s += x * x;
  }
  return std::sqrt(s);
}

double clip_global_norm(std::span<Tensor> grads, double max_norm) {
  const double norm = global_norm(as_const(grads));
  if (max_norm > 0.0 && norm > max_norm) scale(grads, max_norm / norm);
  return norm;
}

bool all_finite(std::span<const Tensor> tensors) {
  for (const auto& t : tensors) {
    for (double x : t.data) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

void scale(std::span<Tensor> tensors, double factor) {
  for (auto& t : tensors) {
    for (double& x : t.data) x *= factor;
  }
}

void copy_values(std::span<const Tensor> from, std::span<Tensor> to) {
  check_same_shapes(from, as_const(to));
  for (std::size_t k = 0; k < from.size(); ++k) {
    std::copy(from[k].data.begin(), from[k].data.end(), to[k].data.begin());
  }
}

}  // namespace deepref::nn
