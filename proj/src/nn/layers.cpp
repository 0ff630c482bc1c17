#include "deepref/nn/layers.hpp"

#include <cmath>

#include "deepref/error.hpp"

namespace deepref::nn {

namespace {

Vector sigmoid(const Vector& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

void fill_uniform(Eigen::Ref<Matrix> m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

}  // namespace

LayerInput LayerInput::dense(Vector values) {
  LayerInput in;
  in.dim_ = static_cast<std::size_t>(values.size());
  in.values_ = std::move(values);
  return in;
}

LayerInput LayerInput::indicator(std::size_t dim, std::vector<std::uint32_t> active) {
  for (auto i : active) {
    if (i >= dim) throw UsageError("indicator input: position out of range");
  }
  LayerInput in;
  in.dim_ = dim;
  in.indicator_ = true;
  in.active_ = std::move(active);
  return in;
}

Vector LayerInput::to_dense() const {
  if (!indicator_) return values_;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (auto i : active_) out[i] = 1.0;
  return out;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation activation)
    : weight_(Matrix::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
      bias_(Vector::Zero(static_cast<Eigen::Index>(out))),
      activation_(activation) {
  if (in == 0 || out == 0) throw UsageError("dense layer: zero dimension");
}

void DenseLayer::init_uniform(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim()));
  fill_uniform(weight_, bound, rng);
  fill_uniform(bias_, bound, rng);
}

void DenseLayer::set_zero() {
  weight_.setZero();
  bias_.setZero();
}

Vector DenseLayer::forward(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != in_dim()) {
    throw UsageError("dense forward: input size " + std::to_string(x.size()) + " != " +
                     std::to_string(in_dim()));
  }
  Vector y = weight_ * x + bias_;
  if (activation_ == Activation::kRelu) y = y.cwiseMax(0.0);
  return y;
}

Vector DenseLayer::forward(const LayerInput& x) const {
  if (!x.is_indicator()) return forward(x.values());
  if (x.dim() != in_dim()) throw UsageError("dense forward: indicator size mismatch");
  Vector y = bias_;
  for (auto j : x.active()) y += weight_.col(j);
  if (activation_ == Activation::kRelu) y = y.cwiseMax(0.0);
  return y;
}

Vector DenseLayer::activation_grad(const Vector& y, const Vector& dy) const {
  if (activation_ == Activation::kIdentity) return dy;
  return (y.array() > 0.0).select(dy, 0.0);
}

Vector DenseLayer::backward(const Vector& x, const Vector& y, const Vector& dy,
                            DenseLayer& grads) const {
  const Vector da = activation_grad(y, dy);
  grads.weight_.noalias() += da * x.transpose();
  grads.bias_ += da;
  return weight_.transpose() * da;
}

Vector DenseLayer::backward(const LayerInput& x, const Vector& y, const Vector& dy,
                            DenseLayer& grads, bool want_input_grad) const {
  if (!x.is_indicator()) {
    const Vector da = activation_grad(y, dy);
    grads.weight_.noalias() += da * x.values().transpose();
    grads.bias_ += da;
    return want_input_grad ? Vector(weight_.transpose() * da) : Vector();
  }
  const Vector da = activation_grad(y, dy);
  for (auto j : x.active()) grads.weight_.col(j) += da;
  grads.bias_ += da;
  return Vector();
}

std::vector<Tensor> DenseLayer::parameters() { return {view(weight_), view(bias_)}; }

LstmCell::LstmCell(std::size_t input, std::size_t hidden) : input_(input), hidden_(hidden) {
  if (input == 0 || hidden == 0) throw UsageError("lstm: zero dimension");
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto z = static_cast<Eigen::Index>(hidden + input);
  for (Matrix* w : {&w_i, &w_f, &w_o, &w_c}) *w = Matrix::Zero(h, z);
  for (Vector* b : {&b_i, &b_f, &b_o, &b_c}) *b = Vector::Zero(h);
}

void LstmCell::init_uniform(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_ + input_));
  for (Matrix* w : {&w_i, &w_f, &w_o, &w_c}) fill_uniform(*w, bound, rng);
  for (Vector* b : {&b_i, &b_f, &b_o, &b_c}) fill_uniform(*b, bound, rng);
}

void LstmCell::set_zero() {
  for (Matrix* w : {&w_i, &w_f, &w_o, &w_c}) w->setZero();
  for (Vector* b : {&b_i, &b_f, &b_o, &b_c}) b->setZero();
}

LstmState LstmCell::step(const Vector& x, const LstmState& prev) const {
  LstmStepCache cache;
  return step(x, prev, cache);
}

LstmState LstmCell::step(const Vector& x, const LstmState& prev, LstmStepCache& cache) const {
  if (static_cast<std::size_t>(x.size()) != input_ ||
      static_cast<std::size_t>(prev.h.size()) != hidden_ ||
      static_cast<std::size_t>(prev.c.size()) != hidden_) {
    throw UsageError("lstm step: shape mismatch");
  }
  cache.z.resize(static_cast<Eigen::Index>(hidden_ + input_));
  cache.z << prev.h, x;
  cache.i = sigmoid(w_i * cache.z + b_i);
  cache.f = sigmoid(w_f * cache.z + b_f);
  cache.o = sigmoid(w_o * cache.z + b_o);
  cache.c_hat = (w_c * cache.z + b_c).array().tanh().matrix();
  cache.c_prev = prev.c;
  cache.c = cache.f.cwiseProduct(prev.c) + cache.i.cwiseProduct(cache.c_hat);
  cache.tanh_c = cache.c.array().tanh().matrix();
  return {cache.o.cwiseProduct(cache.tanh_c), cache.c};
}

LstmCell::StepGrads LstmCell::backward(const LstmStepCache& cache, const Vector& dh,
                                       const Vector& dc_next, LstmCell& grads) const {
  const auto& i = cache.i.array();
  const auto& f = cache.f.array();
  const auto& o = cache.o.array();
  const auto& g = cache.c_hat.array();
  const auto& tc = cache.tanh_c.array();

  const Eigen::ArrayXd dc = dc_next.array() + dh.array() * o * (1.0 - tc * tc);
  const Vector da_o = (dh.array() * tc * o * (1.0 - o)).matrix();
  const Vector da_i = (dc * g * i * (1.0 - i)).matrix();
  const Vector da_f = (dc * cache.c_prev.array() * f * (1.0 - f)).matrix();
  const Vector da_c = (dc * i * (1.0 - g * g)).matrix();

  grads.w_i.noalias() += da_i * cache.z.transpose();
  grads.w_f.noalias() += da_f * cache.z.transpose();
  grads.w_o.noalias() += da_o * cache.z.transpose();
  grads.w_c.noalias() += da_c * cache.z.transpose();
  grads.b_i += da_i;
  grads.b_f += da_f;
  grads.b_o += da_o;
  grads.b_c += da_c;

  Vector dz = w_i.transpose() * da_i;
  dz.noalias() += w_f.transpose() * da_f;
  dz.noalias() += w_o.transpose() * da_o;
  dz.noalias() += w_c.transpose() * da_c;

  const auto h = static_cast<Eigen::Index>(hidden_);
  StepGrads out;
  out.dh_prev = dz.head(h);
  out.dx = dz.tail(static_cast<Eigen::Index>(input_));
  out.dc_prev = (dc * f).matrix();
  return out;
}

std::vector<Tensor> LstmCell::parameters() {
  return {view(w_i), view(w_f), view(w_o), view(w_c),
          view(b_i), view(b_f), view(b_o), view(b_c)};
}

}  // namespace deepref::nn
