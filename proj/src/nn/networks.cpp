#include "deepref/nn/networks.hpp"

#include "deepref/error.hpp"

namespace deepref::nn {

std::string to_string(NetworkKind kind) {
  return kind == NetworkKind::kFeedForward ? "dqn" : "drqn";
}

namespace {

void check_shape(const NetworkShape& s, NetworkKind expected) {
  if (s.kind != expected) throw UsageError("network: wrong kind for shape");
  if (s.input == 0 || s.hidden == 0 || s.actions == 0) throw UsageError("network: zero dimension");
}

template <typename Net>
std::vector<Tensor> concat_params(std::initializer_list<std::vector<Tensor>> groups) {
  std::vector<Tensor> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

}  // namespace

FeedForwardQNet::FeedForwardQNet(const NetworkShape& shape, std::mt19937_64& rng)
    : input_layer(shape.input, shape.hidden, Activation::kRelu),
      hidden_layer(shape.hidden, shape.hidden, Activation::kRelu),
      output_layer(shape.hidden, shape.actions, Activation::kIdentity),
      shape_(shape) {
  check_shape(shape, NetworkKind::kFeedForward);
  input_layer.init_uniform(rng);
  hidden_layer.init_uniform(rng);
  output_layer.init_uniform(rng);
}

FeedForwardQNet FeedForwardQNet::zeros_like() const {
  FeedForwardQNet out = *this;
  out.set_zero();
  return out;
}

void FeedForwardQNet::set_zero() {
  input_layer.set_zero();
  hidden_layer.set_zero();
  output_layer.set_zero();
}

Vector FeedForwardQNet::forward(const LayerInput& x) const {
  return output_layer.forward(hidden_layer.forward(input_layer.forward(x)));
}

Vector FeedForwardQNet::forward(const LayerInput& x, Cache& cache) const {
  cache.x = x;
  cache.h1 = input_layer.forward(x);
  cache.h2 = hidden_layer.forward(cache.h1);
  cache.q = output_layer.forward(cache.h2);
  cache.valid = true;
  return cache.q;
}

void FeedForwardQNet::backward(const Cache& cache, const Vector& dq, FeedForwardQNet& grads) const {
  if (!cache.valid) throw UsageError("backward: no cached forward pass");
  if (dq.size() != cache.q.size()) throw UsageError("backward: gradient size mismatch");
  const Vector dh2 = output_layer.backward(cache.h2, cache.q, dq, grads.output_layer);
  const Vector dh1 = hidden_layer.backward(cache.h1, cache.h2, dh2, grads.hidden_layer);
  input_layer.backward(cache.x, cache.h1, dh1, grads.input_layer);
}

std::vector<Tensor> FeedForwardQNet::parameters() {
  return concat_params<FeedForwardQNet>(
      {input_layer.parameters(), hidden_layer.parameters(), output_layer.parameters()});
}

std::vector<LayerInfo> FeedForwardQNet::layers() const {
  return {{"input", "dense", input_layer.in_dim(), input_layer.out_dim()},
          {"hidden", "dense", hidden_layer.in_dim(), hidden_layer.out_dim()},
          {"output", "dense", output_layer.in_dim(), output_layer.out_dim()}};
}

RecurrentQNet::RecurrentQNet(const NetworkShape& shape, std::mt19937_64& rng)
    : input_layer(shape.input, shape.hidden, Activation::kRelu),
      lstm(shape.hidden, shape.hidden),
      output_layer(shape.hidden, shape.actions, Activation::kIdentity),
      shape_(shape) {
  check_shape(shape, NetworkKind::kRecurrent);
  input_layer.init_uniform(rng);
  lstm.init_uniform(rng);
  output_layer.init_uniform(rng);
}

RecurrentQNet RecurrentQNet::zeros_like() const {
  RecurrentQNet out = *this;
  out.set_zero();
  return out;
}

void RecurrentQNet::set_zero() {
  input_layer.set_zero();
  lstm.set_zero();
  output_layer.set_zero();
}

Vector RecurrentQNet::step(const LayerInput& x, LstmState& state) const {
  state = lstm.step(input_layer.forward(x), state);
  return output_layer.forward(state.h);
}

Vector RecurrentQNet::step(const LayerInput& x, LstmState& state, StepCache& cache) const {
  cache.x = x;
  cache.embed = input_layer.forward(x);
  state = lstm.step(cache.embed, state, cache.lstm);
  cache.h = state.h;
  cache.q = output_layer.forward(state.h);
  return cache.q;
}

void RecurrentQNet::backward_sequence(std::span<const StepCache> steps, std::span<const Vector> dq,
                                      std::size_t truncation, RecurrentQNet& grads) const {
  if (steps.empty()) throw UsageError("backward: no cached forward pass");
  if (dq.size() != steps.size()) throw UsageError("backward: one output gradient per step");
  const std::size_t n = steps.size();
  const std::size_t first_linked = truncation >= n ? 0 : n - truncation;
  const auto hidden = static_cast<Eigen::Index>(shape_.hidden);

  Vector dh_next = Vector::Zero(hidden);
  Vector dc_next = Vector::Zero(hidden);
  for (std::size_t t = n; t-- > 0;) {
    const auto& s = steps[t];
    Vector dh = output_layer.backward(s.h, s.q, dq[t], grads.output_layer);
    dh += dh_next;
    const auto g = lstm.backward(s.lstm, dh, dc_next, grads.lstm);
    input_layer.backward(s.x, s.embed, g.dx, grads.input_layer);
    if (t > first_linked) {
      dh_next = g.dh_prev;
      dc_next = g.dc_prev;
    } else {
      dh_next.setZero();
      dc_next.setZero();
    }
  }
}

std::vector<Tensor> RecurrentQNet::parameters() {
  return concat_params<RecurrentQNet>(
      {input_layer.parameters(), lstm.parameters(), output_layer.parameters()});
}

std::vector<LayerInfo> RecurrentQNet::layers() const {
  return {{"input", "dense", input_layer.in_dim(), input_layer.out_dim()},
          {"recurrent", "lstm", lstm.input_dim(), lstm.hidden_dim()},
          {"output", "dense", output_layer.in_dim(), output_layer.out_dim()}};
}

}  // namespace deepref::nn
