#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "deepref/nn/layers.hpp"

namespace deepref::nn {

enum class NetworkKind { kFeedForward, kRecurrent };

std::string to_string(NetworkKind kind);

// Dimensions of a Q-network. Feed-forward: input -> hidden -> hidden ->
// actions. Recurrent: input -> hidden -> LSTM(hidden) -> actions.
struct NetworkShape {
  NetworkKind kind = NetworkKind::kFeedForward;
  std::size_t input = 0;
  std::size_t hidden = 512;
  std::size_t actions = 0;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct LayerInfo {
  std::string role;  // input | hidden | recurrent | output
  std::string type;  // dense | lstm
  std::size_t in = 0;
  std::size_t out = 0;
};

// Feed-forward Q-network with two ReLU layers and a linear output.
class FeedForwardQNet {
 public:
  struct Cache {
    LayerInput x;
    Vector h1, h2, q;
    bool valid = false;
  };

  FeedForwardQNet() = default;
  FeedForwardQNet(const NetworkShape& shape, std::mt19937_64& rng);

  const NetworkShape& shape() const { return shape_; }
  FeedForwardQNet zeros_like() const;

  Vector forward(const LayerInput& x) const;
  Vector forward(const LayerInput& x, Cache& cache) const;
  // Accumulates gradients into `grads`. Throws if `cache` holds no forward pass.
  void backward(const Cache& cache, const Vector& dq, FeedForwardQNet& grads) const;

  std::vector<Tensor> parameters();
  std::vector<LayerInfo> layers() const;
  void set_zero();

  DenseLayer input_layer, hidden_layer, output_layer;

 private:
  NetworkShape shape_;
};

// Recurrent Q-network: dense ReLU embedding, LSTM core, linear output.
class RecurrentQNet {
 public:
  struct StepCache {
    LayerInput x;
    Vector embed;
    LstmStepCache lstm;
    Vector h, q;
  };

  RecurrentQNet() = default;
  RecurrentQNet(const NetworkShape& shape, std::mt19937_64& rng);

  const NetworkShape& shape() const { return shape_; }
  RecurrentQNet zeros_like() const;
  LstmState initial_state() const { return LstmState::zeros(shape_.hidden); }

  // One time step; advances `state`.
  Vector step(const LayerInput& x, LstmState& state) const;
  Vector step(const LayerInput& x, LstmState& state, StepCache& cache) const;

  // Backpropagation through the cached steps. dq[t] is the loss gradient at
  // step t's output. Gradient flows from step t into step t-1 only when
  // t-1 >= steps.size() - truncation, i.e. through the last `truncation`
  // steps; truncation >= steps.size() is full BPTT. Throws on empty caches.
  void backward_sequence(std::span<const StepCache> steps, std::span<const Vector> dq,
                         std::size_t truncation, RecurrentQNet& grads) const;

  std::vector<Tensor> parameters();
  std::vector<LayerInfo> layers() const;
  void set_zero();

  DenseLayer input_layer;
  LstmCell lstm;
  DenseLayer output_layer;

 private:
  NetworkShape shape_;
};

}  // namespace deepref::nn
