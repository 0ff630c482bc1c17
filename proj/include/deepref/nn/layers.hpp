#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace deepref::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A parameter (or gradient) tensor viewed as column-major storage.
struct Tensor {
  std::span<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

inline Tensor view(Matrix& m) {
  return {{m.data(), static_cast<std::size_t>(m.size())},
          static_cast<std::size_t>(m.rows()),
          static_cast<std::size_t>(m.cols())};
}
inline Tensor view(Vector& v) {
  return {{v.data(), static_cast<std::size_t>(v.size())}, static_cast<std::size_t>(v.size()), 1};
}

// Input to a layer: a dense real vector or a binary indicator given by its
// set positions. Indicator inputs take a sparse path through the first layer.
class LayerInput {
 public:
  LayerInput() = default;
  static LayerInput dense(Vector values);
  static LayerInput indicator(std::size_t dim, std::vector<std::uint32_t> active);

  std::size_t dim() const { return dim_; }
  bool is_indicator() const { return indicator_; }
  const Vector& values() const { return values_; }
  const std::vector<std::uint32_t>& active() const { return active_; }
  Vector to_dense() const;

 private:
  std::size_t dim_ = 0;
  bool indicator_ = false;
  Vector values_;
  std::vector<std::uint32_t> active_;
};

enum class Activation { kIdentity, kRelu };

// y = act(W x + b), W is out x in.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation activation);

  std::size_t in_dim() const { return static_cast<std::size_t>(weight_.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight_.rows()); }
  Activation activation() const { return activation_; }

  Matrix& weight() { return weight_; }
  const Matrix& weight() const { return weight_; }
  Vector& bias() { return bias_; }
  const Vector& bias() const { return bias_; }

  // Uniform in [-1/sqrt(in), 1/sqrt(in)] for weights and biases.
  void init_uniform(std::mt19937_64& rng);
  void set_zero();

  Vector forward(const Vector& x) const;
  Vector forward(const LayerInput& x) const;

  // Accumulates parameter gradients into `grads` (a layer of the same shape)
  // given the forward input x, output y and upstream gradient dy. Returns the
  // gradient with respect to x; empty for indicator inputs.
  Vector backward(const Vector& x, const Vector& y, const Vector& dy, DenseLayer& grads) const;
  Vector backward(const LayerInput& x, const Vector& y, const Vector& dy, DenseLayer& grads,
                  bool want_input_grad = false) const;

  std::vector<Tensor> parameters();

 private:
  Vector activation_grad(const Vector& y, const Vector& dy) const;

  Matrix weight_;
  Vector bias_;
  Activation activation_ = Activation::kIdentity;
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden) {
    return {Vector::Zero(static_cast<Eigen::Index>(hidden)),
            Vector::Zero(static_cast<Eigen::Index>(hidden))};
  }
};

// Values kept from one forward step for backpropagation.
struct LstmStepCache {
  Vector z;  // [h_{t-1}, x_t]
  Vector i, f, o, c_hat;
  Vector c_prev, c, tanh_c;
};

// LSTM cell; every gate reads the concatenation [h_{t-1}, x_t]:
//   i = sigmoid(w_i z + b_i)    f = sigmoid(w_f z + b_f)
//   o = sigmoid(w_o z + b_o)    c_hat = tanh(w_c z + b_c)
//   c = f * c_{t-1} + i * c_hat
//   h = o * tanh(c)
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(std::size_t input, std::size_t hidden);

  std::size_t input_dim() const { return input_; }
  std::size_t hidden_dim() const { return hidden_; }

  Matrix w_i, w_f, w_o, w_c;
  Vector b_i, b_f, b_o, b_c;

  void init_uniform(std::mt19937_64& rng);
  void set_zero();

  LstmState step(const Vector& x, const LstmState& prev) const;
  LstmState step(const Vector& x, const LstmState& prev, LstmStepCache& cache) const;

  struct StepGrads {
    Vector dx;
    Vector dh_prev;
    Vector dc_prev;
  };
  // dh: gradient reaching h_t; dc: gradient reaching c_t from step t+1.
  StepGrads backward(const LstmStepCache& cache, const Vector& dh, const Vector& dc,
                     LstmCell& grads) const;

  std::vector<Tensor> parameters();

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
};

}  // namespace deepref::nn
