#pragma once

// Small fully-connected network used as the fitness surrogate: input layer,
// one logistic hidden layer, one logistic output. Trained by online
// backpropagation on squared error. Parameters live in one flat vector
// (hidden weights row-major, hidden biases, output weights, output bias) so
// gradients can be checked against finite differences element by element.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "coev/rng.hpp"

namespace coev {

struct TrainingSet {
  std::size_t width = 0;
  std::vector<double> inputs;   // rows * width, row-major
  std::vector<double> targets;  // one per row

  std::size_t rows() const { return targets.size(); }

  void add(std::span<const double> x, double target) {
    if (width == 0) width = x.size();
    if (x.size() != width) throw std::invalid_argument("training set: row width mismatch");
    inputs.insert(inputs.end(), x.begin(), x.end());
    targets.push_back(target);
  }

  std::span<const double> row(std::size_t r) const {
    return {inputs.data() + r * width, width};
  }

  void clear() {
    inputs.clear();
    targets.clear();
  }
};

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

class Mlp {
 public:
  Mlp(int inputs, int hidden) : in_(inputs), hid_(hidden) {
    if (inputs < 1 || hidden < 1) throw std::invalid_argument("mlp: need >=1 input and hidden unit");
    params_.assign(parameter_count(inputs, hidden), 0.0);
    act_.assign(static_cast<std::size_t>(hidden), 0.0);
  }

  static std::size_t parameter_count(int inputs, int hidden) {
    return static_cast<std::size_t>(inputs) * static_cast<std::size_t>(hidden) +
           static_cast<std::size_t>(hidden) + static_cast<std::size_t>(hidden) + 1;
  }

  int inputs() const { return in_; }
  int hidden() const { return hid_; }

  // Uniform [-0.5, 0.5] in parameter order.
  void init_weights(Rng& rng) {
    for (auto& w : params_) w = rng.uniform01() - 0.5;
  }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double predict(std::span<const double> x) const {
    check_input(x);
    forward(x);
    return out_;
  }

  // Squared-error loss of one sample: 1/2 (prediction - target)^2.
  double sample_loss(std::span<const double> x, double target) const {
    const double d = predict(x) - target;
    return 0.5 * d * d;
  }

  // Gradient of sample_loss with respect to every parameter, laid out like
  // parameters(). Computed from the current weights only (no update applied).
  void gradient(std::span<const double> x, double target, std::span<double> out) const {
    check_input(x);
    if (out.size() != params_.size()) throw std::invalid_argument("mlp: gradient size mismatch");
    forward(x);
    const double delta_out = (out_ - target) * out_ * (1.0 - out_);
    const std::size_t n_in = static_cast<std::size_t>(in_);
    const std::size_t n_hid = static_cast<std::size_t>(hid_);
    const std::size_t w2_base = n_in * n_hid + n_hid;
    for (std::size_t h = 0; h < n_hid; ++h) {
      const double a = act_[h];
      const double delta_h = delta_out * params_[w2_base + h] * a * (1.0 - a);
      double* gw1 = out.data() + h * n_in;
      for (std::size_t i = 0; i < n_in; ++i) gw1[i] = delta_h * x[i];
      out[n_in * n_hid + h] = delta_h;        // hidden bias
      out[w2_base + h] = delta_out * a;       // output weight
    }
    out[w2_base + n_hid] = delta_out;         // output bias
  }

  void apply_gradient(std::span<const double> g, double rate) {
    if (g.size() != params_.size()) throw std::invalid_argument("mlp: gradient size mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= rate * g[i];
  }

  // Online backprop: `epochs` passes, each visiting every sample exactly once
  // in a freshly shuffled order. Returns the number of weight updates.
  std::uint64_t train(const TrainingSet& ts, int epochs, double rate, Rng& rng) {
    if (ts.rows() == 0) return 0;
    if (static_cast<int>(ts.width) != in_) {
      throw std::invalid_argument("mlp: training set width mismatch");
    }
    order_.resize(ts.rows());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    grad_.resize(params_.size());
    std::uint64_t updates = 0;
    for (int e = 0; e < epochs; ++e) {
      rng.shuffle(order_);
      for (const std::size_t r : order_) {
        gradient(ts.row(r), ts.targets[r], grad_);
        apply_gradient(grad_, rate);
        ++updates;
      }
    }
    return updates;
  }

 private:
  void check_input(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in_) throw std::invalid_argument("mlp: input width mismatch");
  }

  void forward(std::span<const double> x) const {
    const std::size_t n_in = static_cast<std::size_t>(in_);
    const std::size_t n_hid = static_cast<std::size_t>(hid_);
    const std::size_t b1_base = n_in * n_hid;
    const std::size_t w2_base = b1_base + n_hid;
    double z_out = params_[w2_base + n_hid];  // output bias
    for (std::size_t h = 0; h < n_hid; ++h) {
      const double* w = params_.data() + h * n_in;
      double z = params_[b1_base + h];
      for (std::size_t i = 0; i < n_in; ++i) z += w[i] * x[i];
      const double a = logistic(z);
      act_[h] = a;
      z_out += params_[w2_base + h] * a;
    }
    out_ = logistic(z_out);
  }

  int in_;
  int hid_;
  std::vector<double> params_;
  mutable std::vector<double> act_;  // hidden activations of the last forward pass
  mutable double out_ = 0.0;
  std::vector<std::size_t> order_;   // scratch: epoch visit order
  std::vector<double> grad_;         // scratch: per-sample gradient
};

}  // namespace coev
