#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzbeam/rng.hpp"

namespace thzbeam {

enum class OutputActivation { Identity, Tanh };

// Parameter-shaped gradient blocks plus the gradient with respect to the
// network input (the path used for chaining the actor through the critic).
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd input;

  void set_zero();
  MlpGradients& operator+=(const MlpGradients& other);
  void scale(double factor);
};

// Dense feed-forward network: ReLU hidden layers, configurable output
// activation. Weights are public so federation and soft updates can touch
// them directly; the architecture is fixed at construction.
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialized parameters.
  Mlp(std::vector<int> layer_sizes, OutputActivation output_activation);
  // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn row-major
  // weights first then bias, layer by layer.
  Mlp(std::vector<int> layer_sizes, OutputActivation output_activation,
      Rng& rng);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  OutputActivation output_activation() const { return output_activation_; }
  int input_size() const;
  int output_size() const;
  std::size_t parameter_count() const;
  bool same_architecture(const Mlp& other) const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // Reverse-mode gradients of dot(output, upstream) with respect to every
  // parameter and to x.
  MlpGradients backward(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& upstream) const;

  MlpGradients zero_gradients() const;

  // Fixed order: layer by layer, weight matrix row-major, then bias.
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

 private:
  std::vector<int> layer_sizes_;
  OutputActivation output_activation_ = OutputActivation::Identity;
};

// target <- tau * main + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& main, double tau);

class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const Mlp& model, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  // One descent step along grads.
  void step(Mlp& model, const MlpGradients& grads);

  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double learning_rate) {
    if (!(learning_rate > 0.0))
      throw std::invalid_argument("learning rate must be positive");
    learning_rate_ = learning_rate;
  }
  long step_count() const { return step_count_; }

 private:
  double learning_rate_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  long step_count_ = 0;
  MlpGradients first_moment_;
  MlpGradients second_moment_;
};

// Binary checkpoint layout, little-endian:
//   4 bytes magic "MLP1"
//   u32 layer count C, then C x u32 layer sizes
//   u8 output activation (0 identity, 1 tanh)
//   f64 parameters in flatten order
void write_mlp(std::ostream& out, const Mlp& model);
Mlp read_mlp(std::istream& in);
void save_mlp(const std::string& path, const Mlp& model);
Mlp load_mlp(const std::string& path);

}  // namespace thzbeam
