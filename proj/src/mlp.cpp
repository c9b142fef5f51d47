#include "thzbeam/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "thzbeam/binary_io.hpp"
#include "thzbeam/errors.hpp"

namespace thzbeam {

namespace {

void check_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output layers");
  for (int n : layer_sizes)
    if (n < 1) throw std::invalid_argument("mlp: every layer needs at least one unit");
}

}  // namespace

void MlpGradients::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
  input.setZero();
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size())
    throw std::invalid_argument("gradients: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols())
      throw std::invalid_argument("gradients: weight shape mismatch");
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  if (input.size() == other.input.size())
    input += other.input;
  else if (input.size() == 0)
    input = other.input;
  return *this;
}

void MlpGradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
  input *= factor;
}

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output_activation)
    : layer_sizes_(std::move(layer_sizes)), output_activation_(output_activation) {
  check_sizes(layer_sizes_);
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weights.emplace_back(Eigen::MatrixXd::Zero(layer_sizes_[l + 1], layer_sizes_[l]));
    biases.emplace_back(Eigen::VectorXd::Zero(layer_sizes_[l + 1]));
  }
}

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output_activation, Rng& rng)
    : Mlp(std::move(layer_sizes), output_activation) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer_sizes_[l]));
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        weights[l](r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      biases[l](r) = rng.uniform(-bound, bound);
  }
}

int Mlp::input_size() const {
  return layer_sizes_.empty() ? 0 : layer_sizes_.front();
}

int Mlp::output_size() const {
  return layer_sizes_.empty() ? 0 : layer_sizes_.back();
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l)
    n += static_cast<std::size_t>(layer_sizes_[l]) * layer_sizes_[l + 1] + layer_sizes_[l + 1];
  return n;
}

bool Mlp::same_architecture(const Mlp& other) const {
  return layer_sizes_ == other.layer_sizes_ &&
         output_activation_ == other.output_activation_;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_size())
    throw std::invalid_argument("mlp forward: input dimension mismatch");
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::VectorXd z = weights[l] * a + biases[l];
    if (l + 1 < weights.size())
      a = z.cwiseMax(0.0);
    else if (output_activation_ == OutputActivation::Tanh)
      a = z.array().tanh();
    else
      a = z;
  }
  return a;
}

MlpGradients Mlp::backward(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& upstream) const {
  if (x.size() != input_size())
    throw std::invalid_argument("mlp backward: input dimension mismatch");
  if (upstream.size() != output_size())
    throw std::invalid_argument("mlp backward: upstream dimension mismatch");

  const std::size_t layers = weights.size();
  std::vector<Eigen::VectorXd> acts(layers + 1);
  std::vector<Eigen::VectorXd> preacts(layers);
  acts[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    preacts[l] = weights[l] * acts[l] + biases[l];
    if (l + 1 < layers)
      acts[l + 1] = preacts[l].cwiseMax(0.0);
    else if (output_activation_ == OutputActivation::Tanh)
      acts[l + 1] = preacts[l].array().tanh();
    else
      acts[l + 1] = preacts[l];
  }

  MlpGradients g = zero_gradients();
  Eigen::VectorXd delta;
  if (output_activation_ == OutputActivation::Tanh)
    delta = upstream.cwiseProduct(
        (1.0 - acts[layers].array().square()).matrix());
  else
    delta = upstream;

  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta;
    Eigen::VectorXd down = weights[l].transpose() * delta;
    if (l > 0)
      delta = down.cwiseProduct(
          (preacts[l - 1].array() > 0.0).cast<double>().matrix());
    else
      g.input = down;
  }
  return g;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(weights[l].rows(), weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(biases[l].size()));
  }
  g.input = Eigen::VectorXd::Zero(input_size());
  return g;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        flat.push_back(weights[l](r, c));
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      flat.push_back(biases[l](r));
  }
  return flat;
}

void Mlp::unflatten(const std::vector<double>& flat) {
  if (flat.size() != parameter_count())
    throw std::invalid_argument("mlp unflatten: length mismatch");
  std::size_t i = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c)
        weights[l](r, c) = flat[i++];
    for (Eigen::Index r = 0; r < biases[l].size(); ++r)
      biases[l](r) = flat[i++];
  }
}

void soft_update(Mlp& target, const Mlp& main, double tau) {
  if (!target.same_architecture(main))
    throw std::invalid_argument("soft_update: architecture mismatch");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("soft_update: tau must lie in [0, 1]");
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = tau * main.weights[l] + (1.0 - tau) * target.weights[l];
    target.biases[l] = tau * main.biases[l] + (1.0 - tau) * target.biases[l];
  }
}

AdamOptimizer::AdamOptimizer(const Mlp& model, double learning_rate,
                             double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_moment_(model.zero_gradients()),
      second_moment_(model.zero_gradients()) {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("adam: learning rate must be positive");
}

void AdamOptimizer::step(Mlp& model, const MlpGradients& grads) {
  if (grads.weights.size() != first_moment_.weights.size())
    throw std::invalid_argument("adam: gradient layer count mismatch");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    if (param.rows() != g.rows() || param.cols() != g.cols())
      throw std::invalid_argument("adam: gradient shape mismatch");
    m = beta1_ * m + (1.0 - beta1_) * g;
    v.array() = beta2_ * v.array() + (1.0 - beta2_) * g.array().square();
    param.array() -= learning_rate_ * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + epsilon_);
  };
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    update(model.weights[l], first_moment_.weights[l], second_moment_.weights[l],
           grads.weights[l]);
    update(model.biases[l], first_moment_.biases[l], second_moment_.biases[l],
           grads.biases[l]);
  }
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'P', '1'};

}  // namespace

void write_mlp(std::ostream& out, const Mlp& model) {
  out.write(kMagic, 4);
  io::write_u32(out, static_cast<std::uint32_t>(model.layer_sizes().size()));
  for (int n : model.layer_sizes()) io::write_u32(out, static_cast<std::uint32_t>(n));
  const unsigned char act =
      model.output_activation() == OutputActivation::Tanh ? 1 : 0;
  out.write(reinterpret_cast<const char*>(&act), 1);
  for (double v : model.flatten()) io::write_f64(out, v);
  if (!out) throw IoError("mlp write failed");
}

Mlp read_mlp(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("mlp read: bad magic");
  const std::uint32_t count = io::read_u32(in);
  if (count < 2 || count > 64)
    throw IoError("mlp read: implausible layer count");
  std::vector<int> sizes(count);
  for (auto& n : sizes) n = static_cast<int>(io::read_u32(in));
  unsigned char act = 0;
  in.read(reinterpret_cast<char*>(&act), 1);
  if (!in) throw IoError("mlp read: truncated header");
  if (act > 1) throw IoError("mlp read: unknown activation");
  Mlp model(sizes, act == 1 ? OutputActivation::Tanh : OutputActivation::Identity);
  std::vector<double> flat(model.parameter_count());
  for (auto& v : flat) v = io::read_f64(in);
  model.unflatten(flat);
  return model;
}

void save_mlp(const std::string& path, const Mlp& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_mlp(out, model);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return read_mlp(in);
}

}  // namespace thzbeam
