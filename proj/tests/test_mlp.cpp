#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "thzbeam/mlp.hpp"
#include "thzbeam/selftest.hpp"

using namespace thzbeam;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) x[i++] = v;
  return x;
}

Mlp random_net(std::vector<int> sizes, OutputActivation act, uint64_t seed) {
  Rng rng(seed);
  return Mlp(std::move(sizes), act, rng);
}

}  // namespace

TEST_CASE("zero-initialized network maps everything to zero") {
  Mlp net({3, 5, 2}, OutputActivation::Identity);
  const Eigen::VectorXd y = net.forward(vec({1.0, -2.0, 3.0}));
  REQUIRE(y.size() == 2);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
}

TEST_CASE("hand-set identity weights pass the input through") {
  Mlp net({2, 2, 2}, OutputActivation::Identity);
  net.weights[0] = Eigen::MatrixXd::Identity(2, 2);
  net.weights[1] = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd y = net.forward(vec({0.3, 1.7}));
  // Positive inputs survive the hidden ReLU unchanged.
  CHECK(y[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(1.7).epsilon(1e-15));
}

TEST_CASE("hidden relu clips negative pre-activations") {
  Mlp net({1, 1, 1}, OutputActivation::Identity);
  net.weights[0](0, 0) = 1.0;
  net.weights[1](0, 0) = 1.0;
  CHECK(net.forward(vec({-5.0}))[0] == 0.0);
  CHECK(net.forward(vec({2.0}))[0] == 2.0);
}

TEST_CASE("tanh output squashes a unit pre-activation to tanh(1)") {
  Mlp net({1, 1, 1}, OutputActivation::Tanh);
  net.weights[0](0, 0) = 1.0;
  net.weights[1](0, 0) = 1.0;
  CHECK(net.forward(vec({1.0}))[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
}

TEST_CASE("tanh outputs stay strictly inside (-1, 1)") {
  Mlp net = random_net({4, 10, 3}, OutputActivation::Tanh, 5);
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = 10.0 * rng.gaussian();
    const Eigen::VectorXd y = net.forward(x);
    for (int i = 0; i < 3; ++i) {
      CHECK(y[i] > -1.0);
      CHECK(y[i] < 1.0);
    }
  }
}

TEST_CASE("parameter count matches the layer dimensions") {
  Mlp net({3, 5, 2}, OutputActivation::Identity);
  CHECK(net.parameter_count() == 3 * 5 + 5 + 5 * 2 + 2);  // 32
  Mlp wide({17, 100, 70, 16}, OutputActivation::Tanh);
  CHECK(wide.parameter_count() ==
        17 * 100 + 100 + 100 * 70 + 70 + 70 * 16 + 16);
}

TEST_CASE("degenerate architectures are rejected") {
  CHECK_THROWS_AS(Mlp({3}, OutputActivation::Identity), std::invalid_argument);
  CHECK_THROWS_AS(Mlp({3, 0, 2}, OutputActivation::Identity),
                  std::invalid_argument);
  CHECK_THROWS_AS(Mlp({}, OutputActivation::Identity), std::invalid_argument);
}

TEST_CASE("single-layer backward recovers the closed-form gradients") {
  // y = W x + b, objective = dot(y, u): dW = u x^T, db = u, dx = W^T u.
  Mlp net({2, 3}, OutputActivation::Identity);
  net.weights[0] << 1.0, -2.0, 0.5, 4.0, 3.0, -1.0;
  net.biases[0] << 0.1, 0.2, 0.3;
  const Eigen::VectorXd x = vec({2.0, -1.0});
  const Eigen::VectorXd u = vec({1.0, 0.0, -2.0});
  const MlpGradients g = net.backward(x, u);
  const Eigen::MatrixXd dw_ref = u * x.transpose();
  CHECK((g.weights[0] - dw_ref).norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK((g.biases[0] - u).norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK((g.input - net.weights[0].transpose() * u).norm() ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("backward matches central finite differences on random networks") {
  Rng rng(909);
  int checked = 0;
  while (checked < 6) {
    const int in = 1 + static_cast<int>(rng.index(5));
    const int hidden = 1 + static_cast<int>(rng.index(8));
    const int out = 1 + static_cast<int>(rng.index(4));
    const OutputActivation act =
        checked % 2 == 0 ? OutputActivation::Identity : OutputActivation::Tanh;
    Mlp net = random_net({in, hidden, out}, act, rng.next_u64());
    Eigen::VectorXd x(in);
    for (int i = 0; i < in; ++i) x[i] = rng.gaussian();
    if (oracle::near_relu_kink(net, x, 1e-3)) continue;
    Eigen::VectorXd u(out);
    for (int i = 0; i < out; ++i) u[i] = rng.gaussian();
    CHECK(oracle::max_gradient_error(net, x, u) < 1e-4);
    ++checked;
  }
}

TEST_CASE("flatten and unflatten round-trip bitwise") {
  Mlp net = random_net({3, 7, 4, 2}, OutputActivation::Tanh, 21);
  const std::vector<double> flat = net.flatten();
  CHECK(flat.size() == net.parameter_count());
  Mlp copy({3, 7, 4, 2}, OutputActivation::Tanh);
  copy.unflatten(flat);
  const std::vector<double> again = copy.flatten();
  REQUIRE(again.size() == flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) CHECK(again[i] == flat[i]);
  // The forward pass of the copy is identical too.
  const Eigen::VectorXd x = vec({0.2, -0.4, 1.0});
  CHECK((net.forward(x) - copy.forward(x)).norm() == 0.0);
}

TEST_CASE("unflatten rejects mismatched lengths") {
  Mlp net({2, 2, 1}, OutputActivation::Identity);
  std::vector<double> flat(net.parameter_count() + 1, 0.0);
  CHECK_THROWS_AS(net.unflatten(flat), std::invalid_argument);
}

TEST_CASE("flatten order is layer-major with row-major weights then bias") {
  Mlp net({2, 1}, OutputActivation::Identity);
  net.weights[0] << 3.0, 4.0;
  net.biases[0] << 5.0;
  const std::vector<double> flat = net.flatten();
  REQUIRE(flat.size() == 3);
  CHECK(flat[0] == 3.0);
  CHECK(flat[1] == 4.0);
  CHECK(flat[2] == 5.0);
}

TEST_CASE("soft update with tau one copies and with tau zero preserves") {
  Mlp main = random_net({2, 3, 1}, OutputActivation::Identity, 31);
  Mlp target = random_net({2, 3, 1}, OutputActivation::Identity, 32);
  Mlp before = target;
  soft_update(target, main, 0.0);
  for (std::size_t l = 0; l < target.weights.size(); ++l)
    CHECK((target.weights[l] - before.weights[l]).norm() == 0.0);
  soft_update(target, main, 1.0);
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    CHECK((target.weights[l] - main.weights[l]).norm() == 0.0);
    CHECK((target.biases[l] - main.biases[l]).norm() == 0.0);
  }
}

TEST_CASE("scalar soft update interpolates exactly") {
  Mlp main({1, 1}, OutputActivation::Identity);
  Mlp target({1, 1}, OutputActivation::Identity);
  main.weights[0](0, 0) = 1.0;
  target.weights[0](0, 0) = 0.0;
  soft_update(target, main, 0.01);
  CHECK(target.weights[0](0, 0) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("repeated soft updates converge geometrically to the main network") {
  Mlp main({1, 1}, OutputActivation::Identity);
  Mlp target({1, 1}, OutputActivation::Identity);
  main.weights[0](0, 0) = 1.0;
  const double tau = 0.25;
  for (int t = 1; t <= 8; ++t) {
    soft_update(target, main, tau);
    const double expected = 1.0 - std::pow(1.0 - tau, t);
    CHECK(target.weights[0](0, 0) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("soft update rejects mismatched architectures and bad tau") {
  Mlp a({2, 2}, OutputActivation::Identity);
  Mlp b({2, 3}, OutputActivation::Identity);
  CHECK_THROWS_AS(soft_update(a, b, 0.5), std::invalid_argument);
  Mlp c({2, 2}, OutputActivation::Identity);
  CHECK_THROWS_AS(soft_update(a, c, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(soft_update(a, c, 1.1), std::invalid_argument);
}

TEST_CASE("adam leaves parameters alone on a zero gradient") {
  Mlp net = random_net({2, 4, 1}, OutputActivation::Identity, 40);
  const std::vector<double> before = net.flatten();
  AdamOptimizer opt(net, 1e-2);
  opt.step(net, net.zero_gradients());
  const std::vector<double> after = net.flatten();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i]);
}

TEST_CASE("adam descends a scalar quadratic") {
  // Minimize 0.5 * w^2 via its gradient w; the iterate must shrink toward 0.
  Mlp net({1, 1}, OutputActivation::Identity);
  net.weights[0](0, 0) = 1.0;
  AdamOptimizer opt(net, 1e-2);
  double prev = 1.0;
  for (int t = 0; t < 200; ++t) {
    MlpGradients g = net.zero_gradients();
    g.weights[0](0, 0) = net.weights[0](0, 0);
    opt.step(net, g);
  }
  CHECK(std::abs(net.weights[0](0, 0)) < 0.1);
  CHECK(opt.step_count() == 200);
  (void)prev;
}

TEST_CASE("adam is deterministic given identical inputs") {
  Mlp a = random_net({3, 6, 2}, OutputActivation::Tanh, 50);
  Mlp b = a;
  AdamOptimizer oa(a, 3e-3);
  AdamOptimizer ob(b, 3e-3);
  Rng rng(51);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd x(3), u(2);
    for (int i = 0; i < 3; ++i) x[i] = rng.gaussian();
    for (int i = 0; i < 2; ++i) u[i] = rng.gaussian();
    oa.step(a, a.backward(x, u));
    ob.step(b, b.backward(x, u));
  }
  const std::vector<double> fa = a.flatten();
  const std::vector<double> fb = b.flatten();
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(fa[i] == fb[i]);
}

TEST_CASE("learning-rate setter validates positivity") {
  Mlp net({1, 1}, OutputActivation::Identity);
  AdamOptimizer opt(net, 1e-3);
  CHECK_THROWS_AS(opt.set_learning_rate(0.0), std::invalid_argument);
  CHECK_THROWS_AS(opt.set_learning_rate(-1.0), std::invalid_argument);
  opt.set_learning_rate(5e-4);
  CHECK(opt.learning_rate() == 5e-4);
}

TEST_CASE("binary checkpoint round-trips bitwise through a stream") {
  Mlp net = random_net({5, 9, 3}, OutputActivation::Tanh, 60);
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_mlp(buf, net);
  const Mlp back = read_mlp(buf);
  CHECK(back.same_architecture(net));
  CHECK(back.output_activation() == net.output_activation());
  const std::vector<double> fa = net.flatten();
  const std::vector<double> fb = back.flatten();
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(fa[i] == fb[i]);
}

TEST_CASE("binary checkpoint round-trips through a file") {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "thzbeam_mlp_roundtrip.bin";
  Mlp net = random_net({4, 7, 2}, OutputActivation::Identity, 61);
  save_mlp(path.string(), net);
  const Mlp back = load_mlp(path.string());
  CHECK(back.same_architecture(net));
  const std::vector<double> fa = net.flatten();
  const std::vector<double> fb = back.flatten();
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(fa[i] == fb[i]);
  std::filesystem::remove(path);
}

TEST_CASE("reading a corrupted checkpoint fails cleanly") {
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  buf.write("JUNK", 4);
  CHECK_THROWS(read_mlp(buf));
}

TEST_CASE("random init respects the fan-in bound") {
  Rng rng(70);
  Mlp net({100, 50, 10}, OutputActivation::Identity, rng);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const double bound = 1.0 / std::sqrt(net.weights[l].cols());
    CHECK(net.weights[l].cwiseAbs().maxCoeff() <= bound + 1e-12);
    CHECK(net.biases[l].cwiseAbs().maxCoeff() <= bound + 1e-12);
  }
  // Not all zero.
  CHECK(net.weights[0].cwiseAbs().sum() > 0.0);
}

TEST_CASE("same_architecture distinguishes shapes") {
  Mlp a({2, 3, 1}, OutputActivation::Identity);
  Mlp b({2, 3, 1}, OutputActivation::Tanh);
  Mlp c({2, 4, 1}, OutputActivation::Identity);
  Mlp d({2, 3, 1}, OutputActivation::Identity);
  CHECK(a.same_architecture(d));
  CHECK_FALSE(a.same_architecture(b));
  CHECK_FALSE(a.same_architecture(c));
}
