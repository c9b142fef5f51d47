#include "thzbeam/selftest.hpp"

#include <cmath>
#include <sstream>

#include "thzbeam/baselines.hpp"
#include "thzbeam/channel.hpp"
#include "thzbeam/federation.hpp"
#include "thzbeam/rng.hpp"

namespace thzbeam::oracle {

namespace {

double evaluate(const Mlp& net, const Eigen::VectorXd& x,
                const Eigen::VectorXd& upstream) {
  return net.forward(x).dot(upstream);
}

}  // namespace

MlpGradients fd_param_gradients(const Mlp& net, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& upstream, double h) {
  Mlp probe = net;
  MlpGradients grads = net.zero_gradients();
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < probe.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < probe.weights[l].cols(); ++c) {
        const double saved = probe.weights[l](r, c);
        probe.weights[l](r, c) = saved + h;
        const double up = evaluate(probe, x, upstream);
        probe.weights[l](r, c) = saved - h;
        const double down = evaluate(probe, x, upstream);
        probe.weights[l](r, c) = saved;
        grads.weights[l](r, c) = (up - down) / (2.0 * h);
      }
    }
    for (Eigen::Index r = 0; r < probe.biases[l].size(); ++r) {
      const double saved = probe.biases[l][r];
      probe.biases[l][r] = saved + h;
      const double up = evaluate(probe, x, upstream);
      probe.biases[l][r] = saved - h;
      const double down = evaluate(probe, x, upstream);
      probe.biases[l][r] = saved;
      grads.biases[l][r] = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

Eigen::VectorXd fd_input_gradients(const Mlp& net, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& upstream, double h) {
  Eigen::VectorXd probe = x;
  Eigen::VectorXd grads(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = evaluate(net, probe, upstream);
    probe[i] = saved - h;
    const double down = evaluate(net, probe, upstream);
    probe[i] = saved;
    grads[i] = (up - down) / (2.0 * h);
  }
  return grads;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

bool near_relu_kink(const Mlp& net, const Eigen::VectorXd& x, double margin) {
  Eigen::VectorXd activation = x;
  for (std::size_t l = 0; l + 1 < net.weights.size(); ++l) {
    const Eigen::VectorXd preact = net.weights[l] * activation + net.biases[l];
    if ((preact.array().abs() < margin).any()) return true;
    activation = preact.cwiseMax(0.0);
  }
  return false;
}

double max_gradient_error(const Mlp& net, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& upstream, double h) {
  const MlpGradients analytic = net.backward(x, upstream);
  const MlpGradients fd = fd_param_gradients(net, x, upstream, h);
  const Eigen::VectorXd fd_input = fd_input_gradients(net, x, upstream, h);

  double worst = 0.0;
  for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < analytic.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < analytic.weights[l].cols(); ++c)
        worst = std::max(worst, relative_error(analytic.weights[l](r, c),
                                               fd.weights[l](r, c)));
    for (Eigen::Index r = 0; r < analytic.biases[l].size(); ++r)
      worst = std::max(worst,
                       relative_error(analytic.biases[l][r], fd.biases[l][r]));
  }
  for (Eigen::Index i = 0; i < fd_input.size(); ++i)
    worst = std::max(worst, relative_error(analytic.input[i], fd_input[i]));
  return worst;
}

double sinr_bruteforce(const NetworkScenario& sc, const BeamformerSet& beams,
                       int k, bool limited) {
  const int N = sc.num_antennas;
  const ChannelVector serving = limited ? sc.serving_limited(k) : sc.link(k, k);

  auto beam_power = [N](const ChannelVector& h, const ChannelVector& w) {
    double re = 0.0, im = 0.0;
    for (int n = 0; n < N; ++n) {
      const double hr = h[n].real(), hi = h[n].imag();
      const double wr = w[n].real(), wi = w[n].imag();
      re += hr * wr + hi * wi;
      im += hr * wi - hi * wr;
    }
    return re * re + im * im;
  };

  const double desired = sc.tx_power_w * beam_power(serving, beams.w[k]);
  double interference = 0.0;
  for (int j = 0; j < sc.num_cells; ++j) {
    if (j == k) continue;
    interference += sc.tx_power_w * beam_power(sc.link(j, k), beams.w[j]);
  }
  return desired / (interference + sc.noise_w);
}

namespace {

struct Checker {
  CheckReport report;
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    if (ok) {
      ++report.passed;
      report.messages.push_back("ok " + name);
    } else {
      ++report.failed;
      report.messages.push_back("FAIL " + name +
                                (detail.empty() ? "" : ": " + detail));
    }
  }
};

Mlp random_net(Rng& rng, OutputActivation activation) {
  const int layers = 1 + static_cast<int>(rng.index(3));
  std::vector<int> sizes;
  sizes.push_back(1 + static_cast<int>(rng.index(8)));
  for (int l = 0; l < layers; ++l) sizes.push_back(1 + static_cast<int>(rng.index(12)));
  return Mlp(sizes, activation, rng);
}

}  // namespace

CheckReport run_self_checks(std::uint64_t seed) {
  Checker out;
  Rng rng(seed);

  {
    double worst = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
      const OutputActivation activation =
          trial % 2 == 0 ? OutputActivation::Tanh : OutputActivation::Identity;
      Mlp net = random_net(rng, activation);
      Eigen::VectorXd x(net.input_size());
      do {
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);
      } while (near_relu_kink(net, x, 1e-3));
      Eigen::VectorXd upstream(net.output_size());
      for (Eigen::Index i = 0; i < upstream.size(); ++i)
        upstream[i] = rng.uniform(-1, 1);
      worst = std::max(worst, max_gradient_error(net, x, upstream));
    }
    out.check("gradient-finite-difference", worst < 1e-4,
              "max rel err " + std::to_string(worst));
  }

  {
    ChannelParams params;
    params.num_antennas = 6;
    bool agree = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int cells = 1 + static_cast<int>(rng.index(4));
      NetworkScenario sc = generate_scenario(rng, cells, params, 10.0, 100.0,
                                             0.5 + 0.5 * rng.uniform01());
      BeamformerSet beams = random_beams(rng, cells, params.num_antennas);
      for (int k = 0; k < cells; ++k) {
        const double full = sinr(sc, beams, k);
        const double masked = sinr_limited(sc, beams, k);
        const double full_ref = sinr_bruteforce(sc, beams, k, false);
        const double masked_ref = sinr_bruteforce(sc, beams, k, true);
        const double err = std::max(
            std::abs(full - full_ref) / std::max(std::abs(full_ref), 1e-300),
            std::abs(masked - masked_ref) /
                std::max(std::abs(masked_ref), 1e-300));
        worst = std::max(worst, err);
        agree = agree && err < 1e-12;
      }
    }
    out.check("sinr-bruteforce", agree, "max rel err " + std::to_string(worst));
  }

  out.check("rate-landmarks", rate(1.0) == 1.0 && rate(3.0) == 2.0);

  {
    Mlp net = random_net(rng, OutputActivation::Tanh);
    Mlp clone(net.layer_sizes(), net.output_activation());
    clone.unflatten(net.flatten());
    bool equal = clone.flatten() == net.flatten();
    std::stringstream buffer;
    write_mlp(buffer, net);
    const Mlp reread = read_mlp(buffer);
    equal = equal && reread.flatten() == net.flatten() &&
            reread.layer_sizes() == net.layer_sizes();
    out.check("serialization-roundtrip", equal);
  }

  out.check("dbm-conversions", dbm_to_watt(10.0) == 0.01 &&
                                   dbm_to_watt(-74.0) == std::pow(10.0, -10.4));

  {
    ChannelParams params;
    out.check("spread-loss-landmark",
              std::abs(spread_loss(params, 10.0) - 4.823278545247771e-06) <
                  1e-20);
  }

  {
    ChannelParams params;
    params.num_antennas = 8;
    NetworkScenario sc = generate_scenario(rng, 3, params, 10.0, 100.0, 1.0);
    const BeamformerSet beams = zf_beamformers(sc);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) {
        if (j == k) continue;
        const ChannelVector& h = sc.link(k, j);
        const double leak = std::norm(h.dot(beams.w[k])) / h.squaredNorm();
        worst = std::max(worst, leak);
      }
    out.check("zero-forcing-null-depth", worst < 1e-20,
              "worst leakage " + std::to_string(worst));
  }

  {
    const UploadPackage a = make_full_package(0, 1, {1.0, 2.0});
    const UploadPackage b = make_full_package(1, 1, {3.0, 4.0});
    const GlobalModel global = aggregate({a, b}, GlobalModel{});
    out.check("federated-mean",
              global.params == std::vector<double>({2.0, 3.0}));
  }

  return out.report;
}

}  // namespace thzbeam::oracle
