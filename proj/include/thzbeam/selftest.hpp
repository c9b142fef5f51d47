#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thzbeam/mlp.hpp"
#include "thzbeam/network.hpp"

namespace thzbeam::oracle {

// Central finite differences of dot(forward(x), upstream) with respect to
// every parameter; the independent reference for backward().
MlpGradients fd_param_gradients(const Mlp& net, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& upstream,
                                double h = 1e-5);
Eigen::VectorXd fd_input_gradients(const Mlp& net, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& upstream,
                                   double h = 1e-5);

// |a - b| over max(|a|, |b|, floor); the comparison used by the gradient
// checks.
double relative_error(double a, double b, double floor = 1e-3);

// True when some hidden pre-activation sits within `margin` of the ReLU
// kink, where finite differences are unreliable; callers redraw such cases.
bool near_relu_kink(const Mlp& net, const Eigen::VectorXd& x, double margin);

// Worst relative error between analytic and finite-difference gradients over
// all parameters and input coordinates.
double max_gradient_error(const Mlp& net, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& upstream, double h = 1e-5);

// Term-by-term expansion of the SINR with explicit real/imaginary scalar
// arithmetic, bypassing the linear-algebra library.
double sinr_bruteforce(const NetworkScenario& sc, const BeamformerSet& beams,
                       int k, bool limited);

struct CheckReport {
  int passed = 0;
  int failed = 0;
  std::vector<std::string> messages;  // one line per check, "ok ..." / "FAIL ..."
  bool all_passed() const { return failed == 0; }
};

// Fast built-in verification battery behind the `check` CLI subcommand:
// gradient checks, SINR brute-force agreement, serialization round-trips,
// unit conversions and zero-forcing null depth.
CheckReport run_self_checks(std::uint64_t seed);

}  // namespace thzbeam::oracle
