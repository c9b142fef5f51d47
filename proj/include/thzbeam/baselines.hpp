#pragma once

#include <optional>
#include <vector>

#include "thzbeam/agent.hpp"
#include "thzbeam/channel.hpp"
#include "thzbeam/network.hpp"
#include "thzbeam/rng.hpp"

namespace thzbeam {

// Unit-norm beams whose steering directions uniformly quantize
// [-pi/2, pi/2], endpoints included.
struct Codebook {
  std::vector<ChannelVector> beams;
  std::vector<double> angles;
  int size() const { return static_cast<int>(beams.size()); }
};

Codebook make_codebook(const ChannelParams& params, int size = 16);

// Matched filter w = h / ||h||; the single-cell optimum over the unit ball.
ChannelVector mrt_beamformer(const ChannelVector& channel);
BeamformerSet mrt_beamformers(const NetworkScenario& scenario);

// Per-BS nulling: w_k is the serving channel projected onto the orthogonal
// complement of the channels BS k presents to the other K-1 users, unit
// normalized. Needs N >= K. Uses full (genie) CSI.
BeamformerSet zf_beamformers(const NetworkScenario& scenario);

// Regularized inversion w_k ~ (sum_j h_kj h_kj^H + (sigma^2/P) I)^-1 h_kk,
// unit normalized. Uses full (genie) CSI.
BeamformerSet mmse_beamformers(const NetworkScenario& scenario);

// Isotropic random unit-norm beams, the sanity floor.
BeamformerSet random_beams(Rng& rng, int num_cells, int num_antennas);

// Epsilon-greedy pick over Q-values; greedy ties go to the lowest index.
int dqn_select_action(const Eigen::VectorXd& q_values, double epsilon, Rng& rng);

struct DqnConfig {
  int num_antennas = 8;
  std::vector<int> hidden = {100, 70};
  int codebook_size = 16;
  double gamma = 0.9;
  double tau = 0.01;
  double learning_rate = 1e-3;
  int replay_capacity = 10;
  int batch_size = 5;
  double epsilon = 1.0;
  double epsilon_decay = 0.99;

  int state_dim() const { return 2 * num_antennas + 1; }
  void validate() const;
};

struct DqnTransition {
  BsState state;
  int action = 0;
  double reward = 0.0;
  BsState next_state;
};

// Discrete-action counterpart of the DDPG agent: picks codebook entries with
// an epsilon-greedy Q-network, trains on the same replay machinery against
// the one-step bootstrap target, never federates.
class DqnAgent {
 public:
  DqnAgent(const DqnConfig& config, const ChannelParams& channel, Rng& rng);

  int act(const BsState& state, bool explore, Rng& rng) const;
  const ChannelVector& beam(int index) const;
  void observe(DqnTransition transition);
  std::optional<double> train_step(Rng& rng);
  void decay_epsilon();

  double epsilon() const { return epsilon_; }
  const Codebook& codebook() const { return codebook_; }
  const Mlp& qnet() const { return qnet_; }
  std::size_t buffer_size() const { return buffer_.size(); }

 private:
  DqnConfig config_;
  Codebook codebook_;
  Mlp qnet_;
  Mlp target_qnet_;
  AdamOptimizer optimizer_;
  ReplayRing<DqnTransition> buffer_;
  double epsilon_ = 1.0;
};

}  // namespace thzbeam
