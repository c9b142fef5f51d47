#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzbeam/mlp.hpp"
#include "thzbeam/network.hpp"
#include "thzbeam/rng.hpp"

namespace thzbeam {

struct Transition {
  BsState state;
  Eigen::VectorXd action;
  double reward = 0.0;
  BsState next_state;
};

// Fixed-capacity ring that overwrites the oldest entry once full. Sampling is
// uniform with replacement.
template <typename T>
class ReplayRing {
 public:
  explicit ReplayRing(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
    storage_.reserve(capacity);
  }

  void push(T item) {
    if (storage_.size() < static_cast<std::size_t>(capacity_)) {
      storage_.push_back(std::move(item));
    } else {
      storage_[cursor_] = std::move(item);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  const T& sample(Rng& rng) const {
    if (storage_.empty()) throw std::logic_error("replay buffer is empty");
    return storage_[rng.index(storage_.size())];
  }

  std::size_t size() const { return storage_.size(); }
  int capacity() const { return capacity_; }

 private:
  int capacity_ = 0;
  std::size_t cursor_ = 0;
  std::vector<T> storage_;
};

using ReplayBuffer = ReplayRing<Transition>;

struct DdpgConfig {
  int num_antennas = 8;
  std::vector<int> actor_hidden = {100, 70};
  std::vector<int> critic_hidden = {100, 70};
  double gamma = 0.9;
  double tau_actor = 0.01;
  double tau_critic = 0.01;
  double actor_lr = 1e-3;
  double critic_lr = 1e-2;
  int replay_capacity = 10;
  int batch_size = 5;
  double noise_sigma = 1.7320508075688772;
  double noise_decay = 0.99;

  int state_dim() const { return 2 * num_antennas + 1; }
  int action_dim() const { return 2 * num_antennas; }
  int critic_input_dim() const { return state_dim() + action_dim(); }
  void validate() const;
};

// Normalises the CSI block to a unit vector and rescales the trailing
// SINR(dB) feature onto roughly [-1, 1] before a network consumes the state.
Eigen::VectorXd net_input_features(const BsState& state);

// First half of the action becomes the real part, second half the imaginary
// part; vectors outside the unit ball are pulled back onto it.
ChannelVector action_to_beamformer(const Eigen::VectorXd& action,
                                   int num_antennas);

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

struct AgentCheckpoint {
  int agent_id = 0;
  int epoch = 0;
  double noise_sigma = 0.0;
  double reward_peak = 0.0;
  Mlp actor;
  Mlp critic;
  Mlp target_actor;
  Mlp target_critic;
};

class DdpgAgent {
 public:
  DdpgAgent(const DdpgConfig& config, Rng& rng);

  // Deterministic policy output, plus Gaussian perturbation when exploring.
  Eigen::VectorXd act(const BsState& state, bool explore, Rng& rng) const;
  void observe(Transition transition);

  // One mini-batch critic regression step, one actor ascent step through the
  // critic, then soft target updates. Returns nothing while the buffer is
  // still smaller than the batch size.
  std::optional<TrainStats> train_step(Rng& rng);
  void decay_noise(double factor);
  // Anneals the optimizer step sizes; pass 1 to keep a rate fixed.
  void decay_learning_rates(double actor_factor, double critic_factor);

  double critic_target(const Transition& transition) const;
  // Largest reward magnitude observed so far; 1 until anything non-zero
  // arrives. Targets regress rewards divided by this scale so that critic
  // precision does not depend on the absolute link budget.
  double reward_scale() const {
    return reward_peak_ > 0.0 ? reward_peak_ : 1.0;
  }
  double mean_actor_objective(const std::vector<BsState>& states) const;
  // Gradient of mean_actor_objective with respect to the actor parameters
  // (ascent direction, not negated).
  MlpGradients actor_objective_gradient(const std::vector<BsState>& states) const;

  double noise_sigma() const { return noise_sigma_; }
  const DdpgConfig& config() const { return config_; }
  std::size_t buffer_size() const { return buffer_.size(); }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }
  Mlp& critic_mutable() { return critic_; }

  std::vector<double> model_params() const;
  std::size_t model_param_count() const;
  // Overwrites the main networks and refreshes the last-synced snapshot;
  // targets keep tracking on their own.
  void load_model_params(const std::vector<double>& params);
  const std::vector<double>& last_synced() const { return last_synced_; }

  void save_checkpoint(const std::string& path, int agent_id, int epoch) const;
  void restore(const AgentCheckpoint& checkpoint);

 private:
  Eigen::VectorXd critic_input(const BsState& state,
                               const Eigen::VectorXd& action) const;

  DdpgConfig config_;
  Mlp actor_;
  Mlp critic_;
  Mlp target_actor_;
  Mlp target_critic_;
  AdamOptimizer actor_opt_;
  AdamOptimizer critic_opt_;
  ReplayBuffer buffer_;
  double noise_sigma_ = 0.0;
  double reward_peak_ = 0.0;
  std::vector<double> last_synced_;
};

// Checkpoint file: 4 bytes magic "AGC1", u32 agent_id, u32 epoch,
// f64 noise_sigma, f64 reward_peak, then actor, critic, target actor,
// target critic in the network checkpoint layout.
AgentCheckpoint load_checkpoint(const std::string& path);

}  // namespace thzbeam
