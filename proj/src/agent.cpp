#include "thzbeam/agent.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "thzbeam/binary_io.hpp"
#include "thzbeam/errors.hpp"

namespace thzbeam {

void DdpgConfig::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("ddpg: need at least one antenna");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("ddpg: gamma must lie in [0, 1)");
  if (!(tau_actor >= 0.0 && tau_actor <= 1.0) ||
      !(tau_critic >= 0.0 && tau_critic <= 1.0))
    throw std::invalid_argument("ddpg: tau must lie in [0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw std::invalid_argument("ddpg: learning rates must be positive");
  if (replay_capacity < 1) throw std::invalid_argument("ddpg: replay capacity must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("ddpg: batch size must be >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("ddpg: noise sigma must be >= 0");
  if (!(noise_decay > 0.0 && noise_decay <= 1.0))
    throw std::invalid_argument("ddpg: noise decay must lie in (0, 1]");
  for (int width : actor_hidden)
    if (width < 1) throw std::invalid_argument("ddpg: actor hidden width must be >= 1");
  for (int width : critic_hidden)
    if (width < 1) throw std::invalid_argument("ddpg: critic hidden width must be >= 1");
}

Eigen::VectorXd net_input_features(const BsState& state) {
  const std::size_t dim = state.features.size();
  if (dim < 1) throw std::invalid_argument("state has no features");
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) x[static_cast<Eigen::Index>(i)] = state.features[i];
  // CSI entries are normalised to a unit vector so the networks see the beam
  // direction at a fixed scale regardless of the absolute link budget, and the
  // SINR entry is mapped from dB onto roughly [-1, 1].
  const Eigen::Index csi = static_cast<Eigen::Index>(dim - 1);
  const double csi_norm = x.head(csi).norm();
  if (csi_norm > 0.0) x.head(csi) /= csi_norm;
  x[csi] /= NetworkScenario::kSinrDbCeil;
  return x;
}

ChannelVector action_to_beamformer(const Eigen::VectorXd& action,
                                   int num_antennas) {
  if (action.size() != 2 * num_antennas)
    throw std::invalid_argument("action length must be twice the antenna count");
  ChannelVector w(num_antennas);
  for (int i = 0; i < num_antennas; ++i)
    w[i] = std::complex<double>(action[i], action[num_antennas + i]);
  const double norm = w.norm();
  if (norm > 1.0) w /= norm;
  return w;
}

namespace {

std::vector<int> make_layers(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(input);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

DdpgConfig validated(DdpgConfig config) {
  config.validate();
  return config;
}

}  // namespace

DdpgAgent::DdpgAgent(const DdpgConfig& config, Rng& rng)
    : config_(validated(config)),
      actor_(make_layers(config_.state_dim(), config_.actor_hidden,
                         config_.action_dim()),
             OutputActivation::Identity, rng),
      critic_(make_layers(config_.critic_input_dim(), config_.critic_hidden, 1),
              OutputActivation::Identity, rng),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(actor_, config.actor_lr),
      critic_opt_(critic_, config.critic_lr),
      buffer_(config.replay_capacity),
      noise_sigma_(config.noise_sigma) {
  last_synced_ = model_params();
}

Eigen::VectorXd DdpgAgent::act(const BsState& state, bool explore,
                               Rng& rng) const {
  Eigen::VectorXd action = actor_.forward(net_input_features(state));
  if (explore && noise_sigma_ > 0.0)
    for (Eigen::Index i = 0; i < action.size(); ++i)
      action[i] += noise_sigma_ * rng.gaussian();
  return action;
}

void DdpgAgent::observe(Transition transition) {
  if (static_cast<int>(transition.state.features.size()) != config_.state_dim() ||
      static_cast<int>(transition.next_state.features.size()) != config_.state_dim())
    throw std::invalid_argument("transition: state dimension mismatch");
  if (transition.action.size() != config_.action_dim())
    throw std::invalid_argument("transition: action dimension mismatch");
  if (!std::isfinite(transition.reward) || !transition.action.allFinite())
    throw std::invalid_argument("transition: non-finite entries");
  reward_peak_ = std::max(reward_peak_, std::abs(transition.reward));
  buffer_.push(std::move(transition));
}

namespace {

// The critic evaluates the beamformer the environment actually applies, so
// raw actions are pulled back onto the unit ball before concatenation.
Eigen::VectorXd project_action(const Eigen::VectorXd& action) {
  const double norm = action.norm();
  if (norm > 1.0) return action / norm;
  return action;
}

// Jacobian-transpose of project_action at `action`, applied to `grad`.
Eigen::VectorXd project_action_pullback(const Eigen::VectorXd& action,
                                        const Eigen::VectorXd& grad) {
  const double norm = action.norm();
  if (norm <= 1.0) return grad;
  const Eigen::VectorXd unit = action / norm;
  return (grad - unit * unit.dot(grad)) / norm;
}

}  // namespace

Eigen::VectorXd DdpgAgent::critic_input(const BsState& state,
                                        const Eigen::VectorXd& action) const {
  Eigen::VectorXd x(config_.critic_input_dim());
  x.head(config_.state_dim()) = net_input_features(state);
  x.tail(config_.action_dim()) = project_action(action);
  return x;
}

double DdpgAgent::critic_target(const Transition& transition) const {
  const Eigen::VectorXd next_in = net_input_features(transition.next_state);
  const Eigen::VectorXd next_action = target_actor_.forward(next_in);
  Eigen::VectorXd x(config_.critic_input_dim());
  x.head(config_.state_dim()) = next_in;
  x.tail(config_.action_dim()) = project_action(next_action);
  return transition.reward / reward_scale() +
         config_.gamma * target_critic_.forward(x)[0];
}

double DdpgAgent::mean_actor_objective(const std::vector<BsState>& states) const {
  if (states.empty()) throw std::invalid_argument("actor objective: empty batch");
  double total = 0.0;
  for (const BsState& s : states) {
    const Eigen::VectorXd input = net_input_features(s);
    total += critic_.forward(critic_input(s, actor_.forward(input)))[0];
  }
  return total / static_cast<double>(states.size());
}

MlpGradients DdpgAgent::actor_objective_gradient(
    const std::vector<BsState>& states) const {
  if (states.empty()) throw std::invalid_argument("actor objective: empty batch");
  MlpGradients grads = actor_.zero_gradients();
  for (const BsState& s : states) {
    const Eigen::VectorXd input = net_input_features(s);
    const Eigen::VectorXd action = actor_.forward(input);
    const MlpGradients critic_grads =
        critic_.backward(critic_input(s, action), Eigen::VectorXd::Ones(1));
    const Eigen::VectorXd dq_da = project_action_pullback(
        action, critic_grads.input.tail(config_.action_dim()));
    grads += actor_.backward(input, dq_da);
  }
  grads.scale(1.0 / static_cast<double>(states.size()));
  return grads;
}

std::optional<TrainStats> DdpgAgent::train_step(Rng& rng) {
  const int batch = config_.batch_size;
  if (buffer_.size() < static_cast<std::size_t>(batch)) return std::nullopt;

  std::vector<Transition> samples;
  samples.reserve(batch);
  for (int i = 0; i < batch; ++i) samples.push_back(buffer_.sample(rng));

  std::vector<double> targets;
  targets.reserve(batch);
  for (const Transition& t : samples) targets.push_back(critic_target(t));

  MlpGradients critic_grads = critic_.zero_gradients();
  double loss = 0.0;
  for (int i = 0; i < batch; ++i) {
    const Eigen::VectorXd x = critic_input(samples[i].state, samples[i].action);
    const double error = critic_.forward(x)[0] - targets[i];
    loss += error * error;
    Eigen::VectorXd upstream(1);
    upstream[0] = 2.0 * error / batch;
    critic_grads += critic_.backward(x, upstream);
  }
  loss /= batch;
  critic_opt_.step(critic_, critic_grads);

  std::vector<BsState> states;
  states.reserve(batch);
  for (const Transition& t : samples) states.push_back(t.state);
  const double objective = mean_actor_objective(states);
  MlpGradients actor_grads = actor_objective_gradient(states);
  actor_grads.scale(-1.0);
  actor_opt_.step(actor_, actor_grads);

  soft_update(target_actor_, actor_, config_.tau_actor);
  soft_update(target_critic_, critic_, config_.tau_critic);
  return TrainStats{loss, objective};
}

void DdpgAgent::decay_noise(double factor) {
  if (!(factor > 0.0 && factor <= 1.0))
    throw std::invalid_argument("noise decay factor must lie in (0, 1]");
  noise_sigma_ *= factor;
}

void DdpgAgent::decay_learning_rates(double actor_factor, double critic_factor) {
  if (!(actor_factor > 0.0 && actor_factor <= 1.0) ||
      !(critic_factor > 0.0 && critic_factor <= 1.0))
    throw std::invalid_argument("learning rate decay factor must lie in (0, 1]");
  actor_opt_.set_learning_rate(actor_opt_.learning_rate() * actor_factor);
  critic_opt_.set_learning_rate(critic_opt_.learning_rate() * critic_factor);
}

std::vector<double> DdpgAgent::model_params() const {
  std::vector<double> params = actor_.flatten();
  const std::vector<double> critic_params = critic_.flatten();
  params.insert(params.end(), critic_params.begin(), critic_params.end());
  return params;
}

std::size_t DdpgAgent::model_param_count() const {
  return actor_.parameter_count() + critic_.parameter_count();
}

void DdpgAgent::load_model_params(const std::vector<double>& params) {
  const std::size_t actor_count = actor_.parameter_count();
  if (params.size() != model_param_count())
    throw std::invalid_argument("model parameters: length mismatch");
  actor_.unflatten({params.begin(), params.begin() + actor_count});
  critic_.unflatten({params.begin() + actor_count, params.end()});
  last_synced_ = params;
}

namespace {
constexpr char kCheckpointMagic[4] = {'A', 'G', 'C', '1'};
}

void DdpgAgent::save_checkpoint(const std::string& path, int agent_id,
                                int epoch) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kCheckpointMagic, 4);
  io::write_u32(out, static_cast<std::uint32_t>(agent_id));
  io::write_u32(out, static_cast<std::uint32_t>(epoch));
  io::write_f64(out, noise_sigma_);
  io::write_f64(out, reward_peak_);
  write_mlp(out, actor_);
  write_mlp(out, critic_);
  write_mlp(out, target_actor_);
  write_mlp(out, target_critic_);
  if (!out) throw IoError("checkpoint write failed: " + path);
}

void DdpgAgent::restore(const AgentCheckpoint& checkpoint) {
  if (!checkpoint.actor.same_architecture(actor_) ||
      !checkpoint.critic.same_architecture(critic_))
    throw std::invalid_argument("checkpoint: architecture mismatch");
  actor_ = checkpoint.actor;
  critic_ = checkpoint.critic;
  target_actor_ = checkpoint.target_actor;
  target_critic_ = checkpoint.target_critic;
  noise_sigma_ = checkpoint.noise_sigma;
  reward_peak_ = checkpoint.reward_peak;
  last_synced_ = model_params();
}

AgentCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw IoError("checkpoint read: bad magic: " + path);
  AgentCheckpoint ckpt;
  ckpt.agent_id = static_cast<int>(io::read_u32(in));
  ckpt.epoch = static_cast<int>(io::read_u32(in));
  ckpt.noise_sigma = io::read_f64(in);
  ckpt.reward_peak = io::read_f64(in);
  ckpt.actor = read_mlp(in);
  ckpt.critic = read_mlp(in);
  ckpt.target_actor = read_mlp(in);
  ckpt.target_critic = read_mlp(in);
  return ckpt;
}

}  // namespace thzbeam
