#include "thzbeam/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace thzbeam {

Codebook make_codebook(const ChannelParams& params, int size) {
  if (size < 2) throw std::invalid_argument("codebook needs at least two beams");
  params.validate();
  const double scale = std::sqrt(static_cast<double>(params.num_antennas));
  Codebook book;
  book.beams.reserve(size);
  book.angles.reserve(size);
  const double pi = std::numbers::pi;
  for (int q = 0; q < size; ++q) {
    const double angle = -pi / 2 + pi * q / (size - 1);
    book.angles.push_back(angle);
    book.beams.push_back(scale * steering_vector(angle, params.num_antennas,
                                                 params.spacing(),
                                                 params.wavelength()));
  }
  return book;
}

ChannelVector mrt_beamformer(const ChannelVector& channel) {
  const double norm = channel.norm();
  if (norm <= 0.0) throw std::domain_error("mrt: zero channel");
  return channel / norm;
}

BeamformerSet mrt_beamformers(const NetworkScenario& scenario) {
  BeamformerSet beams;
  beams.w.reserve(scenario.num_cells);
  for (int k = 0; k < scenario.num_cells; ++k)
    beams.w.push_back(mrt_beamformer(scenario.link(k, k)));
  return beams;
}

BeamformerSet zf_beamformers(const NetworkScenario& scenario) {
  const int K = scenario.num_cells;
  const int N = scenario.num_antennas;
  if (N < K)
    throw std::domain_error("zero-forcing infeasible: fewer antennas than cells");

  BeamformerSet beams;
  beams.w.reserve(K);
  for (int k = 0; k < K; ++k) {
    const ChannelVector& serving = scenario.link(k, k);
    if (K == 1) {
      beams.w.push_back(mrt_beamformer(serving));
      continue;
    }
    Eigen::MatrixXcd cross(N, K - 1);
    int col = 0;
    for (int j = 0; j < K; ++j)
      if (j != k) cross.col(col++) = scenario.link(k, j);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(cross);
    qr.setThreshold(1e-12);
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXcd basis =
        qr.householderQ() * Eigen::MatrixXcd::Identity(N, rank);

    // Two projection passes push the residual leakage to the floor of
    // double precision.
    ChannelVector w = serving - basis * (basis.adjoint() * serving);
    w -= basis * (basis.adjoint() * w);

    const double norm = w.norm();
    if (norm < 1e-12 * serving.norm()) {
      beams.w.push_back(ChannelVector::Zero(N));
    } else {
      beams.w.push_back(w / norm);
    }
  }
  return beams;
}

BeamformerSet mmse_beamformers(const NetworkScenario& scenario) {
  const int K = scenario.num_cells;
  const int N = scenario.num_antennas;
  const double regularizer = scenario.noise_w / scenario.tx_power_w;

  BeamformerSet beams;
  beams.w.reserve(K);
  for (int k = 0; k < K; ++k) {
    Eigen::MatrixXcd covariance =
        regularizer * Eigen::MatrixXcd::Identity(N, N);
    for (int j = 0; j < K; ++j) {
      const ChannelVector& h = scenario.link(k, j);
      covariance += h * h.adjoint();
    }
    const ChannelVector w = covariance.ldlt().solve(scenario.link(k, k));
    const double norm = w.norm();
    if (norm <= 0.0) throw std::domain_error("mmse: degenerate solution");
    beams.w.push_back(w / norm);
  }
  return beams;
}

BeamformerSet random_beams(Rng& rng, int num_cells, int num_antennas) {
  if (num_cells < 1 || num_antennas < 1)
    throw std::invalid_argument("random beams: counts must be >= 1");
  BeamformerSet beams;
  beams.w.reserve(num_cells);
  for (int k = 0; k < num_cells; ++k) {
    ChannelVector w(num_antennas);
    for (int n = 0; n < num_antennas; ++n) w[n] = rng.complex_gaussian();
    beams.w.push_back(w / w.norm());
  }
  return beams;
}

int dqn_select_action(const Eigen::VectorXd& q_values, double epsilon,
                      Rng& rng) {
  if (q_values.size() < 1)
    throw std::invalid_argument("action selection: empty Q-values");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("action selection: epsilon outside [0, 1]");
  if (epsilon > 0.0 && rng.uniform01() < epsilon)
    return static_cast<int>(rng.index(q_values.size()));
  int best = 0;
  for (Eigen::Index i = 1; i < q_values.size(); ++i)
    if (q_values[i] > q_values[best]) best = static_cast<int>(i);
  return best;
}

void DqnConfig::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("dqn: need at least one antenna");
  if (codebook_size < 2) throw std::invalid_argument("dqn: codebook needs two beams");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("dqn: gamma must lie in [0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("dqn: tau must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("dqn: learning rate must be positive");
  if (replay_capacity < 1) throw std::invalid_argument("dqn: replay capacity must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("dqn: batch size must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("dqn: epsilon must lie in [0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
    throw std::invalid_argument("dqn: epsilon decay must lie in (0, 1]");
  for (int width : hidden)
    if (width < 1) throw std::invalid_argument("dqn: hidden width must be >= 1");
}

namespace {

std::vector<int> qnet_layers(const DqnConfig& config) {
  std::vector<int> sizes;
  sizes.reserve(config.hidden.size() + 2);
  sizes.push_back(config.state_dim());
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(config.codebook_size);
  return sizes;
}

DqnConfig validated(DqnConfig config) {
  config.validate();
  return config;
}

}  // namespace

DqnAgent::DqnAgent(const DqnConfig& config, const ChannelParams& channel,
                   Rng& rng)
    : config_(validated(config)),
      codebook_(make_codebook(channel, config_.codebook_size)),
      qnet_(qnet_layers(config_), OutputActivation::Identity, rng),
      target_qnet_(qnet_),
      optimizer_(qnet_, config_.learning_rate),
      buffer_(config_.replay_capacity),
      epsilon_(config_.epsilon) {
  if (channel.num_antennas != config_.num_antennas)
    throw std::invalid_argument("dqn: channel antenna count mismatch");
}

int DqnAgent::act(const BsState& state, bool explore, Rng& rng) const {
  const Eigen::VectorXd q = qnet_.forward(net_input_features(state));
  return dqn_select_action(q, explore ? epsilon_ : 0.0, rng);
}

const ChannelVector& DqnAgent::beam(int index) const {
  if (index < 0 || index >= codebook_.size())
    throw std::out_of_range("dqn: beam index out of range");
  return codebook_.beams[index];
}

void DqnAgent::observe(DqnTransition transition) {
  if (static_cast<int>(transition.state.features.size()) != config_.state_dim() ||
      static_cast<int>(transition.next_state.features.size()) != config_.state_dim())
    throw std::invalid_argument("dqn transition: state dimension mismatch");
  if (transition.action < 0 || transition.action >= config_.codebook_size)
    throw std::invalid_argument("dqn transition: action index out of range");
  if (!std::isfinite(transition.reward))
    throw std::invalid_argument("dqn transition: non-finite reward");
  buffer_.push(std::move(transition));
}

std::optional<double> DqnAgent::train_step(Rng& rng) {
  const int batch = config_.batch_size;
  if (buffer_.size() < static_cast<std::size_t>(batch)) return std::nullopt;

  MlpGradients grads = qnet_.zero_gradients();
  double loss = 0.0;
  for (int i = 0; i < batch; ++i) {
    const DqnTransition& t = buffer_.sample(rng);
    const Eigen::VectorXd next_q =
        target_qnet_.forward(net_input_features(t.next_state));
    const double target = t.reward + config_.gamma * next_q.maxCoeff();
    const Eigen::VectorXd input = net_input_features(t.state);
    const double predicted = qnet_.forward(input)[t.action];
    const double error = predicted - target;
    loss += error * error;
    Eigen::VectorXd upstream = Eigen::VectorXd::Zero(config_.codebook_size);
    upstream[t.action] = 2.0 * error / batch;
    grads += qnet_.backward(input, upstream);
  }
  loss /= batch;
  optimizer_.step(qnet_, grads);
  soft_update(target_qnet_, qnet_, config_.tau);
  return loss;
}

void DqnAgent::decay_epsilon() { epsilon_ *= config_.epsilon_decay; }

}  // namespace thzbeam
