#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "thzbeam/agent.hpp"

using namespace thzbeam;

namespace {

DdpgConfig tiny_config() {
  DdpgConfig cfg;
  cfg.num_antennas = 1;  // state dim 3, action dim 2
  cfg.actor_hidden = {6};
  cfg.critic_hidden = {6};
  cfg.replay_capacity = 10;
  cfg.batch_size = 5;
  return cfg;
}

BsState state_from(std::initializer_list<double> values) {
  BsState s;
  s.features.assign(values);
  return s;
}

Transition make_transition(const DdpgConfig& cfg, double reward, double fill) {
  Transition t;
  t.state.features.assign(cfg.state_dim(), fill);
  t.next_state.features.assign(cfg.state_dim(), fill * 0.5);
  t.action = Eigen::VectorXd::Constant(cfg.action_dim(), 0.3);
  t.reward = reward;
  return t;
}

}  // namespace

TEST_CASE("replay ring enforces capacity and overwrites the oldest entries") {
  ReplayRing<int> ring(10);
  CHECK(ring.capacity() == 10);
  CHECK(ring.size() == 0);
  for (int i = 1; i <= 10; ++i) ring.push(i);
  CHECK(ring.size() == 10);
  ring.push(11);
  ring.push(12);
  CHECK(ring.size() == 10);
  Rng rng(3);
  std::set<int> seen;
  for (int draw = 0; draw < 400; ++draw) seen.insert(ring.sample(rng));
  CHECK(seen.count(1) == 0);
  CHECK(seen.count(2) == 0);
  for (int v = 3; v <= 12; ++v) CHECK(seen.count(v) == 1);
}

TEST_CASE("sampling an empty ring throws") {
  ReplayRing<int> ring(4);
  Rng rng(1);
  CHECK_THROWS_AS(ring.sample(rng), std::logic_error);
}

TEST_CASE("replay ring rejects non-positive capacity") {
  CHECK_THROWS_AS(ReplayRing<int>(0), std::invalid_argument);
}

TEST_CASE("replay sampling is reproducible for equal seeds") {
  ReplayRing<int> ring(5);
  for (int i = 0; i < 5; ++i) ring.push(i * 7);
  Rng a(99);
  Rng b(99);
  for (int draw = 0; draw < 20; ++draw) CHECK(ring.sample(a) == ring.sample(b));
}

TEST_CASE("network input normalises csi and rescales the dB entry") {
  const Eigen::VectorXd x = net_input_features(state_from({3.0, 4.0, 30.0}));
  REQUIRE(x.size() == 3);
  CHECK(x[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(x[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero csi block passes through the normaliser unchanged") {
  const Eigen::VectorXd x = net_input_features(state_from({0.0, 0.0, -60.0}));
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
  CHECK(x[2] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("network input rejects an empty state") {
  CHECK_THROWS_AS(net_input_features(BsState{}), std::invalid_argument);
}

TEST_CASE("action maps to a beamformer with real then imaginary halves") {
  Eigen::VectorXd a(4);
  a << 3.0, 0.0, 4.0, 0.0;
  const ChannelVector w = action_to_beamformer(a, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0].real() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(w[0].imag() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(w[1]) == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(satisfies_power_constraint(w));
}

TEST_CASE("interior actions are kept verbatim") {
  Eigen::VectorXd a(2);
  a << 0.3, 0.4;
  const ChannelVector w = action_to_beamformer(a, 1);
  CHECK(w[0].real() == 0.3);
  CHECK(w[0].imag() == 0.4);
}

TEST_CASE("zero action maps to the zero beam") {
  const ChannelVector w = action_to_beamformer(Eigen::VectorXd::Zero(4), 2);
  CHECK(w.norm() == 0.0);
}

TEST_CASE("action length must be twice the antenna count") {
  CHECK_THROWS_AS(action_to_beamformer(Eigen::VectorXd::Zero(3), 2),
                  std::invalid_argument);
}

TEST_CASE("beamformers from any action satisfy the power budget") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd a(8);
    for (int i = 0; i < 8; ++i) a[i] = 5.0 * rng.gaussian();
    CHECK(satisfies_power_constraint(action_to_beamformer(a, 4)));
  }
}

TEST_CASE("the deterministic policy is reproducible and noise-free") {
  DdpgConfig cfg = tiny_config();
  Rng init(5);
  DdpgAgent agent(cfg, init);
  const BsState s = state_from({0.5, -0.5, 10.0});
  Rng ra(1), rb(2);
  const Eigen::VectorXd a1 = agent.act(s, false, ra);
  const Eigen::VectorXd a2 = agent.act(s, false, rb);
  CHECK((a1 - a2).norm() == 0.0);
}

TEST_CASE("zero exploration noise makes exploring acts deterministic") {
  DdpgConfig cfg = tiny_config();
  cfg.noise_sigma = 0.0;
  Rng init(6);
  DdpgAgent agent(cfg, init);
  const BsState s = state_from({1.0, 0.0, 0.0});
  Rng ra(1), rb(2);
  CHECK((agent.act(s, true, ra) - agent.act(s, true, rb)).norm() == 0.0);
}

TEST_CASE("exploring acts perturb the policy output reproducibly") {
  DdpgConfig cfg = tiny_config();
  Rng init(7);
  DdpgAgent agent(cfg, init);
  const BsState s = state_from({1.0, 0.0, 0.0});
  Rng ra(42), rb(42), rc(43);
  const Eigen::VectorXd e1 = agent.act(s, true, ra);
  const Eigen::VectorXd e2 = agent.act(s, true, rb);
  CHECK((e1 - e2).norm() == 0.0);
  Rng rd(1);
  const Eigen::VectorXd base = agent.act(s, false, rd);
  CHECK((e1 - base).norm() > 0.0);
  (void)rc;
}

TEST_CASE("observe validates transition shapes and values") {
  DdpgConfig cfg = tiny_config();
  Rng init(8);
  DdpgAgent agent(cfg, init);
  Transition bad = make_transition(cfg, 1.0, 0.1);
  bad.state.features.pop_back();
  CHECK_THROWS_AS(agent.observe(bad), std::invalid_argument);
  Transition wrong_action = make_transition(cfg, 1.0, 0.1);
  wrong_action.action = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(agent.observe(wrong_action), std::invalid_argument);
  Transition nan_reward = make_transition(cfg, std::nan(""), 0.1);
  CHECK_THROWS_AS(agent.observe(nan_reward), std::invalid_argument);
  CHECK(agent.buffer_size() == 0);
  agent.observe(make_transition(cfg, 1.0, 0.1));
  CHECK(agent.buffer_size() == 1);
}

TEST_CASE("critic target equals the reward when gamma is zero") {
  DdpgConfig cfg = tiny_config();
  cfg.gamma = 0.0;
  Rng init(9);
  DdpgAgent agent(cfg, init);
  const Transition t = make_transition(cfg, 0.7312, 0.2);
  CHECK(agent.reward_scale() == 1.0);
  CHECK(agent.critic_target(t) == doctest::Approx(0.7312).epsilon(1e-15));
}

TEST_CASE("targets regress rewards divided by the observed peak") {
  DdpgConfig cfg = tiny_config();
  cfg.gamma = 0.0;
  Rng init(10);
  DdpgAgent agent(cfg, init);
  agent.observe(make_transition(cfg, -4.0, 0.1));
  CHECK(agent.reward_scale() == 4.0);
  const Transition t = make_transition(cfg, 1.0, 0.2);
  CHECK(agent.critic_target(t) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("critic target matches a manual pass through the target networks") {
  DdpgConfig cfg = tiny_config();
  Rng init(11);
  DdpgAgent agent(cfg, init);
  const Transition t = make_transition(cfg, 0.5, 0.3);
  const Eigen::VectorXd next_in = net_input_features(t.next_state);
  Eigen::VectorXd next_action = agent.target_actor().forward(next_in);
  if (next_action.norm() > 1.0) next_action /= next_action.norm();
  Eigen::VectorXd x(cfg.critic_input_dim());
  x.head(cfg.state_dim()) = next_in;
  x.tail(cfg.action_dim()) = next_action;
  const double expected =
      0.5 + cfg.gamma * agent.target_critic().forward(x)[0];
  CHECK(agent.critic_target(t) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("train_step waits for a full batch") {
  DdpgConfig cfg = tiny_config();
  Rng init(12);
  DdpgAgent agent(cfg, init);
  Rng rng(13);
  for (int i = 0; i < cfg.batch_size - 1; ++i) {
    agent.observe(make_transition(cfg, 0.1 * (i + 1), 0.1));
    CHECK_FALSE(agent.train_step(rng).has_value());
  }
  agent.observe(make_transition(cfg, 1.0, 0.1));
  CHECK(agent.train_step(rng).has_value());
}

TEST_CASE("repeated training on one transition drives the critic to the reward") {
  DdpgConfig cfg = tiny_config();
  cfg.gamma = 0.0;
  cfg.replay_capacity = 1;
  cfg.batch_size = 1;
  cfg.tau_actor = 0.0;
  cfg.tau_critic = 0.0;
  Rng init(14);
  DdpgAgent agent(cfg, init);
  const Transition t = make_transition(cfg, 1.0, 0.25);
  agent.observe(t);
  Eigen::VectorXd x(cfg.critic_input_dim());
  x.head(cfg.state_dim()) = net_input_features(t.state);
  x.tail(cfg.action_dim()) = t.action;  // already inside the unit ball
  Rng rng(15);
  const double before = std::abs(agent.critic().forward(x)[0] - 1.0);
  for (int step = 0; step < 300; ++step) agent.train_step(rng);
  const double after = std::abs(agent.critic().forward(x)[0] - 1.0);
  CHECK(after < before);
  CHECK(after < 0.05);
}

TEST_CASE("zero tau freezes the target networks") {
  DdpgConfig cfg = tiny_config();
  cfg.tau_actor = 0.0;
  cfg.tau_critic = 0.0;
  Rng init(16);
  DdpgAgent agent(cfg, init);
  const std::vector<double> ta = agent.target_actor().flatten();
  const std::vector<double> tc = agent.target_critic().flatten();
  Rng rng(17);
  for (int i = 0; i < 8; ++i) agent.observe(make_transition(cfg, 0.5, 0.1 * i));
  for (int i = 0; i < 10; ++i) agent.train_step(rng);
  CHECK(agent.target_actor().flatten() == ta);
  CHECK(agent.target_critic().flatten() == tc);
}

TEST_CASE("targets start as copies of the mains and track them after training") {
  DdpgConfig cfg = tiny_config();
  Rng init(18);
  DdpgAgent agent(cfg, init);
  CHECK(agent.actor().flatten() == agent.target_actor().flatten());
  CHECK(agent.critic().flatten() == agent.target_critic().flatten());
  Rng rng(19);
  for (int i = 0; i < 8; ++i) agent.observe(make_transition(cfg, 0.4, 0.05 * i));
  for (int i = 0; i < 5; ++i) agent.train_step(rng);
  // After updates the mains moved; the targets lag but are no longer equal.
  CHECK(agent.critic().flatten() != agent.target_critic().flatten());
}

TEST_CASE("actor gradient matches finite differences of the objective") {
  DdpgConfig cfg = tiny_config();
  Rng init(20);
  DdpgAgent agent(cfg, init);
  std::vector<BsState> states = {state_from({0.4, 0.3, 5.0}),
                                 state_from({-0.2, 0.9, -12.0})};
  const MlpGradients g = agent.actor_objective_gradient(states);

  // Flatten the analytic gradient in the actor's parameter order.
  Mlp probe = agent.actor();
  std::vector<double> analytic;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < g.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < g.weights[l].cols(); ++c)
        analytic.push_back(g.weights[l](r, c));
    for (Eigen::Index r = 0; r < g.biases[l].size(); ++r)
      analytic.push_back(g.biases[l][r]);
  }

  const std::vector<double> theta = agent.actor().flatten();
  std::vector<double> fd(theta.size());
  const double h = 1e-6;
  DdpgAgent scratch = agent;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> plus = theta;
    plus[i] += h;
    std::vector<double> shifted = plus;
    const std::vector<double> critic_part = agent.critic().flatten();
    shifted.insert(shifted.end(), critic_part.begin(), critic_part.end());
    scratch.load_model_params(shifted);
    const double up = scratch.mean_actor_objective(states);
    plus[i] -= 2.0 * h;
    shifted = plus;
    shifted.insert(shifted.end(), critic_part.begin(), critic_part.end());
    scratch.load_model_params(shifted);
    const double down = scratch.mean_actor_objective(states);
    fd[i] = (up - down) / (2.0 * h);
  }

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    dot += fd[i] * analytic[i];
    na += fd[i] * fd[i];
    nb += analytic[i] * analytic[i];
  }
  REQUIRE(na > 0.0);
  REQUIRE(nb > 0.0);
  CHECK(dot / std::sqrt(na * nb) > 0.999);
}

TEST_CASE("noise decays geometrically and never increases") {
  DdpgConfig cfg = tiny_config();
  Rng init(21);
  DdpgAgent agent(cfg, init);
  CHECK(agent.noise_sigma() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  agent.decay_noise(1.0);
  CHECK(agent.noise_sigma() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  agent.decay_noise(0.99);
  CHECK(agent.noise_sigma() == doctest::Approx(std::sqrt(3.0) * 0.99).epsilon(1e-15));
  DdpgAgent fresh(cfg, init);
  double prev = fresh.noise_sigma();
  for (int e = 0; e < 300; ++e) {
    fresh.decay_noise(0.99);
    CHECK(fresh.noise_sigma() <= prev);
    prev = fresh.noise_sigma();
  }
  CHECK(fresh.noise_sigma() == doctest::Approx(0.0849413201800702).epsilon(1e-12));
  CHECK_THROWS_AS(agent.decay_noise(0.0), std::invalid_argument);
  CHECK_THROWS_AS(agent.decay_noise(1.5), std::invalid_argument);
}

TEST_CASE("learning-rate decay factors are validated") {
  DdpgConfig cfg = tiny_config();
  Rng init(22);
  DdpgAgent agent(cfg, init);
  agent.decay_learning_rates(1.0, 1.0);
  agent.decay_learning_rates(0.5, 0.25);
  CHECK_THROWS_AS(agent.decay_learning_rates(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(agent.decay_learning_rates(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("model parameters round-trip and refresh the sync snapshot") {
  DdpgConfig cfg = tiny_config();
  Rng init(23);
  DdpgAgent agent(cfg, init);
  const std::vector<double> params = agent.model_params();
  CHECK(params.size() == agent.model_param_count());
  CHECK(params.size() ==
        agent.actor().parameter_count() + agent.critic().parameter_count());

  std::vector<double> shifted = params;
  for (double& v : shifted) v += 0.125;
  const std::vector<double> targets_before = agent.target_actor().flatten();
  agent.load_model_params(shifted);
  CHECK(agent.model_params() == shifted);
  CHECK(agent.last_synced() == shifted);
  CHECK(agent.target_actor().flatten() == targets_before);

  std::vector<double> wrong(params.size() + 1, 0.0);
  CHECK_THROWS_AS(agent.load_model_params(wrong), std::invalid_argument);
}

TEST_CASE("agent checkpoints round-trip every network and scalar") {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "thzbeam_agent_ckpt.bin";
  DdpgConfig cfg = tiny_config();
  Rng init(24);
  DdpgAgent agent(cfg, init);
  agent.observe(make_transition(cfg, 2.5, 0.1));
  agent.decay_noise(0.9);
  agent.save_checkpoint(path.string(), 3, 17);

  const AgentCheckpoint ckpt = load_checkpoint(path.string());
  CHECK(ckpt.agent_id == 3);
  CHECK(ckpt.epoch == 17);
  CHECK(ckpt.noise_sigma == doctest::Approx(std::sqrt(3.0) * 0.9).epsilon(1e-15));
  CHECK(ckpt.reward_peak == 2.5);
  CHECK(ckpt.actor.flatten() == agent.actor().flatten());
  CHECK(ckpt.critic.flatten() == agent.critic().flatten());
  CHECK(ckpt.target_actor.flatten() == agent.target_actor().flatten());
  CHECK(ckpt.target_critic.flatten() == agent.target_critic().flatten());

  Rng init2(25);
  DdpgAgent other(cfg, init2);
  other.restore(ckpt);
  CHECK(other.actor().flatten() == agent.actor().flatten());
  CHECK(other.noise_sigma() == doctest::Approx(ckpt.noise_sigma).epsilon(1e-15));
  CHECK(other.reward_scale() == 2.5);
  std::filesystem::remove(path);
}

TEST_CASE("config validation rejects out-of-range values") {
  DdpgConfig cfg = tiny_config();
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config();
  cfg.actor_lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config();
  cfg.noise_decay = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config();
  cfg.actor_hidden = {0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  tiny_config().validate();
}

TEST_CASE("default config mirrors the training hyperparameters") {
  DdpgConfig cfg;
  CHECK(cfg.gamma == 0.9);
  CHECK(cfg.tau_actor == 0.01);
  CHECK(cfg.tau_critic == 0.01);
  CHECK(cfg.replay_capacity == 10);
  CHECK(cfg.batch_size == 5);
  CHECK(cfg.noise_sigma == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(cfg.noise_decay == 0.99);
  CHECK(cfg.state_dim() == 17);
  CHECK(cfg.action_dim() == 16);
  CHECK(cfg.critic_input_dim() == 33);
  CHECK(cfg.actor_hidden == std::vector<int>{100, 70});
}
