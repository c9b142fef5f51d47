#include "thzbeam/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "thzbeam/errors.hpp"

namespace thzbeam {

std::string method_name(Method method) {
  switch (method) {
    case Method::Fdrl: return "fdrl";
    case Method::DdpgLocal: return "ddpg-local";
    case Method::Dqn: return "dqn";
    case Method::Zf: return "zf";
    case Method::Mmse: return "mmse";
    case Method::Mrt: return "mrt";
    case Method::Random: return "random";
  }
  throw std::logic_error("unreachable method");
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Fdrl, Method::DdpgLocal, Method::Dqn, Method::Zf,
                   Method::Mmse, Method::Mrt, Method::Random})
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method: " + name);
}

bool is_learning_method(Method method) {
  return method == Method::Fdrl || method == Method::DdpgLocal ||
         method == Method::Dqn;
}

std::string axis_name(SweepAxisKind kind) {
  switch (kind) {
    case SweepAxisKind::Antennas: return "antennas";
    case SweepAxisKind::Cells: return "cells";
    case SweepAxisKind::Neurons: return "neurons";
    case SweepAxisKind::UploadRatio: return "upload_ratio";
    case SweepAxisKind::Distance: return "distance";
  }
  throw std::logic_error("unreachable axis");
}

SweepAxisKind parse_axis(const std::string& name) {
  for (SweepAxisKind kind :
       {SweepAxisKind::Antennas, SweepAxisKind::Cells, SweepAxisKind::Neurons,
        SweepAxisKind::UploadRatio, SweepAxisKind::Distance})
    if (axis_name(kind) == name) return kind;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("config: bad integer for " + key + ": " + value);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("config: bad unsigned for " + key + ": " + value);
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad real for " + key + ": " + value);
  }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (value.empty()) return out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ','))
    out.push_back(parse_int(key, item));
  return out;
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

struct ConfigKey {
  const char* name;
  std::function<void(ExperimentConfig&, const std::string&)> apply;
};

const std::vector<ConfigKey>& config_registry() {
  static const std::vector<ConfigKey> registry = {
      {"method",
       [](ExperimentConfig& c, const std::string& v) { c.method = parse_method(v); }},
      {"num_cells",
       [](ExperimentConfig& c, const std::string& v) { c.num_cells = parse_int("num_cells", v); }},
      {"num_antennas",
       [](ExperimentConfig& c, const std::string& v) { c.num_antennas = parse_int("num_antennas", v); }},
      {"actor_hidden",
       [](ExperimentConfig& c, const std::string& v) { c.actor_hidden = parse_int_list("actor_hidden", v); }},
      {"critic_hidden",
       [](ExperimentConfig& c, const std::string& v) { c.critic_hidden = parse_int_list("critic_hidden", v); }},
      {"epochs",
       [](ExperimentConfig& c, const std::string& v) { c.epochs = parse_int("epochs", v); }},
      {"fed_cycle",
       [](ExperimentConfig& c, const std::string& v) { c.fed_cycle = parse_int("fed_cycle", v); }},
      {"replay_capacity",
       [](ExperimentConfig& c, const std::string& v) { c.replay_capacity = parse_int("replay_capacity", v); }},
      {"batch_size",
       [](ExperimentConfig& c, const std::string& v) { c.batch_size = parse_int("batch_size", v); }},
      {"gamma",
       [](ExperimentConfig& c, const std::string& v) { c.gamma = parse_real("gamma", v); }},
      {"tau_actor",
       [](ExperimentConfig& c, const std::string& v) { c.tau_actor = parse_real("tau_actor", v); }},
      {"tau_critic",
       [](ExperimentConfig& c, const std::string& v) { c.tau_critic = parse_real("tau_critic", v); }},
      {"actor_lr",
       [](ExperimentConfig& c, const std::string& v) { c.actor_lr = parse_real("actor_lr", v); }},
      {"critic_lr",
       [](ExperimentConfig& c, const std::string& v) { c.critic_lr = parse_real("critic_lr", v); }},
      {"upload_ratio",
       [](ExperimentConfig& c, const std::string& v) { c.upload_ratio = parse_real("upload_ratio", v); }},
      {"partial_selection",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "top-delta") c.partial_selection = PartialSelection::TopDelta;
         else if (v == "random") c.partial_selection = PartialSelection::Random;
         else throw std::invalid_argument("config: bad partial_selection: " + v);
       }},
      {"csi_fraction",
       [](ExperimentConfig& c, const std::string& v) { c.csi_fraction = parse_real("csi_fraction", v); }},
      {"state_mode",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "csi+sinr") c.state_mode = StateMode::CsiAndSinr;
         else if (v == "sinr-only") c.state_mode = StateMode::SinrOnly;
         else throw std::invalid_argument("config: bad state_mode: " + v);
       }},
      {"dist_min",
       [](ExperimentConfig& c, const std::string& v) { c.dist_min = parse_real("dist_min", v); }},
      {"dist_max",
       [](ExperimentConfig& c, const std::string& v) { c.dist_max = parse_real("dist_max", v); }},
      {"monte_carlo_runs",
       [](ExperimentConfig& c, const std::string& v) { c.monte_carlo_runs = parse_int("monte_carlo_runs", v); }},
      {"seed",
       [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); }},
      {"bandwidth_hz",
       [](ExperimentConfig& c, const std::string& v) { c.bandwidth_hz = parse_real("bandwidth_hz", v); }},
      {"noise_sigma",
       [](ExperimentConfig& c, const std::string& v) { c.noise_sigma = parse_real("noise_sigma", v); }},
      {"noise_decay",
       [](ExperimentConfig& c, const std::string& v) { c.noise_decay = parse_real("noise_decay", v); }},
      {"carrier_hz",
       [](ExperimentConfig& c, const std::string& v) { c.carrier_hz = parse_real("carrier_hz", v); }},
      {"absorption",
       [](ExperimentConfig& c, const std::string& v) { c.absorption = parse_real("absorption", v); }},
      {"gain_db",
       [](ExperimentConfig& c, const std::string& v) { c.gain_db = parse_real("gain_db", v); }},
      {"num_nlos",
       [](ExperimentConfig& c, const std::string& v) { c.num_nlos = parse_int("num_nlos", v); }},
      {"nlos_mag_min",
       [](ExperimentConfig& c, const std::string& v) { c.nlos_mag_min = parse_real("nlos_mag_min", v); }},
      {"nlos_mag_max",
       [](ExperimentConfig& c, const std::string& v) { c.nlos_mag_max = parse_real("nlos_mag_max", v); }},
      {"antenna_spacing",
       [](ExperimentConfig& c, const std::string& v) { c.antenna_spacing = parse_real("antenna_spacing", v); }},
      {"steering_scale",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "averaged") c.steering_scale = SteeringScale::Averaged;
         else if (v == "unit") c.steering_scale = SteeringScale::Unit;
         else throw std::invalid_argument("config: bad steering_scale: " + v);
       }},
      {"tx_power_dbm",
       [](ExperimentConfig& c, const std::string& v) { c.tx_power_dbm = parse_real("tx_power_dbm", v); }},
      {"noise_dbm",
       [](ExperimentConfig& c, const std::string& v) { c.noise_dbm = parse_real("noise_dbm", v); }},
      {"dqn_codebook",
       [](ExperimentConfig& c, const std::string& v) { c.dqn_codebook = parse_int("dqn_codebook", v); }},
      {"dqn_epsilon",
       [](ExperimentConfig& c, const std::string& v) { c.dqn_epsilon = parse_real("dqn_epsilon", v); }},
      {"dqn_epsilon_decay",
       [](ExperimentConfig& c, const std::string& v) { c.dqn_epsilon_decay = parse_real("dqn_epsilon_decay", v); }},
      {"dqn_lr",
       [](ExperimentConfig& c, const std::string& v) { c.dqn_lr = parse_real("dqn_lr", v); }},
  };
  return registry;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const ConfigKey& entry : config_registry()) {
    if (key == entry.name) {
      entry.apply(*this, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key: " + key);
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const ConfigKey& entry : config_registry()) out.emplace_back(entry.name);
    return out;
  }();
  return names;
}

void ExperimentConfig::validate() const {
  if (num_cells < 1) throw std::invalid_argument("config: num_cells must be >= 1");
  if (num_antennas < 1) throw std::invalid_argument("config: num_antennas must be >= 1");
  if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (fed_cycle < 1) throw std::invalid_argument("config: fed_cycle must be >= 1");
  if (monte_carlo_runs < 1)
    throw std::invalid_argument("config: monte_carlo_runs must be >= 1");
  if (!(upload_ratio > 0.0 && upload_ratio <= 1.0))
    throw std::invalid_argument("config: upload_ratio must lie in (0, 1]");
  if (!(csi_fraction >= 0.0 && csi_fraction <= 1.0))
    throw std::invalid_argument("config: csi_fraction must lie in [0, 1]");
  if (!(dist_min > 0.0 && dist_min <= dist_max))
    throw std::invalid_argument("config: need 0 < dist_min <= dist_max");
  if (!(bandwidth_hz > 0.0))
    throw std::invalid_argument("config: bandwidth_hz must be positive");
  channel_params().validate();
  ddpg_config().validate();
  dqn_config().validate();
}

ChannelParams ExperimentConfig::channel_params() const {
  ChannelParams params;
  params.carrier_hz = carrier_hz;
  params.absorption = absorption;
  params.gain_db = gain_db;
  params.num_nlos = num_nlos;
  params.num_antennas = num_antennas;
  params.antenna_spacing = antenna_spacing;
  params.nlos_mag_min = nlos_mag_min;
  params.nlos_mag_max = nlos_mag_max;
  params.steering_scale = steering_scale;
  return params;
}

DdpgConfig ExperimentConfig::ddpg_config() const {
  DdpgConfig cfg;
  cfg.num_antennas = num_antennas;
  cfg.actor_hidden = actor_hidden;
  cfg.critic_hidden = critic_hidden;
  cfg.gamma = gamma;
  cfg.tau_actor = tau_actor;
  cfg.tau_critic = tau_critic;
  cfg.actor_lr = actor_lr;
  cfg.critic_lr = critic_lr;
  cfg.replay_capacity = replay_capacity;
  cfg.batch_size = batch_size;
  cfg.noise_sigma = noise_sigma;
  cfg.noise_decay = noise_decay;
  return cfg;
}

DqnConfig ExperimentConfig::dqn_config() const {
  DqnConfig cfg;
  cfg.num_antennas = num_antennas;
  cfg.hidden = actor_hidden;
  cfg.codebook_size = dqn_codebook;
  cfg.gamma = gamma;
  cfg.tau = tau_actor;
  cfg.learning_rate = dqn_lr;
  cfg.replay_capacity = replay_capacity;
  cfg.batch_size = batch_size;
  cfg.epsilon = dqn_epsilon;
  cfg.epsilon_decay = dqn_epsilon_decay;
  return cfg;
}

double ExperimentConfig::tx_power_w() const { return dbm_to_watt(tx_power_dbm); }
double ExperimentConfig::noise_w() const { return dbm_to_watt(noise_dbm); }

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: missing '=' at " + path + ":" +
                                  std::to_string(line_no));
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key at " + path + ":" +
                                  std::to_string(line_no));
    base.set(key, value);
  }
  return base;
}

namespace {

// Seed stream reserved for the shared initial model; streams 0 and 1..K hold
// the scenario and the per-agent runtime draws.
constexpr std::uint64_t kInitStream = 0xFFFFFFFFull;

BeamformerSet zero_beams(int num_cells, int num_antennas) {
  BeamformerSet beams;
  beams.w.assign(num_cells, ChannelVector::Zero(num_antennas));
  return beams;
}

double trailing_mean(const std::vector<double>& trace, int window) {
  if (trace.empty() || window <= 0) return 0.0;
  const std::size_t take = std::min<std::size_t>(window, trace.size());
  double total = 0.0;
  for (std::size_t i = trace.size() - take; i < trace.size(); ++i)
    total += trace[i];
  return total / static_cast<double>(take);
}

struct EpochRecorder {
  RunResult& out;
  void operator()(const StepResult& step, double exploration, int fed_flag) {
    out.rewards.push_back(step.rewards);
    out.sum_rate.push_back(step.sum_rate);
    out.exploration.push_back(exploration);
    out.fed_round.push_back(fed_flag);
  }
};

void run_baseline_epochs(const ExperimentConfig& config,
                         const NetworkScenario& scenario, std::uint64_t run_seed,
                         RunResult& out) {
  BeamformerSet beams;
  switch (config.method) {
    case Method::Zf: beams = zf_beamformers(scenario); break;
    case Method::Mmse: beams = mmse_beamformers(scenario); break;
    case Method::Mrt: beams = mrt_beamformers(scenario); break;
    case Method::Random: {
      Rng rng(derive_seed(run_seed, 1));
      beams = random_beams(rng, config.num_cells, config.num_antennas);
      break;
    }
    default: throw std::logic_error("not a baseline method");
  }
  const StepResult step = env_step(scenario, beams, config.state_mode);
  EpochRecorder record{out};
  for (int epoch = 1; epoch <= config.epochs; ++epoch) record(step, 0.0, 0);
  out.final_throughput = config.bandwidth_hz * step.sum_rate;
  out.trailing_mean_throughput =
      config.bandwidth_hz * trailing_mean(out.sum_rate, 50);
}

void run_ddpg_epochs(const ExperimentConfig& config,
                     const NetworkScenario& scenario, std::uint64_t run_seed,
                     const std::string& checkpoint_dir, RunResult& out) {
  const int K = config.num_cells;
  const DdpgConfig agent_config = config.ddpg_config();
  std::vector<Rng> rngs;
  std::vector<DdpgAgent> agents;
  rngs.reserve(K);
  agents.reserve(K);
  for (int k = 0; k < K; ++k) rngs.emplace_back(derive_seed(run_seed, 1 + k));
  // Every BS starts from the same initial model, as if the edge server had
  // distributed one; exploration and minibatch draws stay per-agent.
  for (int k = 0; k < K; ++k) {
    Rng init_rng(derive_seed(run_seed, kInitStream));
    agents.emplace_back(agent_config, init_rng);
  }

  const bool federated = config.method == Method::Fdrl;
  GlobalModel global;
  if (federated) {
    // The edge server seeds its global model from the agents' initial
    // parameters during the setup handshake, so the first partial round has a
    // well-defined fill base. Nothing is broadcast and no upload is recorded.
    std::vector<UploadPackage> initial;
    initial.reserve(K);
    for (int k = 0; k < K; ++k)
      initial.push_back(make_full_package(k, 0, agents[k].model_params()));
    global = aggregate(initial, GlobalModel{});
    global.round = 0;
  }

  std::vector<BsState> states =
      env_step(scenario, zero_beams(K, config.num_antennas), config.state_mode)
          .next_states;

  EpochRecorder record{out};
  BeamformerSet beams = zero_beams(K, config.num_antennas);
  std::vector<Eigen::VectorXd> actions(K);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double sigma = agents.front().noise_sigma();
    for (int k = 0; k < K; ++k) {
      actions[k] = agents[k].act(states[k], true, rngs[k]);
      beams.w[k] = action_to_beamformer(actions[k], config.num_antennas);
    }
    const StepResult step = env_step(scenario, beams, config.state_mode);
    for (int k = 0; k < K; ++k) {
      agents[k].observe(Transition{states[k], actions[k], step.rewards[k],
                                   step.next_states[k]});
      agents[k].train_step(rngs[k]);
      agents[k].decay_noise(config.noise_decay);
    }

    int fed_flag = 0;
    if (federated && federation_round_due(epoch, config.fed_cycle)) {
      fed_flag = 1;
      const int round = epoch / config.fed_cycle;
      std::vector<UploadPackage> packages;
      packages.reserve(K);
      for (int k = 0; k < K; ++k) {
        UploadPackage pkg =
            config.upload_ratio >= 1.0
                ? make_full_package(k, round, agents[k].model_params())
                : select_partial(k, round, agents[k].model_params(),
                                 agents[k].last_synced(), config.upload_ratio,
                                 config.partial_selection, &rngs[k]);
        out.bytes_uploaded += pkg.payload_bytes();
        out.wire_bytes_uploaded += pkg.wire_bytes();
        packages.push_back(std::move(pkg));
      }
      global = aggregate(packages, global);
      for (int k = 0; k < K; ++k) apply_global(agents[k], global);
    }

    record(step, sigma, fed_flag);
    states = step.next_states;
  }

  for (int k = 0; k < K; ++k)
    beams.w[k] = action_to_beamformer(agents[k].act(states[k], false, rngs[k]),
                                      config.num_antennas);
  out.final_throughput =
      config.bandwidth_hz * env_step(scenario, beams, config.state_mode).sum_rate;
  out.trailing_mean_throughput =
      config.bandwidth_hz * trailing_mean(out.sum_rate, 50);

  if (!checkpoint_dir.empty())
    for (int k = 0; k < K; ++k)
      agents[k].save_checkpoint(
          checkpoint_dir + "/agent_" + std::to_string(k) + ".ckpt", k,
          config.epochs);
}

void run_dqn_epochs(const ExperimentConfig& config,
                    const NetworkScenario& scenario, std::uint64_t run_seed,
                    RunResult& out) {
  const int K = config.num_cells;
  const DqnConfig agent_config = config.dqn_config();
  const ChannelParams channel = config.channel_params();
  std::vector<Rng> rngs;
  std::vector<DqnAgent> agents;
  rngs.reserve(K);
  agents.reserve(K);
  for (int k = 0; k < K; ++k) rngs.emplace_back(derive_seed(run_seed, 1 + k));
  for (int k = 0; k < K; ++k) agents.emplace_back(agent_config, channel, rngs[k]);

  std::vector<BsState> states =
      env_step(scenario, zero_beams(K, config.num_antennas), config.state_mode)
          .next_states;

  EpochRecorder record{out};
  BeamformerSet beams = zero_beams(K, config.num_antennas);
  std::vector<int> picks(K, 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double epsilon = agents.front().epsilon();
    for (int k = 0; k < K; ++k) {
      picks[k] = agents[k].act(states[k], true, rngs[k]);
      beams.w[k] = agents[k].beam(picks[k]);
    }
    const StepResult step = env_step(scenario, beams, config.state_mode);
    for (int k = 0; k < K; ++k) {
      agents[k].observe(DqnTransition{states[k], picks[k], step.rewards[k],
                                      step.next_states[k]});
      agents[k].train_step(rngs[k]);
      agents[k].decay_epsilon();
    }
    record(step, epsilon, 0);
    states = step.next_states;
  }

  for (int k = 0; k < K; ++k)
    beams.w[k] = agents[k].beam(agents[k].act(states[k], false, rngs[k]));
  out.final_throughput =
      config.bandwidth_hz * env_step(scenario, beams, config.state_mode).sum_rate;
  out.trailing_mean_throughput =
      config.bandwidth_hz * trailing_mean(out.sum_rate, 50);
}

}  // namespace

RunResult run_algorithm(const ExperimentConfig& config, std::uint64_t run_seed,
                        const std::string& checkpoint_dir) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  Rng scenario_rng(derive_seed(run_seed, 0));
  const NetworkScenario scenario = generate_scenario(
      scenario_rng, config.num_cells, config.channel_params(), config.dist_min,
      config.dist_max, config.csi_fraction, config.tx_power_w(),
      config.noise_w());

  RunResult out;
  out.rewards.reserve(config.epochs);
  out.sum_rate.reserve(config.epochs);
  out.exploration.reserve(config.epochs);
  out.fed_round.reserve(config.epochs);

  switch (config.method) {
    case Method::Fdrl:
    case Method::DdpgLocal:
      run_ddpg_epochs(config, scenario, run_seed, checkpoint_dir, out);
      break;
    case Method::Dqn:
      run_dqn_epochs(config, scenario, run_seed, out);
      break;
    default:
      run_baseline_epochs(config, scenario, run_seed, out);
      break;
  }

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

std::uint64_t run_seed_for(const ExperimentConfig& config, int run_index) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(run_index));
}

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

MonteCarloResult run_monte_carlo(const ExperimentConfig& config,
                                 const std::string& checkpoint_dir) {
  config.validate();
  MonteCarloResult result;
  result.runs.reserve(config.monte_carlo_runs);
  for (int r = 0; r < config.monte_carlo_runs; ++r)
    result.runs.push_back(
        run_algorithm(config, run_seed_for(config, r), checkpoint_dir));

  std::vector<double> finals;
  finals.reserve(result.runs.size());
  double bytes = 0.0;
  for (const RunResult& run : result.runs) {
    finals.push_back(run.final_throughput);
    bytes += static_cast<double>(run.bytes_uploaded);
  }
  const double n = static_cast<double>(finals.size());
  double mean = 0.0;
  for (double v : finals) mean += v;
  mean /= n;
  double variance = 0.0;
  if (finals.size() > 1) {
    for (double v : finals) variance += (v - mean) * (v - mean);
    variance /= (n - 1.0);
  }
  result.mean_tp = mean;
  result.median_tp = median_of(finals);
  result.std_tp = std::sqrt(variance);
  result.mean_bytes = bytes / n;

  result.mean_sum_rate.assign(config.epochs, 0.0);
  for (const RunResult& run : result.runs)
    for (int e = 0; e < config.epochs; ++e)
      result.mean_sum_rate[e] += run.sum_rate[e] / n;
  return result;
}

ExperimentConfig apply_axis_value(ExperimentConfig base, SweepAxisKind kind,
                                  double value) {
  switch (kind) {
    case SweepAxisKind::Antennas:
      base.num_antennas = static_cast<int>(std::lround(value));
      break;
    case SweepAxisKind::Cells:
      base.num_cells = static_cast<int>(std::lround(value));
      break;
    case SweepAxisKind::Neurons: {
      const int width = static_cast<int>(std::lround(value));
      base.actor_hidden = {width, width};
      base.critic_hidden = {width, width};
      break;
    }
    case SweepAxisKind::UploadRatio:
      base.upload_ratio = value;
      break;
    case SweepAxisKind::Distance:
      base.dist_min = value;
      base.dist_max = value;
      break;
  }
  return base;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepAxis& axis) {
  if (axis.values.empty())
    throw std::invalid_argument("sweep: axis values must be nonempty");
  std::vector<SweepRow> rows;
  rows.reserve(axis.values.size());
  for (double value : axis.values) {
    const ExperimentConfig config = apply_axis_value(base, axis.kind, value);
    const MonteCarloResult mc = run_monte_carlo(config);
    rows.push_back(
        {value, mc.mean_tp, mc.median_tp, mc.std_tp, mc.mean_bytes});
  }
  return rows;
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_trace_csv(const std::string& path, const std::vector<RunResult>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "run_id,epoch,bs_id,reward_bps_hz,sum_rate_bps_hz,noise_sigma,fed_round_flag\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const RunResult& run = runs[r];
    for (std::size_t e = 0; e < run.rewards.size(); ++e) {
      for (std::size_t k = 0; k < run.rewards[e].size(); ++k) {
        out << r << ',' << (e + 1) << ',' << k << ','
            << format_double(run.rewards[e][k]) << ','
            << format_double(run.sum_rate[e]) << ','
            << format_double(run.exploration[e]) << ',' << run.fed_round[e]
            << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_summary_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "axis_value,mean_tp,median_tp,std_tp,bytes_uploaded\n";
  for (const SweepRow& row : rows) {
    out << format_double(row.axis_value) << ',' << format_double(row.mean_tp)
        << ',' << format_double(row.median_tp) << ','
        << format_double(row.std_tp) << ','
        << format_double(row.bytes_uploaded) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace thzbeam
