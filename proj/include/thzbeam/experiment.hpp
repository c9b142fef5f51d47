#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thzbeam/agent.hpp"
#include "thzbeam/baselines.hpp"
#include "thzbeam/channel.hpp"
#include "thzbeam/federation.hpp"
#include "thzbeam/network.hpp"

namespace thzbeam {

enum class Method { Fdrl, DdpgLocal, Dqn, Zf, Mmse, Mrt, Random };

std::string method_name(Method method);
Method parse_method(const std::string& name);
bool is_learning_method(Method method);

enum class SweepAxisKind { Antennas, Cells, Neurons, UploadRatio, Distance };

std::string axis_name(SweepAxisKind kind);
SweepAxisKind parse_axis(const std::string& name);

// Every field is settable through set(key, value) with key = field name;
// the CLI and the key=value config file share that registry.
struct ExperimentConfig {
  Method method = Method::Fdrl;
  int num_cells = 3;
  int num_antennas = 8;
  std::vector<int> actor_hidden = {100, 70};
  std::vector<int> critic_hidden = {100, 70};
  int epochs = 300;
  int fed_cycle = 20;
  int replay_capacity = 10;
  int batch_size = 5;
  double gamma = 0.9;
  double tau_actor = 0.01;
  double tau_critic = 0.01;
  double actor_lr = 1e-3;
  double critic_lr = 1e-2;
  double upload_ratio = 1.0;
  PartialSelection partial_selection = PartialSelection::TopDelta;
  double csi_fraction = 1.0;
  StateMode state_mode = StateMode::CsiAndSinr;
  double dist_min = 10.0;
  double dist_max = 100.0;
  int monte_carlo_runs = 1;
  std::uint64_t seed = 1;
  double bandwidth_hz = 1.0;
  double noise_sigma = 1.7320508075688772;
  double noise_decay = 0.99;
  double carrier_hz = 0.3e12;
  double absorption = 0.1;
  double gain_db = 10.0;
  int num_nlos = 5;
  double nlos_mag_min = 0.01;
  double nlos_mag_max = 0.1;
  double antenna_spacing = 0.0;
  SteeringScale steering_scale = SteeringScale::Unit;
  double tx_power_dbm = 10.0;
  double noise_dbm = -74.0;
  int dqn_codebook = 16;
  double dqn_epsilon = 1.0;
  double dqn_epsilon_decay = 0.99;
  double dqn_lr = 1e-3;

  void validate() const;
  ChannelParams channel_params() const;
  DdpgConfig ddpg_config() const;
  DqnConfig dqn_config() const;
  double tx_power_w() const;
  double noise_w() const;

  void set(const std::string& key, const std::string& value);
  static const std::vector<std::string>& keys();
};

// Flat key=value file, one entry per line, '#' starts a comment.
ExperimentConfig load_config_file(const std::string& path,
                                  ExperimentConfig base = {});

struct RunResult {
  std::vector<std::vector<double>> rewards;  // [epoch][bs], bits/s/Hz
  std::vector<double> sum_rate;              // [epoch], bits/s/Hz
  std::vector<double> exploration;           // [epoch]: sigma, or epsilon for dqn
  std::vector<int> fed_round;                // [epoch], 1 when a round fired
  double final_throughput = 0.0;     // greedy joint evaluation x bandwidth
  double trailing_mean_throughput = 0.0;  // mean sum rate, last 50 epochs
  double wall_seconds = 0.0;
  std::size_t bytes_uploaded = 0;       // parameter payload, 8 B per value
  std::size_t wire_bytes_uploaded = 0;  // including headers and indices
};

// One seeded end-to-end run: scenario draw, epoch loop with per-BS agents,
// federation every fed_cycle epochs (fdrl only), greedy final evaluation.
// Writes per-agent checkpoints into checkpoint_dir when it is non-empty.
RunResult run_algorithm(const ExperimentConfig& config, std::uint64_t run_seed,
                        const std::string& checkpoint_dir = "");

std::uint64_t run_seed_for(const ExperimentConfig& config, int run_index);

struct MonteCarloResult {
  std::vector<RunResult> runs;
  double mean_tp = 0.0;
  double median_tp = 0.0;
  double std_tp = 0.0;
  double mean_bytes = 0.0;
  std::vector<double> mean_sum_rate;  // per-epoch mean across runs
};

MonteCarloResult run_monte_carlo(const ExperimentConfig& config,
                                 const std::string& checkpoint_dir = "");

struct SweepAxis {
  SweepAxisKind kind = SweepAxisKind::Antennas;
  std::vector<double> values;
};

struct SweepRow {
  double axis_value = 0.0;
  double mean_tp = 0.0;
  double median_tp = 0.0;
  double std_tp = 0.0;
  double bytes_uploaded = 0.0;
};

ExperimentConfig apply_axis_value(ExperimentConfig base, SweepAxisKind kind,
                                  double value);

// One Monte Carlo batch per axis value; all values share the master seed, so
// derived run seeds pair up across rows.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const SweepAxis& axis);

std::string format_double(double value);  // shortest round-trippable, %.17g

void write_trace_csv(const std::string& path, const std::vector<RunResult>& runs);
void write_summary_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace thzbeam
