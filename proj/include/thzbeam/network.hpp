#pragma once

#include <vector>

#include "thzbeam/channel.hpp"

namespace thzbeam {

// One beamforming vector per BS; every w_k must satisfy ||w_k||^2 <= 1.
struct BeamformerSet {
  std::vector<ChannelVector> w;
};

inline constexpr double kPowerTolerance = 1e-9;

inline bool satisfies_power_constraint(const ChannelVector& w) {
  return w.squaredNorm() <= 1.0 + kPowerTolerance;
}

// Which features each BS observes: its masked serving CSI plus the fed-back
// SINR, or the SINR alone (CSI block zeroed, dimensions unchanged).
enum class StateMode { CsiAndSinr, SinrOnly };

// Per-BS observation, length 2N+1:
//   [Re(h_kk_lim), Im(h_kk_lim), SINR in dB]
// with the dB entry clamped to [-60, 60].
struct BsState {
  std::vector<double> features;
};

struct StepResult {
  std::vector<double> rewards;  // bits/s/Hz, one per BS
  std::vector<BsState> next_states;
  double sum_rate = 0.0;  // = sum of rewards
};

// Immutable K-cell ground truth: all K*K link channels, powers, noise and
// geometry. Channels are quasi-static: fixed for a run, redrawn across
// Monte Carlo runs.
struct NetworkScenario {
  int num_cells = 0;     // K
  int num_antennas = 0;  // N
  double tx_power_w = 0.0;
  double noise_w = 0.0;
  double csi_fraction = 1.0;  // eta
  std::vector<ChannelVector> channels;  // K*K, entry (j, k) = BS j -> UE k
  std::vector<LinkGeometry> geometry;   // same indexing

  static constexpr double kSinrDbFloor = -60.0;
  static constexpr double kSinrDbCeil = 60.0;

  const ChannelVector& link(int tx_bs, int rx_ue) const {
    return channels[static_cast<size_t>(tx_bs) * num_cells + rx_ue];
  }
  ChannelVector& link(int tx_bs, int rx_ue) {
    return channels[static_cast<size_t>(tx_bs) * num_cells + rx_ue];
  }
  // Masked serving channel g(h_kk).
  ChannelVector serving_limited(int k) const {
    return limited_csi(link(k, k), csi_fraction);
  }

  void validate() const;
};

double dbm_to_watt(double dbm);

// Eq.-(4)-style SINR at UE k with the true serving channel in the numerator.
double sinr(const NetworkScenario& sc, const BeamformerSet& beams, int k);

// Same, but the numerator uses the masked serving channel g(h_kk); the
// interference and noise terms always use the true channels — only the BS's
// knowledge is limited, the interference physics is real.
double sinr_limited(const NetworkScenario& sc, const BeamformerSet& beams, int k);

// Spectral efficiency log2(1 + gamma), bits/s/Hz.
double rate(double gamma);

// Sum over k of rate(sinr_limited(k)). Equals the full-CSI sum rate when
// eta = 1.
double sum_rate_limited(const NetworkScenario& sc, const BeamformerSet& beams);

BsState make_bs_state(const NetworkScenario& sc, int k, double gamma_limited,
                      StateMode mode = StateMode::CsiAndSinr);

// Synchronous joint step: all K beams are evaluated together, each BS gets
// reward r_k = rate(sinr_limited(k)) and its next observation. Pure function
// of (scenario, beams). Beams violating the power constraint are rejected.
StepResult env_step(const NetworkScenario& sc, const BeamformerSet& beams,
                    StateMode mode = StateMode::CsiAndSinr);

// Draws per-link distance uniform in [dist_min, dist_max], angle of
// departure uniform in [-pi/2, pi/2] and reflection factors from params'
// magnitude range, then materializes all K*K channels. Draw order is fixed
// and independent of N, so paired seeds share geometry across antenna sweeps.
NetworkScenario generate_scenario(Rng& rng, int num_cells,
                                  const ChannelParams& params, double dist_min,
                                  double dist_max, double csi_fraction,
                                  double tx_power_w = 0.01,
                                  double noise_w = 3.9810717055349695e-11);

}  // namespace thzbeam
