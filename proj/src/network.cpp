#include "thzbeam/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thzbeam {

void NetworkScenario::validate() const {
  if (num_cells < 1) throw std::invalid_argument("scenario: need at least one cell");
  if (num_antennas < 1) throw std::invalid_argument("scenario: need at least one antenna");
  if (tx_power_w <= 0.0) throw std::invalid_argument("scenario: transmit power must be > 0");
  if (noise_w <= 0.0) throw std::invalid_argument("scenario: noise power must be > 0");
  if (csi_fraction < 0.0 || csi_fraction > 1.0)
    throw std::invalid_argument("scenario: csi fraction must be in [0, 1]");
  const size_t expected = static_cast<size_t>(num_cells) * num_cells;
  if (channels.size() != expected)
    throw std::invalid_argument("scenario: channel matrix must be K x K");
  for (const auto& h : channels) {
    if (h.size() != num_antennas)
      throw std::invalid_argument("scenario: every channel must have length N");
    if (!h.allFinite())
      throw std::invalid_argument("scenario: channel entries must be finite");
  }
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

namespace {

double sinr_impl(const NetworkScenario& sc, const BeamformerSet& beams, int k,
                 const ChannelVector& serving) {
  if (k < 0 || k >= sc.num_cells) throw std::out_of_range("sinr: BS index out of range");
  if (static_cast<int>(beams.w.size()) != sc.num_cells)
    throw std::invalid_argument("sinr: need one beam per BS");
  const double desired =
      sc.tx_power_w * std::norm(serving.dot(beams.w[k]));
  double interference = 0.0;
  for (int j = 0; j < sc.num_cells; ++j) {
    if (j == k) continue;
    interference += sc.tx_power_w * std::norm(sc.link(j, k).dot(beams.w[j]));
  }
  return desired / (interference + sc.noise_w);
}

}  // namespace

double sinr(const NetworkScenario& sc, const BeamformerSet& beams, int k) {
  return sinr_impl(sc, beams, k, sc.link(k, k));
}

double sinr_limited(const NetworkScenario& sc, const BeamformerSet& beams, int k) {
  return sinr_impl(sc, beams, k, sc.serving_limited(k));
}

double rate(double gamma) {
  if (gamma < 0.0) throw std::domain_error("rate: SINR must be >= 0");
  return std::log2(1.0 + gamma);
}

double sum_rate_limited(const NetworkScenario& sc, const BeamformerSet& beams) {
  double total = 0.0;
  for (int k = 0; k < sc.num_cells; ++k) total += rate(sinr_limited(sc, beams, k));
  return total;
}

BsState make_bs_state(const NetworkScenario& sc, int k, double gamma_limited,
                      StateMode mode) {
  const int n = sc.num_antennas;
  BsState state;
  state.features.assign(2 * n + 1, 0.0);
  if (mode == StateMode::CsiAndSinr) {
    const ChannelVector h = sc.serving_limited(k);
    for (int i = 0; i < n; ++i) {
      state.features[i] = h[i].real();
      state.features[n + i] = h[i].imag();
    }
  }
  double sinr_db = NetworkScenario::kSinrDbFloor;
  if (gamma_limited > 0.0) sinr_db = 10.0 * std::log10(gamma_limited);
  state.features[2 * n] = std::clamp(sinr_db, NetworkScenario::kSinrDbFloor,
                                     NetworkScenario::kSinrDbCeil);
  return state;
}

StepResult env_step(const NetworkScenario& sc, const BeamformerSet& beams,
                    StateMode mode) {
  if (static_cast<int>(beams.w.size()) != sc.num_cells)
    throw std::invalid_argument("env_step: need one action per BS");
  for (const auto& w : beams.w) {
    if (w.size() != sc.num_antennas)
      throw std::invalid_argument("env_step: beam length must equal N");
    if (!satisfies_power_constraint(w))
      throw std::invalid_argument("env_step: beam violates the unit power constraint");
  }
  StepResult out;
  out.rewards.resize(sc.num_cells);
  out.next_states.resize(sc.num_cells);
  for (int k = 0; k < sc.num_cells; ++k) {
    const double gamma = sinr_limited(sc, beams, k);
    out.rewards[k] = rate(gamma);
    out.next_states[k] = make_bs_state(sc, k, gamma, mode);
    out.sum_rate += out.rewards[k];
  }
  return out;
}

NetworkScenario generate_scenario(Rng& rng, int num_cells,
                                  const ChannelParams& params, double dist_min,
                                  double dist_max, double csi_fraction,
                                  double tx_power_w, double noise_w) {
  if (num_cells < 1) throw std::invalid_argument("generate_scenario: need at least one cell");
  if (!(dist_min > 0.0 && dist_min <= dist_max))
    throw std::invalid_argument("generate_scenario: need 0 < dist_min <= dist_max");
  params.validate();

  NetworkScenario sc;
  sc.num_cells = num_cells;
  sc.num_antennas = params.num_antennas;
  sc.tx_power_w = tx_power_w;
  sc.noise_w = noise_w;
  sc.csi_fraction = csi_fraction;
  sc.channels.resize(static_cast<size_t>(num_cells) * num_cells);
  sc.geometry.resize(sc.channels.size());
  for (int j = 0; j < num_cells; ++j) {
    for (int k = 0; k < num_cells; ++k) {
      LinkGeometry geom;
      geom.distance = rng.uniform(dist_min, dist_max);
      geom.aod = rng.uniform(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
      const NLoSFactors nlos =
          draw_nlos(rng, params.num_nlos, params.nlos_mag_min, params.nlos_mag_max);
      sc.geometry[static_cast<size_t>(j) * num_cells + k] = geom;
      sc.link(j, k) = channel_response(params, geom, nlos);
    }
  }
  sc.validate();
  return sc;
}

}  // namespace thzbeam
