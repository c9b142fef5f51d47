#include "thzbeam/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace thzbeam {

void ChannelParams::validate() const {
  if (carrier_hz <= 0.0) throw std::invalid_argument("carrier frequency must be > 0");
  if (absorption < 0.0) throw std::invalid_argument("absorption factor must be >= 0");
  if (num_antennas < 1) throw std::invalid_argument("antenna count must be >= 1");
  if (num_nlos < 0) throw std::invalid_argument("reflected-path count must be >= 0");
  if (!(nlos_mag_min >= 0.0 && nlos_mag_min <= nlos_mag_max && nlos_mag_max < 1.0))
    throw std::invalid_argument("reflection magnitude range must satisfy 0 <= min <= max < 1");
}

double spread_loss(const ChannelParams& params, double distance) {
  if (distance <= 0.0) throw std::domain_error("spread_loss: distance must be > 0");
  return kSpeedOfLight / (4.0 * std::numbers::pi * params.carrier_hz * distance) *
         std::exp(-0.5 * params.absorption * distance);
}

ChannelVector steering_vector(double aod, int num_antennas, double spacing,
                              double wavelength) {
  if (num_antennas < 1) throw std::domain_error("steering_vector: need at least one antenna");
  if (std::abs(aod) > 0.5 * std::numbers::pi)
    throw std::domain_error("steering_vector: angle of departure outside [-pi/2, pi/2]");
  ChannelVector a(num_antennas);
  const double phase_step =
      2.0 * std::numbers::pi / wavelength * spacing * std::sin(aod);
  const double scale = 1.0 / num_antennas;
  for (int n = 0; n < num_antennas; ++n)
    a[n] = std::polar(scale, phase_step * n);
  return a;
}

ChannelVector channel_response(const ChannelParams& params,
                               const LinkGeometry& geom,
                               const NLoSFactors& nlos) {
  params.validate();
  if (static_cast<int>(nlos.lambdas.size()) != params.num_nlos)
    throw std::invalid_argument("channel_response: reflection factor count mismatch");

  std::complex<double> path_sum = 1.0;
  for (const auto& lambda : nlos.lambdas) path_sum += lambda;

  const double gain_lin = std::pow(10.0, params.gain_db / 10.0);
  const double loss = spread_loss(params, geom.distance);
  ChannelVector a = steering_vector(geom.aod, params.num_antennas,
                                    params.spacing(), params.wavelength());
  if (params.steering_scale == SteeringScale::Unit)
    a *= static_cast<double>(params.num_antennas);
  return (gain_lin * path_sum * loss) * a;
}

NLoSFactors draw_nlos(Rng& rng, int count, double mag_min, double mag_max) {
  if (count < 0) throw std::invalid_argument("draw_nlos: count must be >= 0");
  if (!(mag_min >= 0.0 && mag_min <= mag_max && mag_max < 1.0))
    throw std::invalid_argument("draw_nlos: magnitude range must satisfy 0 <= min <= max < 1");
  NLoSFactors out;
  out.lambdas.reserve(count);
  for (int l = 0; l < count; ++l) {
    const double mag = rng.uniform(mag_min, mag_max);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    out.lambdas.push_back(std::polar(mag, phase));
  }
  return out;
}

int csi_mask_length(int num_antennas, double csi_fraction) {
  if (csi_fraction < 0.0 || csi_fraction > 1.0)
    throw std::domain_error("csi fraction must be in [0, 1]");
  // ceil(eta N) with a tolerance so exact products like 0.1 * 10 stay at 1
  const int kept =
      static_cast<int>(std::ceil(csi_fraction * num_antennas - 1e-9));
  return std::min(num_antennas, std::max(0, kept));
}

ChannelVector limited_csi(const ChannelVector& h, double csi_fraction) {
  const int n = static_cast<int>(h.size());
  const int kept = csi_mask_length(n, csi_fraction);
  ChannelVector masked = ChannelVector::Zero(n);
  masked.head(kept) = h.head(kept);
  return masked;
}

}  // namespace thzbeam
