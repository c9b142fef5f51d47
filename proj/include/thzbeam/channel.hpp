#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "thzbeam/rng.hpp"

namespace thzbeam {

using ChannelVector = Eigen::VectorXcd;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Scaling of the uniform-linear-array response entries.
//   Averaged: every entry has magnitude 1/N, so beamforming gain shrinks
//             with the array size.
//   Unit:     every entry has magnitude 1, the physical convention where
//             coherent combining gain grows proportionally with N.
enum class SteeringScale { Averaged, Unit };

struct ChannelParams {
  double carrier_hz = 0.3e12;  // f
  double absorption = 0.1;     // rho(f), 1/m
  double gain_db = 10.0;       // integrated antenna gain G
  int num_nlos = 5;            // L, reflected-path count
  int num_antennas = 8;        // N
  double antenna_spacing = 0., // d_a in meters; <= 0 selects lambda/2
      nlos_mag_min = 0.01, nlos_mag_max = 0.1;
  SteeringScale steering_scale = SteeringScale::Averaged;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  double spacing() const {
    return antenna_spacing > 0.0 ? antenna_spacing : 0.5 * wavelength();
  }
  void validate() const;  // throws std::invalid_argument
};

struct LinkGeometry {
  double distance = 0.0;  // m, > 0
  double aod = 0.0;       // angle of departure, radians in [-pi/2, pi/2]
};

// Complex attenuation of each reflected path (reflection factor and
// roughness combined).
struct NLoSFactors {
  std::vector<std::complex<double>> lambdas;
};

// Spreading plus molecular-absorption loss:
//   a_L(f, d) = c / (4 pi f d) * exp(-rho(f) d / 2).
// Strictly positive, strictly decreasing in both d and f.
double spread_loss(const ChannelParams& params, double distance);

// ULA array response, entry n = (1/N) exp(j 2 pi / lambda * d_a n sin(aod)).
ChannelVector steering_vector(double aod, int num_antennas, double spacing,
                              double wavelength);

// Full link response:
//   h = G_lin [1 + sum_l Lambda_l] a_L(f, d) a(aod),
// with G_lin = 10^(gain_db / 10). The single array response scales both the
// line-of-sight term and the reflected sum. With SteeringScale::Unit the
// response entries are rescaled to unit magnitude.
ChannelVector channel_response(const ChannelParams& params,
                               const LinkGeometry& geom,
                               const NLoSFactors& nlos);

// Draws `count` reflection factors with magnitude uniform in
// [mag_min, mag_max] and phase uniform in [0, 2 pi).
NLoSFactors draw_nlos(Rng& rng, int count, double mag_min, double mag_max);

// Number of leading antenna entries the estimator resolves.
int csi_mask_length(int num_antennas, double csi_fraction);

// Masked view of a channel: the first ceil(eta N) entries are kept, the rest
// zeroed. eta = 1 returns h unchanged, eta = 0 the zero vector.
ChannelVector limited_csi(const ChannelVector& h, double csi_fraction);

}  // namespace thzbeam
