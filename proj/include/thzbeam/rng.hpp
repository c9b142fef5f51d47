#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace thzbeam {

// Stateless mixer used to derive independent seed streams from a master seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for stream `stream` of a master seed. Distinct streams never collide
// in practice and the mapping is fixed, so results are reproducible across
// runs and machines.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  return splitmix64(master + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// mt19937_64 plus hand-rolled distributions. The standard library's
// distribution objects are implementation-defined, so identical seeds could
// give different draws on different toolchains; these are pinned.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. Two uniforms per call, no cached spare,
  // so each draw is a pure function of the engine state.
  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly-symmetric complex normal, unit variance (1/2 per component).
  std::complex<double> complex_gaussian() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
  }

  // Uniform index in [0, n). Modulo bias is far below anything observable
  // for the index ranges used here (buffers, codebooks).
  size_t index(size_t n) { return static_cast<size_t>(eng_() % n); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace thzbeam
