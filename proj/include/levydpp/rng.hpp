#pragma once

// Counter-based seeding and the samplers used throughout the toolkit.
//
// Every Monte Carlo task derives its stream as hash(base_seed, index), so a
// path's randomness depends only on its index, never on execution order or
// worker count. All samplers are implemented here rather than taken from
// <random>: the determinism contracts (bit-identical realizations and reports)
// pin the exact sampled sequences, which <random> distributions do not.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace levydpp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for sub-task `k` of the experiment seeded by `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL + (k << 1));
  std::uint64_t a = splitmix64(s);
  return a ^ splitmix64(s);
}

// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]: safe under log().
  double uniform_pos() { return 1.0 - uniform(); }

  // Standard normal, Box-Muller with one cached deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential(double rate) {
    if (!(rate > 0)) throw std::invalid_argument("Rng::exponential: rate must be > 0");
    return -std::log(uniform_pos()) / rate;
  }

  // Knuth's product method. Means above 500 are split into chunks so the
  // running product never underflows; counts add by Poisson additivity.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0)) throw std::invalid_argument("Rng::poisson: mean must be >= 0");
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_small(500.0);
      mean -= 500.0;
    }
    return total + poisson_small(mean);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t poisson_small(double mean) {
    if (mean <= 0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t n = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++n;
      prod *= uniform_pos();
    }
    return n;
  }

  std::uint64_t state_[4];
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace levydpp
