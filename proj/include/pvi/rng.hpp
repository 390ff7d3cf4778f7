#pragma once

#include <cstdint>
#include <random>

namespace pvi {

/// SplitMix64 step; used to derive independent per-path seed streams from a
/// master seed so results are independent of scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for logical stream `id` derived from `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (id + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

/// Standard normal sampler via Box-Muller on top of mt19937_64.  The engine
/// sequence is pinned by the standard, so draws are reproducible for a given
/// seed on any platform with the same libm.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double uniform() {
    // 53-bit uniform in [0,1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pvi
