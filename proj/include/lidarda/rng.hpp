// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lidarda {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream seed from a root seed plus tags, e.g. (seed, {kScene, scan_index}).
// Every consumer derives its own stream this way, so draws never depend on
// execution order.
constexpr std::uint64_t mix_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(seed);
  for (std::uint64_t t : tags) s = splitmix64(s ^ t);
  return s;
}

// Stream tags. Arbitrary distinct constants.
namespace stream {
inline constexpr std::uint64_t kScene = 0x5343454eULL;    // scene generation
inline constexpr std::uint64_t kPose = 0x504f5345ULL;     // sensor pose per scan
inline constexpr std::uint64_t kNoise = 0x4e4f4953ULL;    // range noise per scan
inline constexpr std::uint64_t kBatch = 0x42415443ULL;    // scan sampling per iter
inline constexpr std::uint64_t kAugment = 0x4155474dULL;  // augmentation per slot
inline constexpr std::uint64_t kPoints = 0x50545353ULL;   // point sampling per slot
inline constexpr std::uint64_t kInit = 0x494e4954ULL;     // parameter init
}  // namespace stream

// mt19937_64 engine (its output sequence is fixed by the standard) with
// explicit output mappings, so results do not depend on the standard
// library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  // Box-Muller with a cached spare.
  double normal(double mean, double sigma) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + sigma * spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + sigma * r * std::cos(theta);
  }

private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lidarda
