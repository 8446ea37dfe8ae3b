#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cloudrisk {

// Seeded random stream. Distributions are derived from raw engine bits here
// rather than through <random> distribution objects, whose algorithms are
// implementation-defined; this keeps runs bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Geometric number of trials >= 1 with the given mean (mean >= 1).
  int geometric(double mean) {
    if (mean <= 1.0) return 1;
    const double p = 1.0 / mean;
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return 1 + static_cast<int>(std::floor(std::log(u) / std::log1p(-p)));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Independent child stream; the same (seed, stream) pair always yields the
  // same child.
  Rng fork(std::uint64_t stream) const {
    return Rng(splitmix(seed_ ^ splitmix(stream + 0x9E3779B97F4A7C15ULL)));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace cloudrisk
