#pragma once

#include <cmath>
#include <cstdint>

namespace spdecone {

/// Deterministic counter-seeded stream (splitmix64 core). Every path /
/// sampler derives its own stream from (master seed, stream index), so
/// results do not depend on scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng stream(std::uint64_t master, std::uint64_t index) {
    Rng r(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    r.next_u64();  // decorrelate nearby indices
    r.next_u64();
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller, cosine branch; 2 uniforms per draw).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Poisson count with the given mean (inversion for small means,
  /// rounded normal tail for large ones).
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 64.0) {
      double limit = std::exp(-mean), prod = uniform();
      long k = 0;
      while (prod > limit) {
        prod *= uniform();
        ++k;
      }
      return k;
    }
    double z = normal();
    double v = std::floor(mean + std::sqrt(mean) * z + 0.5);
    return v < 0 ? 0 : static_cast<long>(v);
  }

  /// Uniform integer in [0, n).
  long below(long n) { return static_cast<long>(next_u64() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

}  // namespace spdecone
