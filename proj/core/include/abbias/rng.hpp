#pragma once

#include <cmath>
#include <cstdint>

namespace abbias {

// 64-bit finalizer from SplitMix64 (Steele, Lea, Flood; fixed-increment
// variant by Vigna). Also used standalone to derive child seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
  z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
  return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and up to two stream labels.
/// Children with distinct labels are decorrelated, so per-user / per-replicate
/// streams can be created independently of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t z = master + UINT64_C(0x9E3779B97F4A7C15);
  z = mix64(z ^ mix64(a + UINT64_C(0x9E3779B97F4A7C15)));
  z = mix64(z ^ mix64(b + UINT64_C(0xD1B54A32D192ED03)));
  return z;
}

/// SplitMix64 generator with the distribution helpers this library needs.
/// All draws are fully determined by the seed; there is no global state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
    return mix64(z);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n). n must be >= 1.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift; bias is unmeasurable for the small n used here
    // and the map is deterministic, which is what matters.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal() {
    double u1 = uniform_open01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; boosted for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform_open01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform_open01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Beta(a, b) as a gamma ratio.
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    double s = x + y;
    if (s <= 0.0) return 0.5;  // both gammas underflowed; only for tiny shapes
    return x / s;
  }

 private:
  std::uint64_t state_;
};

}  // namespace abbias
