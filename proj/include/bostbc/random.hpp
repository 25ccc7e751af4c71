#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "bostbc/matrix.hpp"

namespace bostbc {

inline constexpr const char* kGaussianAlgorithm = "mt19937_64 + box-muller (53-bit uniforms)";

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream seed from a parent seed and a child index.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t child) noexcept {
  return splitmix64(splitmix64(parent) ^ splitmix64(child + 0x632be59bd9b4e019ULL));
}

/// Seedable generator with a fixed, library-independent Gaussian sampler.
/// std::normal_distribution is implementation-defined, so it is not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_gaussian(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

  ComplexMatrix complex_gaussian_matrix(std::size_t rows, std::size_t cols, double variance = 1.0) {
    ComplexMatrix m(rows, cols);
    for (auto& v : m.data()) v = complex_gaussian(variance);
    return m;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bostbc
