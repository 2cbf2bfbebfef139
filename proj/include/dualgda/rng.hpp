#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dualgda {

/// Deterministic random source used everywhere randomness is needed.
///
/// The stream is fully specified so that fixtures can be reproduced outside
/// this codebase: mt19937_64 seeded directly with the 64-bit seed, uniform
/// doubles taken from the top 53 bits, normals by the trigonometric
/// Box-Muller transform (pairs drawn in cos/sin order), integer bounds by
/// modulo, shuffles by descending Fisher-Yates.
class Rng {
 public:
  static constexpr const char* kGeneratorId = "mt19937_64/box-muller/fisher-yates";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n). n must be positive. Modulo bias is
  /// negligible at cohort sizes and keeps the stream easy to replicate.
  std::size_t bounded(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dualgda
