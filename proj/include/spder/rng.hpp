#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace spder {

/// Seedable generator whose output is identical on every standard library.
///
/// The engine is std::mt19937_64 (bit-exact by the standard). The
/// distributions are implemented here because the std:: ones are
/// implementation-defined.
class Rng {
 public:
  /// Recorded in run metadata so other implementations can replay a run.
  static constexpr std::string_view kAlgorithm = "mt19937_64+u53+box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; one draw per call, no cached pair.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spder
