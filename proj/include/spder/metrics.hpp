#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "spder/errors.hpp"

namespace spder {

/// Peak-to-peak range of the [-1, 1] training domain.
inline constexpr double kSignalRange = 2.0;

inline double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("mse: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " values");
  }
  if (a.empty()) throw ShapeError("mse of empty signals");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

/// 10 log10(4 / mse) dB; +inf when mse is exactly zero.
inline double psnr_from_mse(double mse) {
  if (mse < 0.0 || std::isnan(mse)) throw ArgumentError("psnr_from_mse: mse must be non-negative");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kSignalRange * kSignalRange / mse);
}

/// MSE on the 0..255 pixel scale: mse * (255/2)^2.
inline double mse_8bit(double mse) {
  if (mse < 0.0 || std::isnan(mse)) throw ArgumentError("mse_8bit: mse must be non-negative");
  return mse * 127.5 * 127.5;
}

struct MetricSnapshot {
  std::size_t step = 0;
  double mse = 0.0;
  double psnr_db = 0.0;
  double mse_8bit = 0.0;
  std::optional<double> rho_ag;
};

/// Builds a snapshot whose PSNR and 8-bit MSE are derived from `mse`.
inline MetricSnapshot make_snapshot(std::size_t step, double mse, std::optional<double> rho = std::nullopt) {
  if (!std::isfinite(mse)) throw NumericError("snapshot: non-finite mse at step " + std::to_string(step), step);
  return {step, mse, psnr_from_mse(mse), mse_8bit(mse), rho};
}

}  // namespace spder
