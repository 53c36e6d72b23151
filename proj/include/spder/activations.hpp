#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spder/errors.hpp"
#include "spder/vecmath.hpp"

namespace spder {

/// Damping multiplier applied to the sine in a semiperiodic activation.
enum class DampingKind {
  Const1,    // pure sine
  SqrtAbs,   // sqrt(|u|)
  LogAbs,    // log(|u|)
  Arctan,    // atan(u)
  SqrtRelu,  // sqrt(max(u, 0))
  Identity,  // u, superlinear-ablation only
  Square,    // u^2, superlinear-ablation only
};

inline constexpr DampingKind kAllDampings[] = {
    DampingKind::Const1,   DampingKind::SqrtAbs,  DampingKind::LogAbs, DampingKind::Arctan,
    DampingKind::SqrtRelu, DampingKind::Identity, DampingKind::Square,
};

/// Identity and Square exist to demonstrate why the damping must be sublinear.
constexpr bool diagnostic_only(DampingKind kind) {
  return kind == DampingKind::Identity || kind == DampingKind::Square;
}

constexpr std::string_view to_string(DampingKind kind) {
  switch (kind) {
    case DampingKind::Const1: return "const1";
    case DampingKind::SqrtAbs: return "sqrtabs";
    case DampingKind::LogAbs: return "logabs";
    case DampingKind::Arctan: return "arctan";
    case DampingKind::SqrtRelu: return "sqrtrelu";
    case DampingKind::Identity: return "identity";
    case DampingKind::Square: return "square";
  }
  return "?";
}

inline std::optional<DampingKind> parse_damping(std::string_view name) {
  for (DampingKind kind : kAllDampings) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

enum class ActivationKind { Relu, Semiperiodic };

struct ActivationSpec {
  ActivationKind kind = ActivationKind::Semiperiodic;
  DampingKind damping = DampingKind::SqrtAbs;
  double omega0 = 30.0;
  /// Magnitude floor on the damping argument for SqrtAbs and LogAbs.
  double clamp_eps = 1e-30;

  static ActivationSpec relu() { return {ActivationKind::Relu, DampingKind::Const1, 30.0, 1e-30}; }
  static ActivationSpec semiperiodic(DampingKind damping, double omega0 = 30.0) {
    return {ActivationKind::Semiperiodic, damping, omega0, 1e-30};
  }
  static ActivationSpec sine(double omega0 = 30.0) { return semiperiodic(DampingKind::Const1, omega0); }

  bool is_periodic() const { return kind == ActivationKind::Semiperiodic; }

  void validate() const {
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw ArgumentError("omega0 must be positive");
    if (!(clamp_eps >= 0.0)) throw ArgumentError("clamp_eps must be non-negative");
  }

  std::string name() const {
    if (kind == ActivationKind::Relu) return "relu";
    if (damping == DampingKind::Const1) return "sine";
    return "sine*" + std::string(to_string(damping));
  }

  friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

/// Value of a damping function and its slope at one point.
struct DampingValue {
  double value;
  double slope;
};

/// Clamped argument sign(u) * max(|u|, eps); zero maps to +eps.
inline double clamp_magnitude(double u, double eps) {
  const double mag = std::max(std::abs(u), eps);
  return std::signbit(u) ? -mag : mag;
}

inline DampingValue damping(DampingKind kind, double u, double clamp_eps) {
  switch (kind) {
    case DampingKind::Const1:
      return {1.0, 0.0};
    case DampingKind::SqrtAbs: {
      const double c = clamp_magnitude(u, clamp_eps);
      const double root = std::sqrt(std::abs(c));
      if (root == 0.0) return {0.0, 0.0};
      return {root, std::copysign(0.5 / root, c)};
    }
    case DampingKind::LogAbs: {
      const double c = clamp_magnitude(u, clamp_eps);
      if (c == 0.0) return {0.0, 0.0};
      return {std::log(std::abs(c)), 1.0 / c};
    }
    case DampingKind::Arctan:
      return {std::atan(u), 1.0 / (1.0 + u * u)};
    case DampingKind::SqrtRelu: {
      if (u <= 0.0) return {0.0, 0.0};
      const double root = std::sqrt(u);
      return {root, 0.5 / root};
    }
    case DampingKind::Identity:
      return {u, 1.0};
    case DampingKind::Square:
      return {u * u, 2.0 * u};
  }
  return {0.0, 0.0};
}

struct ActivationValue {
  double value;
  double slope;
};

/// Activation value and exact derivative with respect to the pre-activation x.
///
/// Semiperiodic units compute u = omega0 * x, then sin(u) * damping(u). The
/// damping sees the same scaled argument as the sine, so trained activations
/// cluster at the extrema of sin(u) * damping(u).
inline ActivationValue act_eval(const ActivationSpec& spec, double x) {
  if (spec.kind == ActivationKind::Relu) return {x > 0.0 ? x : 0.0, x > 0.0 ? 1.0 : 0.0};
  const double u = spec.omega0 * x;
  const double s = std::sin(u);
  const double c = std::cos(u);
  if (spec.damping == DampingKind::Const1) return {s, spec.omega0 * c};
  const DampingValue d = damping(spec.damping, u, spec.clamp_eps);
  return {s * d.value, spec.omega0 * (c * d.value + s * d.slope)};
}

inline double act_forward(const ActivationSpec& spec, double x) { return act_eval(spec, x).value; }
inline double act_derivative(const ActivationSpec& spec, double x) { return act_eval(spec, x).slope; }

/// Batched act_eval over `x`, writing values and (optionally) slopes.
///
/// Matches act_eval up to the last few ulps of the vectorised sin/cos/log/atan.
inline void act_eval_batch(const ActivationSpec& spec, std::span<const double> x, std::span<double> value,
                           std::span<double> slope) {
  const bool want_slope = !slope.empty();
  if (spec.kind == ActivationKind::Relu) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool on = x[i] > 0.0;
      const double xi = x[i];
      value[i] = on ? xi : 0.0;
      if (want_slope) slope[i] = on ? 1.0 : 0.0;
    }
    return;
  }
  constexpr std::size_t kBlock = 512;
  double u[kBlock], s[kBlock], c[kBlock], d[kBlock], m[kBlock];
  const double w = spec.omega0;
  const double eps = spec.clamp_eps;
  for (std::size_t start = 0; start < x.size(); start += kBlock) {
    const std::size_t n = std::min(kBlock, x.size() - start);
    const std::span<double> us(u, n), ss(s, n), cs(c, n), ds(d, n), ms(m, n);
    for (std::size_t i = 0; i < n; ++i) u[i] = w * x[start + i];
    vecmath::sin(us, ss);
    if (want_slope) vecmath::cos(us, cs);
    double* out = value.data() + start;
    double* dout = want_slope ? slope.data() + start : nullptr;
    switch (spec.damping) {
      case DampingKind::Const1:
        for (std::size_t i = 0; i < n; ++i) out[i] = s[i];
        if (dout) for (std::size_t i = 0; i < n; ++i) dout[i] = w * c[i];
        break;
      case DampingKind::SqrtAbs:
        for (std::size_t i = 0; i < n; ++i) {
          const double r = std::sqrt(std::max(std::abs(u[i]), eps));
          out[i] = s[i] * r;
          if (dout) dout[i] = r > 0.0 ? w * (c[i] * r + s[i] * std::copysign(0.5 / r, u[i])) : 0.0;
        }
        break;
      case DampingKind::LogAbs:
        for (std::size_t i = 0; i < n; ++i) m[i] = std::max(std::abs(u[i]), eps);
        vecmath::log(ms, ds);
        for (std::size_t i = 0; i < n; ++i) {
          const bool live = m[i] > 0.0;
          out[i] = live ? s[i] * d[i] : 0.0;
          if (dout) dout[i] = live ? w * (c[i] * d[i] + s[i] / std::copysign(m[i], u[i])) : 0.0;
        }
        break;
      case DampingKind::Arctan:
        vecmath::atan(us, ds);
        for (std::size_t i = 0; i < n; ++i) {
          out[i] = s[i] * d[i];
          if (dout) dout[i] = w * (c[i] * d[i] + s[i] / (1.0 + u[i] * u[i]));
        }
        break;
      default:
        for (std::size_t i = 0; i < n; ++i) {
          const DampingValue dv = damping(spec.damping, u[i], eps);
          out[i] = s[i] * dv.value;
          if (dout) dout[i] = w * (c[i] * dv.value + s[i] * dv.slope);
        }
        break;
    }
  }
}

struct StationaryPoint {
  double x;
  double y;
};

/// Interior roots of the derivative of sin(omega0 x) * damping(omega0 x) on [lo, hi].
///
/// Scans at a step of one two-hundredth of the sine period, brackets every sign
/// change and bisects 80 times. Sign changes caused by a pole of the derivative
/// are rejected by requiring the bisected derivative to be small.
inline std::vector<StationaryPoint> stationary_values(DampingKind kind, double omega0, double lo,
                                                      double hi) {
  std::vector<StationaryPoint> out;
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) return out;
  const ActivationSpec spec = ActivationSpec::semiperiodic(kind, omega0);
  spec.validate();
  auto slope = [&](double x) { return act_derivative(spec, x); };

  const double step = (2.0 * std::numbers::pi / omega0) / 200.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  auto grid = [&](std::size_t i) { return i == n ? hi : lo + static_cast<double>(i) * step; };

  double x_prev = grid(0);
  double d_prev = slope(x_prev);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = grid(i);
    const double d = slope(x);
    std::optional<double> root;
    if (d == 0.0) {
      if (i != n) root = x;
    } else if (d_prev != 0.0 && std::signbit(d) != std::signbit(d_prev)) {
      double a = x_prev;
      double b = x;
      double fa = d_prev;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = slope(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if (std::signbit(fm) == std::signbit(fa)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      root = 0.5 * (a + b);
    }
    if (root && *root > lo && *root < hi) {
      const double scale = omega0 * (1.0 + std::abs(act_forward(spec, *root)));
      if (std::abs(slope(*root)) < 1e-6 * scale) out.push_back({*root, act_forward(spec, *root)});
    }
    x_prev = x;
    d_prev = d;
  }
  return out;
}

/// Largest |d/dx sin(x) * damping(x)| over `samples` evenly spaced points of [a - radius, a + radius].
inline double empirical_lipschitz(DampingKind kind, double a, double radius, std::size_t samples) {
  if (!(radius > 0.0)) throw ArgumentError("empirical_lipschitz: radius must be positive");
  if (samples < 2) throw ArgumentError("empirical_lipschitz: need at least two samples");
  const ActivationSpec spec = ActivationSpec::semiperiodic(kind, 1.0);
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = a - radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(samples - 1);
    best = std::max(best, std::abs(act_derivative(spec, x)));
  }
  return best;
}

}  // namespace spder
