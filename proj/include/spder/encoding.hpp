#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>

#include "spder/errors.hpp"
#include "spder/rng.hpp"
#include "spder/tensor.hpp"

namespace spder {

struct NoEncoding {
  friend bool operator==(const NoEncoding&, const NoEncoding&) = default;
};

/// Appends sin/cos of base_omega * 2^k * x for k = 0..bands-1, per input dimension.
struct PositionalEncoding {
  std::size_t bands = 10;
  double base_omega = std::numbers::pi;
  friend bool operator==(const PositionalEncoding&, const PositionalEncoding&) = default;
};

/// Appends sin/cos of 2*pi*(b . x) for `count` Gaussian rows b ~ N(0, scale^2).
struct FourierFeatures {
  std::size_t count = 20;
  double scale = 1.0;
  std::uint64_t seed = 0;
  friend bool operator==(const FourierFeatures&, const FourierFeatures&) = default;
};

using EncodingSpec = std::variant<NoEncoding, PositionalEncoding, FourierFeatures>;

inline std::string encoding_name(const EncodingSpec& spec) {
  struct Visitor {
    std::string operator()(const NoEncoding&) const { return "none"; }
    std::string operator()(const PositionalEncoding& pe) const {
      return "pe(L=" + std::to_string(pe.bands) + ")";
    }
    std::string operator()(const FourierFeatures& ff) const {
      return "ff(n=" + std::to_string(ff.count) + ")";
    }
  };
  return std::visit(Visitor{}, spec);
}

inline void validate(const EncodingSpec& spec) {
  if (const auto* pe = std::get_if<PositionalEncoding>(&spec)) {
    if (pe->bands < 1) throw ArgumentError("positional encoding needs at least one band");
    if (!std::isfinite(pe->base_omega)) throw ArgumentError("positional encoding base frequency must be finite");
  }
  if (const auto* ff = std::get_if<FourierFeatures>(&spec)) {
    if (ff->count < 1) throw ArgumentError("fourier features need at least one row");
    if (!(ff->scale > 0.0)) throw ArgumentError("fourier feature scale must be positive");
  }
}

inline std::size_t encoded_width(const EncodingSpec& spec, std::size_t in_dim) {
  if (const auto* pe = std::get_if<PositionalEncoding>(&spec)) return in_dim * (1 + 2 * pe->bands);
  if (const auto* ff = std::get_if<FourierFeatures>(&spec)) return in_dim + 2 * ff->count;
  return in_dim;
}

/// Gaussian projection rows, (count x in_dim), already multiplied by 2*pi*scale.
inline Matrix fourier_projection(const FourierFeatures& ff, std::size_t in_dim) {
  Rng rng(ff.seed);
  Matrix rows(ff.count, in_dim);
  for (double& v : rows.data()) v = 2.0 * std::numbers::pi * ff.scale * rng.normal();
  return rows;
}

/// Raw coordinates first, then the appended features.
///
/// PE layout per input dimension d and band k: [sin(w_k x_d), cos(w_k x_d)].
/// FF layout: all sines, then all cosines.
inline Matrix encode(const EncodingSpec& spec, const Matrix& coords) {
  require_finite(coords, "encode: coordinates");
  const std::size_t n = coords.rows();
  const std::size_t in = coords.cols();
  Matrix out(n, encoded_width(spec, in));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < in; ++d) out(r, d) = coords(r, d);
  }
  if (const auto* pe = std::get_if<PositionalEncoding>(&spec)) {
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t col = in;
      for (std::size_t d = 0; d < in; ++d) {
        for (std::size_t k = 0; k < pe->bands; ++k) {
          const double w = std::ldexp(pe->base_omega, static_cast<int>(k));
          out(r, col++) = std::sin(w * coords(r, d));
          out(r, col++) = std::cos(w * coords(r, d));
        }
      }
    }
  } else if (const auto* ff = std::get_if<FourierFeatures>(&spec)) {
    const Matrix proj = matmul_a_bt(coords, fourier_projection(*ff, in));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < ff->count; ++j) {
        out(r, in + j) = std::sin(proj(r, j));
        out(r, in + ff->count + j) = std::cos(proj(r, j));
      }
    }
  }
  return out;
}

/// Pulls a gradient with respect to the encoded features back to the raw coordinates.
inline Matrix encode_backward(const EncodingSpec& spec, const Matrix& coords, const Matrix& d_encoded) {
  const std::size_t n = coords.rows();
  const std::size_t in = coords.cols();
  if (d_encoded.rows() != n || d_encoded.cols() != encoded_width(spec, in)) {
    throw ShapeError("encode_backward: gradient " + d_encoded.shape_string() + " for coords " +
                     coords.shape_string());
  }
  Matrix d_coords = column_block(d_encoded, 0, in);
  if (const auto* pe = std::get_if<PositionalEncoding>(&spec)) {
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t col = in;
      for (std::size_t d = 0; d < in; ++d) {
        for (std::size_t k = 0; k < pe->bands; ++k) {
          const double w = std::ldexp(pe->base_omega, static_cast<int>(k));
          const double x = coords(r, d);
          d_coords(r, d) += d_encoded(r, col) * w * std::cos(w * x);
          d_coords(r, d) -= d_encoded(r, col + 1) * w * std::sin(w * x);
          col += 2;
        }
      }
    }
  } else if (const auto* ff = std::get_if<FourierFeatures>(&spec)) {
    const Matrix rows = fourier_projection(*ff, in);
    const Matrix proj = matmul_a_bt(coords, rows);
    Matrix d_proj(n, ff->count);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < ff->count; ++j) {
        d_proj(r, j) = d_encoded(r, in + j) * std::cos(proj(r, j)) -
                       d_encoded(r, in + ff->count + j) * std::sin(proj(r, j));
      }
    }
    const Matrix back = matmul(d_proj, rows);
    for (std::size_t i = 0; i < back.size(); ++i) d_coords.data()[i] += back.data()[i];
  }
  return d_coords;
}

}  // namespace spder
