#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spder/errors.hpp"
#include "spder/tensor.hpp"

namespace spder {

struct Bounds {
  double lo = -1.0;
  double hi = 1.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Regular lattice of coordinates, row-major over `shape`, endpoints included.
struct CoordGrid {
  std::vector<std::size_t> shape;
  std::vector<Bounds> bounds;

  std::size_t dims() const { return shape.size(); }
  std::size_t point_count() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  /// Coordinate of sample `index` along `dim`.
  double coordinate(std::size_t dim, std::size_t index) const {
    if (shape[dim] == 1) return bounds[dim].lo;
    const double t = static_cast<double>(index) / static_cast<double>(shape[dim] - 1);
    return bounds[dim].lo + (bounds[dim].hi - bounds[dim].lo) * t;
  }

  friend bool operator==(const CoordGrid&, const CoordGrid&) = default;
};

/// Ground-truth samples in [-1, 1], row-major over `shape`.
struct Signal {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::optional<int> source_bit_depth;

  std::size_t dims() const { return shape.size(); }
};

struct GridWithCoords {
  CoordGrid grid;
  Matrix coords;  // (point_count x dims)
};

inline GridWithCoords make_grid(std::vector<std::size_t> shape, std::vector<Bounds> bounds) {
  if (shape.empty()) throw ShapeError("make_grid: no dimensions");
  if (bounds.size() == 1 && shape.size() > 1) bounds.assign(shape.size(), bounds.front());
  if (bounds.size() != shape.size()) throw ShapeError("make_grid: bounds do not match shape");
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (shape[d] == 0) throw ShapeError("make_grid: zero-size dimension " + std::to_string(d));
    if (!(bounds[d].lo < bounds[d].hi)) throw ArgumentError("make_grid: bounds must satisfy lo < hi");
  }
  GridWithCoords out{{std::move(shape), std::move(bounds)}, {}};
  const auto& grid = out.grid;
  const std::size_t dims = grid.dims();
  out.coords = Matrix(grid.point_count(), dims);
  std::vector<std::size_t> index(dims, 0);
  for (std::size_t p = 0; p < grid.point_count(); ++p) {
    for (std::size_t d = 0; d < dims; ++d) out.coords(p, d) = grid.coordinate(d, index[d]);
    for (std::size_t d = dims; d-- > 0;) {
      if (++index[d] < grid.shape[d]) break;
      index[d] = 0;
    }
  }
  return out;
}

inline GridWithCoords make_grid(std::vector<std::size_t> shape, Bounds bounds = {}) {
  std::vector<Bounds> b(shape.size(), bounds);
  return make_grid(std::move(shape), std::move(b));
}

/// p -> 2p/255 - 1.
inline Signal normalize_u8(std::span<const std::uint8_t> pixels, std::vector<std::size_t> shape) {
  Signal s{std::move(shape), {}, 8};
  const std::size_t expected =
      std::accumulate(s.shape.begin(), s.shape.end(), std::size_t{1}, std::multiplies<>());
  if (expected != pixels.size()) throw ShapeError("normalize_u8: pixel count does not match shape");
  s.values.reserve(pixels.size());
  for (std::uint8_t p : pixels) s.values.push_back(2.0 * static_cast<double>(p) / 255.0 - 1.0);
  return s;
}

/// Maps [-1, 1] values to 0..255 with round-half-to-even.
///
/// Values inside [-1, 1] use the affine inverse (y+1)*255/2. If any value
/// falls outside, the whole signal is min-max normalised instead.
inline std::vector<std::uint8_t> denormalize_u8(std::span<const double> values) {
  std::vector<std::uint8_t> out;
  out.reserve(values.size());
  if (values.empty()) return out;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const bool in_range = *mn >= -1.0 && *mx <= 1.0;
  const double lo = in_range ? -1.0 : *mn;
  const double span = in_range ? 2.0 : *mx - *mn;
  for (double y : values) {
    const double p = span > 0.0 ? (y - lo) * 255.0 / span : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::nearbyint(p), 0.0, 255.0)));
  }
  return out;
}

inline std::vector<std::uint8_t> denormalize_u8(const Signal& s) { return denormalize_u8(s.values); }

/// Bilinear resampling with corners aligned, matching make_grid's endpoint convention.
inline Signal bilinear_resize(const Signal& src, std::size_t out_rows, std::size_t out_cols) {
  if (src.dims() != 2) throw UnsupportedError("bilinear_resize needs a 2-D signal");
  if (out_rows == 0 || out_cols == 0) throw ShapeError("bilinear_resize: zero target size");
  const std::size_t rows = src.shape[0];
  const std::size_t cols = src.shape[1];
  auto source_pos = [](std::size_t i, std::size_t n_out, std::size_t n_in) {
    if (n_out == 1 || n_in == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(n_in - 1) / static_cast<double>(n_out - 1);
  };
  Signal out{{out_rows, out_cols}, std::vector<double>(out_rows * out_cols), src.source_bit_depth};
  for (std::size_t r = 0; r < out_rows; ++r) {
    const double y = source_pos(r, out_rows, rows);
    const auto y0 = std::min(static_cast<std::size_t>(std::floor(y)), rows - 1);
    const std::size_t y1 = std::min(y0 + 1, rows - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < out_cols; ++c) {
      const double x = source_pos(c, out_cols, cols);
      const auto x0 = std::min(static_cast<std::size_t>(std::floor(x)), cols - 1);
      const std::size_t x1 = std::min(x0 + 1, cols - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = src.values[y0 * cols + x0] * (1.0 - fx) + src.values[y0 * cols + x1] * fx;
      const double bottom = src.values[y1 * cols + x0] * (1.0 - fx) + src.values[y1 * cols + x1] * fx;
      out.values[r * out_cols + c] = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

/// Keeps samples 0, f, 2f, ... ; a trailing partial stride contributes its first sample.
inline Signal downsample_1d(const Signal& src, std::size_t factor) {
  if (src.dims() != 1) throw UnsupportedError("downsample_1d needs a 1-D signal");
  if (factor == 0) throw ArgumentError("downsample_1d: factor must be positive");
  Signal out{{0}, {}, src.source_bit_depth};
  for (std::size_t i = 0; i < src.values.size(); i += factor) out.values.push_back(src.values[i]);
  out.shape[0] = out.values.size();
  return out;
}

}  // namespace spder
