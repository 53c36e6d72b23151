#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spder/errors.hpp"

namespace spder {

/// Dense row-major matrix of doubles. Rows are batch samples.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw ShapeError("ragged row list");
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const noexcept { return data_; }
  std::vector<double> release() && { return std::move(data_); }

  std::string shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<RowMajor> view(Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}
inline Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

}  // namespace detail

/// Throws NumericError naming the first non-finite entry.
inline void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string(what) + ": non-finite value at index " + std::to_string(i), i);
    }
  }
}

inline void require_finite(const Matrix& m, const char* what) { require_finite(m.data(), what); }

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  detail::view(out).noalias() = detail::view(a) * detail::view(b);
  require_finite(out, "matmul");
  return out;
}

/// aᵀ·b without materialising the transpose.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_at_b: " + a.shape_string() + "^T x " + b.shape_string());
  }
  Matrix out(a.cols(), b.cols());
  detail::view(out).noalias() = detail::view(a).transpose() * detail::view(b);
  require_finite(out, "matmul_at_b");
  return out;
}

/// a·bᵀ without materialising the transpose.
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_a_bt: " + a.shape_string() + " x " + b.shape_string() + "^T");
  }
  Matrix out(a.rows(), b.rows());
  detail::view(out).noalias() = detail::view(a) * detail::view(b).transpose();
  require_finite(out, "matmul_a_bt");
  return out;
}

template <class F>
Matrix map_elementwise(const Matrix& a, F&& f) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = f(src[i]);
    if (!std::isfinite(v)) {
      throw NumericError("map_elementwise: non-finite result at index " + std::to_string(i), i);
    }
    dst[i] = v;
  }
  return out;
}

inline Matrix add_row_broadcast(const Matrix& a, std::span<const double> bias) {
  if (bias.size() != a.cols()) {
    throw ShapeError("add_row_broadcast: bias length " + std::to_string(bias.size()) +
                     " vs matrix " + a.shape_string());
  }
  Matrix out = a;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
  require_finite(out, "add_row_broadcast");
  return out;
}

inline std::vector<double> column_sums(const Matrix& a) {
  std::vector<double> sums(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) sums[c] += row[c];
  }
  return sums;
}

/// Columns [first, first + count) of `a`.
inline Matrix column_block(const Matrix& a, std::size_t first, std::size_t count) {
  if (first + count > a.cols()) throw ShapeError("column_block out of range for " + a.shape_string());
  Matrix out(a.rows(), count);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = a(r, first + c);
  }
  return out;
}

/// Every `stride`-th row starting at row 0.
inline Matrix take_rows_strided(const Matrix& a, std::size_t stride) {
  if (stride == 0) throw ArgumentError("take_rows_strided: stride must be positive");
  const std::size_t n = (a.rows() + stride - 1) / stride;
  Matrix out(n, a.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto src = a.row(i * stride);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace spder
