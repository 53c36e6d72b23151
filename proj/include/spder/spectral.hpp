#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spder/errors.hpp"

namespace spder {

using Complex = std::complex<double>;

/// Transform values laid out row-major over `shape` (one or two axes).
struct ComplexSpectrum {
  std::vector<std::size_t> shape;
  std::vector<Complex> values;
};

/// Non-negative magnitudes with the zero-frequency bin set to 0.
struct AmplitudeSpectrum {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

namespace fft_detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Non-power-of-two lengths below this use the direct DFT; longer ones use Bluestein.
inline constexpr std::size_t kBluesteinThreshold = 4096;

/// exp(sign * 2*pi*i * k / n) with k reduced mod n first to keep the angle small.
inline Complex twiddle(std::size_t k, std::size_t n, double sign) {
  const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k % n) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

/// In-place iterative radix-2 Cooley-Tukey.
inline void radix2(std::vector<Complex>& a, double sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<Complex> w(half);
    for (std::size_t k = 0; k < half; ++k) w[k] = twiddle(k, len, sign);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[start + k];
        const Complex v = a[start + k + half] * w[k];
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

inline std::vector<Complex> direct(std::span<const Complex> x, double sign) {
  const std::size_t n = x.size();
  std::vector<Complex> table(n);
  for (std::size_t k = 0; k < n; ++k) table[k] = twiddle(k, n, sign);
  std::vector<Complex> out(n);
  for (std::size_t f = 0; f < n; ++f) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += x[k] * table[(f * k) % n];
    out[f] = acc;
  }
  return out;
}

/// Chirp-z evaluation of an arbitrary-length DFT through a power-of-two convolution.
inline std::vector<Complex> bluestein(std::span<const Complex> x, double sign) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle exact for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    const double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = {std::cos(angle), std::sin(angle)};
  }
  std::vector<Complex> a(m, 0.0);
  std::vector<Complex> b(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  radix2(a, -1.0);
  radix2(b, -1.0);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  radix2(a, 1.0);
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k] / static_cast<double>(m);
  return out;
}

inline std::vector<Complex> transform(std::span<const Complex> x, double sign) {
  if (x.empty()) throw ArgumentError("fft of empty input");
  if (is_power_of_two(x.size())) {
    std::vector<Complex> a(x.begin(), x.end());
    radix2(a, sign);
    return a;
  }
  if (x.size() < kBluesteinThreshold) return direct(x, sign);
  return bluestein(x, sign);
}

}  // namespace fft_detail

/// X_n = sum_k x_k exp(-2 pi i n k / N), unnormalised.
inline std::vector<Complex> fft_1d(std::span<const Complex> x) { return fft_detail::transform(x, -1.0); }

inline std::vector<Complex> fft_1d(std::span<const double> x) {
  std::vector<Complex> c(x.begin(), x.end());
  return fft_1d(std::span<const Complex>(c));
}

/// Inverse of fft_1d, including the 1/N factor.
inline std::vector<Complex> ifft_1d(std::span<const Complex> x) {
  auto out = fft_detail::transform(x, 1.0);
  for (auto& v : out) v /= static_cast<double>(x.size());
  return out;
}

/// F(u,v) = 1/(MN) sum_x sum_y f(x,y) exp(-2 pi i (ux/M + vy/N)), by rows then columns.
inline ComplexSpectrum fft_2d(std::span<const Complex> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw ShapeError("fft_2d: value count does not match shape");
  std::vector<Complex> work(values.begin(), values.end());
  std::vector<Complex> line(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto out = fft_1d(std::span<const Complex>(work.data() + r * cols, cols));
    std::copy(out.begin(), out.end(), work.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  line.resize(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) line[r] = work[r * cols + c];
    auto out = fft_1d(std::span<const Complex>(line));
    for (std::size_t r = 0; r < rows; ++r) work[r * cols + c] = out[r];
  }
  const double norm = 1.0 / static_cast<double>(rows * cols);
  for (auto& v : work) v *= norm;
  return {{rows, cols}, std::move(work)};
}

inline ComplexSpectrum fft_2d(std::span<const double> values, std::size_t rows, std::size_t cols) {
  std::vector<Complex> c(values.begin(), values.end());
  return fft_2d(std::span<const Complex>(c), rows, cols);
}

/// Inverse of fft_2d (undoes the 1/(MN) factor).
inline std::vector<Complex> ifft_2d(const ComplexSpectrum& spectrum) {
  if (spectrum.shape.size() != 2) throw ShapeError("ifft_2d needs a 2-D spectrum");
  const std::size_t rows = spectrum.shape[0];
  const std::size_t cols = spectrum.shape[1];
  std::vector<Complex> work = spectrum.values;
  for (std::size_t r = 0; r < rows; ++r) {
    auto out = fft_detail::transform(std::span<const Complex>(work.data() + r * cols, cols), 1.0);
    std::copy(out.begin(), out.end(), work.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  std::vector<Complex> line(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) line[r] = work[r * cols + c];
    auto out = fft_detail::transform(line, 1.0);
    for (std::size_t r = 0; r < rows; ++r) work[r * cols + c] = out[r];
  }
  return work;
}

/// Zero-DC amplitude spectrum of a real 1-D or 2-D signal.
///
/// 1-D bins are (2/N)|X_n|; 2-D bins are |F(u,v)| with the 1/(MN) factor of fft_2d.
inline AmplitudeSpectrum amplitude_spectrum(std::span<const double> values, const std::vector<std::size_t>& shape) {
  AmplitudeSpectrum out{shape, {}};
  if (shape.size() == 1) {
    if (values.size() != shape[0]) throw ShapeError("amplitude_spectrum: value count does not match shape");
    const auto x = fft_1d(values);
    const double scale = 2.0 / static_cast<double>(x.size());
    out.values.reserve(x.size());
    for (const auto& v : x) out.values.push_back(scale * std::abs(v));
  } else if (shape.size() == 2) {
    const auto x = fft_2d(values, shape[0], shape[1]);
    out.values.reserve(x.values.size());
    for (const auto& v : x.values) out.values.push_back(std::abs(v));
  } else {
    throw UnsupportedError("amplitude_spectrum supports 1-D and 2-D signals");
  }
  out.values[0] = 0.0;
  return out;
}

/// Cosine similarity of two amplitude spectra over all bins (DC already zero).
inline double rho_ag(const AmplitudeSpectrum& a, const AmplitudeSpectrum& g) {
  if (a.shape != g.shape || a.values.size() != g.values.size()) throw ShapeError("rho_ag: spectrum shapes differ");
  double dot = 0.0;
  double na = 0.0;
  double ng = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * g.values[i];
    na += a.values[i] * a.values[i];
    ng += g.values[i] * g.values[i];
  }
  if (na == 0.0 || ng == 0.0) throw NumericError("rho_ag: similarity undefined for an all-zero spectrum");
  return dot / (std::sqrt(na) * std::sqrt(ng));
}

/// Signed angular frequency of bin n out of N, in radians per sample.
inline double angular_frequency(std::size_t n, std::size_t count) {
  const double N = static_cast<double>(count);
  const double k = 2 * n < count ? static_cast<double>(n) : static_cast<double>(n) - N;
  return 2.0 * std::numbers::pi * k / N;
}

/// Spectrum of the derivative: bin n multiplied by i*omega_n.
///
/// For even N the Nyquist bin gets omega = -pi; a real signal's derivative has
/// no well-defined Nyquist component, so that bin is zeroed instead.
inline ComplexSpectrum fourier_gradient_1d(const ComplexSpectrum& spectrum) {
  if (spectrum.shape.size() != 1) throw ShapeError("fourier_gradient_1d needs a 1-D spectrum");
  ComplexSpectrum out = spectrum;
  const std::size_t n = spectrum.values.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k == n) {
      out.values[k] = 0.0;
      continue;
    }
    out.values[k] *= Complex(0.0, angular_frequency(k, n));
  }
  return out;
}

/// 2-D variant: differentiates along `axis` (0 = rows/y, 1 = columns/x).
inline ComplexSpectrum fourier_gradient_2d(const ComplexSpectrum& spectrum, std::size_t axis) {
  if (spectrum.shape.size() != 2 || axis > 1) throw ShapeError("fourier_gradient_2d needs a 2-D spectrum and axis 0 or 1");
  ComplexSpectrum out = spectrum;
  const std::size_t rows = spectrum.shape[0];
  const std::size_t cols = spectrum.shape[1];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t k = axis == 0 ? r : c;
      const std::size_t n = axis == 0 ? rows : cols;
      auto& v = out.values[r * cols + c];
      v = 2 * k == n ? Complex(0.0) : v * Complex(0.0, angular_frequency(k, n));
    }
  }
  return out;
}

}  // namespace spder
