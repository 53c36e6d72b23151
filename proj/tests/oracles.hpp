#pragma once

// Independent reference implementations used only by tests. Nothing here calls
// into the library's numerical kernels.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "spder/network.hpp"
#include "spder/optim.hpp"
#include "spder/tensor.hpp"

namespace oracle {

using cd = std::complex<double>;

inline spder::Matrix naive_matmul(const spder::Matrix& a, const spder::Matrix& b) {
  spder::Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// X[k] = sum_n x[n] exp(-2 pi i k n / N), unnormalized.
inline std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      s += x[t] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

/// F[u,v] = 1/(MN) sum_{m,n} f[m,n] exp(-2 pi i (um/M + vn/N)).
inline std::vector<cd> naive_dft2(const std::vector<cd>& f, std::size_t rows, std::size_t cols) {
  std::vector<cd> out(rows * cols);
  for (std::size_t u = 0; u < rows; ++u)
    for (std::size_t v = 0; v < cols; ++v) {
      cd s = 0.0;
      for (std::size_t m = 0; m < rows; ++m)
        for (std::size_t n = 0; n < cols; ++n) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>((u * m) % rows) / static_cast<double>(rows) +
                              static_cast<double>((v * n) % cols) / static_cast<double>(cols));
          s += f[m * cols + n] * cd(std::cos(ang), std::sin(ang));
        }
      out[u * cols + v] = s / static_cast<double>(rows * cols);
    }
  return out;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Mean squared error of the network output against `target`, evaluated from scratch.
inline double loss_of(const spder::MlpParams& p, const spder::MlpConfig& c, const spder::Matrix& x,
                      const spder::Matrix& target) {
  const auto out = spder::forward(p, c, x).outputs;
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out.data()[i] - target.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(out.size());
}

/// Fourth-order central-difference gradient of `loss_of` with respect to every
/// parameter: (-f(+2h) + 8f(+h) - 8f(-h) + f(-2h)) / 12h.
inline spder::MlpParams fd_param_gradient(spder::MlpParams p, const spder::MlpConfig& c, const spder::Matrix& x,
                                          const spder::Matrix& target, double h = 1e-6) {
  spder::MlpParams g = spder::MlpParams::zeros_like(p);
  auto probe = [&](double& slot) {
    const double keep = slot;
    auto at = [&](double offset) {
      slot = keep + offset;
      return loss_of(p, c, x, target);
    };
    const double d = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    slot = keep;
    return d;
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto w = p.layers[l].weight.data();
    auto gw = g.layers[l].weight.data();
    for (std::size_t i = 0; i < w.size(); ++i) gw[i] = probe(w[i]);
    auto& b = p.layers[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) g.layers[l].bias[i] = probe(b[i]);
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||, floor) over all parameters.
inline double relative_error(const spder::MlpParams& a, const spder::MlpParams& b, double floor = 1e-12) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  spder::MlpParams tmp = a;
  tmp.zip(b, [&](double& x, double y) {
    diff += (x - y) * (x - y);
    na += x * x;
    nb += y * y;
  });
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

}  // namespace oracle
