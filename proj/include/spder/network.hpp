#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spder/activations.hpp"
#include "spder/encoding.hpp"
#include "spder/errors.hpp"
#include "spder/rng.hpp"
#include "spder/tensor.hpp"

namespace spder {

enum class BiasInit : std::uint8_t {
  Zero = 0,
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the usual dense-layer default.
  FanIn = 1,
};

struct MlpConfig {
  std::size_t in_dim = 2;
  std::size_t out_dim = 1;
  std::size_t hidden_width = 256;
  /// Affine layers in total; depth-1 of them are followed by the activation.
  std::size_t depth = 5;
  ActivationSpec activation = ActivationSpec::semiperiodic(DampingKind::SqrtAbs);
  EncodingSpec encoding = NoEncoding{};
  std::uint64_t seed = 0;
  BiasInit bias_init = BiasInit::FanIn;

  void validate() const {
    if (depth < 2) throw ArgumentError("MLP depth must be at least 2");
    if (in_dim == 0 || out_dim == 0 || hidden_width == 0) throw ArgumentError("MLP dimensions must be positive");
    activation.validate();
    spder::validate(encoding);
  }

  /// Width of every layer boundary, from encoded input to output.
  std::vector<std::size_t> layer_widths() const {
    std::vector<std::size_t> widths;
    widths.push_back(encoded_width(encoding, in_dim));
    for (std::size_t i = 0; i + 1 < depth; ++i) widths.push_back(hidden_width);
    widths.push_back(out_dim);
    return widths;
  }

  std::size_t parameter_count() const {
    const auto w = layer_widths();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) n += (w[l] + 1) * w[l + 1];
    return n;
  }

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Network parameters; gradients use the same type.
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Applies f(param, other_param) over every scalar in lock step with `other`.
  template <class F>
  void zip(const MlpParams& other, F&& f) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto w = layers[l].weight.data();
      auto ow = other.layers[l].weight.data();
      for (std::size_t i = 0; i < w.size(); ++i) f(w[i], ow[i]);
      auto& b = layers[l].bias;
      const auto& ob = other.layers[l].bias;
      for (std::size_t i = 0; i < b.size(); ++i) f(b[i], ob[i]);
    }
  }

  static MlpParams zeros_like(const MlpParams& p) {
    MlpParams z;
    for (const auto& l : p.layers) {
      z.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), std::vector<double>(l.bias.size(), 0.0)});
    }
    return z;
  }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Half-width of the uniform weight distribution for layer `index` of `config`.
///
/// ReLU networks draw from U(±sqrt(6/fan_in)) on every layer. Sine-family
/// networks scale their pre-activations by omega0 inside the activation, so the
/// stored weights after the first layer use sqrt(6/fan_in)/omega0 and the
/// effective weights omega0*W follow U(±sqrt(6/fan_in)). The first sine layer
/// uses U(±1/fan_in), which spreads its input frequencies up to omega0/fan_in.
inline double init_bound(const MlpConfig& config, std::size_t index, std::size_t fan_in) {
  const double he = std::sqrt(6.0 / static_cast<double>(fan_in));
  if (!config.activation.is_periodic()) return he;
  if (index == 0) return 1.0 / static_cast<double>(fan_in);
  return he / config.activation.omega0;
}

inline MlpParams init_mlp(const MlpConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto widths = config.layer_widths();
  MlpParams params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l];
    const double bound = init_bound(config, l, fan_in);
    DenseLayer layer{Matrix(fan_in, widths[l + 1]), std::vector<double>(widths[l + 1], 0.0)};
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    if (config.bias_init == BiasInit::FanIn) {
      const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double& b : layer.bias) b = rng.uniform(-bb, bb);
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

inline void check_params(const MlpParams& params, const MlpConfig& config) {
  const auto widths = config.layer_widths();
  if (params.layers.size() + 1 != widths.size()) {
    throw ShapeError("params have " + std::to_string(params.layers.size()) + " layers, config expects " +
                     std::to_string(widths.size() - 1));
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != widths[l] || layer.weight.cols() != widths[l + 1] ||
        layer.bias.size() != widths[l + 1]) {
      throw ShapeError("layer " + std::to_string(l) + " has weight " + layer.weight.shape_string() +
                       ", expected (" + std::to_string(widths[l]) + "x" + std::to_string(widths[l + 1]) + ")");
    }
  }
}

struct ForwardCache {
  Matrix input;               // encoded coordinates
  std::vector<Matrix> pre;    // z_l for every hidden layer
  std::vector<Matrix> post;   // a_l = act(z_l)
  std::vector<Matrix> slope;  // act'(z_l)
};

struct ForwardResult {
  Matrix outputs;
  ForwardCache cache;
};

namespace detail {

inline Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix z(x.rows(), layer.weight.cols());
  view(z).noalias() = view(x) * view(layer.weight);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
  }
  return z;
}

inline void activate(const ActivationSpec& spec, const Matrix& z, Matrix& a, Matrix* slope) {
  act_eval_batch(spec, z.data(), a.data(), slope ? slope->data() : std::span<double>{});
}

inline void check_coords(const MlpConfig& config, const Matrix& coords) {
  if (coords.cols() != config.in_dim) {
    throw ShapeError("coordinates " + coords.shape_string() + " do not match in_dim " + std::to_string(config.in_dim));
  }
}

}  // namespace detail

inline ForwardResult forward(const MlpParams& params, const MlpConfig& config, const Matrix& coords) {
  detail::check_coords(config, coords);
  check_params(params, config);
  ForwardResult result;
  auto& cache = result.cache;
  cache.input = encode(config.encoding, coords);
  const Matrix* x = &cache.input;
  const std::size_t hidden = params.layers.size() - 1;
  for (std::size_t l = 0; l < hidden; ++l) {
    cache.pre.push_back(detail::affine(*x, params.layers[l]));
    const Matrix& z = cache.pre.back();
    cache.post.emplace_back(z.rows(), z.cols());
    cache.slope.emplace_back(z.rows(), z.cols());
    detail::activate(config.activation, z, cache.post.back(), &cache.slope.back());
    x = &cache.post.back();
  }
  result.outputs = detail::affine(*x, params.layers.back());
  require_finite(result.outputs, "forward");
  return result;
}

/// Forward pass without retaining intermediates; evaluates in row chunks.
inline Matrix predict(const MlpParams& params, const MlpConfig& config, const Matrix& coords,
                      std::size_t chunk_rows = 8192) {
  detail::check_coords(config, coords);
  check_params(params, config);
  Matrix out(coords.rows(), config.out_dim);
  for (std::size_t start = 0; start < coords.rows(); start += chunk_rows) {
    const std::size_t n = std::min(chunk_rows, coords.rows() - start);
    Matrix chunk(n, coords.cols());
    for (std::size_t r = 0; r < n; ++r) {
      auto src = coords.row(start + r);
      std::copy(src.begin(), src.end(), chunk.row(r).begin());
    }
    Matrix x = encode(config.encoding, chunk);
    for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
      Matrix z = detail::affine(x, params.layers[l]);
      detail::activate(config.activation, z, z, nullptr);
      x = std::move(z);
    }
    const Matrix y = detail::affine(x, params.layers.back());
    for (std::size_t r = 0; r < n; ++r) {
      auto src = y.row(r);
      std::copy(src.begin(), src.end(), out.row(start + r).begin());
    }
  }
  require_finite(out, "predict");
  return out;
}

namespace detail {

/// Reverse pass; returns parameter gradients and, if requested, the gradient
/// with respect to the encoded input.
inline MlpParams backprop(const MlpParams& params, const ForwardCache& cache, const Matrix& d_out,
                          Matrix* d_input) {
  const std::size_t count = params.layers.size();
  MlpParams grads;
  grads.layers.resize(count);
  Matrix delta = d_out;
  for (std::size_t l = count; l-- > 0;) {
    const Matrix& x = l == 0 ? cache.input : cache.post[l - 1];
    grads.layers[l].weight = matmul_at_b(x, delta);
    grads.layers[l].bias = column_sums(delta);
    if (l == 0 && d_input == nullptr) break;
    Matrix upstream = matmul_a_bt(delta, params.layers[l].weight);
    if (l == 0) {
      *d_input = std::move(upstream);
      break;
    }
    auto us = upstream.data();
    auto ds = cache.slope[l - 1].data();
    for (std::size_t i = 0; i < us.size(); ++i) us[i] *= ds[i];
    delta = std::move(upstream);
  }
  return grads;
}

}  // namespace detail

inline MlpParams backward(const MlpParams& params, const MlpConfig& config, const ForwardCache& cache,
                          const Matrix& d_out) {
  check_params(params, config);
  if (cache.pre.size() + 1 != params.layers.size()) throw ShapeError("backward: cache does not match params");
  if (d_out.rows() != cache.input.rows() || d_out.cols() != config.out_dim) {
    throw ShapeError("backward: output gradient " + d_out.shape_string() + " for batch of " +
                     std::to_string(cache.input.rows()));
  }
  return detail::backprop(params, cache, d_out, nullptr);
}

/// d output / d coordinate for a single-output network, (batch x in_dim).
inline Matrix input_gradient(const MlpParams& params, const MlpConfig& config, const Matrix& coords) {
  if (config.out_dim != 1) throw UnsupportedError("input_gradient requires a single-output network");
  const ForwardResult fwd = forward(params, config, coords);
  Matrix d_encoded;
  detail::backprop(params, fwd.cache, Matrix(coords.rows(), 1, 1.0), &d_encoded);
  return encode_backward(config.encoding, coords, d_encoded);
}

}  // namespace spder
