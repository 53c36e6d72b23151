#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spder/errors.hpp"
#include "spder/metrics.hpp"
#include "spder/network.hpp"
#include "spder/signal.hpp"
#include "spder/spectral.hpp"
#include "spder/tensor.hpp"

namespace spder {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0)) throw ArgumentError("adam: learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ArgumentError("adam: betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw ArgumentError("adam: eps must be positive");
  }
};

struct AdamState {
  std::size_t t = 0;
  MlpParams m;
  MlpParams v;

  static AdamState for_params(const MlpParams& params) {
    return {0, MlpParams::zeros_like(params), MlpParams::zeros_like(params)};
  }
};

struct LossAndGrad {
  double loss;
  Matrix grad;
};

/// mean((pred - target)^2) and its gradient 2(pred - target)/count.
inline LossAndGrad mse_loss_and_grad(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("mse: prediction " + pred.shape_string() + " vs target " + target.shape_string());
  }
  const auto n = static_cast<double>(pred.size());
  Matrix grad(pred.rows(), pred.cols());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    sum += d * d;
    grad.data()[i] = 2.0 * d / n;
  }
  return {sum / n, std::move(grad)};
}

/// One bias-corrected Adam update in place. `step` is only used in error messages.
inline void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, const AdamHyper& hyper,
                      std::size_t step = 0) {
  for (const auto& layer : grads.layers) {
    require_finite(layer.weight, "adam: gradient");
    for (double g : layer.bias) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient at step " + std::to_string(step), step);
    }
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  state.m.zip(grads, [&](double& m, double g) { m = hyper.beta1 * m + (1.0 - hyper.beta1) * g; });
  state.v.zip(grads, [&](double& v, double g) { v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g; });
  // params <- params - lr * m_hat / (sqrt(v_hat) + eps)
  MlpParams update = state.m;
  update.zip(state.v, [&](double& m, double v) { m = hyper.lr * (m / c1) / (std::sqrt(v / c2) + hyper.eps); });
  params.zip(update, [](double& p, double u) { p -= u; });
}

/// Loss curve and checkpoint metrics of one full-batch training run.
///
/// Entry k-1 of `loss_curve` is the MSE after k updates. `snapshots` describe
/// the parameters at each checkpoint; `best_snapshots` describe the minimum-loss
/// parameters seen up to that checkpoint.
struct TrainReport {
  std::size_t steps = 0;
  double initial_loss = 0.0;
  std::vector<double> loss_curve;
  std::vector<double> psnr_curve;
  std::vector<MetricSnapshot> snapshots;
  std::vector<MetricSnapshot> best_snapshots;
  MetricSnapshot final_metrics;
  MetricSnapshot best_metrics;
  double wall_ms = 0.0;

  const MetricSnapshot* snapshot_at(std::size_t step, bool best = false) const {
    for (const auto& s : best ? best_snapshots : snapshots) {
      if (s.step == step) return &s;
    }
    return nullptr;
  }
};

struct FitResult {
  MlpParams params;       // after the last step
  MlpParams best_params;  // lowest loss seen
  TrainReport report;
};

/// Thrown when training hits a non-finite value. Carries the last good state.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, std::size_t step, MlpParams last_good, TrainReport partial)
      : NumericError(what, step), last_good_(std::move(last_good)), partial_(std::move(partial)) {}
  const MlpParams& last_good() const { return last_good_; }
  const TrainReport& partial_report() const { return partial_; }

 private:
  MlpParams last_good_;
  TrainReport partial_;
};

/// rho_AG between a prediction and the target signal.
///
/// 1-D and 2-D signals are compared directly; 3-D stacks average the per-frame
/// 2-D similarity. Returns nullopt when either spectrum is identically zero.
inline std::optional<double> signal_rho_ag(std::span<const double> pred, const Signal& target) {
  try {
    if (target.dims() <= 2) {
      return rho_ag(amplitude_spectrum(pred, target.shape), amplitude_spectrum(target.values, target.shape));
    }
    if (target.dims() == 3) {
      const std::size_t frame = target.shape[1] * target.shape[2];
      const std::vector<std::size_t> fshape{target.shape[1], target.shape[2]};
      double sum = 0.0;
      for (std::size_t f = 0; f < target.shape[0]; ++f) {
        sum += rho_ag(amplitude_spectrum(pred.subspan(f * frame, frame), fshape),
                      amplitude_spectrum(std::span<const double>(target.values).subspan(f * frame, frame), fshape));
      }
      return sum / static_cast<double>(target.shape[0]);
    }
  } catch (const NumericError&) {
    return std::nullopt;
  }
  return std::nullopt;
}

struct FitOptions {
  std::size_t steps = 500;
  AdamHyper hyper;
  std::vector<std::size_t> checkpoints{25, 100, 500, 1000};
  bool compute_rho = true;
  /// Called at every checkpoint with the current snapshot and prediction.
  std::function<void(const MetricSnapshot&, std::span<const double>)> on_checkpoint;
};

/// Full-batch Adam on the MSE between the network over `coords` and `target`.
inline FitResult fit(const MlpConfig& config, const Matrix& coords, const Signal& target, const FitOptions& options,
                     std::optional<MlpParams> initial = std::nullopt) {
  config.validate();
  options.hyper.validate();
  if (coords.rows() != target.values.size() || config.out_dim != 1) {
    throw ShapeError("fit: " + std::to_string(coords.rows()) + " coordinates for " +
                     std::to_string(target.values.size()) + " samples");
  }
  const auto started = std::chrono::steady_clock::now();
  const Matrix y(target.values.size(), 1, target.values);

  FitResult result{initial ? std::move(*initial) : init_mlp(config), {}, {}};
  auto& params = result.params;
  auto& report = result.report;
  report.steps = options.steps;
  AdamState state = AdamState::for_params(params);

  auto is_checkpoint = [&](std::size_t k) {
    if (k == options.steps) return true;
    for (std::size_t c : options.checkpoints) {
      if (c == k) return true;
    }
    return false;
  };
  auto snapshot = [&](std::size_t k, double mse, std::span<const double> pred) {
    return make_snapshot(k, mse, options.compute_rho ? signal_rho_ag(pred, target) : std::nullopt);
  };

  double best_loss = 0.0;
  std::vector<double> best_pred;

  // Iteration k evaluates the parameters after k updates, then applies update k+1.
  for (std::size_t k = 0; k <= options.steps; ++k) {
    ForwardResult fwd;
    LossAndGrad lg;
    try {
      fwd = forward(params, config, coords);
      lg = mse_loss_and_grad(fwd.outputs, y);
      if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss", k);
    } catch (const NumericError& e) {
      throw TrainingAborted(std::string("training diverged at step ") + std::to_string(k) + ": " + e.what(), k,
                            k == 0 ? params : result.best_params, report);
    }
    if (k == 0) {
      report.initial_loss = lg.loss;
    } else {
      report.loss_curve.push_back(lg.loss);
      report.psnr_curve.push_back(psnr_from_mse(lg.loss));
    }
    if (k == 0 || lg.loss < best_loss) {
      best_loss = lg.loss;
      result.best_params = params;
      best_pred = fwd.outputs.values();
    }
    if (k > 0 && is_checkpoint(k)) {
      report.snapshots.push_back(snapshot(k, lg.loss, fwd.outputs.data()));
      report.best_snapshots.push_back(snapshot(k, best_loss, best_pred));
      if (options.on_checkpoint) options.on_checkpoint(report.snapshots.back(), fwd.outputs.data());
    }
    if (k == options.steps) {
      report.final_metrics = k > 0 ? report.snapshots.back() : snapshot(0, lg.loss, fwd.outputs.data());
      report.best_metrics = k > 0 ? report.best_snapshots.back() : report.final_metrics;
      break;
    }
    try {
      const MlpParams grads = backward(params, config, fwd.cache, lg.grad);
      adam_step(params, grads, state, options.hyper, k + 1);
    } catch (const NumericError& e) {
      throw TrainingAborted(std::string("training diverged at step ") + std::to_string(k + 1) + ": " + e.what(),
                            k + 1, result.best_params, report);
    }
  }
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace spder
