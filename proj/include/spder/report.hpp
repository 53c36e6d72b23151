#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spder/io.hpp"
#include "spder/metrics.hpp"
#include "spder/network.hpp"
#include "spder/optim.hpp"
#include "spder/rng.hpp"

namespace spder {

inline std::string snapshot_csv_row(const MetricSnapshot& s) {
  std::string row = std::to_string(s.step) + "," + io::format_double(s.mse) + "," + io::format_double(s.psnr_db) +
                    "," + io::format_double(s.mse_8bit) + ",";
  if (s.rho_ag) row += io::format_double(*s.rho_ag);
  return row + "\n";
}

inline constexpr const char* kMetricsHeader = "step,mse,psnr_db,mse_8bit,rho_ag\n";

/// One row per optimizer step. rho_ag is filled only on checkpoint rows.
inline std::string report_csv(const TrainReport& report) {
  std::string out = kMetricsHeader;
  out += snapshot_csv_row(make_snapshot(0, report.initial_loss));
  for (std::size_t i = 0; i < report.loss_curve.size(); ++i) {
    const std::size_t step = i + 1;
    std::optional<double> rho;
    if (const auto* s = report.snapshot_at(step)) rho = s->rho_ag;
    out += snapshot_csv_row(make_snapshot(step, report.loss_curve[i], rho));
  }
  return out;
}

/// Checkpoint rows only; `best` selects the minimum-loss parameters seen so far.
inline std::string checkpoints_csv(const TrainReport& report, bool best) {
  std::string out = kMetricsHeader;
  for (const auto& s : best ? report.best_snapshots : report.snapshots) out += snapshot_csv_row(s);
  return out;
}

inline nlohmann::json to_json(double v) {
  if (!std::isfinite(v)) return io::format_double(v);
  return v;
}

inline nlohmann::json to_json(const MetricSnapshot& s) {
  nlohmann::json j{{"step", s.step}, {"mse", to_json(s.mse)}, {"psnr_db", to_json(s.psnr_db)},
                   {"mse_8bit", to_json(s.mse_8bit)}};
  j["rho_ag"] = s.rho_ag ? to_json(*s.rho_ag) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const EncodingSpec& e) {
  nlohmann::json j{{"kind", encoding_name(e)}};
  if (const auto* pe = std::get_if<PositionalEncoding>(&e)) {
    j["bands"] = pe->bands;
    j["base_omega"] = pe->base_omega;
  }
  if (const auto* ff = std::get_if<FourierFeatures>(&e)) {
    j["count"] = ff->count;
    j["scale"] = ff->scale;
    j["seed"] = ff->seed;
  }
  return j;
}

inline nlohmann::json to_json(const MlpConfig& c) {
  return {{"in_dim", c.in_dim},
          {"out_dim", c.out_dim},
          {"hidden_width", c.hidden_width},
          {"depth", c.depth},
          {"activation", c.activation.name()},
          {"damping", to_string(c.activation.damping)},
          {"omega0", c.activation.omega0},
          {"clamp_eps", c.activation.clamp_eps},
          {"encoding", to_json(c.encoding)},
          {"bias_init", c.bias_init == BiasInit::FanIn ? "fan_in" : "zero"},
          {"seed", c.seed},
          {"parameters", c.parameter_count()}};
}

inline nlohmann::json to_json(const AdamHyper& h) {
  return {{"optimizer", "adam"}, {"lr", h.lr}, {"beta1", h.beta1}, {"beta2", h.beta2}, {"eps", h.eps}};
}

/// Metrics sidecar. Timing lives here so report.csv stays reproducible byte for byte.
inline nlohmann::json report_json(const TrainReport& report) {
  nlohmann::json j;
  j["steps"] = report.steps;
  j["initial_loss"] = to_json(report.initial_loss);
  j["final"] = to_json(report.final_metrics);
  j["best"] = to_json(report.best_metrics);
  j["checkpoints"] = nlohmann::json::array();
  for (const auto& s : report.snapshots) j["checkpoints"].push_back(to_json(s));
  j["best_checkpoints"] = nlohmann::json::array();
  for (const auto& s : report.best_snapshots) j["best_checkpoints"].push_back(to_json(s));
  j["wall_ms"] = report.wall_ms;
  j["rng"] = Rng::kAlgorithm;
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  io::atomic_write(path, j.dump(2) + "\n");
}

}  // namespace spder
