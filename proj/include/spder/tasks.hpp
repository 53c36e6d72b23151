#pragma once

// End-to-end experiment drivers: image/audio/video fitting, gradient images,
// super-resolution, audio and frame interpolation, and the damping ablation.
// Every driver returns its numbers; when TaskOptions::out is set it also
// writes <out>/<task>/<preset>/{report.csv, meta.json, checkpoint.spdr, ...}.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spder/checkpoint.hpp"
#include "spder/checksum.hpp"
#include "spder/errors.hpp"
#include "spder/io.hpp"
#include "spder/metrics.hpp"
#include "spder/network.hpp"
#include "spder/optim.hpp"
#include "spder/report.hpp"
#include "spder/signal.hpp"
#include "spder/spectral.hpp"

namespace spder::tasks {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

enum class Domain { Image, Audio, Video };

/// Frozen per-domain hyperparameters.
struct PresetTable {
  static constexpr std::size_t kImageDepth = 5;
  static constexpr std::size_t kImageWidth = 256;
  static constexpr double kImageLr = 1e-4;

  static constexpr double kAudioBound = 100.0;
  static constexpr double kAudioLr = 5e-5;
  static constexpr std::size_t kAudioDepth = 5;
  static constexpr std::size_t kAudioWidth = 256;
  static constexpr DampingKind kAudioDamping = DampingKind::Arctan;

  static constexpr std::size_t kVideoDepth = 12;
  static constexpr std::size_t kVideoWidth = 1024;
  static constexpr double kVideoLr = 5e-6;
  static constexpr std::size_t kVideoDeskDepth = 6;
  static constexpr std::size_t kVideoDeskWidth = 256;
  static constexpr double kVideoDeskLr = 1e-4;

  static constexpr std::size_t kFourierFeatureCount = 20;
  static constexpr std::size_t kPeBands = 10;
};

struct Preset {
  std::string name;  // canonical, e.g. "spder:sqrtabs"
  MlpConfig config;
  AdamHyper hyper;
  std::vector<Bounds> bounds;
};

inline std::size_t domain_dims(Domain d) { return d == Domain::Image ? 2 : d == Domain::Audio ? 1 : 3; }

/// relu | relu_pe | relu_ffn | siren | spder | spder:<damping>
inline Preset resolve_preset(std::string_view name, Domain domain, bool paper_scale = false, std::uint64_t seed = 0) {
  Preset p;
  auto& c = p.config;
  c.in_dim = domain_dims(domain);
  c.out_dim = 1;
  c.seed = seed;
  double bound = 1.0;
  DampingKind default_damping = DampingKind::SqrtAbs;
  switch (domain) {
    case Domain::Image:
      c.depth = PresetTable::kImageDepth;
      c.hidden_width = PresetTable::kImageWidth;
      p.hyper.lr = PresetTable::kImageLr;
      break;
    case Domain::Audio:
      c.depth = PresetTable::kAudioDepth;
      c.hidden_width = PresetTable::kAudioWidth;
      p.hyper.lr = PresetTable::kAudioLr;
      bound = PresetTable::kAudioBound;
      default_damping = PresetTable::kAudioDamping;
      break;
    case Domain::Video:
      c.depth = paper_scale ? PresetTable::kVideoDepth : PresetTable::kVideoDeskDepth;
      c.hidden_width = paper_scale ? PresetTable::kVideoWidth : PresetTable::kVideoDeskWidth;
      p.hyper.lr = paper_scale ? PresetTable::kVideoLr : PresetTable::kVideoDeskLr;
      break;
  }
  p.bounds.assign(c.in_dim, Bounds{-bound, bound});

  if (name == "relu") {
    c.activation = ActivationSpec::relu();
  } else if (name == "relu_pe") {
    c.activation = ActivationSpec::relu();
    c.encoding = PositionalEncoding{PresetTable::kPeBands};
  } else if (name == "relu_ffn") {
    c.activation = ActivationSpec::relu();
    c.encoding = FourierFeatures{PresetTable::kFourierFeatureCount, 1.0, seed};
  } else if (name == "siren") {
    c.activation = ActivationSpec::sine();
  } else if (name == "spder") {
    c.activation = ActivationSpec::semiperiodic(default_damping);
  } else if (name.starts_with("spder:")) {
    const auto d = parse_damping(name.substr(6));
    if (!d) throw ArgumentError("unknown damping '" + std::string(name.substr(6)) + "'");
    c.activation = ActivationSpec::semiperiodic(*d);
  } else {
    throw ArgumentError("unknown preset '" + std::string(name) +
                        "' (expected relu, relu_pe, relu_ffn, siren, spder or spder:<damping>)");
  }
  if (c.activation.kind == ActivationKind::Semiperiodic && c.activation.damping != DampingKind::Const1) {
    p.name = "spder:" + std::string(to_string(c.activation.damping));
  } else {
    p.name = std::string(name);
  }
  return p;
}

struct TaskOptions {
  std::string preset = "spder";
  std::optional<std::size_t> steps;
  std::uint64_t seed = 0;
  fs::path out;  // empty: write nothing
  bool paper_scale = false;
  std::string command_line;
  bool progress = false;  // checkpoint lines on stderr
};

/// `<out>/<task>/<preset>` with ':' replaced so the path is portable.
inline fs::path run_dir(const TaskOptions& opts, std::string_view task, const std::string& preset) {
  std::string leaf = preset;
  std::replace(leaf.begin(), leaf.end(), ':', '-');
  return opts.out / task / leaf;
}

namespace detail {

inline nlohmann::json manifest(const TaskOptions& opts, std::string_view task, const Preset& preset,
                               const std::vector<fs::path>& inputs) {
  nlohmann::json j;
  j["task"] = task;
  j["command_line"] = opts.command_line;
  j["preset"] = preset.name;
  j["seed"] = opts.seed;
  j["paper_scale"] = opts.paper_scale;
  j["versions"] = {{"spder", kVersion}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}};
  j["config"] = to_json(preset.config);
  j["hyper"] = to_json(preset.hyper);
  j["optimizer_note"] = "full-batch Adam with bias correction; MSE loss";
  j["rng"] = Rng::kAlgorithm;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : inputs) {
    nlohmann::json e{{"path", in.string()}};
    if (fs::is_regular_file(in)) e["sha256"] = sha256_file(in);
    j["inputs"].push_back(e);
  }
  j["status"] = "running";
  return j;
}

inline std::size_t steps_or(const TaskOptions& opts, std::size_t fallback) { return opts.steps.value_or(fallback); }

inline void progress_line(const TaskOptions& opts, std::string_view task, const MetricSnapshot& s) {
  if (!opts.progress) return;
  std::cerr << task << ": step " << s.step << " mse " << io::format_double(s.mse) << " psnr "
            << io::format_double(s.psnr_db) << "\n";
}

/// Writes the manifest, runs `fit`, then writes report.csv, checkpoint.spdr and
/// the finalized manifest. On divergence the manifest records the failure.
inline FitResult run_fit(const TaskOptions& opts, std::string_view task, const Preset& preset, const fs::path& dir,
                         nlohmann::json& meta, const Matrix& coords, const Signal& target, FitOptions fo) {
  if (!dir.empty()) write_json(dir / "meta.json", meta);
  if (opts.progress) fo.on_checkpoint = [&, prev = fo.on_checkpoint](const MetricSnapshot& s, std::span<const double> p) {
    progress_line(opts, task, s);
    if (prev) prev(s, p);
  };
  try {
    FitResult r = fit(preset.config, coords, target, fo);
    if (!dir.empty()) {
      io::atomic_write(dir / "report.csv", report_csv(r.report));
      io::atomic_write(dir / "checkpoints.csv", checkpoints_csv(r.report, false));
      io::atomic_write(dir / "checkpoints_best.csv", checkpoints_csv(r.report, true));
      save_checkpoint(dir / "checkpoint.spdr", preset.config, r.best_params);
      meta["report"] = report_json(r.report);
      meta["checkpoint_params"] = "minimum-loss parameters";
      meta["status"] = "ok";
      write_json(dir / "meta.json", meta);
    }
    return r;
  } catch (const TrainingAborted& e) {
    if (!dir.empty()) {
      io::atomic_write(dir / "report.csv", report_csv(e.partial_report()));
      meta["status"] = "diverged";
      meta["error"] = e.what();
      write_json(dir / "meta.json", meta);
    }
    throw;
  }
}

inline io::GrayImage to_gray(std::span<const double> values, std::size_t rows, std::size_t cols) {
  return {cols, rows, denormalize_u8(values)};
}

inline Signal load_image(const fs::path& path, std::optional<std::size_t> resolution) {
  const io::GrayImage img = io::read_pgm(path);
  Signal s = normalize_u8(img.pixels, {img.height, img.width});
  if (resolution && (*resolution != img.height || *resolution != img.width)) {
    s = bilinear_resize(s, *resolution, *resolution);
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------- image fit

struct ImageFitOptions {
  std::optional<std::size_t> resolution;  // square bilinear resize before fitting
  std::size_t max_resolution = 512;
  std::vector<std::size_t> checkpoints{25, 100, 500};
};

struct ImageFitResult {
  Preset preset;
  Signal target;
  FitResult fit;
  fs::path dir;
};

inline ImageFitResult task_image_fit(const fs::path& image, const TaskOptions& opts,
                                     const ImageFitOptions& io_opts = {}) {
  Signal target = detail::load_image(image, io_opts.resolution);
  if (target.shape[0] > io_opts.max_resolution || target.shape[1] > io_opts.max_resolution) {
    throw ArgumentError("image " + std::to_string(target.shape[0]) + "x" + std::to_string(target.shape[1]) +
                        " exceeds the maximum resolution " + std::to_string(io_opts.max_resolution));
  }
  const Preset preset = resolve_preset(opts.preset, Domain::Image, opts.paper_scale, opts.seed);
  const auto grid = make_grid(target.shape, preset.bounds);
  const fs::path dir = opts.out.empty() ? fs::path{} : run_dir(opts, "fit", preset.name);
  auto meta = detail::manifest(opts, "fit", preset, {image});

  FitOptions fo;
  fo.steps = detail::steps_or(opts, 500);
  fo.hyper = preset.hyper;
  fo.checkpoints = io_opts.checkpoints;
  const std::size_t rows = target.shape[0], cols = target.shape[1];
  if (!dir.empty()) {
    fo.on_checkpoint = [&](const MetricSnapshot& s, std::span<const double> pred) {
      io::write_pgm(detail::to_gray(pred, rows, cols), dir / ("reconstruction_step" + std::to_string(s.step) + ".pgm"));
    };
  }
  FitResult r = detail::run_fit(opts, "fit", preset, dir, meta, grid.coords, target, fo);
  if (!dir.empty()) {
    const Matrix best = predict(r.best_params, preset.config, grid.coords);
    io::write_pgm(detail::to_gray(best.data(), rows, cols), dir / "reconstruction.pgm");
  }
  return {preset, std::move(target), std::move(r), dir};
}

// ---------------------------------------------------------------- gradient image

/// Values at or below this gradient magnitude render as near-black rather than
/// being stretched to full scale.
inline constexpr double kGradientGuard = 1.0;

struct GradientImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> d_row;      // d out / d row-coordinate
  std::vector<double> d_col;      // d out / d col-coordinate
  std::vector<double> magnitude;  // ||grad||_2
  std::vector<double> normalized; // magnitude / max(max magnitude, guard), in [0, 1]
};

inline GradientImage gradient_image(const MlpParams& params, const MlpConfig& config, std::size_t rows,
                                    std::size_t cols, Bounds bounds = {}) {
  if (config.in_dim != 2 || config.out_dim != 1) {
    throw ShapeError("gradient image needs a 2-input, 1-output network; checkpoint has in_dim " +
                     std::to_string(config.in_dim) + ", out_dim " + std::to_string(config.out_dim));
  }
  const auto grid = make_grid({rows, cols}, bounds);
  const Matrix g = input_gradient(params, config, grid.coords);
  GradientImage out{rows, cols, {}, {}, {}, {}};
  double peak = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    out.d_row.push_back(g(i, 0));
    out.d_col.push_back(g(i, 1));
    out.magnitude.push_back(std::hypot(g(i, 0), g(i, 1)));
    peak = std::max(peak, out.magnitude.back());
  }
  const double scale = std::max(peak, kGradientGuard);
  for (double m : out.magnitude) out.normalized.push_back(m / scale);
  return out;
}

inline io::GrayImage render_gradient(const GradientImage& g) {
  io::GrayImage img{g.cols, g.rows, {}};
  for (double v : g.normalized) img.pixels.push_back(static_cast<std::uint8_t>(std::nearbyint(255.0 * v)));
  return img;
}

inline GradientImage task_gradient_image(const fs::path& checkpoint, std::size_t rows, std::size_t cols,
                                         const TaskOptions& opts) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  GradientImage g = gradient_image(ck.params, ck.config, rows, cols);
  if (!opts.out.empty()) {
    const fs::path dir = run_dir(opts, "grad", opts.preset);
    io::write_pgm(render_gradient(g), dir / "gradient.pgm");
    std::string csv = "row,col,d_row,d_col,magnitude\n";
    for (std::size_t i = 0; i < g.magnitude.size(); ++i) {
      csv += std::to_string(i / cols) + "," + std::to_string(i % cols) + "," + io::format_double(g.d_row[i]) + "," +
             io::format_double(g.d_col[i]) + "," + io::format_double(g.magnitude[i]) + "\n";
    }
    io::atomic_write(dir / "gradient.csv", csv);
    nlohmann::json meta{{"task", "grad"},         {"command_line", opts.command_line}, {"checkpoint", checkpoint.string()},
                        {"sha256", sha256_file(checkpoint)}, {"rows", rows}, {"cols", cols},
                        {"guard", kGradientGuard}, {"config", to_json(ck.config)}, {"status", "ok"}};
    write_json(dir / "meta.json", meta);
  }
  return g;
}

// ---------------------------------------------------------------- super-resolution

struct SuperResOptions {
  std::size_t srf = 2;
  std::size_t base = 64;
};

struct SuperResResult {
  Preset preset;
  FitResult fit;
  Signal prediction;
  Signal truth;
  MetricSnapshot metrics;
  fs::path dir;
};

/// Query grid for a super-resolution factor: align-corners, same bounds, and
/// every base coordinate reappears exactly at index srf*i.
inline std::size_t superres_extent(std::size_t base, std::size_t srf) { return srf * (base - 1) + 1; }

inline SuperResResult task_superresolve(const fs::path& image, const TaskOptions& opts, const SuperResOptions& so) {
  if (so.srf != 2 && so.srf != 4 && so.srf != 8) {
    throw ArgumentError("super-resolution factor must be 2, 4 or 8, got " + std::to_string(so.srf));
  }
  if (so.base < 2) throw ArgumentError("base resolution must be at least 2");
  const io::GrayImage img = io::read_pgm(image);
  const Signal source = normalize_u8(img.pixels, {img.height, img.width});
  const Signal base = bilinear_resize(source, so.base, so.base);
  const std::size_t n = superres_extent(so.base, so.srf);
  Signal truth = bilinear_resize(source, n, n);

  const Preset preset = resolve_preset(opts.preset, Domain::Image, opts.paper_scale, opts.seed);
  const auto train_grid = make_grid(base.shape, preset.bounds);
  const auto query_grid = make_grid(truth.shape, preset.bounds);
  const fs::path dir = opts.out.empty() ? fs::path{} : run_dir(opts, "superres", preset.name);
  auto meta = detail::manifest(opts, "superres", preset, {image});
  meta["srf"] = so.srf;
  meta["base"] = so.base;
  meta["query_extent"] = n;

  FitOptions fo;
  fo.steps = detail::steps_or(opts, 100);
  fo.hyper = preset.hyper;
  fo.checkpoints = {25, 100};
  FitResult r = detail::run_fit(opts, "superres", preset, dir, meta, train_grid.coords, base, fo);

  const Matrix pred = predict(r.best_params, preset.config, query_grid.coords);
  Signal prediction{truth.shape, pred.values(), std::nullopt};
  const double mse = mean_squared_error(prediction.values, truth.values);
  const MetricSnapshot m = make_snapshot(fo.steps, mse, signal_rho_ag(prediction.values, truth));
  if (!dir.empty()) {
    io::write_pgm(detail::to_gray(prediction.values, n, n), dir / "superres.pgm");
    io::write_pgm(detail::to_gray(truth.values, n, n), dir / "truth.pgm");
    io::atomic_write(dir / "superres.csv", std::string(kMetricsHeader) + snapshot_csv_row(m));
    meta["superres"] = to_json(m);
    write_json(dir / "meta.json", meta);
  }
  return {preset, std::move(r), std::move(prediction), std::move(truth), m, dir};
}

// ---------------------------------------------------------------- audio

struct AudioOptions {
  /// Clip length used; longer inputs are cropped, shorter ones rejected by interpolation.
  double seconds = 1.0;
};

inline double default_audio_seconds(bool paper_scale, bool interpolation) {
  if (!paper_scale) return 1.0;
  return interpolation ? 4.0 : 7.0;
}

struct AudioFitResult {
  Preset preset;
  Signal target;
  std::uint32_t sample_rate = 0;
  FitResult fit;
  std::optional<std::string> warning;
  fs::path dir;
};

namespace detail {

inline io::WavAudio load_audio(const fs::path& path, double seconds, bool require_full) {
  io::WavAudio wav = io::read_wav(path);
  const auto window = static_cast<std::size_t>(std::llround(seconds * wav.sample_rate));
  if (window < 2) throw ArgumentError("audio window shorter than two samples");
  if (wav.samples.size() < window) {
    if (require_full) {
      throw ArgumentError("clip has " + std::to_string(wav.samples.size()) + " samples, needs " +
                          std::to_string(window) + " (" + io::format_double(seconds) + " s)");
    }
  } else {
    wav.samples.resize(window);
  }
  if (wav.samples.size() < 2) throw ArgumentError("clip shorter than two samples");
  return wav;
}

}  // namespace detail

inline AudioFitResult task_audio_fit(const fs::path& wav_path, const TaskOptions& opts, const AudioOptions& ao = {}) {
  io::WavAudio wav = detail::load_audio(wav_path, ao.seconds, false);
  if (wav.warning) std::cerr << "warning: " << wav_path.string() << ": " << *wav.warning << "\n";
  Signal target{{wav.samples.size()}, std::move(wav.samples), 16};
  const Preset preset = resolve_preset(opts.preset, Domain::Audio, opts.paper_scale, opts.seed);
  const auto grid = make_grid(target.shape, preset.bounds);
  const fs::path dir = opts.out.empty() ? fs::path{} : run_dir(opts, "audio", preset.name);
  auto meta = detail::manifest(opts, "audio", preset, {wav_path});
  meta["sample_rate"] = wav.sample_rate;
  meta["samples"] = target.values.size();
  if (wav.warning) meta["warning"] = *wav.warning;

  FitOptions fo;
  fo.steps = detail::steps_or(opts, 1000);
  fo.hyper = preset.hyper;
  fo.checkpoints = {25, 100, 500, 1000};
  FitResult r = detail::run_fit(opts, "audio", preset, dir, meta, grid.coords, target, fo);
  if (!dir.empty()) {
    const Matrix best = predict(r.best_params, preset.config, grid.coords);
    io::write_wav(best.data(), wav.sample_rate, dir / "reconstruction.wav");
  }
  return {preset, std::move(target), wav.sample_rate, std::move(r), wav.warning, dir};
}

struct InterpolationRow {
  std::size_t uf = 0;
  std::size_t samples = 0;
  double mse = 0.0;
};

struct AudioInterpResult {
  Preset preset;
  FitResult fit;
  std::vector<InterpolationRow> rows;  // UF 2, 4, 8
  fs::path dir;
};

inline constexpr std::size_t kTrainDecimation = 8;

/// Trains on every 8th sample of the clip, then scores the model against the
/// clip decimated by 4, 2 and 1 (upsampling factors 2, 4 and 8).
inline AudioInterpResult task_audio_interpolate(const fs::path& wav_path, const TaskOptions& opts,
                                                const AudioOptions& ao = {}) {
  io::WavAudio wav = detail::load_audio(wav_path, ao.seconds, true);
  if (wav.warning) std::cerr << "warning: " << wav_path.string() << ": " << *wav.warning << "\n";
  const Signal truth{{wav.samples.size()}, std::move(wav.samples), 16};
  const Preset preset = resolve_preset(opts.preset, Domain::Audio, opts.paper_scale, opts.seed);
  const auto full = make_grid(truth.shape, preset.bounds);
  const Signal train = downsample_1d(truth, kTrainDecimation);
  const Matrix train_coords = take_rows_strided(full.coords, kTrainDecimation);
  const fs::path dir = opts.out.empty() ? fs::path{} : run_dir(opts, "audio-interp", preset.name);
  auto meta = detail::manifest(opts, "audio-interp", preset, {wav_path});
  meta["sample_rate"] = wav.sample_rate;
  meta["samples"] = truth.values.size();
  meta["train_samples"] = train.values.size();

  FitOptions fo;
  fo.steps = detail::steps_or(opts, 250);
  fo.hyper = preset.hyper;
  fo.checkpoints = {25, 100, 250};
  FitResult r = detail::run_fit(opts, "audio-interp", preset, dir, meta, train_coords, train, fo);

  AudioInterpResult out{preset, std::move(r), {}, dir};
  std::string csv = "uf,samples,mse\n";
  for (std::size_t uf : {2u, 4u, 8u}) {
    const std::size_t stride = kTrainDecimation / uf;
    const Signal gt = downsample_1d(truth, stride);
    const Matrix pred = predict(out.fit.best_params, preset.config, take_rows_strided(full.coords, stride));
    const double mse = mean_squared_error(pred.data(), gt.values);
    out.rows.push_back({uf, gt.values.size(), mse});
    csv += std::to_string(uf) + "," + std::to_string(gt.values.size()) + "," + io::format_double(mse) + "\n";
    if (!dir.empty() && uf == 8) io::write_wav(pred.data(), wav.sample_rate, dir / "interpolated.wav");
  }
  if (!dir.empty()) {
    io::atomic_write(dir / "interpolation.csv", csv);
    meta["interpolation"] = nlohmann::json::array();
    for (const auto& row : out.rows) {
      meta["interpolation"].push_back({{"uf", row.uf}, {"samples", row.samples}, {"mse", to_json(row.mse)}});
    }
    write_json(dir / "meta.json", meta);
  }
  return out;
}

// ---------------------------------------------------------------- video

/// Upper bound on the forward-pass activation memory of one full-batch step.
inline constexpr double kVideoMemoryCapBytes = 2.0 * 1024 * 1024 * 1024;

inline double video_step_bytes(const MlpConfig& c, std::size_t points) {
  // pre-activation, activation and slope per hidden layer, 8 bytes each
  return 3.0 * 8.0 * static_cast<double>(points) * static_cast<double>(c.hidden_width) *
         static_cast<double>(c.depth - 1);
}

inline Signal frames_to_signal(const io::FrameStack& stack) {
  std::vector<std::uint8_t> pixels;
  for (const auto& f : stack.frames) pixels.insert(pixels.end(), f.pixels.begin(), f.pixels.end());
  return normalize_u8(pixels, {stack.frames.size(), stack.height, stack.width});
}

struct VideoFitResult {
  Preset preset;
  Signal target;
  FitResult fit;
  fs::path dir;
};

inline VideoFitResult task_video_fit(const fs::path& frames_dir, const TaskOptions& opts) {
  const io::FrameStack stack = io::read_frame_stack(frames_dir);
  Signal target = frames_to_signal(stack);
  const Preset preset = resolve_preset(opts.preset, Domain::Video, opts.paper_scale, opts.seed);
  const std::size_t points = target.values.size();
  if (video_step_bytes(preset.config, points) > kVideoMemoryCapBytes) {
    throw ArgumentError("video of " + std::to_string(points) + " samples exceeds the memory cap for a " +
                        std::to_string(preset.config.depth) + "x" + std::to_string(preset.config.hidden_width) +
                        " network; use the desk preset (drop --paper-scale) or fewer/smaller frames");
  }
  const auto grid = make_grid(target.shape, preset.bounds);
  const fs::path dir = opts.out.empty() ? fs::path{} : run_dir(opts, "video", preset.name);
  auto meta = detail::manifest(opts, "video", preset, {frames_dir / "manifest.json"});
  meta["frames"] = stack.frames.size();
  meta["coordinate_order"] = "frame,row,col";

  FitOptions fo;
  fo.steps = detail::steps_or(opts, 400);
  fo.hyper = preset.hyper;
  fo.checkpoints = {25, 100, 400};
  FitResult r = detail::run_fit(opts, "video", preset, dir, meta, grid.coords, target, fo);
  if (!dir.empty()) {
    const Matrix best = predict(r.best_params, preset.config, grid.coords);
    io::FrameStack rec{stack.width, stack.height, {}};
    const std::size_t frame = stack.width * stack.height;
    for (std::size_t f = 0; f < stack.frames.size(); ++f) {
      rec.frames.push_back(detail::to_gray(best.data().subspan(f * frame, frame), stack.height, stack.width));
    }
    io::write_frame_stack(rec, dir / "reconstruction");
  }
  return {preset, std::move(target), std::move(r), dir};
}

/// Evaluates a video network on a grid `fps_factor` times denser along the
/// frame axis. Frame i*fps_factor of the result sits on training frame i.
inline Signal frame_interpolate(const MlpParams& params, const MlpConfig& config, std::size_t frames,
                                std::size_t rows, std::size_t cols, std::size_t fps_factor = 2) {
  if (config.in_dim != 3) throw ShapeError("frame interpolation needs a 3-input network");
  if (fps_factor < 1) throw ArgumentError("fps factor must be positive");
  const std::size_t dense = fps_factor * (frames - 1) + 1;
  const auto grid = make_grid({dense, rows, cols});
  const Matrix pred = predict(params, config, grid.coords);
  return {{dense, rows, cols}, pred.values(), std::nullopt};
}

inline Signal task_frame_interpolate(const fs::path& checkpoint, std::size_t frames, std::size_t rows,
                                     std::size_t cols, const TaskOptions& opts, std::size_t fps_factor = 2) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  Signal out = frame_interpolate(ck.params, ck.config, frames, rows, cols, fps_factor);
  if (!opts.out.empty()) {
    const fs::path dir = run_dir(opts, "video-interp", opts.preset);
    io::FrameStack stack{cols, rows, {}};
    const std::size_t frame = rows * cols;
    for (std::size_t f = 0; f < out.shape[0]; ++f) {
      stack.frames.push_back(
          detail::to_gray(std::span<const double>(out.values).subspan(f * frame, frame), rows, cols));
    }
    io::write_frame_stack(stack, dir / "frames");
    write_json(dir / "meta.json", {{"task", "video-interp"},
                                   {"command_line", opts.command_line},
                                   {"checkpoint", checkpoint.string()},
                                   {"fps_factor", fps_factor},
                                   {"frames", out.shape[0]},
                                   {"status", "ok"}});
  }
  return out;
}

// ---------------------------------------------------------------- damping ablation

struct AblationRun {
  DampingKind damping;
  std::vector<double> loss_curve;  // entry k-1: loss after k updates; +inf after divergence
  double final_loss = 0.0;         // current parameters at the last step
  double best_loss = 0.0;          // minimum over the run
  bool diverged = false;
  std::string error;
};

struct AblationResult {
  std::vector<AblationRun> runs;
  std::size_t steps = 0;
  fs::path dir;

  const AblationRun* find(DampingKind d) const {
    for (const auto& r : runs) {
      if (r.damping == d) return &r;
    }
    return nullptr;
  }
};

inline std::vector<DampingKind> default_ablation_deltas() {
  return {DampingKind::SqrtAbs, DampingKind::LogAbs, DampingKind::Arctan, DampingKind::Const1,
          DampingKind::Identity, DampingKind::Square};
}

/// One fit per damping with the same image and seed; CSV columns are log10 losses.
inline AblationResult task_ablate_delta(const fs::path& image, const std::vector<DampingKind>& deltas,
                                        const TaskOptions& opts) {
  const Signal target = detail::load_image(image, std::nullopt);
  AblationResult out;
  out.steps = detail::steps_or(opts, 250);
  if (!opts.out.empty()) out.dir = opts.out / "ablate";
  for (DampingKind d : deltas) {
    TaskOptions sub = opts;
    sub.preset = "spder:" + std::string(to_string(d));
    const Preset preset = resolve_preset(sub.preset, Domain::Image, opts.paper_scale, opts.seed);
    const auto grid = make_grid(target.shape, preset.bounds);
    FitOptions fo;
    fo.steps = out.steps;
    fo.hyper = preset.hyper;
    fo.checkpoints = {25, 100, 250};
    fo.compute_rho = false;
    const fs::path dir = opts.out.empty() ? fs::path{} : run_dir(opts, "ablate", preset.name);
    auto meta = detail::manifest(sub, "ablate", preset, {image});
    AblationRun run{d, {}, 0.0, 0.0, false, {}};
    try {
      const FitResult r = detail::run_fit(sub, "ablate", preset, dir, meta, grid.coords, target, fo);
      run.loss_curve = r.report.loss_curve;
      run.final_loss = r.report.final_metrics.mse;
      run.best_loss = r.report.best_metrics.mse;
    } catch (const TrainingAborted& e) {
      const auto& partial = e.partial_report();
      run.loss_curve = partial.loss_curve;
      run.loss_curve.resize(out.steps, std::numeric_limits<double>::infinity());
      run.final_loss = std::numeric_limits<double>::infinity();
      run.best_loss = partial.loss_curve.empty()
                          ? partial.initial_loss
                          : std::min(partial.initial_loss,
                                     *std::min_element(partial.loss_curve.begin(), partial.loss_curve.end()));
      run.diverged = true;
      run.error = e.what();
      std::cerr << "warning: damping " << to_string(d) << " diverged: " << e.what() << "\n";
    }
    out.runs.push_back(std::move(run));
  }
  if (!out.dir.empty()) {
    std::string csv = "step";
    for (const auto& r : out.runs) csv += ",log10_loss_" + std::string(to_string(r.damping));
    csv += "\n";
    for (std::size_t k = 0; k < out.steps; ++k) {
      csv += std::to_string(k + 1);
      for (const auto& r : out.runs) csv += "," + io::format_double(std::log10(r.loss_curve[k]));
      csv += "\n";
    }
    io::atomic_write(out.dir / "ablation.csv", csv);
    std::string summary = "damping,final_loss,best_loss,diverged\n";
    for (const auto& r : out.runs) {
      summary += std::string(to_string(r.damping)) + "," + io::format_double(r.final_loss) + "," +
                 io::format_double(r.best_loss) + "," + (r.diverged ? "1" : "0") + "\n";
    }
    io::atomic_write(out.dir / "ablation_summary.csv", summary);
  }
  return out;
}

// ---------------------------------------------------------------- spectrum

/// A PGM as a 2-D signal or a WAV as a 1-D signal, normalized to [-1, 1].
inline Signal load_signal(const fs::path& path) {
  if (path.extension() == ".wav") {
    io::WavAudio wav = io::read_wav(path);
    return {{wav.samples.size()}, std::move(wav.samples), 16};
  }
  const io::GrayImage img = io::read_pgm(path);
  return normalize_u8(img.pixels, {img.height, img.width});
}

inline std::string spectrum_csv(const AmplitudeSpectrum& a, const AmplitudeSpectrum* b = nullptr) {
  std::string csv = b ? "index,amplitude,reference\n" : "index,amplitude\n";
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    csv += std::to_string(i) + "," + io::format_double(a.values[i]);
    if (b) csv += "," + io::format_double(b->values[i]);
    csv += "\n";
  }
  return csv;
}

}  // namespace spder::tasks
