// spder: command-line front end for the experiment drivers.
//
// stdout carries only the final metric line
//   step=<n> mse=<v> psnr=<v> rho=<v>
// Errors go to stderr. Exit codes: 0 ok, 1 numeric/runtime failure, 2 usage.

#include <Eigen/Core>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spder/alloc.hpp"
#include "spder/tasks.hpp"

namespace {

using namespace spder;
namespace fs = std::filesystem;

void print_metrics(std::size_t step, double mse, std::optional<double> rho) {
  const double psnr = mse >= 0.0 ? psnr_from_mse(mse) : std::numeric_limits<double>::quiet_NaN();
  std::cout << "step=" << step << " mse=" << io::format_double(mse) << " psnr=" << io::format_double(psnr)
            << " rho=" << (rho ? io::format_double(*rho) : std::string("nan")) << "\n";
}

void print_snapshot(const MetricSnapshot& s) { print_metrics(s.step, s.mse, s.rho_ag); }

void apply_thread_cap() {
  if (const char* env = std::getenv("SPDER_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

std::string join_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

std::vector<DampingKind> parse_deltas(const std::vector<std::string>& names) {
  if (names.empty()) return tasks::default_ablation_deltas();
  std::vector<DampingKind> out;
  for (const auto& n : names) {
    const auto d = parse_damping(n);
    if (!d) throw ArgumentError("unknown damping '" + n + "'");
    out.push_back(*d);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  tune_allocator();
  CLI::App app{"spder: coordinate networks with semiperiodic activations"};
  app.require_subcommand(1);

  tasks::TaskOptions opts;
  opts.command_line = join_argv(argc, argv);
  std::size_t steps = 0;
  std::string out_dir = "runs";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", opts.preset, "relu | relu_pe | relu_ffn | siren | spder | spder:<damping>");
    sub->add_option("--steps", steps, "optimizer steps (task default when omitted)");
    sub->add_option("--seed", opts.seed, "initialization seed");
    sub->add_option("--out", out_dir, "output root; runs land in <out>/<task>/<preset>/");
    sub->add_flag("--paper-scale", opts.paper_scale, "use the full-size presets and clip lengths");
    sub->add_flag("--progress", opts.progress, "print checkpoint metrics to stderr");
  };

  std::string image, wav, frames, checkpoint, input, reference;
  std::size_t resolution = 0, srf = 2, base = 64, rows = 0, cols = 0, fps_factor = 2;
  double seconds = 0.0;
  bool interpolate = false;
  std::vector<std::string> deltas;

  auto* fit_cmd = app.add_subcommand("fit", "fit an image");
  fit_cmd->add_option("--image", image, "P5 PGM")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--resolution", resolution, "bilinear resize to NxN before fitting");
  add_common(fit_cmd);

  auto* sr_cmd = app.add_subcommand("superres", "fit at base resolution, query a denser grid");
  sr_cmd->add_option("--image", image, "P5 PGM source (ground truth is resized from it)")
      ->required()
      ->check(CLI::ExistingFile);
  sr_cmd->add_option("--srf", srf, "super-resolution factor")->check(CLI::IsMember({2, 4, 8}));
  sr_cmd->add_option("--base", base, "base training resolution");
  add_common(sr_cmd);

  auto* grad_cmd = app.add_subcommand("grad", "gradient-magnitude image of a fitted network");
  auto* grad_ck = grad_cmd->add_option("--checkpoint", checkpoint, "checkpoint.spdr")->check(CLI::ExistingFile);
  auto* grad_img = grad_cmd->add_option("--image", image, "fit this image first")->check(CLI::ExistingFile);
  grad_ck->excludes(grad_img);
  grad_cmd->add_option("--rows", rows, "grid rows (default: image height)");
  grad_cmd->add_option("--cols", cols, "grid cols (default: image width)");
  add_common(grad_cmd);

  auto* audio_cmd = app.add_subcommand("audio", "fit a PCM16 WAV clip");
  audio_cmd->add_option("--wav", wav, "RIFF/WAVE PCM16")->required()->check(CLI::ExistingFile);
  audio_cmd->add_option("--seconds", seconds, "crop length (default 1 s, 7 s with --paper-scale)");
  add_common(audio_cmd);

  auto* ai_cmd = app.add_subcommand("audio-interp", "train on the 8x-decimated clip, score UF 2/4/8");
  ai_cmd->add_option("--wav", wav, "RIFF/WAVE PCM16")->required()->check(CLI::ExistingFile);
  ai_cmd->add_option("--seconds", seconds, "clip length (default 1 s, 4 s with --paper-scale)");
  add_common(ai_cmd);

  auto* video_cmd = app.add_subcommand("video", "fit a frame stack");
  video_cmd->add_option("--frames", frames, "directory of PGM frames")->required()->check(CLI::ExistingDirectory);
  video_cmd->add_flag("--interpolate", interpolate, "also render frames at a denser frame grid");
  video_cmd->add_option("--fps-factor", fps_factor, "frame density multiplier for --interpolate");
  add_common(video_cmd);

  auto* ablate_cmd = app.add_subcommand("ablate", "one image fit per damping function");
  ablate_cmd->add_option("--image", image, "P5 PGM")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--deltas", deltas, "dampings (default: all)")->delimiter(',');
  add_common(ablate_cmd);

  auto* spec_cmd = app.add_subcommand("spectrum", "amplitude spectrum of a PGM or WAV, optional rho vs reference");
  spec_cmd->add_option("--input", input, "PGM or WAV")->required()->check(CLI::ExistingFile);
  spec_cmd->add_option("--reference", reference, "file of the same shape")->check(CLI::ExistingFile);
  add_common(spec_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  opts.out = out_dir;
  if (steps > 0) opts.steps = steps;

  try {
    if (fit_cmd->parsed()) {
      tasks::ImageFitOptions fo;
      if (resolution > 0) fo.resolution = resolution;
      const auto r = tasks::task_image_fit(image, opts, fo);
      print_snapshot(r.fit.report.best_metrics);
    } else if (sr_cmd->parsed()) {
      const auto r = tasks::task_superresolve(image, opts, {srf, base});
      print_snapshot(r.metrics);
    } else if (grad_cmd->parsed()) {
      if (checkpoint.empty() && image.empty()) throw ArgumentError("grad needs --checkpoint or --image");
      std::optional<MetricSnapshot> fitted;
      if (!image.empty()) {
        const auto r = tasks::task_image_fit(image, opts);
        checkpoint = (r.dir / "checkpoint.spdr").string();
        if (rows == 0) rows = r.target.shape[0];
        if (cols == 0) cols = r.target.shape[1];
        fitted = r.fit.report.best_metrics;
        opts.preset = r.preset.name;
      }
      if (rows == 0 || cols == 0) throw ArgumentError("grad needs --rows and --cols with --checkpoint");
      tasks::task_gradient_image(checkpoint, rows, cols, opts);
      if (fitted) print_snapshot(*fitted);
    } else if (audio_cmd->parsed()) {
      tasks::AudioOptions ao{seconds > 0 ? seconds : tasks::default_audio_seconds(opts.paper_scale, false)};
      const auto r = tasks::task_audio_fit(wav, opts, ao);
      print_snapshot(r.fit.report.best_metrics);
    } else if (ai_cmd->parsed()) {
      tasks::AudioOptions ao{seconds > 0 ? seconds : tasks::default_audio_seconds(opts.paper_scale, true)};
      const auto r = tasks::task_audio_interpolate(wav, opts, ao);
      print_metrics(r.fit.report.steps, r.rows.back().mse, std::nullopt);
    } else if (video_cmd->parsed()) {
      const auto r = tasks::task_video_fit(frames, opts);
      if (interpolate) {
        tasks::TaskOptions sub = opts;
        sub.preset = r.preset.name;
        tasks::task_frame_interpolate(r.dir / "checkpoint.spdr", r.target.shape[0], r.target.shape[1],
                                      r.target.shape[2], sub, fps_factor);
      }
      print_snapshot(r.fit.report.best_metrics);
    } else if (ablate_cmd->parsed()) {
      const auto r = tasks::task_ablate_delta(image, parse_deltas(deltas), opts);
      const tasks::AblationRun* best = nullptr;
      for (const auto& run : r.runs) {
        if (!best || run.best_loss < best->best_loss) best = &run;
      }
      if (best) print_metrics(r.steps, best->best_loss, std::nullopt);
    } else if (spec_cmd->parsed()) {
      const Signal x = tasks::load_signal(input);
      const auto a = amplitude_spectrum(x.values, x.shape);
      if (reference.empty()) {
        io::atomic_write(opts.out / "spectrum" / "spectrum.csv", tasks::spectrum_csv(a));
      } else {
        const Signal y = tasks::load_signal(reference);
        if (y.shape != x.shape) throw ShapeError("input and reference shapes differ");
        const auto b = amplitude_spectrum(y.values, y.shape);
        io::atomic_write(opts.out / "spectrum" / "spectrum.csv", tasks::spectrum_csv(a, &b));
        print_metrics(0, mean_squared_error(x.values, y.values), rho_ag(a, b));
      }
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
