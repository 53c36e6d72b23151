#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spder/tasks.hpp"
#include "test_util.hpp"

using namespace spder;
using testutil::fixture;
using testutil::TempDir;

TEST(AudioFit, ToneSpectrumRecovered) {
  TempDir tmp;
  tasks::TaskOptions o;
  o.steps = 500;
  o.out = tmp.path();
  const auto r = tasks::task_audio_fit(fixture("tone440.wav"), o);
  EXPECT_EQ(r.preset.name, "spder:arctan");
  EXPECT_EQ(r.target.values.size(), 8000u);
  const auto* s = r.fit.report.snapshot_at(500, true);
  ASSERT_NE(s, nullptr);
  ASSERT_TRUE(s->rho_ag.has_value());
  EXPECT_GT(*s->rho_ag, 0.99);
  const auto wav = io::read_wav(tmp / "audio/spder-arctan/reconstruction.wav");
  EXPECT_EQ(wav.samples.size(), 8000u);
  EXPECT_EQ(wav.sample_rate, 8000u);
}

TEST(AudioFit, SilenceWithinHundredSteps) {
  TempDir tmp;
  io::write_wav(std::vector<double>(8000, 0.0), 8000, tmp / "silence.wav");
  tasks::TaskOptions o;
  o.steps = 100;
  const auto r = tasks::task_audio_fit(tmp / "silence.wav", o);
  EXPECT_LT(r.fit.report.best_metrics.mse, 1e-8);
}

TEST(AudioFit, CropsToWindowAndKeepsShortClips) {
  tasks::TaskOptions o;
  o.steps = 1;
  EXPECT_EQ(tasks::task_audio_fit(fixture("tone440.wav"), o, {0.25}).target.values.size(), 2000u);
  EXPECT_EQ(tasks::task_audio_fit(fixture("tone440.wav"), o, {3.0}).target.values.size(), 8000u);
  EXPECT_DOUBLE_EQ(tasks::default_audio_seconds(false, false), 1.0);
  EXPECT_DOUBLE_EQ(tasks::default_audio_seconds(true, false), 7.0);
  EXPECT_DOUBLE_EQ(tasks::default_audio_seconds(true, true), 4.0);
}

TEST(AudioFit, StereoInputWarns) {
  TempDir tmp;
  auto b = io::encode_wav(std::vector<double>{0.5, 0.25, 0.1, 0.3}, 100);
  b[22] = 2;
  b[32] = 4;
  io::atomic_write(tmp / "st.wav", b);
  tasks::TaskOptions o;
  o.steps = 1;
  const auto r = tasks::task_audio_fit(tmp / "st.wav", o);
  EXPECT_TRUE(r.warning.has_value());
  EXPECT_EQ(r.target.values.size(), 2u);
}

TEST(AudioFit, SpderBeatsSirenOnTone) {
  tasks::TaskOptions o;
  o.steps = 500;
  const auto spder = tasks::task_audio_fit(fixture("tone440.wav"), o, {0.25});
  o.preset = "siren";
  const auto siren = tasks::task_audio_fit(fixture("tone440.wav"), o, {0.25});
  EXPECT_LT(spder.fit.report.best_metrics.mse, siren.fit.report.best_metrics.mse);
}

TEST(AudioInterp, RejectsShortClip) {
  tasks::TaskOptions o;
  o.steps = 1;
  EXPECT_THROW(tasks::task_audio_interpolate(fixture("tone440.wav"), o, {2.0}), ArgumentError);
}

TEST(AudioInterp, ToneRecoveredAndRowsMonotone) {
  TempDir tmp;
  tasks::TaskOptions o;
  o.out = tmp.path();
  const auto r = tasks::task_audio_interpolate(fixture("tone440.wav"), o);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].uf, 2u);
  EXPECT_EQ(r.rows[0].samples, 2000u);
  EXPECT_EQ(r.rows[2].samples, 8000u);
  EXPECT_LT(r.rows[2].mse, 1e-3);
  EXPECT_LE(r.rows[0].mse, r.rows[1].mse);
  EXPECT_LE(r.rows[1].mse, r.rows[2].mse);
  EXPECT_TRUE(std::filesystem::exists(tmp / "audio-interp/spder-arctan/interpolation.csv"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "audio-interp/spder-arctan/interpolated.wav"));
}

TEST(AudioInterp, SpderNotWorseThanSiren) {
  for (const char* clip : {"tone440.wav", "mixture.wav"}) {
    tasks::TaskOptions o;
    const auto spder = tasks::task_audio_interpolate(fixture(clip), o);
    o.preset = "siren";
    const auto siren = tasks::task_audio_interpolate(fixture(clip), o);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_LE(spder.rows[i].mse, siren.rows[i].mse) << clip << " uf " << spder.rows[i].uf;
    }
  }
}
