#include <gtest/gtest.h>

#include <cstring>
#include <string>

#include "spder/io.hpp"
#include "test_util.hpp"

using namespace spder;
using testutil::TempDir;

namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Pgm, RoundTrip) {
  TempDir tmp;
  io::GrayImage img{3, 2, {0, 1, 2, 253, 254, 255}};
  io::write_pgm(img, tmp / "a.pgm");
  EXPECT_EQ(io::read_pgm(tmp / "a.pgm"), img);
  EXPECT_FALSE(std::filesystem::exists(tmp / "a.pgm.tmp"));
}

TEST(Pgm, HeaderCommentsAndWhitespace) {
  auto b = bytes("P5 # produced by hand\n2\t# w\n 1\n255\n");
  b.push_back(7);
  b.push_back(9);
  const auto img = io::parse_pgm(b);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{7, 9}));
}

TEST(Pgm, Rejections) {
  EXPECT_THROW(io::parse_pgm(bytes("P2\n1 1\n255\n0")), ParseError);
  try {
    io::parse_pgm(bytes("P5\n1 1\n65535\n\x01\x02"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("65535"), std::string::npos);
  }
  try {
    io::parse_pgm(bytes("P5\n4 4\n255\n\x01\x02"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
  EXPECT_THROW(io::read_pgm("/nonexistent/x.pgm"), IoError);
}

TEST(Wav, RoundTripWithinQuantization) {
  TempDir tmp;
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(std::sin(0.1 * i) * 0.9);
  io::write_wav(s, 8000, tmp / "a.wav");
  const auto w = io::read_wav(tmp / "a.wav");
  EXPECT_EQ(w.sample_rate, 8000u);
  EXPECT_EQ(w.channels, 1u);
  ASSERT_EQ(w.samples.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(w.samples[i], s[i], 0.5 / 32768.0 + 1e-15);
  EXPECT_FALSE(w.warning.has_value());
}

TEST(Wav, ClampsOutOfRange) {
  const auto w = io::parse_wav(io::encode_wav(std::vector<double>{2.0, -2.0, 1.0}, 100));
  EXPECT_EQ(w.samples, (std::vector<double>{32767.0 / 32768.0, -1.0, 32767.0 / 32768.0}));
}

TEST(Wav, StereoAveragedWithWarning) {
  auto b = io::encode_wav(std::vector<double>{0.5, 0.25}, 100);
  // rewrite the fmt chunk as one stereo frame: channels=2, block align 4
  b[22] = 2;
  b[32] = 4;
  const auto w = io::parse_wav(b);
  ASSERT_EQ(w.samples.size(), 1u);
  EXPECT_DOUBLE_EQ(w.samples[0], 0.375);
  EXPECT_TRUE(w.warning.has_value());
}

TEST(Wav, Rejections) {
  auto b = io::encode_wav(std::vector<double>{0.1}, 100);
  auto float_fmt = b;
  float_fmt[20] = 3;
  EXPECT_THROW(io::parse_wav(float_fmt), UnsupportedError);
  auto bits8 = b;
  bits8[34] = 8;
  EXPECT_THROW(io::parse_wav(bits8), UnsupportedError);
  EXPECT_THROW(io::parse_wav(bytes("RIFX0000WAVE")), ParseError);
  b.resize(b.size() - 1);
  EXPECT_THROW(io::parse_wav(b), ParseError);
}

TEST(Frames, RoundTripWithManifest) {
  TempDir tmp;
  io::FrameStack s{2, 2, {}};
  for (std::uint8_t f = 0; f < 3; ++f) s.frames.push_back({2, 2, {f, 1, 2, 3}});
  io::write_frame_stack(s, tmp.path());
  EXPECT_TRUE(std::filesystem::exists(tmp / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(tmp / io::frame_file_name(2)));
  const auto r = io::read_frame_stack(tmp.path());
  ASSERT_EQ(r.frames.size(), 3u);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_EQ(r.frames[f], s.frames[f]);
}

TEST(Frames, WithoutManifestSortsByName) {
  TempDir tmp;
  io::write_pgm({1, 1, {20}}, tmp / "b.pgm");
  io::write_pgm({1, 1, {10}}, tmp / "a.pgm");
  const auto r = io::read_frame_stack(tmp.path());
  ASSERT_EQ(r.frames.size(), 2u);
  EXPECT_EQ(r.frames[0].pixels[0], 10);
}

TEST(Frames, SizeMismatchAndEmpty) {
  TempDir tmp;
  EXPECT_THROW(io::read_frame_stack(tmp.path()), IoError);
  io::write_pgm({1, 1, {20}}, tmp / "a.pgm");
  io::write_pgm({2, 1, {1, 2}}, tmp / "b.pgm");
  EXPECT_THROW(io::read_frame_stack(tmp.path()), ShapeError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1e-7), "1e-07");
  EXPECT_EQ(io::format_double(std::nan("")), "nan");
  EXPECT_EQ(io::format_double(-std::numeric_limits<double>::infinity()), "-inf");
  const double v = 0.1234567890123456789;
  EXPECT_EQ(std::stod(io::format_double(v)), v);
}
