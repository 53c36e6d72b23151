#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>
#include <cstdio>

#include "json.hpp"
#include "spder/errors.hpp"

namespace spder::io {

namespace fs = std::filesystem;

inline std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void atomic_write(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void atomic_write(const fs::path& path, std::string_view text) {
  atomic_write(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Shortest round-trip decimal, '.' separator regardless of locale; "inf"/"nan" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

// ---------------------------------------------------------------- PGM

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, height x width

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

namespace detail {

struct HeaderReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (is_space(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    std::size_t value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1u << 30)) throw ParseError(std::string("PGM ") + what + " too large", start);
      ++pos;
    }
    if (pos == start) throw ParseError(std::string("PGM header: expected ") + what, start);
    return value;
  }
};

}  // namespace detail

inline GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw ParseError("not a binary PGM (magic P5)", 0);
  detail::HeaderReader h{bytes, 2};
  GrayImage img;
  img.width = h.number("width");
  img.height = h.number("height");
  const std::size_t maxval_pos = h.pos;
  const std::size_t maxval = h.number("maxval");
  if (maxval != 255) {
    throw ParseError("unsupported PGM maxval " + std::to_string(maxval) + " (only 255 is accepted)", maxval_pos);
  }
  if (img.width == 0 || img.height == 0) throw ParseError("PGM has zero size", maxval_pos);
  if (h.pos >= bytes.size() || !detail::HeaderReader::is_space(bytes[h.pos])) {
    throw ParseError("PGM header must end with one whitespace byte", h.pos);
  }
  ++h.pos;
  const std::size_t need = img.width * img.height;
  if (bytes.size() - h.pos < need) {
    throw ParseError("PGM raster truncated: need " + std::to_string(need) + " bytes", bytes.size());
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(h.pos + need));
  return img;
}

inline GrayImage read_pgm(const fs::path& path) { return parse_pgm(read_file(path)); }

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  if (img.pixels.size() != img.width * img.height) throw ShapeError("PGM pixel count does not match size");
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

inline void write_pgm(const GrayImage& img, const fs::path& path) { atomic_write(path, encode_pgm(img)); }

// ---------------------------------------------------------------- WAV

struct WavAudio {
  std::uint32_t sample_rate = 0;
  std::uint16_t channels = 0;  // as stored in the file
  std::vector<double> samples;  // mono, sample/32768
  std::optional<std::string> warning;
};

namespace detail {

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
inline std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace detail

/// RIFF/WAVE PCM16, mono or stereo. Stereo is averaged to mono with a warning.
inline WavAudio parse_wav(std::span<const std::uint8_t> b) {
  using detail::le16;
  using detail::le32;
  if (b.size() < 12 || std::string_view(reinterpret_cast<const char*>(b.data()), 4) != "RIFF" ||
      std::string_view(reinterpret_cast<const char*>(b.data()) + 8, 4) != "WAVE") {
    throw ParseError("not a RIFF/WAVE file", 0);
  }
  WavAudio audio;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::string_view id(reinterpret_cast<const char*>(b.data()) + pos, 4);
    const std::uint32_t size = le32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) throw ParseError("chunk '" + std::string(id) + "' overruns file", pos);
    if (id == "fmt ") {
      if (size < 16) throw ParseError("fmt chunk too short", pos);
      const std::uint16_t format = le16(b, body);
      if (format != 1) throw UnsupportedError("unsupported WAV format tag " + std::to_string(format) + " (PCM only)");
      audio.channels = le16(b, body + 2);
      audio.sample_rate = le32(b, body + 4);
      bits = le16(b, body + 14);
      if (bits != 16) throw UnsupportedError("unsupported WAV sample width " + std::to_string(bits) + " (PCM16 only)");
      if (audio.channels != 1 && audio.channels != 2) {
        throw UnsupportedError("unsupported WAV channel count " + std::to_string(audio.channels));
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("data chunk before fmt chunk", pos);
      const std::size_t frames = size / (2u * audio.channels);
      audio.samples.reserve(frames);
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < audio.channels; ++c) {
          acc += static_cast<std::int16_t>(le16(b, body + 2 * (f * audio.channels + c))) / 32768.0;
        }
        audio.samples.push_back(acc / audio.channels);
      }
      if (audio.channels == 2) audio.warning = "stereo input averaged to mono";
      return audio;
    }
    pos = body + size + (size & 1u);
  }
  throw ParseError("no data chunk", b.size());
}

inline WavAudio read_wav(const fs::path& path) { return parse_wav(read_file(path)); }

/// Mono PCM16; values are clamped to [-1, 1) then scaled by 32768 and rounded.
inline std::vector<std::uint8_t> encode_wav(std::span<const double> samples, std::uint32_t rate) {
  std::vector<std::uint8_t> out;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put32(out, 16);
  detail::put16(out, 1);
  detail::put16(out, 1);
  detail::put32(out, rate);
  detail::put32(out, rate * 2);
  detail::put16(out, 2);
  detail::put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put32(out, data_bytes);
  for (double s : samples) {
    const double q = std::nearbyint(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    detail::put16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

inline void write_wav(std::span<const double> samples, std::uint32_t rate, const fs::path& path) {
  atomic_write(path, encode_wav(samples, rate));
}

// ---------------------------------------------------------------- frame stacks

/// A video as equally sized grayscale frames.
struct FrameStack {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<GrayImage> frames;
};

inline std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.pgm", index);
  return buf;
}

/// Reads `dir/manifest.json` ({"frames", "width", "height", "files"}); without a
/// manifest, every *.pgm in the directory is taken in lexicographic order.
inline FrameStack read_frame_stack(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a frame directory: " + dir.string());
  std::vector<fs::path> files;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const auto bytes = read_file(manifest);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("frame manifest: ") + e.what(), e.byte);
    }
    if (!j.contains("files") || !j["files"].is_array()) throw ParseError("frame manifest lacks a files array", 0);
    for (const auto& f : j["files"]) files.push_back(dir / f.get<std::string>());
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw IoError("no frames in " + dir.string());
  FrameStack stack;
  for (const auto& f : files) {
    GrayImage img = read_pgm(f);
    if (stack.frames.empty()) {
      stack.width = img.width;
      stack.height = img.height;
    } else if (img.width != stack.width || img.height != stack.height) {
      throw ShapeError("frame " + f.filename().string() + " is " + std::to_string(img.width) + "x" +
                       std::to_string(img.height) + ", expected " + std::to_string(stack.width) + "x" +
                       std::to_string(stack.height));
    }
    stack.frames.push_back(std::move(img));
  }
  return stack;
}

inline void write_frame_stack(const FrameStack& stack, const fs::path& dir) {
  nlohmann::json j{{"frames", stack.frames.size()}, {"width", stack.width}, {"height", stack.height}};
  j["files"] = nlohmann::json::array();
  for (std::size_t i = 0; i < stack.frames.size(); ++i) {
    write_pgm(stack.frames[i], dir / frame_file_name(i));
    j["files"].push_back(frame_file_name(i));
  }
  atomic_write(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace spder::io
