#pragma once

// Checkpoint container, all integers and floats little-endian:
//
//   "SPDR"            4 bytes magic
//   version           u32 (currently 1)
//   in_dim            u32
//   out_dim           u32
//   hidden_width      u32
//   depth             u32
//   activation kind   u8   (0 relu, 1 semiperiodic)
//   damping           u8   (DampingKind ordinal)
//   encoding kind     u8   (0 none, 1 positional, 2 fourier features)
//   bias init         u8   (0 zero, 1 fan-in)
//   omega0            f64
//   clamp_eps         f64
//   pe bands          u32
//   pe base omega     f64
//   ff count          u32
//   ff scale          f64
//   ff seed           u64
//   seed              u64
//   then per layer:   rows u32, cols u32, rows*cols f64 weights (row-major), cols f64 biases

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spder/errors.hpp"
#include "spder/io.hpp"
#include "spder/network.hpp"

namespace spder {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

struct Writer {
  std::vector<std::uint8_t> out;
  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;
  void need(std::size_t n) {
    if (pos + n > in.size()) throw ParseError("checkpoint truncated", pos);
  }
  std::uint8_t u8() {
    need(1);
    return in[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace ckpt_detail

struct Checkpoint {
  MlpConfig config;
  MlpParams params;
};

inline std::vector<std::uint8_t> encode_checkpoint(const MlpConfig& config, const MlpParams& params) {
  check_params(params, config);
  ckpt_detail::Writer w;
  w.out = {'S', 'P', 'D', 'R'};
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(config.in_dim));
  w.u32(static_cast<std::uint32_t>(config.out_dim));
  w.u32(static_cast<std::uint32_t>(config.hidden_width));
  w.u32(static_cast<std::uint32_t>(config.depth));
  w.u8(static_cast<std::uint8_t>(config.activation.kind));
  w.u8(static_cast<std::uint8_t>(config.activation.damping));
  w.u8(static_cast<std::uint8_t>(config.encoding.index()));
  w.u8(static_cast<std::uint8_t>(config.bias_init));
  w.f64(config.activation.omega0);
  w.f64(config.activation.clamp_eps);
  const auto pe = std::holds_alternative<PositionalEncoding>(config.encoding)
                      ? std::get<PositionalEncoding>(config.encoding)
                      : PositionalEncoding{};
  const auto ff = std::holds_alternative<FourierFeatures>(config.encoding)
                      ? std::get<FourierFeatures>(config.encoding)
                      : FourierFeatures{};
  w.u32(static_cast<std::uint32_t>(pe.bands));
  w.f64(pe.base_omega);
  w.u32(static_cast<std::uint32_t>(ff.count));
  w.f64(ff.scale);
  w.u64(ff.seed);
  w.u64(config.seed);
  for (const auto& layer : params.layers) {
    w.u32(static_cast<std::uint32_t>(layer.weight.rows()));
    w.u32(static_cast<std::uint32_t>(layer.weight.cols()));
    for (double v : layer.weight.data()) w.f64(v);
    for (double v : layer.bias) w.f64(v);
  }
  return std::move(w.out);
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ckpt_detail::Reader r{bytes};
  r.need(4);
  if (std::memcmp(bytes.data(), "SPDR", 4) != 0) throw ParseError("not a checkpoint (magic SPDR)", 0);
  r.pos = 4;
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version), 4);
  Checkpoint ck;
  auto& c = ck.config;
  c.in_dim = r.u32();
  c.out_dim = r.u32();
  c.hidden_width = r.u32();
  c.depth = r.u32();
  const std::size_t kind_pos = r.pos;
  const auto act_kind = r.u8();
  const auto damping = r.u8();
  const auto enc_kind = r.u8();
  const auto bias = r.u8();
  if (act_kind > 1 || damping > static_cast<std::uint8_t>(DampingKind::Square) || enc_kind > 2 || bias > 1) {
    throw ParseError("checkpoint has an unknown enum value", kind_pos);
  }
  c.activation.kind = static_cast<ActivationKind>(act_kind);
  c.activation.damping = static_cast<DampingKind>(damping);
  c.bias_init = static_cast<BiasInit>(bias);
  c.activation.omega0 = r.f64();
  c.activation.clamp_eps = r.f64();
  PositionalEncoding pe;
  pe.bands = r.u32();
  pe.base_omega = r.f64();
  FourierFeatures ff;
  ff.count = r.u32();
  ff.scale = r.f64();
  ff.seed = r.u64();
  c.seed = r.u64();
  if (enc_kind == 0) c.encoding = NoEncoding{};
  if (enc_kind == 1) c.encoding = pe;
  if (enc_kind == 2) c.encoding = ff;
  try {
    c.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("checkpoint config invalid: ") + e.what(), 8);
  }
  const auto widths = c.layer_widths();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t at = r.pos;
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    if (rows != widths[l] || cols != widths[l + 1]) throw ParseError("checkpoint layer shape mismatch", at);
    DenseLayer layer{Matrix(rows, cols), std::vector<double>(cols)};
    for (double& v : layer.weight.data()) v = r.f64();
    for (double& v : layer.bias) v = r.f64();
    ck.params.layers.push_back(std::move(layer));
  }
  if (r.pos != bytes.size()) throw ParseError("trailing bytes after checkpoint", r.pos);
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const MlpConfig& config, const MlpParams& params) {
  io::atomic_write(path, encode_checkpoint(config, params));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace spder
