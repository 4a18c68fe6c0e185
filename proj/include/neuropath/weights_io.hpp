#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "neuropath/binary_io.hpp"
#include "neuropath/network.hpp"

namespace neuropath {

// NPW1 layout, little-endian, no padding:
//   "NPW1" | u32 version=1 | u32 layer_count |
//   per layer: u8 kind | u32 in | u32 out | u32 kh | u32 kw | u32 stride |
//              conv only: f32 weights[out][in][kh][kw], f32 bias[out]

inline constexpr char kWeightsMagic[4] = {'N', 'P', 'W', '1'};
inline constexpr std::uint32_t kWeightsVersion = 1;

inline NetworkSpec load_weights(std::istream& in) {
  char magic[4] = {};
  io::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kWeightsMagic))
    throw Error(ErrorCode::bad_magic, "not an NPW1 weight file");
  const std::uint32_t version = io::read_u32_le(in, "version");
  if (version != kWeightsVersion)
    throw Error(ErrorCode::version_mismatch,
                "NPW1 version " + std::to_string(version) + ", expected 1");
  const std::uint32_t count = io::read_u32_le(in, "layer count");
  if (count > 4096) throw Error(ErrorCode::format, "implausible layer count " + std::to_string(count));

  std::vector<LayerSpec> layers;
  layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec layer;
    const std::uint8_t kind = io::read_u8(in, "layer kind");
    if (kind > 1) throw Error(ErrorCode::format, "unknown layer kind " + std::to_string(kind));
    layer.kind = static_cast<LayerKind>(kind);
    auto read_dim = [&](const char* what) {
      const std::uint32_t v = io::read_u32_le(in, what);
      if (v == 0 || v > (1u << 20))
        throw Error(ErrorCode::invalid_layer, std::string(what) + " = " + std::to_string(v));
      return static_cast<int>(v);
    };
    layer.in_channels = read_dim("in_channels");
    layer.out_channels = read_dim("out_channels");
    layer.kernel_h = read_dim("kernel_h");
    layer.kernel_w = read_dim("kernel_w");
    layer.stride = read_dim("stride");
    if (layer.is_conv()) {
      const std::size_t n = static_cast<std::size_t>(layer.out_channels) * layer.in_channels *
                            layer.kernel_h * layer.kernel_w;
      layer.weights.resize(n);
      for (auto& w : layer.weights) w = io::read_f32_le(in, "weights");
      layer.bias.resize(static_cast<std::size_t>(layer.out_channels));
      for (auto& b : layer.bias) b = io::read_f32_le(in, "bias");
    }
    layers.push_back(std::move(layer));
  }
  return NetworkSpec(std::move(layers));
}

inline NetworkSpec load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open weight file '" + path.string() + "'");
  return load_weights(in);
}

inline void save_weights(std::ostream& out, const NetworkSpec& net) {
  out.write(kWeightsMagic, 4);
  io::write_u32_le(out, kWeightsVersion);
  io::write_u32_le(out, static_cast<std::uint32_t>(net.layer_count()));
  for (const LayerSpec& layer : net.layers()) {
    io::write_u8(out, static_cast<std::uint8_t>(layer.kind));
    io::write_u32_le(out, static_cast<std::uint32_t>(layer.in_channels));
    io::write_u32_le(out, static_cast<std::uint32_t>(layer.out_channels));
    io::write_u32_le(out, static_cast<std::uint32_t>(layer.kernel_h));
    io::write_u32_le(out, static_cast<std::uint32_t>(layer.kernel_w));
    io::write_u32_le(out, static_cast<std::uint32_t>(layer.stride));
    if (layer.is_conv()) {
      for (float w : layer.weights) io::write_f32_le(out, w);
      for (float b : layer.bias) io::write_f32_le(out, b);
    }
  }
}

inline void save_weights(const std::filesystem::path& path, const NetworkSpec& net) {
  io::write_atomically(path, [&](std::ostream& out) { save_weights(out, net); });
}

}  // namespace neuropath
