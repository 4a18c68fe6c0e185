#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "neuropath/binary_io.hpp"
#include "neuropath/cost_volume.hpp"

namespace neuropath {

// NPCV layout, little-endian, no padding:
//   "NPCV" | u32 version=1 | u32 H | u32 W | u32 D |
//   u8 semiring (0 sum-product, 1 max-product, 2 max-min, 255 corr baseline) |
//   u8 arc mode (0 full, 1 central) | u32 s | u32 t |
//   f32 values, x-major, then y, then d
// Shifts are implicit: d-th slice is horizontal shift d.

inline constexpr char kVolumeMagic[4] = {'N', 'P', 'C', 'V'};
inline constexpr std::uint32_t kVolumeVersion = 1;
inline constexpr std::uint8_t kCorrSemiringTag = 255;

inline void save_volume(std::ostream& out, const CostVolume& v) {
  if (v.shifts != ShiftSet::stereo(static_cast<int>(v.shift_count()) - 1))
    throw Error(ErrorCode::unsupported, "NPCV stores stereo shift sets 0..D-1 only");
  out.write(kVolumeMagic, 4);
  io::write_u32_le(out, kVolumeVersion);
  io::write_u32_le(out, static_cast<std::uint32_t>(v.height));
  io::write_u32_le(out, static_cast<std::uint32_t>(v.width));
  io::write_u32_le(out, static_cast<std::uint32_t>(v.shift_count()));
  io::write_u8(out, v.method == VolumeMethod::corr ? kCorrSemiringTag
                                                   : static_cast<std::uint8_t>(v.semiring));
  io::write_u8(out, static_cast<std::uint8_t>(v.arc_mode));
  io::write_u32_le(out, static_cast<std::uint32_t>(v.range.start));
  io::write_u32_le(out, static_cast<std::uint32_t>(v.range.end));
  for (double value : v.values) io::write_f32_le(out, static_cast<float>(value));
}

inline void save_volume(const std::filesystem::path& path, const CostVolume& v) {
  io::write_atomically(path, [&](std::ostream& out) { save_volume(out, v); });
}

inline CostVolume load_volume(std::istream& in) {
  char magic[4] = {};
  io::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kVolumeMagic))
    throw Error(ErrorCode::bad_magic, "not an NPCV cost volume");
  const std::uint32_t version = io::read_u32_le(in, "version");
  if (version != kVolumeVersion)
    throw Error(ErrorCode::version_mismatch, "NPCV version " + std::to_string(version));
  const std::uint32_t h = io::read_u32_le(in, "height");
  const std::uint32_t w = io::read_u32_le(in, "width");
  const std::uint32_t d = io::read_u32_le(in, "shift count");
  if (h == 0 || w == 0 || d == 0 || h > (1u << 16) || w > (1u << 16) || d > (1u << 16))
    throw Error(ErrorCode::format, "implausible NPCV extents");
  const std::uint8_t sr = io::read_u8(in, "semiring");
  const std::uint8_t mode = io::read_u8(in, "arc mode");
  if ((sr > 2 && sr != kCorrSemiringTag) || mode > 1)
    throw Error(ErrorCode::format, "unknown NPCV semiring or arc mode");

  CostVolume v(static_cast<int>(w), static_cast<int>(h), ShiftSet::stereo(static_cast<int>(d) - 1));
  v.method = sr == kCorrSemiringTag ? VolumeMethod::corr : VolumeMethod::path;
  v.semiring = sr == kCorrSemiringTag ? SemiringId::sum_product : static_cast<SemiringId>(sr);
  v.arc_mode = static_cast<ArcMode>(mode);
  v.range.start = static_cast<int>(io::read_u32_le(in, "start layer"));
  v.range.end = static_cast<int>(io::read_u32_le(in, "end layer"));
  for (double& value : v.values) value = io::read_f32_le(in, "values");
  return v;
}

inline CostVolume load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open volume '" + path.string() + "'");
  return load_volume(in);
}

}  // namespace neuropath
