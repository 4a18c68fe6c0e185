#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "neuropath/error.hpp"
#include "neuropath/semiring.hpp"
#include "neuropath/shift.hpp"

namespace neuropath {

enum class ArcMode : std::uint8_t { full = 0, central = 1 };

inline std::string_view to_string(ArcMode mode) {
  return mode == ArcMode::full ? "full" : "central";
}

inline ArcMode parse_arc_mode(std::string_view name) {
  if (name == "full") return ArcMode::full;
  if (name == "central") return ArcMode::central;
  throw Error(ErrorCode::format, "unknown arc mode '" + std::string(name) + "'");
}

/// Which engine produced a volume.
enum class VolumeMethod : std::uint8_t { path, corr };

/// Aggregation range: the base (virtual-layer) grid is layer `start`'s
/// output; layer 0 means the input image.
struct LayerRange {
  int start = 2;
  int end = 8;

  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

/// Per-pixel, per-shift scores. values[((x * height) + y) * shift_count + d].
struct CostVolume {
  int width = 0;
  int height = 0;
  ShiftSet shifts;
  std::vector<double> values;
  std::vector<std::uint8_t> reliable;  // per pixel, x-major
  LayerRange range;
  SemiringId semiring = SemiringId::sum_product;
  ArcMode arc_mode = ArcMode::full;
  VolumeMethod method = VolumeMethod::path;
  bool non_horizontal_shifts = false;

  CostVolume() = default;
  CostVolume(int w, int h, ShiftSet s, double fill = 0.0)
      : width(w), height(h), shifts(std::move(s)) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::shape, "cost volume extents must be positive");
    values.assign(static_cast<std::size_t>(w) * h * shifts.size(), fill);
    reliable.assign(static_cast<std::size_t>(w) * h, 1);
    non_horizontal_shifts = !shifts.horizontal_only();
  }

  std::size_t shift_count() const noexcept { return shifts.size(); }
  std::size_t pixel_index(int x, int y) const noexcept {
    return static_cast<std::size_t>(x) * height + y;
  }
  double& at(int x, int y, std::size_t d) noexcept {
    return values[pixel_index(x, y) * shift_count() + d];
  }
  double at(int x, int y, std::size_t d) const noexcept {
    return values[pixel_index(x, y) * shift_count() + d];
  }
  bool is_reliable(int x, int y) const noexcept { return reliable[pixel_index(x, y)] != 0; }
};

}  // namespace neuropath
