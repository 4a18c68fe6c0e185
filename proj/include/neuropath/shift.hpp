#pragma once

#include <algorithm>
#include <compare>
#include <set>
#include <string>
#include <vector>

#include "neuropath/error.hpp"

namespace neuropath {

/// Integer displacement (x, y, channel). Matching compares reference
/// position p against searched position p - shift.
struct Shift {
  int dx = 0;
  int dy = 0;
  int dc = 0;

  friend auto operator<=>(const Shift&, const Shift&) = default;
};

inline std::string to_string(const Shift& s) {
  return "(" + std::to_string(s.dx) + "," + std::to_string(s.dy) + "," + std::to_string(s.dc) + ")";
}

/// Floor division rounding toward negative infinity.
constexpr int floor_div(int a, int b) {
  const int q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

/// Shift seen one layer up through a subsampling factor q.
inline Shift subsample_shift(const Shift& shift, int q) {
  if (q <= 0) throw Error(ErrorCode::invalid_factor, "subsampling factor must be positive");
  return {floor_div(shift.dx, q), floor_div(shift.dy, q), floor_div(shift.dc, q)};
}

class ShiftSet {
 public:
  ShiftSet() = default;

  explicit ShiftSet(std::vector<Shift> shifts) : shifts_(std::move(shifts)) {
    std::set<Shift> seen;
    for (const Shift& s : shifts_) {
      if (s.dc != 0)
        throw Error(ErrorCode::shape, "shift " + to_string(s) + " has a channel component");
      if (!seen.insert(s).second)
        throw Error(ErrorCode::shape, "duplicate shift " + to_string(s));
    }
  }

  /// Horizontal stereo shifts (0,0,0) ... (max_disparity,0,0).
  static ShiftSet stereo(int max_disparity) {
    if (max_disparity < 0) throw Error(ErrorCode::shape, "max disparity must be non-negative");
    std::vector<Shift> shifts;
    shifts.reserve(static_cast<std::size_t>(max_disparity) + 1);
    for (int d = 0; d <= max_disparity; ++d) shifts.push_back({d, 0, 0});
    return ShiftSet(std::move(shifts));
  }

  std::size_t size() const noexcept { return shifts_.size(); }
  bool empty() const noexcept { return shifts_.empty(); }
  const Shift& operator[](std::size_t i) const noexcept { return shifts_[i]; }
  auto begin() const noexcept { return shifts_.begin(); }
  auto end() const noexcept { return shifts_.end(); }
  const std::vector<Shift>& shifts() const noexcept { return shifts_; }

  bool horizontal_only() const noexcept {
    return std::all_of(shifts_.begin(), shifts_.end(), [](const Shift& s) { return s.dy == 0; });
  }

  friend bool operator==(const ShiftSet&, const ShiftSet&) = default;

 private:
  std::vector<Shift> shifts_;
};

/// Per-layer subsampling factors q_1 ... q_L (1 for convolutions, the
/// stride for pooling). Layer 0 is the input and has no factor.
class SubsampleChain {
 public:
  SubsampleChain() = default;

  explicit SubsampleChain(std::vector<int> factors) : factors_(std::move(factors)) {
    for (int q : factors_)
      if (q <= 0) throw Error(ErrorCode::invalid_factor, "subsampling factor must be positive");
  }

  int layer_count() const noexcept { return static_cast<int>(factors_.size()); }

  /// q_layer for 1 <= layer <= L.
  int factor(int layer) const {
    if (layer < 1 || layer > layer_count())
      throw Error(ErrorCode::layer_range, "layer " + std::to_string(layer));
    return factors_[static_cast<std::size_t>(layer - 1)];
  }

  /// Product of factors of layers from+1 ... to.
  int product(int from, int to) const {
    check_range(from, to);
    int p = 1;
    for (int l = from + 1; l <= to; ++l) p *= factor(l);
    return p;
  }

  /// Shift `shift`, expressed at layer `from`, carried up to layer `to`.
  Shift carry(int from, int to, Shift shift) const {
    check_range(from, to);
    for (int l = from + 1; l <= to; ++l) shift = subsample_shift(shift, factor(l));
    return shift;
  }

  const std::vector<int>& factors() const noexcept { return factors_; }

 private:
  void check_range(int from, int to) const {
    if (from < 0 || to > layer_count() || from > to)
      throw Error(ErrorCode::layer_range, "range " + std::to_string(from) + ".." +
                                              std::to_string(to) + " outside 0.." +
                                              std::to_string(layer_count()));
  }

  std::vector<int> factors_;
};

/// Free-function form of SubsampleChain::carry.
inline Shift carry_shift(const SubsampleChain& chain, int from_layer, int to_layer, const Shift& shift) {
  return chain.carry(from_layer, to_layer, shift);
}

}  // namespace neuropath
