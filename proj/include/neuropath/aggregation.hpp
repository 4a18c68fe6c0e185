#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "neuropath/cost_volume.hpp"
#include "neuropath/forward.hpp"
#include "neuropath/matching.hpp"
#include "neuropath/parallel.hpp"
#include "neuropath/semiring.hpp"
#include "neuropath/shift.hpp"

namespace neuropath {

/// Subsampling factors implied by a stack's layer geometry.
inline SubsampleChain subsample_chain(const ActivationStack& stack) {
  std::vector<int> q;
  for (int l = 1; l <= stack.top(); ++l) q.push_back(stack.shape(l).is_pool() ? stack.shape(l).stride : 1);
  return SubsampleChain(std::move(q));
}

/// Scores of paths starting at one layer, for every node and every
/// distinct shift at that layer's resolution.
/// values[(((x * height) + y) * channels + c) * shifts.size() + j]
struct LayerTable {
  int layer = 0;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<Shift> shifts;
  std::vector<double> values;

  LayerTable() = default;
  LayerTable(int l, int w, int h, int c, std::vector<Shift> s)
      : layer(l), width(w), height(h), channels(c), shifts(std::move(s)) {
    values.assign(static_cast<std::size_t>(w) * h * c * shifts.size(), 0.0);
  }

  std::size_t node(int x, int y, int c) const noexcept {
    return ((static_cast<std::size_t>(x) * height + y) * channels + c) * shifts.size();
  }
  double at(int x, int y, int c, std::size_t j) const noexcept { return values[node(x, y, c) + j]; }
  double& at(int x, int y, int c, std::size_t j) noexcept { return values[node(x, y, c) + j]; }

  std::size_t index_of(const Shift& s) const {
    const auto it = std::lower_bound(shifts.begin(), shifts.end(), s);
    if (it == shifts.end() || *it != s) throw Error(ErrorCode::shape, "shift not in layer table");
    return static_cast<std::size_t>(it - shifts.begin());
  }
};

namespace detail {

/// Distinct shifts per layer of the range, sorted, plus for every layer
/// the index of each shift's image one layer up.
struct ShiftLadder {
  std::vector<std::vector<Shift>> shifts;  // [layer - start]
  std::vector<std::vector<std::size_t>> up;  // [layer - start][j] -> index at layer + 1
  std::vector<std::size_t> base_index;       // D entry -> index at start
};

inline ShiftLadder build_ladder(const SubsampleChain& chain, const ShiftSet& set, LayerRange range) {
  ShiftLadder ladder;
  const int n = range.end - range.start + 1;
  ladder.shifts.resize(static_cast<std::size_t>(n));
  ladder.up.resize(static_cast<std::size_t>(n));
  std::vector<Shift> current(set.begin(), set.end());
  std::sort(current.begin(), current.end());
  current.erase(std::unique(current.begin(), current.end()), current.end());
  ladder.shifts[0] = current;
  for (int i = 1; i < n; ++i) {
    const int q = chain.factor(range.start + i);
    std::vector<Shift> next;
    next.reserve(current.size());
    for (const Shift& s : current) next.push_back(subsample_shift(s, q));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    auto& up = ladder.up[static_cast<std::size_t>(i - 1)];
    up.reserve(current.size());
    for (const Shift& s : current) {
      const auto it = std::lower_bound(next.begin(), next.end(), subsample_shift(s, q));
      up.push_back(static_cast<std::size_t>(it - next.begin()));
    }
    ladder.shifts[static_cast<std::size_t>(i)] = next;
    current = std::move(next);
  }
  for (const Shift& s : set) {
    const auto& base = ladder.shifts[0];
    ladder.base_index.push_back(
        static_cast<std::size_t>(std::lower_bound(base.begin(), base.end(), s) - base.begin()));
  }
  return ladder;
}

inline void check_aggregation_inputs(const ActivationStack& ref, const ActivationStack& srch,
                                     const ShiftSet& shifts, LayerRange range, ArcMode mode) {
  if (!ref.compatible_with(srch))
    throw Error(ErrorCode::mismatched_stacks, "reference and searched stacks differ in geometry");
  if (range.start < 0 || range.start > range.end || range.end > ref.top())
    throw Error(ErrorCode::layer_range, "range " + std::to_string(range.start) + ":" +
                                            std::to_string(range.end) + " not within computed layers 0:" +
                                            std::to_string(ref.top()));
  if (shifts.empty()) throw Error(ErrorCode::shape, "empty shift set");
  for (int l = range.start + 1; l <= range.end; ++l) {
    const LayerShape& s = ref.shape(l);
    if (s.is_conv() && (s.stride != 1 || s.kernel_h % 2 == 0 || s.kernel_w % 2 == 0))
      throw Error(ErrorCode::unsupported, "arc sets need stride-1 odd-kernel convolutions");
    if (s.is_pool() && (s.kernel_h != s.stride || s.kernel_w != s.stride))
      throw Error(ErrorCode::unsupported, "overlapping pooling is not supported");
  }
  (void)mode;
}

/// Channel fold of the table one layer up: V(x, y, j) = oplus_c U(x, y, c, j).
template <SemiringPolicy S>
std::vector<double> fold_channels(const LayerTable& t) {
  const std::size_t nd = t.shifts.size();
  std::vector<double> folded(static_cast<std::size_t>(t.width) * t.height * nd, S::zero);
  parallel_for(t.width, [&](int x) {
    for (int y = 0; y < t.height; ++y) {
      double* dst = &folded[(static_cast<std::size_t>(x) * t.height + y) * nd];
      for (int c = 0; c < t.channels; ++c) {
        const double* src = &t.values[t.node(x, y, c)];
        for (std::size_t j = 0; j < nd; ++j) dst[j] = S::oplus(dst[j], src[j]);
      }
    }
  });
  return folded;
}

}  // namespace detail

/// Linear-time backward pass. Computes, for every base position and shift,
/// the oplus over all siamese paths of the odot of matching values, by
/// folding scores from layer `range.end` down to the virtual base layer.
/// Only two adjacent layer tables are alive at once unless `retained` is
/// given, in which case every table is moved into it (top layer first).
template <SemiringPolicy S>
CostVolume backward(const ActivationStack& ref, const ActivationStack& srch, const ShiftSet& shifts,
                    LayerRange range, ArcMode mode, std::vector<LayerTable>* retained = nullptr) {
  detail::check_aggregation_inputs(ref, srch, shifts, range, mode);
  const SubsampleChain chain = subsample_chain(ref);
  const detail::ShiftLadder ladder = detail::build_ladder(chain, shifts, range);

  auto table_for = [&](int layer) {
    const ImageGrid& a = ref.at(layer);
    return LayerTable(layer, a.width(), a.height(), a.channels(),
                      ladder.shifts[static_cast<std::size_t>(layer - range.start)]);
  };

  // Top layer: matching values only.
  LayerTable upper = table_for(range.end);
  {
    const std::size_t nd = upper.shifts.size();
    parallel_for(upper.width, [&](int x) {
      for (std::size_t j = 0; j < nd; ++j) {
        const MatchContext ctx{ref, srch, range.end, upper.shifts[j]};
        for (int y = 0; y < upper.height; ++y)
          for (int c = 0; c < upper.channels; ++c) upper.at(x, y, c, j) = node_match<S>(ctx, x, y, c);
      }
    });
  }

  for (int l = range.end - 1; l >= range.start; --l) {
    LayerTable lower = table_for(l);
    const LayerShape& next = ref.shape(l + 1);
    const auto& up = ladder.up[static_cast<std::size_t>(l - range.start)];
    const std::size_t nd = lower.shifts.size();

    if (next.is_conv()) {
      const std::vector<double> folded = detail::fold_channels<S>(upper);
      const int rx = mode == ArcMode::central ? 0 : next.kernel_w / 2;
      const int ry = mode == ArcMode::central ? 0 : next.kernel_h / 2;
      const std::size_t und = upper.shifts.size();
      parallel_for(lower.width, [&](int x) {
        std::vector<double> sums(nd);
        const int x0 = std::max(0, x - rx), x1 = std::min(lower.width - 1, x + rx);
        for (int y = 0; y < lower.height; ++y) {
          const int y0 = std::max(0, y - ry), y1 = std::min(lower.height - 1, y + ry);
          for (std::size_t j = 0; j < nd; ++j) {
            double s = S::zero;
            for (int ox = x0; ox <= x1; ++ox)
              for (int oy = y0; oy <= y1; ++oy)
                s = S::oplus(s, folded[(static_cast<std::size_t>(ox) * upper.height + oy) * und + up[j]]);
            sums[j] = s;
          }
          for (std::size_t j = 0; j < nd; ++j) {
            const MatchContext ctx{ref, srch, l, lower.shifts[j]};
            for (int c = 0; c < lower.channels; ++c)
              lower.at(x, y, c, j) = S::odot(node_match<S>(ctx, x, y, c), sums[j]);
          }
        }
      });
    } else {
      const int q = next.stride;
      parallel_for(lower.width, [&](int x) {
        for (int y = 0; y < lower.height; ++y)
          for (std::size_t j = 0; j < nd; ++j) {
            const Shift& below = lower.shifts[j];
            const MatchContext ctx{ref, srch, l, below};
            for (int c = 0; c < lower.channels; ++c) {
              double s = S::zero;
              if (ref.mask(l + 1).selects(x, y, c)) {
                const double gate = pool_gate<S>(ref, srch, l + 1, x, y, c, below);
                s = S::oplus(s, S::odot(gate, upper.at(x / q, y / q, c, up[j])));
              }
              lower.at(x, y, c, j) = S::odot(node_match<S>(ctx, x, y, c), s);
            }
          }
      });
    }

    if (retained) retained->push_back(std::move(upper));
    upper = std::move(lower);
  }

  CostVolume volume(upper.width, upper.height, shifts);
  volume.range = range;
  volume.semiring = S::id;
  volume.arc_mode = mode;
  volume.method = VolumeMethod::path;
  parallel_for(upper.width, [&](int x) {
    for (int y = 0; y < upper.height; ++y)
      for (std::size_t d = 0; d < shifts.size(); ++d) {
        double s = S::zero;
        for (int c = 0; c < upper.channels; ++c) s = S::oplus(s, upper.at(x, y, c, ladder.base_index[d]));
        volume.at(x, y, d) = S::odot(virtual_match<S>(), s);
      }
  });
  if (retained) retained->push_back(std::move(upper));
  return volume;
}

inline CostVolume backward(const ActivationStack& ref, const ActivationStack& srch,
                           const ShiftSet& shifts, SemiringId semiring, LayerRange range,
                           ArcMode mode, std::vector<LayerTable>* retained = nullptr) {
  return visit_semiring(semiring, [&](auto policy) {
    return backward<decltype(policy)>(ref, srch, shifts, range, mode, retained);
  });
}

/// Per-origin counts over the base grid, x-major.
struct PathCounts {
  int width = 0;
  int height = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(int x, int y) const noexcept {
    return counts[static_cast<std::size_t>(x) * height + y];
  }
  std::uint64_t& at(int x, int y) noexcept { return counts[static_cast<std::size_t>(x) * height + y]; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts)
      if (__builtin_add_overflow(t, c, &t)) throw Error(ErrorCode::overflow, "total path count");
    return t;
  }
  std::uint64_t max() const { return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end()); }

  friend bool operator==(const PathCounts&, const PathCounts&) = default;
};

namespace detail {
inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorCode::overflow, "path count exceeds 64 bits");
  return r;
}
}  // namespace detail

/// Number of siamese paths per base origin, by the same backward recursion
/// with (+, x) over the constant 1. Pooling arcs exist only from the
/// reference argmax, so counts depend on the reference stack.
inline PathCounts count_paths(const ActivationStack& ref, LayerRange range, ArcMode mode) {
  if (range.start < 0 || range.start > range.end || range.end > ref.top())
    throw Error(ErrorCode::layer_range, "count_paths range outside computed layers");

  auto dims = [&](int l) { return std::array<int, 3>{ref.at(l).width(), ref.at(l).height(), ref.at(l).channels()}; };
  auto [w, h, c] = dims(range.end);
  std::vector<std::uint64_t> upper(static_cast<std::size_t>(w) * h * c, 1);
  for (int l = range.end - 1; l >= range.start; --l) {
    const auto [uw, uh, uc] = dims(l + 1);
    const auto [lw, lh, lc] = dims(l);
    std::vector<std::uint64_t> lower(static_cast<std::size_t>(lw) * lh * lc, 0);
    const LayerShape& next = ref.shape(l + 1);
    if (next.is_conv()) {
      std::vector<std::uint64_t> folded(static_cast<std::size_t>(uw) * uh, 0);
      for (std::size_t p = 0; p < folded.size(); ++p)
        for (int k = 0; k < uc; ++k) folded[p] = detail::checked_add(folded[p], upper[p * uc + k]);
      const int rx = mode == ArcMode::central ? 0 : next.kernel_w / 2;
      const int ry = mode == ArcMode::central ? 0 : next.kernel_h / 2;
      for (int x = 0; x < lw; ++x)
        for (int y = 0; y < lh; ++y) {
          std::uint64_t s = 0;
          for (int ox = std::max(0, x - rx); ox <= std::min(lw - 1, x + rx); ++ox)
            for (int oy = std::max(0, y - ry); oy <= std::min(lh - 1, y + ry); ++oy)
              s = detail::checked_add(s, folded[static_cast<std::size_t>(ox) * uh + oy]);
          for (int k = 0; k < lc; ++k) lower[(static_cast<std::size_t>(x) * lh + y) * lc + k] = s;
        }
    } else {
      const int q = next.stride;
      const ArgmaxMask& mask = ref.mask(l + 1);
      for (int x = 0; x < lw; ++x)
        for (int y = 0; y < lh; ++y)
          for (int k = 0; k < lc; ++k)
            if (mask.selects(x, y, k))
              lower[(static_cast<std::size_t>(x) * lh + y) * lc + k] =
                  upper[(static_cast<std::size_t>(x / q) * uh + y / q) * uc + k];
    }
    upper = std::move(lower);
    w = lw;
    h = lh;
    c = lc;
  }

  PathCounts counts{w, h, std::vector<std::uint64_t>(static_cast<std::size_t>(w) * h, 0)};
  for (std::size_t p = 0; p < counts.counts.size(); ++p)
    for (int k = 0; k < c; ++k) counts.counts[p] = detail::checked_add(counts.counts[p], upper[p * c + k]);
  return counts;
}

/// Node and arc counts of the (argmax-truncated) graph the backward pass
/// walks, including the virtual layer and its fan-out arcs.
struct GraphSize {
  std::uint64_t nodes = 0;
  std::uint64_t arcs = 0;
};

inline GraphSize graph_size(const ActivationStack& ref, LayerRange range, ArcMode mode) {
  GraphSize g;
  const ImageGrid& base = ref.at(range.start);
  g.nodes += static_cast<std::uint64_t>(base.width()) * base.height();
  g.arcs += base.size();
  for (int l = range.start; l <= range.end; ++l) g.nodes += ref.at(l).size();
  for (int l = range.start; l < range.end; ++l) {
    const ImageGrid& a = ref.at(l);
    const LayerShape& next = ref.shape(l + 1);
    if (next.is_pool()) {
      g.arcs += ref.at(l + 1).size();
      continue;
    }
    const std::uint64_t fan = static_cast<std::uint64_t>(a.channels()) * ref.at(l + 1).channels();
    if (mode == ArcMode::central) {
      g.arcs += static_cast<std::uint64_t>(a.width()) * a.height() * fan;
      continue;
    }
    const int rx = next.kernel_w / 2, ry = next.kernel_h / 2;
    for (int x = 0; x < a.width(); ++x) {
      const std::uint64_t nx = std::min(a.width() - 1, x + rx) - std::max(0, x - rx) + 1;
      for (int y = 0; y < a.height(); ++y) {
        const std::uint64_t ny = std::min(a.height() - 1, y + ry) - std::max(0, y - ry) + 1;
        g.arcs += nx * ny * fan;
      }
    }
  }
  return g;
}

}  // namespace neuropath
