#pragma once

#include <cstdint>
#include <vector>

#include "neuropath/aggregation.hpp"

namespace neuropath {

struct BruteForceResult {
  CostVolume volume;
  PathCounts counts;
};

namespace detail {

/// Output positions of a conv layer that read input coordinate `v` along one
/// axis, derived from the forward sampling rule clamp(o + k - r).
inline std::vector<int> conv_readers(int v, int extent, int kernel, ArcMode mode) {
  const int r = kernel / 2;
  std::vector<int> readers;
  for (int o = 0; o < extent; ++o) {
    bool reads = false;
    if (mode == ArcMode::central) {
      reads = (o == v);
    } else {
      for (int k = 0; k < kernel && !reads; ++k) reads = clamp_index(o + k - r, extent) == v;
    }
    if (reads) readers.push_back(o);
  }
  return readers;
}

template <SemiringPolicy S>
struct PathEnumerator {
  const ActivationStack& ref;
  const ActivationStack& srch;
  LayerRange range;
  ArcMode mode;
  std::vector<Shift> carried;  // shift at each layer, indexed by layer
  double total = S::zero;
  std::uint64_t paths = 0;

  void walk(int layer, int x, int y, int c, double acc) {
    if (layer == range.end) {
      total = S::oplus(total, acc);
      paths = checked_add(paths, 1);
      return;
    }
    const int next = layer + 1;
    const LayerShape& shape = ref.shape(next);
    const MatchContext up_ctx{ref, srch, next, carried[static_cast<std::size_t>(next)]};
    if (shape.is_pool()) {
      if (!ref.mask(next).selects(x, y, c)) return;
      const double gate = pool_gate<S>(ref, srch, next, x, y, c, carried[static_cast<std::size_t>(layer)]);
      const int px = x / shape.stride, py = y / shape.stride;
      walk(next, px, py, c, S::odot(S::odot(acc, gate), node_match<S>(up_ctx, px, py, c)));
      return;
    }
    const ImageGrid& out = ref.at(next);
    const auto xs = conv_readers(x, out.width(), shape.kernel_w, mode);
    const auto ys = conv_readers(y, out.height(), shape.kernel_h, mode);
    for (int ox : xs)
      for (int oy : ys)
        for (int oc = 0; oc < out.channels(); ++oc)
          walk(next, ox, oy, oc, S::odot(acc, node_match<S>(up_ctx, ox, oy, oc)));
  }
};

}  // namespace detail

/// Reference oracle: enumerates every siamese path explicitly and folds
/// M(P) along it, then oplus-accumulates per origin and shift. Exponential
/// in depth; meant for small networks.
template <SemiringPolicy S>
BruteForceResult brute_force(const ActivationStack& ref, const ActivationStack& srch,
                             const ShiftSet& shifts, LayerRange range, ArcMode mode) {
  detail::check_aggregation_inputs(ref, srch, shifts, range, mode);
  const SubsampleChain chain = subsample_chain(ref);
  const ImageGrid& base = ref.at(range.start);

  BruteForceResult result{CostVolume(base.width(), base.height(), shifts),
                          PathCounts{base.width(), base.height(),
                                     std::vector<std::uint64_t>(
                                         static_cast<std::size_t>(base.width()) * base.height(), 0)}};
  result.volume.range = range;
  result.volume.semiring = S::id;
  result.volume.arc_mode = mode;

  for (std::size_t d = 0; d < shifts.size(); ++d) {
    detail::PathEnumerator<S> walker{ref, srch, range, mode, {}};
    walker.carried.resize(static_cast<std::size_t>(range.end) + 1);
    for (int l = range.start; l <= range.end; ++l)
      walker.carried[static_cast<std::size_t>(l)] = chain.carry(range.start, l, shifts[d]);
    const MatchContext base_ctx{ref, srch, range.start, shifts[d]};
    for (int x = 0; x < base.width(); ++x)
      for (int y = 0; y < base.height(); ++y) {
        walker.total = S::zero;
        walker.paths = 0;
        for (int c = 0; c < base.channels(); ++c)
          walker.walk(range.start, x, y, c,
                      S::odot(virtual_match<S>(), node_match<S>(base_ctx, x, y, c)));
        result.volume.at(x, y, d) = walker.total;
        if (d == 0) result.counts.at(x, y) = walker.paths;
      }
  }
  return result;
}

inline BruteForceResult brute_force(const ActivationStack& ref, const ActivationStack& srch,
                                    const ShiftSet& shifts, SemiringId semiring, LayerRange range,
                                    ArcMode mode) {
  return visit_semiring(semiring, [&](auto policy) {
    return brute_force<decltype(policy)>(ref, srch, shifts, range, mode);
  });
}

}  // namespace neuropath
