#pragma once

#include <algorithm>
#include <string>

#include "neuropath/forward.hpp"
#include "neuropath/semiring.hpp"
#include "neuropath/shift.hpp"

namespace neuropath {

/// Similarity of two non-negative activations: min/max, and 0 when both
/// are 0. Lies in [0, 1] and equals 1 iff w == v > 0.
inline double conv_match(double w, double v) {
  if (w < 0.0 || v < 0.0)
    throw Error(ErrorCode::domain, "conv_match needs non-negative activations, got " +
                                       std::to_string(w) + ", " + std::to_string(v));
  if (w == 0.0 && v == 0.0) return 0.0;
  return std::min(w, v) / std::max(w, v);
}

/// The virtual base layer carries no evidence of its own.
template <SemiringPolicy S>
constexpr double virtual_match() {
  return S::one;
}

/// Reference/searched stacks at one layer and one shift (already carried
/// to that layer's resolution).
struct MatchContext {
  const ActivationStack& reference;
  const ActivationStack& searched;
  int layer;
  Shift shift;
};

/// Matching value of reference node (x, y, c) against searched node
/// (x, y, c) - shift. Off-grid searched nodes give the semiring zero. Input
/// pixels and conv activations use conv_match; pooled nodes are neutral
/// because pooling is scored by pool_gate on the incoming arc.
template <SemiringPolicy S>
double node_match(const MatchContext& ctx, int x, int y, int c) {
  const ImageGrid& a = ctx.reference.at(ctx.layer);
  const ImageGrid& b = ctx.searched.at(ctx.layer);
  const int sx = x - ctx.shift.dx, sy = y - ctx.shift.dy;
  if (!b.contains(sx, sy)) return S::zero;
  if (ctx.layer > 0 && ctx.reference.shape(ctx.layer).is_pool()) return S::one;
  return conv_match(a(x, y, c), b(sx, sy, c));
}

/// Gate on the arc from input node (x, y, c) of pooling layer `pool_layer`
/// to its pooled output, with `shift` the shift at the pooling input. One
/// iff (x, y) wins its reference window and (x, y) - shift wins its own
/// searched window; an off-grid searched position gives zero.
template <SemiringPolicy S>
double pool_gate(const ActivationStack& reference, const ActivationStack& searched, int pool_layer,
                 int x, int y, int c, const Shift& shift) {
  const LayerShape& shape = reference.shape(pool_layer);
  if (!shape.is_pool() || shape.kernel_h != shape.stride || shape.kernel_w != shape.stride)
    throw Error(ErrorCode::unsupported,
                "pool gate needs a non-overlapping pooling layer at " + std::to_string(pool_layer));
  if (!reference.mask(pool_layer).selects(x, y, c)) return S::zero;
  const ImageGrid& below = searched.at(pool_layer - 1);
  const int sx = x - shift.dx, sy = y - shift.dy;
  if (!below.contains(sx, sy)) return S::zero;
  return searched.mask(pool_layer).selects(sx, sy, c) ? S::one : S::zero;
}

}  // namespace neuropath
