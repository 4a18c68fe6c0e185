#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "neuropath/aggregation.hpp"
#include "neuropath/random.hpp"
#include "neuropath/stereo.hpp"

namespace neuropath {

struct BenchConfig {
  std::vector<int> depths{2, 4, 8};
  int extent = 64;
  int channels = 4;
  int max_shift = 15;  // |D| = 16
  int repeats = 5;
  std::uint64_t seed = 1;
  SemiringId semiring = SemiringId::sum_product;
};

struct BenchRow {
  int layers = 0;
  double seconds = 0.0;  // best of `repeats`
  std::uint64_t arcs = 0;
  std::uint64_t max_paths = 0;  // per origin

  double seconds_per_arc(std::size_t shifts) const {
    return seconds / (static_cast<double>(arcs) * static_cast<double>(shifts));
  }
};

/// Times the backward pass on all-conv toy networks of each depth, with
/// the input image as base so every layer adds the same work.
inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  const ShiftSet shifts = ShiftSet::stereo(cfg.max_shift);
  const SyntheticPair pair = make_synthetic_pair(cfg.extent, cfg.extent, 3, 0.02, cfg.seed);
  for (int depth : cfg.depths) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(depth));
    const NetworkSpec net = random_network(rng, std::string(static_cast<std::size_t>(depth), 'c'),
                                           std::vector<int>(static_cast<std::size_t>(depth), cfg.channels));
    const LayerRange range{0, depth};
    const ActivationStack ref = forward(net, pair.reference, 0, depth);
    const ActivationStack srch = forward(net, pair.searched, 0, depth);
    BenchRow row;
    row.layers = depth;
    row.arcs = graph_size(ref, range, ArcMode::full).arcs;
    row.max_paths = count_paths(ref, range, ArcMode::full).max();
    row.seconds = 1e300;
    for (int r = 0; r < std::max(1, cfg.repeats); ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const CostVolume v = backward(ref, srch, shifts, cfg.semiring, range, ArcMode::full);
      const auto t1 = std::chrono::steady_clock::now();
      if (v.values.empty()) return rows;
      row.seconds = std::min(row.seconds, std::chrono::duration<double>(t1 - t0).count());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace neuropath
