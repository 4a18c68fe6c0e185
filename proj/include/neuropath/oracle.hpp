#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "neuropath/aggregation.hpp"
#include "neuropath/brute_force.hpp"
#include "neuropath/random.hpp"
#include "neuropath/stereo.hpp"

namespace neuropath {

/// One randomized backward-vs-enumeration instance.
struct OracleCase {
  std::uint64_t seed = 0;
  std::string pattern;
  NetworkSpec net;
  ImageGrid reference;
  ImageGrid searched;
  ShiftSet shifts;
  LayerRange range;
  SemiringId semiring = SemiringId::sum_product;
  ArcMode arc_mode = ArcMode::full;

  std::string describe() const {
    std::ostringstream os;
    os << "seed=" << seed << " net=" << pattern << " extent=" << reference.width() << "x"
       << reference.height() << " range=" << range.start << ":" << range.end
       << " semiring=" << to_string(semiring) << " arcs=" << to_string(arc_mode) << " shifts=";
    for (const Shift& s : shifts) os << to_string(s);
    return os.str();
  }
};

struct OracleOutcome {
  double max_relative_deviation = 0.0;
  bool values_match = false;
  bool counts_match = false;
  std::uint64_t enumerated_paths = 0;

  bool passed() const noexcept { return values_match && counts_match; }
};

/// Largest |a - b| / max(|a|, |b|) over all entries (0 where a == b).
inline double max_relative_deviation(const CostVolume& a, const CostVolume& b) {
  if (a.values.size() != b.values.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double x = a.values[i], y = b.values[i];
    if (x == y) continue;
    worst = std::max(worst, std::abs(x - y) / std::max(std::abs(x), std::abs(y)));
  }
  return worst;
}

/// Tolerance the oracle suite demands: exact for max-min, 1e-9 relative
/// for the product-based semirings.
inline double oracle_tolerance(SemiringId id) { return id == SemiringId::max_min ? 0.0 : 1e-9; }

/// Random toy instance: at most 4 layers, 3 channels, extents 8, 4 shifts.
/// `semiring`/`mode` fix those choices; otherwise they cycle with `seed`.
inline OracleCase make_oracle_case(std::uint64_t seed, const SemiringId* semiring = nullptr,
                                   const ArcMode* mode = nullptr) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 17);
  OracleCase c;
  c.seed = seed;
  const int layers = rng.integer(1, 4);
  int pools = 0;
  for (int i = 0; i < layers; ++i) {
    const bool pool = i > 0 && pools < 2 && c.pattern.back() == 'c' && rng.uniform() < 0.35;
    c.pattern += pool ? 'p' : 'c';
    pools += pool;
  }
  std::vector<int> widths;
  for (char k : c.pattern)
    if (k == 'c') widths.push_back(rng.integer(1, 3));
  c.net = random_network(rng, c.pattern, widths);

  const int stride = 1 << pools;
  const int w = stride * rng.integer(stride == 1 ? 2 : 1, 8 / stride);
  const int h = stride * rng.integer(1, 8 / stride);
  const int true_shift = rng.integer(0, std::min(3, w - 1));
  SyntheticPair pair = make_synthetic_pair(w, h, true_shift, 0.02, rng.next());
  c.reference = std::move(pair.reference);
  c.searched = std::move(pair.searched);

  std::vector<Shift> shifts;
  const int count = rng.integer(1, 4);
  while (static_cast<int>(shifts.size()) < count) {
    Shift s{rng.integer(-1, 4), rng.uniform() < 0.2 ? rng.integer(-1, 1) : 0, 0};
    if (std::find(shifts.begin(), shifts.end(), s) == shifts.end()) shifts.push_back(s);
  }
  c.shifts = ShiftSet(std::move(shifts));
  c.range = {rng.integer(0, layers), layers};
  c.semiring = semiring ? *semiring : static_cast<SemiringId>(seed % 3);
  c.arc_mode = mode ? *mode : ((seed / 3) % 2 == 0 ? ArcMode::full : ArcMode::central);
  return c;
}

inline OracleOutcome run_oracle_case(const OracleCase& c) {
  const ActivationStack ref = forward(c.net, c.reference, c.range.start, c.range.end);
  const ActivationStack srch = forward(c.net, c.searched, c.range.start, c.range.end);
  const CostVolume fast = backward(ref, srch, c.shifts, c.semiring, c.range, c.arc_mode);
  const BruteForceResult slow = brute_force(ref, srch, c.shifts, c.semiring, c.range, c.arc_mode);
  const PathCounts counted = count_paths(ref, c.range, c.arc_mode);

  OracleOutcome out;
  out.max_relative_deviation = max_relative_deviation(fast, slow.volume);
  out.values_match = out.max_relative_deviation <= oracle_tolerance(c.semiring);
  out.counts_match = counted == slow.counts;
  out.enumerated_paths = slow.counts.total();
  return out;
}

}  // namespace neuropath
