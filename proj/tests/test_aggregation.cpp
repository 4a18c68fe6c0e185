#include <gtest/gtest.h>

#include "support.hpp"

using namespace neuropath;
using testing_support::close_rel;
using testing_support::fixture;

namespace {

constexpr SemiringId kAll[] = {SemiringId::sum_product, SemiringId::max_product, SemiringId::max_min};
constexpr ArcMode kModes[] = {ArcMode::full, ArcMode::central};

struct Pair {
  ActivationStack ref, srch;
};

Pair stacks(const NetworkSpec& net, const ImageGrid& a, const ImageGrid& b, int start, int end) {
  return {forward(net, a, start, end), forward(net, b, start, end)};
}

void expect_volumes_match(const CostVolume& got, const CostVolume& want, SemiringId id) {
  ASSERT_EQ(got.values.size(), want.values.size());
  const double tol = oracle_tolerance(id);
  for (std::size_t i = 0; i < got.values.size(); ++i)
    ASSERT_TRUE(close_rel(got.values[i], want.values[i], tol))
        << to_string(id) << " entry " << i << ": " << got.values[i] << " vs " << want.values[i];
}

}  // namespace

TEST(Backward, SingleLayerIsChannelFoldOfMatches) {
  neuropath::Rng rng(21);
  const NetworkSpec net = random_network(rng, "c", {3});
  const SyntheticPair p = make_synthetic_pair(7, 5, 2, 0.05, 9);
  const Pair s = stacks(net, p.reference, p.searched, 1, 1);
  const ShiftSet shifts({{0, 0, 0}, {2, 0, 0}, {-1, 1, 0}});
  for (SemiringId id : kAll) {
    const Semiring sr = make_semiring(id);
    const CostVolume v = backward(s.ref, s.srch, shifts, id, {1, 1}, ArcMode::full);
    for (int x = 0; x < 7; ++x)
      for (int y = 0; y < 5; ++y)
        for (std::size_t d = 0; d < shifts.size(); ++d) {
          const int sx = x - shifts[d].dx, sy = y - shifts[d].dy;
          double want = sr.zero;
          if (sx >= 0 && sx < 7 && sy >= 0 && sy < 5)
            for (int c = 0; c < 3; ++c) want = sr.oplus(want, conv_match(s.ref.at(1)(x, y, c), s.srch.at(1)(sx, sy, c)));
          EXPECT_DOUBLE_EQ(v.at(x, y, d), want) << to_string(id);
        }
  }
}

TEST(Backward, ToyFixtureMatchesEnumeration) {
  const NetworkSpec net = load_weights(fixture("toy_cpc.npw1"));
  const SyntheticPair p = make_synthetic_pair(6, 4, 1, 0.02, 3);
  for (int start = 0; start <= 3; ++start) {
    const Pair s = stacks(net, p.reference, p.searched, start, 3);
    for (SemiringId id : kAll)
      for (ArcMode mode : kModes) {
        const ShiftSet shifts = ShiftSet::stereo(3);
        const CostVolume fast = backward(s.ref, s.srch, shifts, id, {start, 3}, mode);
        const BruteForceResult slow = brute_force(s.ref, s.srch, shifts, id, {start, 3}, mode);
        expect_volumes_match(fast, slow.volume, id);
        EXPECT_EQ(count_paths(s.ref, {start, 3}, mode), slow.counts);
      }
  }
}

TEST(Backward, RandomCasesMatchEnumeration) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const OracleCase c = make_oracle_case(seed);
    const OracleOutcome o = run_oracle_case(c);
    EXPECT_TRUE(o.values_match) << c.describe() << " deviation " << o.max_relative_deviation;
    EXPECT_TRUE(o.counts_match) << c.describe();
  }
}

TEST(Backward, VirtualLayerFoldsChannels) {
  // Two channels at the base: the result is the oplus of the results of
  // the two single-channel halves of the same network.
  neuropath::Rng rng(5);
  const LayerSpec both = random_conv(rng, 1, 2);
  auto half = [&](int c) {
    std::vector<float> w(both.weights.begin() + c * 9, both.weights.begin() + (c + 1) * 9);
    return NetworkSpec({LayerSpec::conv(1, 1, 3, 3, std::move(w), {both.bias[static_cast<std::size_t>(c)]})});
  };
  const SyntheticPair p = make_synthetic_pair(6, 6, 1, 0.03, 17);
  const ShiftSet shifts = ShiftSet::stereo(2);
  for (SemiringId id : kAll) {
    const Semiring sr = make_semiring(id);
    auto vol = [&](const NetworkSpec& net) {
      const Pair s = stacks(net, p.reference, p.searched, 1, 1);
      return backward(s.ref, s.srch, shifts, id, {1, 1}, ArcMode::full);
    };
    const CostVolume whole = vol(NetworkSpec({both})), a = vol(half(0)), b = vol(half(1));
    for (std::size_t i = 0; i < whole.values.size(); ++i)
      EXPECT_DOUBLE_EQ(whole.values[i], sr.oplus(a.values[i], b.values[i]));
  }
}

TEST(Backward, IdenticalImagesPeakAtZeroShift) {
  neuropath::Rng rng(13);
  const NetworkSpec net = random_network(rng, "cpc", {3, 3});
  const ImageGrid img = random_grid(rng, 8, 6, 1);
  const Pair s = stacks(net, img, img, 0, 3);
  const ShiftSet shifts = ShiftSet::stereo(4);
  for (SemiringId id : kAll) {
    const CostVolume v = backward(s.ref, s.srch, shifts, id, {0, 3}, ArcMode::full);
    for (int x = 0; x < v.width; ++x)
      for (int y = 0; y < v.height; ++y) {
        EXPECT_GT(v.at(x, y, 0), 0.0);
        for (std::size_t d = 1; d < shifts.size(); ++d) EXPECT_GE(v.at(x, y, 0), v.at(x, y, d)) << to_string(id);
      }
  }
}

TEST(Backward, ShiftsAreMarginal) {
  // Each shift's column is the same whether computed alone or in a set.
  neuropath::Rng rng(23);
  const NetworkSpec net = random_network(rng, "cpcc", {2, 3, 2});
  const SyntheticPair p = make_synthetic_pair(8, 8, 3, 0.02, 4);
  const Pair s = stacks(net, p.reference, p.searched, 0, 4);
  const ShiftSet all({{0, 0, 0}, {3, 0, 0}, {-2, 1, 0}, {5, -1, 0}, {1, 0, 0}});
  for (SemiringId id : kAll) {
    const CostVolume joint = backward(s.ref, s.srch, all, id, {0, 4}, ArcMode::full);
    for (std::size_t d = 0; d < all.size(); ++d) {
      const CostVolume alone = backward(s.ref, s.srch, ShiftSet({all[d]}), id, {0, 4}, ArcMode::full);
      for (int x = 0; x < joint.width; ++x)
        for (int y = 0; y < joint.height; ++y) ASSERT_EQ(joint.at(x, y, d), alone.at(x, y, 0));
    }
  }
}

TEST(Backward, TranslationEquivariant) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    for (SemiringId id : kAll) {
      const auto check = testing_support::translation_check(seed, id, ArcMode::full);
      EXPECT_GT(check.compared, 0u);
      EXPECT_GT(check.nonzero, 0u);
      EXPECT_EQ(check.mismatched, 0u) << "seed " << seed << " " << to_string(id);
    }
}

TEST(Backward, ThreadCountDoesNotChangeResults) {
  neuropath::Rng rng(29);
  const NetworkSpec net = random_network(rng, "ccpc", {3, 2, 2});
  const SyntheticPair p = make_synthetic_pair(16, 8, 2, 0.02, 4);
  const Pair s = stacks(net, p.reference, p.searched, 0, 4);
  set_thread_count(1);
  const CostVolume one = backward(s.ref, s.srch, ShiftSet::stereo(5), SemiringId::sum_product, {0, 4}, ArcMode::full);
  set_thread_count(4);
  const CostVolume four = backward(s.ref, s.srch, ShiftSet::stereo(5), SemiringId::sum_product, {0, 4}, ArcMode::full);
  set_thread_count(0);
  EXPECT_EQ(one.values, four.values);
}

TEST(Backward, RetainedTables) {
  neuropath::Rng rng(31);
  const NetworkSpec net = random_network(rng, "cpc", {2, 2});
  const SyntheticPair p = make_synthetic_pair(8, 4, 1, 0.02, 5);
  const Pair s = stacks(net, p.reference, p.searched, 0, 3);
  const ShiftSet shifts = ShiftSet::stereo(3);
  std::vector<LayerTable> tables;
  const CostVolume v = backward<SumProduct>(s.ref, s.srch, shifts, {0, 3}, ArcMode::full, &tables);
  ASSERT_EQ(tables.size(), 4u);
  EXPECT_EQ(tables.front().layer, 3);
  EXPECT_EQ(tables.back().layer, 0);
  // Shifts at the top are the carried, de-duplicated set {0, 1}.
  EXPECT_EQ(tables.front().shifts, (std::vector<Shift>{{0, 0, 0}, {1, 0, 0}}));
  // Top table holds plain matching values.
  const LayerTable& top = tables.front();
  for (int x = 0; x < top.width; ++x)
    for (int c = 0; c < top.channels; ++c) {
      const MatchContext ctx{s.ref, s.srch, 3, top.shifts[1]};
      EXPECT_EQ(top.at(x, 0, c, 1), node_match<SumProduct>(ctx, x, 0, c));
    }
  // The base table folded over channels gives the volume.
  const LayerTable& base = tables.back();
  for (int x = 0; x < v.width; ++x)
    for (std::size_t d = 0; d < shifts.size(); ++d)
      EXPECT_DOUBLE_EQ(v.at(x, 1, d), base.at(x, 1, 0, base.index_of(shifts[d])));
}

TEST(Backward, InputErrors) {
  neuropath::Rng rng(37);
  const NetworkSpec net = random_network(rng, "cpc", {2, 2});
  const Pair s = stacks(net, random_grid(rng, 8, 4, 1), random_grid(rng, 8, 4, 1), 0, 3);
  const Pair other = stacks(net, random_grid(rng, 4, 4, 1), random_grid(rng, 4, 4, 1), 0, 3);
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  EXPECT_EQ(code_of([&] { backward(s.ref, other.srch, ShiftSet::stereo(1), SemiringId::max_min, {0, 3}, ArcMode::full); }),
            ErrorCode::mismatched_stacks);
  EXPECT_EQ(code_of([&] { backward(s.ref, s.srch, ShiftSet::stereo(1), SemiringId::max_min, {0, 4}, ArcMode::full); }),
            ErrorCode::layer_range);
  EXPECT_EQ(code_of([&] { backward(s.ref, s.srch, ShiftSet(), SemiringId::max_min, {0, 3}, ArcMode::full); }),
            ErrorCode::shape);
}

TEST(PathCounts, SingleLayerCountsChannels) {
  neuropath::Rng rng(41);
  const NetworkSpec net = random_network(rng, "c", {5});
  const ActivationStack s = forward(net, random_grid(rng, 4, 3, 1), 1, 1);
  const PathCounts counts = count_paths(s, {1, 1}, ArcMode::full);
  for (auto c : counts.counts) EXPECT_EQ(c, 5u);
  EXPECT_EQ(counts.total(), 60u);
}

TEST(PathCounts, TwoConvInteriorIs81) {
  neuropath::Rng rng(43);
  const NetworkSpec net = random_network(rng, "cc", {1, 1});
  const ActivationStack s = forward(net, random_grid(rng, 7, 7, 1), 0, 2);
  const PathCounts full = count_paths(s, {0, 2}, ArcMode::full);
  EXPECT_EQ(full.at(3, 3), 81u);
  EXPECT_EQ(full.at(2, 2), 81u);
  EXPECT_LT(full.at(0, 0), 81u);
  const PathCounts central = count_paths(s, {0, 2}, ArcMode::central);
  EXPECT_EQ(central.at(3, 3), 1u);
}

TEST(PathCounts, OnlyArgmaxNodesContinueThroughPooling) {
  const NetworkSpec net({LayerSpec::maxpool(1, 2)});
  const ActivationStack s = forward(net, testing_support::grid_from_rows({{1, 2}, {3, 4}}), 0, 1);
  const PathCounts counts = count_paths(s, {0, 1}, ArcMode::full);
  EXPECT_EQ(counts.at(1, 1), 1u);
  EXPECT_EQ(counts.at(0, 0), 0u);
  EXPECT_EQ(counts.total(), 1u);
}

TEST(PathCounts, GraphSizeOfSmallNet) {
  neuropath::Rng rng(47);
  const NetworkSpec net = random_network(rng, "c", {2});
  const ActivationStack s = forward(net, random_grid(rng, 3, 1, 1), 0, 1);
  const GraphSize g = graph_size(s, {0, 1}, ArcMode::full);
  // virtual 3 + base 3 + conv 6; arcs: 3 fan-out + (2 + 3 + 2) * 1 * 2
  EXPECT_EQ(g.nodes, 12u);
  EXPECT_EQ(g.arcs, 3u + 14u);
  EXPECT_EQ(graph_size(s, {0, 1}, ArcMode::central).arcs, 3u + 6u);
}

TEST(Backward, ExtraChannelNeverLowersSumProductScores) {
  neuropath::Rng rng(53);
  const LayerSpec first = random_conv(rng, 1, 2);
  const LayerSpec top = random_conv(rng, 2, 2);
  const LayerSpec extra = random_conv(rng, 2, 1);
  std::vector<float> w = top.weights, b = top.bias;
  w.insert(w.end(), extra.weights.begin(), extra.weights.end());
  b.push_back(extra.bias[0]);
  const NetworkSpec narrow({first, top});
  const NetworkSpec wide({first, LayerSpec::conv(2, 3, 3, 3, w, b)});
  const SyntheticPair p = make_synthetic_pair(9, 7, 2, 0.05, 6);
  const ShiftSet shifts = ShiftSet::stereo(4);
  for (int start : {0, 1}) {
    const Pair n = stacks(narrow, p.reference, p.searched, start, 2);
    const Pair v = stacks(wide, p.reference, p.searched, start, 2);
    const CostVolume a = backward(n.ref, n.srch, shifts, SemiringId::sum_product, {start, 2}, ArcMode::full);
    const CostVolume c = backward(v.ref, v.srch, shifts, SemiringId::sum_product, {start, 2}, ArcMode::full);
    for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_GE(c.values[i], a.values[i]);
  }
}
