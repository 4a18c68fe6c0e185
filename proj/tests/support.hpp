#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "neuropath/neuropath.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(NEUROPATH_FIXTURE_DIR) / name;
}

inline std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Reference convolution, written independently of the library: the input
/// is first copied into an explicitly edge-padded buffer, then each output
/// is a plain dot product over the padded window. Returns pre-activations.
inline neuropath::ImageGrid naive_conv(const neuropath::LayerSpec& layer, const neuropath::ImageGrid& in) {
  const int rh = layer.kernel_h / 2, rw = layer.kernel_w / 2;
  const int pw = in.width() + 2 * rw, ph = in.height() + 2 * rh;
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph * in.channels());
  auto pad_at = [&](int x, int y, int c) -> double& {
    return padded[(static_cast<std::size_t>(y) * pw + x) * in.channels() + c];
  };
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) {
      const int sx = std::min(std::max(x - rw, 0), in.width() - 1);
      const int sy = std::min(std::max(y - rh, 0), in.height() - 1);
      for (int c = 0; c < in.channels(); ++c) pad_at(x, y, c) = in(sx, sy, c);
    }
  neuropath::ImageGrid out(in.width(), in.height(), layer.out_channels);
  for (int o = 0; o < layer.out_channels; ++o)
    for (int y = 0; y < in.height(); ++y)
      for (int x = 0; x < in.width(); ++x) {
        double acc = layer.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < layer.in_channels; ++i)
          for (int ky = 0; ky < layer.kernel_h; ++ky)
            for (int kx = 0; kx < layer.kernel_w; ++kx) acc += layer.weight(o, i, ky, kx) * pad_at(x + kx, y + ky, i);
        out(x, y, o) = static_cast<float>(acc);
      }
  return out;
}

inline bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

/// Single-layer network holding a given conv, for layer-level checks.
inline neuropath::NetworkSpec single_conv(neuropath::LayerSpec layer) {
  return neuropath::NetworkSpec({std::move(layer)});
}

/// Grid from rows given top to bottom (row index = y).
inline neuropath::ImageGrid grid_from_rows(const std::vector<std::vector<float>>& rows) {
  neuropath::ImageGrid g(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), 1);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) g(x, y) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
  return g;
}

struct TranslationCheck {
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  std::size_t nonzero = 0;
};

/// Crops two windows offset by one total stride from a wider random pair,
/// runs the backward pass on both, and compares volume entries at base
/// positions far enough from the borders for padding not to reach them.
inline TranslationCheck translation_check(std::uint64_t seed, neuropath::SemiringId semiring,
                                          neuropath::ArcMode mode) {
  using namespace neuropath;
  Rng rng(seed);
  const std::string pattern = seed % 2 == 0 ? "cpcc" : "cpcpc";
  const NetworkSpec net = random_network(rng, pattern, std::vector<int>(3, 2));
  const int layers = net.layer_count();
  const int q = net.total_stride(layers);
  const int wide = 80, height = 2 * q, dmax = 4;
  const SyntheticPair pair = make_synthetic_pair(wide, height, 2, 0.02, rng.next());
  const ImageGrid& a = pair.reference;
  const ImageGrid& b = pair.searched;
  auto crop = [&](const ImageGrid& g, int x0) {
    ImageGrid out(wide - q, height, 1);
    for (int x = 0; x < out.width(); ++x)
      for (int y = 0; y < height; ++y) out(x, y) = g(x0 + x, y);
    return out;
  };
  const ShiftSet shifts = ShiftSet::stereo(dmax);
  const LayerRange range{0, layers};
  auto volume = [&](int x0) {
    const ActivationStack r = forward(net, crop(a, x0), 0, layers);
    const ActivationStack s = forward(net, crop(b, x0), 0, layers);
    return backward(r, s, shifts, semiring, range, mode);
  };
  const CostVolume first = volume(0), second = volume(q);
  const int margin = 2 * receptive_margin(net, 0, layers) + dmax + q;
  TranslationCheck out;
  for (int x = margin; x + q < first.width - margin; ++x)
    for (int y = 0; y < height; ++y)
      for (std::size_t d = 0; d < shifts.size(); ++d) {
        ++out.compared;
        out.mismatched += second.at(x, y, d) != first.at(x + q, y, d);
        out.nonzero += second.at(x, y, d) != 0.0;
      }
  return out;
}

/// Toy network used by the synthetic end-to-end checks: conv, 2x2 pool,
/// conv with 8 channels each, matched with the input image as base.
inline neuropath::NetworkSpec synthetic_toy_net(std::uint64_t seed) {
  neuropath::Rng rng(seed);
  return neuropath::random_network(rng, "cpc", {8, 8});
}

/// WTA accuracy (fraction in [0, 1]) on a 64x64 constant-shift pair, over
/// valid pixels at least receptive margin + 15 away from every border.
inline double synthetic_accuracy(const neuropath::NetworkSpec& net, int true_shift, double noise,
                                 std::uint64_t pair_seed,
                                 neuropath::SemiringId semiring = neuropath::SemiringId::sum_product) {
  using namespace neuropath;
  constexpr int kExtent = 64, kMaxShift = 15;
  const LayerRange range{0, net.layer_count()};
  const SyntheticPair p = make_synthetic_pair(kExtent, kExtent, true_shift, noise, pair_seed);
  const ActivationStack ref = forward(net, p.reference, range.start, range.end);
  const ActivationStack srch = forward(net, p.searched, range.start, range.end);
  const DisparityMap disp =
      wta(normalize(backward(ref, srch, ShiftSet::stereo(kMaxShift), semiring, range, ArcMode::full)));
  const int margin = receptive_margin(net, range.start, range.end) + kMaxShift;
  std::size_t good = 0, total = 0;
  for (int x = margin; x < kExtent - margin; ++x)
    for (int y = margin; y < kExtent - margin; ++y) {
      if (!p.truth.is_valid(x, y)) continue;
      ++total;
      good += disp.is_valid(x, y) && disp.at(x, y) == static_cast<float>(true_shift);
    }
  return total == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total);
}

}  // namespace testing_support
