#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include "neuropath/grid.hpp"
#include "neuropath/network.hpp"

namespace neuropath {

/// Seeded generator with distribution code written out here, so fixtures
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline ImageGrid random_grid(Rng& rng, int width, int height, int channels, double lo = 0.0,
                             double hi = 1.0) {
  ImageGrid g(width, height, channels);
  for (float& v : g.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return g;
}

/// He-initialised conv layer with small random bias. Each multi-tap filter
/// has its mean removed so non-negative inputs do not drive channels dead.
inline LayerSpec random_conv(Rng& rng, int in, int out, int kernel = 3) {
  const double scale = std::sqrt(2.0 / (static_cast<double>(in) * kernel * kernel));
  const std::size_t taps = static_cast<std::size_t>(in) * kernel * kernel;
  std::vector<float> w(static_cast<std::size_t>(out) * taps);
  for (std::size_t o = 0; o < static_cast<std::size_t>(out); ++o) {
    std::vector<double> f(taps);
    double mean = 0.0;
    for (double& v : f) mean += (v = rng.normal() * scale);
    mean = taps > 1 ? mean / static_cast<double>(taps) : 0.0;
    for (std::size_t i = 0; i < taps; ++i) w[o * taps + i] = static_cast<float>(f[i] - mean);
  }
  std::vector<float> b(static_cast<std::size_t>(out));
  for (float& v : b) v = static_cast<float>(rng.uniform(-0.05, 0.05));
  return LayerSpec::conv(in, out, kernel, kernel, std::move(w), std::move(b));
}

/// Random network from a layer pattern: 'c' = 3x3 conv + ReLU, 'p' = 2x2
/// max pooling. `widths[i]` is the output channel count of the i-th conv.
inline NetworkSpec random_network(Rng& rng, std::string_view pattern, const std::vector<int>& widths,
                                  int input_channels = 1) {
  std::vector<LayerSpec> layers;
  int channels = input_channels;
  std::size_t conv_index = 0;
  for (char kind : pattern) {
    if (kind == 'p') {
      layers.push_back(LayerSpec::maxpool(channels, 2));
    } else {
      const int out = widths.at(conv_index++);
      layers.push_back(random_conv(rng, channels, out));
      channels = out;
    }
  }
  return NetworkSpec(std::move(layers));
}

}  // namespace neuropath
