#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neuropath/grid.hpp"
#include "neuropath/network.hpp"
#include "neuropath/parallel.hpp"

namespace neuropath {

/// Argmax switches of a non-overlapping max-pooling layer: for every pooled
/// output (x, y, c), the winning input offset inside its window.
class ArgmaxMask {
 public:
  ArgmaxMask() = default;
  ArgmaxMask(int width, int height, int channels, int window)
      : window_(window), offsets_(width, height, channels) {}

  int window() const noexcept { return window_; }
  int width() const noexcept { return offsets_.width(); }
  int height() const noexcept { return offsets_.height(); }
  int channels() const noexcept { return offsets_.channels(); }

  void set(int x, int y, int c, int dx, int dy) noexcept {
    offsets_(x, y, c) = static_cast<std::uint32_t>(dy * window_ + dx);
  }

  /// Offset (dx, dy) of the winner inside window (x, y, c).
  std::pair<int, int> offset(int x, int y, int c) const noexcept {
    const auto v = static_cast<int>(offsets_(x, y, c));
    return {v % window_, v / window_};
  }

  /// Input position of the winner of window (x, y, c).
  std::pair<int, int> source(int x, int y, int c) const noexcept {
    const auto [dx, dy] = offset(x, y, c);
    return {x * window_ + dx, y * window_ + dy};
  }

  /// True iff input position (in_x, in_y) wins its own window in channel c.
  bool selects(int in_x, int in_y, int c) const noexcept {
    const auto [sx, sy] = source(in_x / window_, in_y / window_, c);
    return sx == in_x && sy == in_y;
  }

  friend bool operator==(const ArgmaxMask&, const ArgmaxMask&) = default;

 private:
  int window_ = 1;
  Grid<std::uint32_t> offsets_;
};

/// Geometry of one layer as needed to derive arc sets.
struct LayerShape {
  LayerKind kind = LayerKind::conv_relu;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;

  bool is_conv() const noexcept { return kind == LayerKind::conv_relu; }
  bool is_pool() const noexcept { return kind == LayerKind::maxpool; }

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Per-layer activations of one image. Index 0 is the (channel-replicated)
/// input; conv layers hold post-ReLU values, pool layers pooled values.
struct ActivationStack {
  std::vector<ImageGrid> activations;
  std::vector<std::optional<ImageGrid>> pre_activations;  // conv layers only
  std::vector<std::optional<ArgmaxMask>> masks;          // pool layers only
  std::vector<LayerShape> shapes;                        // shapes[0] is a placeholder for the input

  /// Highest computed layer.
  int top() const noexcept { return static_cast<int>(activations.size()) - 1; }

  const ImageGrid& at(int layer) const { return activations.at(static_cast<std::size_t>(layer)); }
  const LayerShape& shape(int layer) const { return shapes.at(static_cast<std::size_t>(layer)); }
  const ArgmaxMask& mask(int layer) const {
    const auto& m = masks.at(static_cast<std::size_t>(layer));
    if (!m) throw Error(ErrorCode::layer_range, "layer " + std::to_string(layer) + " is not a pooling layer");
    return *m;
  }

  /// Same layer geometry and extents, so paths in one have a parallel in the other.
  bool compatible_with(const ActivationStack& other) const {
    if (activations.size() != other.activations.size() || shapes != other.shapes) return false;
    for (std::size_t i = 0; i < activations.size(); ++i)
      if (!activations[i].same_shape(other.activations[i])) return false;
    return true;
  }
};

namespace detail {

inline int clamp_index(int v, int extent) { return std::clamp(v, 0, extent - 1); }

/// Replicate-padded convolution. Returns the pre-activation response.
inline ImageGrid conv_forward(const LayerSpec& layer, const ImageGrid& in) {
  const int w = in.width(), h = in.height();
  const int cin = layer.in_channels, cout = layer.out_channels;
  const int kh = layer.kernel_h, kw = layer.kernel_w;
  const int rh = kh / 2, rw = kw / 2;

  // Re-laid out as [ky][kx][out][in] so the inner loop walks both operands
  // contiguously.
  std::vector<float> taps(static_cast<std::size_t>(kh) * kw * cout * cin);
  for (int co = 0; co < cout; ++co)
    for (int ci = 0; ci < cin; ++ci)
      for (int ky = 0; ky < kh; ++ky)
        for (int kx = 0; kx < kw; ++kx)
          taps[((static_cast<std::size_t>(ky) * kw + kx) * cout + co) * cin + ci] =
              layer.weight(co, ci, ky, kx);

  ImageGrid out(w, h, cout);
  parallel_for(w, [&](int x) {
    std::vector<double> acc(static_cast<std::size_t>(cout));
    for (int y = 0; y < h; ++y) {
      for (int co = 0; co < cout; ++co) acc[co] = layer.bias[co];
      for (int ky = 0; ky < kh; ++ky) {
        const int sy = clamp_index(y + ky - rh, h);
        for (int kx = 0; kx < kw; ++kx) {
          const int sx = clamp_index(x + kx - rw, w);
          const float* src = in.pixel(sx, sy).data();
          const float* tap = &taps[(static_cast<std::size_t>(ky) * kw + kx) * cout * cin];
          for (int co = 0; co < cout; ++co) {
            double s = 0.0;
            const float* row = tap + static_cast<std::size_t>(co) * cin;
            for (int ci = 0; ci < cin; ++ci) s += static_cast<double>(row[ci]) * src[ci];
            acc[co] += s;
          }
        }
      }
      auto dst = out.pixel(x, y);
      for (int co = 0; co < cout; ++co) dst[co] = static_cast<float>(acc[co]);
    }
  });
  return out;
}

inline ImageGrid relu(ImageGrid g) {
  for (float& v : g.data()) v = v > 0.0f ? v : 0.0f;
  return g;
}

}  // namespace detail

/// Non-overlapping max pooling; ties go to the first entry in a row-major
/// scan of the window (dy outer, dx inner).
inline std::pair<ImageGrid, ArgmaxMask> maxpool_forward(const ImageGrid& in, int window) {
  if (in.width() % window != 0 || in.height() % window != 0)
    throw Error(ErrorCode::shape, "extent " + in.extents_string() +
                                      " not divisible by pooling stride " + std::to_string(window));
  const int ow = in.width() / window, oh = in.height() / window, ch = in.channels();
  ImageGrid out(ow, oh, ch);
  ArgmaxMask mask(ow, oh, ch, window);
  for (int x = 0; x < ow; ++x)
    for (int y = 0; y < oh; ++y)
      for (int c = 0; c < ch; ++c) {
        float best = in(x * window, y * window, c);
        int bx = 0, by = 0;
        for (int dy = 0; dy < window; ++dy)
          for (int dx = 0; dx < window; ++dx) {
            const float v = in(x * window + dx, y * window + dy, c);
            if (v > best) {
              best = v;
              bx = dx;
              by = dy;
            }
          }
        out(x, y, c) = best;
        mask.set(x, y, c, bx, by);
      }
  return {std::move(out), std::move(mask)};
}

/// Runs layers 1..end. A single-channel image is replicated to the network's
/// input channel count. `start` only validates the requested range.
inline ActivationStack forward(const NetworkSpec& net, const ImageGrid& image, int start, int end) {
  net.check_range(start, end);
  if (!image.all_finite()) throw Error(ErrorCode::domain, "input image has non-finite values");

  ActivationStack stack;
  const int want = net.input_channels();
  if (image.channels() == want) {
    stack.activations.push_back(image);
  } else if (image.channels() == 1) {
    stack.activations.push_back(replicate_channels(image, want));
  } else {
    throw Error(ErrorCode::invalid_channel, "image has " + std::to_string(image.channels()) +
                                                " channels, network expects " + std::to_string(want));
  }
  stack.pre_activations.emplace_back();
  stack.masks.emplace_back();
  stack.shapes.push_back(LayerShape{});

  for (int l = 1; l <= end; ++l) {
    const LayerSpec& layer = net.layer(l);
    const ImageGrid& in = stack.activations.back();
    stack.shapes.push_back({layer.kind, layer.kernel_h, layer.kernel_w, layer.stride});
    if (layer.is_conv()) {
      ImageGrid pre = detail::conv_forward(layer, in);
      stack.activations.push_back(detail::relu(pre));
      stack.pre_activations.push_back(std::move(pre));
      stack.masks.emplace_back();
    } else {
      auto [pooled, mask] = maxpool_forward(in, layer.stride);
      stack.activations.push_back(std::move(pooled));
      stack.pre_activations.emplace_back();
      stack.masks.push_back(std::move(mask));
    }
  }
  return stack;
}

}  // namespace neuropath
