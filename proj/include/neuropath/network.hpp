#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neuropath/error.hpp"
#include "neuropath/shift.hpp"

namespace neuropath {

enum class LayerKind : std::uint8_t { conv_relu = 0, maxpool = 1 };

/// One layer of the feature hierarchy. Weights are laid out
/// [out][in][kernel_h][kernel_w]; kernel_h runs along y, kernel_w along x.
struct LayerSpec {
  LayerKind kind = LayerKind::conv_relu;
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 3;
  int kernel_w = 3;
  int stride = 1;
  std::vector<float> weights;
  std::vector<float> bias;

  bool is_conv() const noexcept { return kind == LayerKind::conv_relu; }
  bool is_pool() const noexcept { return kind == LayerKind::maxpool; }

  /// Spatial subsampling factor of this layer.
  int subsampling() const noexcept { return is_pool() ? stride : 1; }

  float weight(int out, int in, int ky, int kx) const noexcept {
    return weights[((static_cast<std::size_t>(out) * in_channels + in) * kernel_h + ky) * kernel_w +
                   kx];
  }

  static LayerSpec conv(int in, int out, int kh, int kw, std::vector<float> weights,
                        std::vector<float> bias) {
    LayerSpec l;
    l.kind = LayerKind::conv_relu;
    l.in_channels = in;
    l.out_channels = out;
    l.kernel_h = kh;
    l.kernel_w = kw;
    l.stride = 1;
    l.weights = std::move(weights);
    l.bias = std::move(bias);
    return l;
  }

  static LayerSpec maxpool(int channels, int size) {
    LayerSpec l;
    l.kind = LayerKind::maxpool;
    l.in_channels = channels;
    l.out_channels = channels;
    l.kernel_h = size;
    l.kernel_w = size;
    l.stride = size;
    return l;
  }

  void validate(int index) const {
    const std::string where = "layer " + std::to_string(index) + ": ";
    if (in_channels <= 0 || out_channels <= 0)
      throw Error(ErrorCode::invalid_layer, where + "channel counts must be positive");
    if (kernel_h <= 0 || kernel_w <= 0 || stride <= 0)
      throw Error(ErrorCode::invalid_layer, where + "kernel and stride must be positive");
    if (is_conv()) {
      if (stride != 1) throw Error(ErrorCode::unsupported, where + "convolution stride must be 1");
      if (kernel_h % 2 == 0 || kernel_w % 2 == 0)
        throw Error(ErrorCode::invalid_layer, where + "convolution kernel must be odd-sized");
      const std::size_t expected =
          static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w;
      if (weights.size() != expected)
        throw Error(ErrorCode::invalid_layer, where + "expected " + std::to_string(expected) +
                                                  " weights, got " +
                                                  std::to_string(weights.size()));
      if (bias.size() != static_cast<std::size_t>(out_channels))
        throw Error(ErrorCode::invalid_layer, where + "bias length must equal out_channels");
    } else {
      if (kernel_h != stride || kernel_w != stride)
        throw Error(ErrorCode::unsupported,
                    where + "max-pooling windows must not overlap (kernel == stride)");
      if (out_channels != in_channels)
        throw Error(ErrorCode::channel_chain, where + "pooling must preserve channel count");
      if (!weights.empty() || !bias.empty())
        throw Error(ErrorCode::invalid_layer, where + "pooling layers carry no weights");
    }
  }
};

/// Layers are numbered 1..L; layer 0 is the input image.
class NetworkSpec {
 public:
  NetworkSpec() = default;

  explicit NetworkSpec(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i].validate(static_cast<int>(i) + 1);
      if (i > 0 && layers_[i].in_channels != layers_[i - 1].out_channels)
        throw Error(ErrorCode::channel_chain,
                    "layer " + std::to_string(i + 1) + " expects " +
                        std::to_string(layers_[i].in_channels) + " input channels but layer " +
                        std::to_string(i) + " produces " + std::to_string(layers_[i - 1].out_channels));
    }
  }

  int layer_count() const noexcept { return static_cast<int>(layers_.size()); }

  const LayerSpec& layer(int index) const {
    if (index < 1 || index > layer_count())
      throw Error(ErrorCode::layer_range, "layer " + std::to_string(index));
    return layers_[static_cast<std::size_t>(index - 1)];
  }

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }

  int input_channels() const { return layers_.empty() ? 1 : layers_.front().in_channels; }

  /// Channel count of layer `index` output (index 0: network input).
  int channels(int index) const {
    return index == 0 ? input_channels() : layer(index).out_channels;
  }

  SubsampleChain subsample_chain() const {
    std::vector<int> q;
    q.reserve(layers_.size());
    for (const auto& l : layers_) q.push_back(l.subsampling());
    return SubsampleChain(std::move(q));
  }

  /// Product of all pooling strides up to and including layer `upto`.
  int total_stride(int upto) const { return subsample_chain().product(0, upto); }

  void check_range(int start, int end) const {
    if (start < 0 || end > layer_count() || start > end)
      throw Error(ErrorCode::layer_range,
                  "layer range " + std::to_string(start) + ":" + std::to_string(end) +
                      " invalid for a " + std::to_string(layer_count()) + "-layer network");
  }

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      const auto& x = a.layers_[i];
      const auto& y = b.layers_[i];
      if (x.kind != y.kind || x.in_channels != y.in_channels || x.out_channels != y.out_channels ||
          x.kernel_h != y.kernel_h || x.kernel_w != y.kernel_w || x.stride != y.stride ||
          x.weights != y.weights || x.bias != y.bias)
        return false;
    }
    return true;
  }

 private:
  std::vector<LayerSpec> layers_;
};

/// Half-extent (in base-layer pixels) of the region whose activations
/// influence paths from a base node through layers start+1 ... end.
inline int receptive_margin(const NetworkSpec& net, int start, int end) {
  net.check_range(start, end);
  int margin = 0;
  int scale = 1;
  for (int l = start + 1; l <= end; ++l) {
    const LayerSpec& layer = net.layer(l);
    if (layer.is_conv()) {
      margin += (std::max(layer.kernel_h, layer.kernel_w) / 2) * scale;
    } else {
      margin += (layer.stride - 1) * scale;
      scale *= layer.stride;
    }
  }
  return margin;
}

}  // namespace neuropath
