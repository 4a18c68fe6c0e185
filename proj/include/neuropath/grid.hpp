#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "neuropath/error.hpp"

namespace neuropath {

/// Dense (x, y, c) grid. Storage is x-major, then y, with the channel
/// innermost: offset = (x * height + y) * channels + c.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw Error(ErrorCode::shape, "grid extents must be positive, got " + extents_string());
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  Grid(int width, int height, int channels, std::vector<T> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw Error(ErrorCode::shape, "grid extents must be positive, got " + extents_string());
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
      throw Error(ErrorCode::shape, "grid data length does not match " + extents_string());
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t offset(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(x) * height_ + y) * channels_ + c;
  }

  T& operator()(int x, int y, int c = 0) noexcept { return data_[offset(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const noexcept { return data_[offset(x, y, c)]; }

  /// All channels of one spatial position.
  std::span<const T> pixel(int x, int y) const noexcept {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(channels_)};
  }
  std::span<T> pixel(int x, int y) noexcept {
    return {data_.data() + offset(x, y), static_cast<std::size_t>(channels_)};
  }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  std::string extents_string() const {
    return "(" + std::to_string(width_) + ", " + std::to_string(height_) + ", " +
           std::to_string(channels_) + ")";
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using ImageGrid = Grid<float>;

/// BT.601 luma for 3-channel input; identity for 1-channel input.
template <typename T>
Grid<T> to_grayscale(const Grid<T>& image) {
  if (image.channels() == 1) return image;
  if (image.channels() != 3)
    throw Error(ErrorCode::invalid_channel,
                "grayscale conversion needs 1 or 3 channels, got " +
                    std::to_string(image.channels()));
  Grid<T> gray(image.width(), image.height(), 1);
  for (int x = 0; x < image.width(); ++x)
    for (int y = 0; y < image.height(); ++y) {
      const auto p = image.pixel(x, y);
      const double v = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
      gray(x, y) = static_cast<T>(v);
    }
  return gray;
}

/// Copies a single-channel grid into `channels` identical channels.
template <typename T>
Grid<T> replicate_channels(const Grid<T>& image, int channels) {
  if (image.channels() != 1)
    throw Error(ErrorCode::invalid_channel, "replication needs a 1-channel grid");
  if (channels == 1) return image;
  Grid<T> out(image.width(), image.height(), channels);
  for (int x = 0; x < image.width(); ++x)
    for (int y = 0; y < image.height(); ++y)
      for (int c = 0; c < channels; ++c) out(x, y, c) = image(x, y);
  return out;
}

/// Center crop so both spatial extents are multiples of `multiple`.
template <typename T>
Grid<T> center_crop_to_multiple(const Grid<T>& image, int multiple) {
  if (multiple <= 0) throw Error(ErrorCode::invalid_factor, "crop multiple must be positive");
  const int w = image.width() / multiple * multiple;
  const int h = image.height() / multiple * multiple;
  if (w == 0 || h == 0)
    throw Error(ErrorCode::shape, "image " + image.extents_string() +
                                      " is smaller than the total pooling stride " +
                                      std::to_string(multiple));
  if (w == image.width() && h == image.height()) return image;
  const int x0 = (image.width() - w) / 2;
  const int y0 = (image.height() - h) / 2;
  Grid<T> out(w, h, image.channels());
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y)
      for (int c = 0; c < image.channels(); ++c) out(x, y, c) = image(x0 + x, y0 + y, c);
  return out;
}

/// Mirror along x; used to turn right-view matching into left-view matching.
template <typename T>
Grid<T> flip_horizontal(const Grid<T>& image) {
  Grid<T> out(image.width(), image.height(), image.channels());
  for (int x = 0; x < image.width(); ++x)
    for (int y = 0; y < image.height(); ++y)
      for (int c = 0; c < image.channels(); ++c)
        out(image.width() - 1 - x, y, c) = image(x, y, c);
  return out;
}

}  // namespace neuropath
