#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "neuropath/aggregation.hpp"
#include "neuropath/forward.hpp"
#include "neuropath/grid.hpp"
#include "neuropath/stereo.hpp"

namespace neuropath {

struct StereoOptions {
  LayerRange range{2, 8};
  int max_disparity = 228;
  SemiringId semiring = SemiringId::sum_product;
  ArcMode arc_mode = ArcMode::full;
  bool corr_baseline = false;
  int corr_window = 1;
};

struct StereoResult {
  CostVolume volume;  // normalised for the path method, raw NCC for corr
  DisparityMap disparity;
  std::vector<std::pair<std::string, double>> timings;  // seconds
};

/// Grayscale, then center-crop so every pooling layer up to `end` sees
/// extents divisible by its stride.
inline ImageGrid prepare_image(const NetworkSpec& net, const ImageGrid& image, int end) {
  return center_crop_to_multiple(to_grayscale(image), net.total_stride(end));
}

/// Full left-view matching: forward both images, aggregate, normalise, WTA.
inline StereoResult match_stereo(const NetworkSpec& net, const ImageGrid& left, const ImageGrid& right,
                                 const StereoOptions& opt) {
  net.check_range(opt.range.start, opt.range.end);
  using clock = std::chrono::steady_clock;
  StereoResult r;
  auto lap = [&, t = clock::now()](const char* name) mutable {
    const auto now = clock::now();
    r.timings.emplace_back(name, std::chrono::duration<double>(now - t).count());
    t = now;
  };

  const ImageGrid a = prepare_image(net, left, opt.range.end);
  const ImageGrid b = prepare_image(net, right, opt.range.end);
  if (!a.same_shape(b)) throw Error(ErrorCode::shape, "left and right images differ in extents");
  lap("prepare");
  const ActivationStack ref = forward(net, a, opt.range.start, opt.range.end);
  const ActivationStack srch = forward(net, b, opt.range.start, opt.range.end);
  lap("forward");
  const ShiftSet shifts = ShiftSet::stereo(opt.max_disparity);
  if (opt.corr_baseline) {
    r.volume = corr_baseline(ref, srch, shifts, opt.range, opt.corr_window);
    lap("correlation");
  } else {
    r.volume = normalize(backward(ref, srch, shifts, opt.semiring, opt.range, opt.arc_mode));
    lap("backward");
  }
  r.disparity = wta(r.volume);
  lap("wta");
  return r;
}

/// Right-view disparity via mirrored images, so shifts stay non-negative.
inline DisparityMap match_stereo_right(const NetworkSpec& net, const ImageGrid& left,
                                       const ImageGrid& right, const StereoOptions& opt) {
  return flip_horizontal(match_stereo(net, flip_horizontal(right), flip_horizontal(left), opt).disparity);
}

}  // namespace neuropath
