#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "neuropath/aggregation.hpp"
#include "neuropath/cost_volume.hpp"
#include "neuropath/forward.hpp"
#include "neuropath/image_io.hpp"
#include "neuropath/random.hpp"

namespace neuropath {

/// Per-pixel disparity with a validity mask; x-major like every grid here.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(int w, int h, float fill = 0.0f, bool is_valid = true)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill),
        valid(static_cast<std::size_t>(w) * h, is_valid ? 1 : 0) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::shape, "disparity map extents must be positive");
  }

  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(x) * height + y; }
  float at(int x, int y) const noexcept { return values[index(x, y)]; }
  float& at(int x, int y) noexcept { return values[index(x, y)]; }
  bool is_valid(int x, int y) const noexcept { return valid[index(x, y)] != 0; }
  void set(int x, int y, float d, bool ok = true) noexcept {
    values[index(x, y)] = d;
    valid[index(x, y)] = ok ? 1 : 0;
  }
  bool same_extents(const DisparityMap& o) const noexcept {
    return width == o.width && height == o.height;
  }
};

/// Divides every pixel's scores by its maximum. Pixels whose scores are all
/// zero stay zero and are marked unreliable.
inline CostVolume normalize(CostVolume v) {
  const std::size_t nd = v.shift_count();
  for (int x = 0; x < v.width; ++x)
    for (int y = 0; y < v.height; ++y) {
      double* s = &v.values[v.pixel_index(x, y) * nd];
      const double peak = *std::max_element(s, s + nd);
      if (peak > 0.0) {
        for (std::size_t d = 0; d < nd; ++d) s[d] /= peak;
      } else {
        std::fill(s, s + nd, 0.0);
        v.reliable[v.pixel_index(x, y)] = 0;
      }
    }
  return v;
}

/// Winner-take-all over shifts; ties go to the earliest shift. Disparity is
/// the horizontal component of the winning shift.
inline DisparityMap wta(const CostVolume& v) {
  DisparityMap out(v.width, v.height);
  const std::size_t nd = v.shift_count();
  for (int x = 0; x < v.width; ++x)
    for (int y = 0; y < v.height; ++y) {
      if (!v.is_reliable(x, y)) {
        out.set(x, y, 0.0f, false);
        continue;
      }
      const double* s = &v.values[v.pixel_index(x, y) * nd];
      const std::size_t best = static_cast<std::size_t>(std::max_element(s, s + nd) - s);
      out.set(x, y, static_cast<float>(v.shifts[best].dx));
    }
  return out;
}

/// Normalised cross-correlation of two equal-length vectors after removing
/// each one's mean. Zero-variance inputs give 0.
inline double ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::shape, "ncc needs equal non-empty vectors");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    ab += da * db;
    aa += da * da;
    bb += db * db;
  }
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

namespace detail {

/// Layer-l features of every base pixel, stacked over l in [start, end] and
/// nearest-neighbour up-sampled to the base grid. Conv layers contribute
/// their pre-ReLU response.
inline std::vector<double> stacked_features(const ActivationStack& s, LayerRange range, int& dim) {
  const ImageGrid& base = s.at(range.start);
  const SubsampleChain chain = subsample_chain(s);
  dim = 0;
  for (int l = range.start; l <= range.end; ++l) dim += s.at(l).channels();
  std::vector<double> out(static_cast<std::size_t>(base.width()) * base.height() * dim);
  int offset = 0;
  for (int l = range.start; l <= range.end; ++l) {
    const bool conv = l > 0 && s.shape(l).is_conv();
    const ImageGrid& g = conv ? *s.pre_activations.at(static_cast<std::size_t>(l)) : s.at(l);
    const int factor = chain.product(range.start, l);
    for (int x = 0; x < base.width(); ++x)
      for (int y = 0; y < base.height(); ++y) {
        const auto src = g.pixel(std::min(x / factor, g.width() - 1), std::min(y / factor, g.height() - 1));
        double* dst = &out[(static_cast<std::size_t>(x) * base.height() + y) * dim + offset];
        for (int c = 0; c < g.channels(); ++c) dst[c] = src[c];
      }
    offset += g.channels();
  }
  return out;
}

/// Mean-removed, unit-norm patch descriptors (zero vector if flat).
inline std::vector<double> ncc_descriptors(const std::vector<double>& feats, int width, int height,
                                           int dim, int window, int& out_dim) {
  const int r = window / 2;
  out_dim = dim * window * window;
  std::vector<double> out(static_cast<std::size_t>(width) * height * out_dim);
  for (int x = 0; x < width; ++x)
    for (int y = 0; y < height; ++y) {
      double* dst = &out[(static_cast<std::size_t>(x) * height + y) * out_dim];
      int k = 0;
      for (int dx = -r; dx <= r; ++dx)
        for (int dy = -r; dy <= r; ++dy) {
          const int sx = std::clamp(x + dx, 0, width - 1), sy = std::clamp(y + dy, 0, height - 1);
          const double* src = &feats[(static_cast<std::size_t>(sx) * height + sy) * dim];
          for (int c = 0; c < dim; ++c) dst[k++] = src[c];
        }
      double mean = 0.0;
      for (int i = 0; i < out_dim; ++i) mean += dst[i];
      mean /= out_dim;
      double norm = 0.0;
      for (int i = 0; i < out_dim; ++i) {
        dst[i] -= mean;
        norm += dst[i] * dst[i];
      }
      norm = std::sqrt(norm);
      for (int i = 0; i < out_dim; ++i) dst[i] = norm > 0.0 ? dst[i] / norm : 0.0;
    }
  return out;
}

}  // namespace detail

/// Stacked-feature correlation baseline. Scores are raw NCC in [-1, 1];
/// searched positions off the grid score -1.
inline CostVolume corr_baseline(const ActivationStack& ref, const ActivationStack& srch,
                                const ShiftSet& shifts, LayerRange range, int window = 1) {
  if (window <= 0 || window % 2 == 0) throw Error(ErrorCode::shape, "NCC window must be odd");
  detail::check_aggregation_inputs(ref, srch, shifts, range, ArcMode::full);
  const ImageGrid& base = ref.at(range.start);
  const int w = base.width(), h = base.height();
  int dim = 0, ddim = 0;
  const std::vector<double> ref_feats = detail::stacked_features(ref, range, dim);
  const std::vector<double> srch_feats = detail::stacked_features(srch, range, dim);
  const auto ref_desc = detail::ncc_descriptors(ref_feats, w, h, dim, window, ddim);
  const auto srch_desc = detail::ncc_descriptors(srch_feats, w, h, dim, window, ddim);

  CostVolume v(w, h, shifts);
  v.range = range;
  v.method = VolumeMethod::corr;
  parallel_for(w, [&](int x) {
    for (int y = 0; y < h; ++y)
      for (std::size_t d = 0; d < shifts.size(); ++d) {
        const int sx = x - shifts[d].dx, sy = y - shifts[d].dy;
        if (sx < 0 || sy < 0 || sx >= w || sy >= h) {
          v.at(x, y, d) = -1.0;
          continue;
        }
        const double* a = &ref_desc[(static_cast<std::size_t>(x) * h + y) * ddim];
        const double* b = &srch_desc[(static_cast<std::size_t>(sx) * h + sy) * ddim];
        double dot = 0.0;
        for (int i = 0; i < ddim; ++i) dot += a[i] * b[i];
        v.at(x, y, d) = std::clamp(dot, -1.0, 1.0);
      }
  });
  return v;
}

struct EvalReport {
  std::vector<int> thresholds;
  std::vector<double> percent;
  std::size_t evaluated = 0;

  double err(int t) const {
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      if (thresholds[i] == t) return percent[i];
    throw Error(ErrorCode::shape, "threshold " + std::to_string(t) + " not evaluated");
  }
};

inline std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < r.thresholds.size(); ++i)
    os << "Err_" << r.thresholds[i] << ' ' << r.percent[i] << '\n';
  return os.str();
}

/// Percentage of ground-truth pixels whose prediction misses by more than t
/// pixels; an invalid prediction on a valid ground-truth pixel is a miss.
inline EvalReport err_metric(const DisparityMap& pred, const DisparityMap& gt,
                             std::vector<int> thresholds = {1, 2, 3, 4, 5}) {
  if (!pred.same_extents(gt))
    throw Error(ErrorCode::shape, "prediction and ground truth differ in extents");
  EvalReport r;
  r.thresholds = std::move(thresholds);
  std::vector<std::size_t> wrong(r.thresholds.size(), 0);
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (!gt.valid[i]) continue;
    ++r.evaluated;
    const double err = pred.valid[i] ? std::abs(static_cast<double>(pred.values[i]) - gt.values[i])
                                     : std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.thresholds.size(); ++k)
      if (err > r.thresholds[k]) ++wrong[k];
  }
  if (r.evaluated == 0) throw Error(ErrorCode::empty_evaluation, "no valid ground-truth pixels");
  for (std::size_t k = 0; k < wrong.size(); ++k)
    r.percent.push_back(100.0 * static_cast<double>(wrong[k]) / static_cast<double>(r.evaluated));
  return r;
}

struct SyntheticPair {
  ImageGrid reference;
  ImageGrid searched;
  DisparityMap truth;
};

/// Random-texture pair with a constant horizontal disparity: the searched
/// image is the reference moved left by `shift` (right edge replicated),
/// plus optional Gaussian noise of std `noise`, clamped to [0, 1].
/// Reference columns x < shift have no counterpart and are invalid.
inline SyntheticPair make_synthetic_pair(int width, int height, int shift, double noise,
                                         std::uint64_t seed) {
  if (shift < 0 || shift >= width) throw Error(ErrorCode::shape, "shift must lie in [0, width)");
  Rng rng(seed);
  SyntheticPair p{random_grid(rng, width, height, 1), ImageGrid(width, height, 1),
                  DisparityMap(width, height, static_cast<float>(shift))};
  for (int x = 0; x < width; ++x)
    for (int y = 0; y < height; ++y) {
      double v = p.reference(std::min(x + shift, width - 1), y);
      if (noise > 0.0) v = std::clamp(v + noise * rng.normal(), 0.0, 1.0);
      p.searched(x, y) = static_cast<float>(v);
      if (x < shift) p.truth.set(x, y, static_cast<float>(shift), false);
    }
  return p;
}

/// Mirrors a disparity map along x.
inline DisparityMap flip_horizontal(const DisparityMap& m) {
  DisparityMap out(m.width, m.height);
  for (int x = 0; x < m.width; ++x)
    for (int y = 0; y < m.height; ++y) out.set(m.width - 1 - x, y, m.at(x, y), m.is_valid(x, y));
  return out;
}

/// Invalidates left pixels whose right-view partner disagrees by more than
/// `tolerance` pixels or falls off the image.
inline DisparityMap lr_check(const DisparityMap& left, const DisparityMap& right, double tolerance = 1.0) {
  if (!left.same_extents(right)) throw Error(ErrorCode::shape, "left/right maps differ in extents");
  DisparityMap out = left;
  for (int x = 0; x < left.width; ++x)
    for (int y = 0; y < left.height; ++y) {
      if (!left.is_valid(x, y)) continue;
      const int xr = x - static_cast<int>(std::lround(left.at(x, y)));
      const bool ok = xr >= 0 && xr < right.width && right.is_valid(xr, y) &&
                      std::abs(static_cast<double>(left.at(x, y)) - right.at(xr, y)) <= tolerance;
      if (!ok) out.valid[out.index(x, y)] = 0;
    }
  return out;
}

// Disparity files: 16-bit big-endian P5, value = round(d * 256), 0 = invalid.

inline void write_disparity(std::ostream& out, const DisparityMap& m) {
  out << "P5\n" << m.width << ' ' << m.height << "\n65535\n";
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      std::uint16_t v = 0;
      if (m.is_valid(x, y)) v = static_cast<std::uint16_t>(std::clamp<long>(std::lround(m.at(x, y) * 256.0), 0, 65535));
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
}

inline void write_disparity(const std::filesystem::path& path, const DisparityMap& m) {
  io::write_atomically(path, [&](std::ostream& out) { write_disparity(out, m); });
}

inline DisparityMap read_disparity(std::istream& in) {
  const PnmHeader h = detail::read_pnm_header(in);
  if (h.magic != "P5" || h.maxval != 65535)
    throw Error(ErrorCode::format, "disparity files must be 16-bit P5 (maxval 65535)");
  std::vector<unsigned char> raw(static_cast<std::size_t>(h.width) * h.height * 2);
  io::read_exact(in, raw.data(), raw.size(), "disparity raster");
  DisparityMap m(h.width, h.height);
  std::size_t i = 0;
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x, i += 2) {
      const unsigned v = (static_cast<unsigned>(raw[i]) << 8) | raw[i + 1];
      m.set(x, y, static_cast<float>(v) / 256.0f, v != 0);
    }
  return m;
}

inline DisparityMap read_disparity(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open disparity file '" + path.string() + "'");
  return read_disparity(in);
}

}  // namespace neuropath
