// neuropath command-line front end: stereo, oracle, bench, eval, forward.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "neuropath/neuropath.hpp"

using namespace neuropath;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitInput = 2;
constexpr int kSyntheticExtent = 64;

struct SyntheticSpec {
  int shift = 7;
  double noise = 0.0;
};

SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec s;
  bool have_shift = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::format, "bad --synthetic item '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      if (key == "d0") {
        s.shift = std::stoi(value);
        have_shift = true;
      } else if (key == "noise") {
        s.noise = std::stod(value);
      } else {
        throw Error(ErrorCode::format, "unknown --synthetic key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::format, "bad --synthetic value '" + value + "'");
    }
    pos = comma + 1;
  }
  if (!have_shift) throw Error(ErrorCode::format, "--synthetic needs d0=K");
  if (s.noise < 0.0) throw Error(ErrorCode::format, "noise must be non-negative");
  return s;
}

LayerRange parse_layers(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::format, "--layers expects s:t");
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::format, "--layers expects integers, got '" + text + "'");
  }
}

NetworkSpec toy_network(std::uint64_t seed) {
  Rng rng(seed);
  return random_network(rng, "cpc", {8, 8});
}

// Options shared by commands that run a network.
struct NetOptions {
  std::string weights;
  std::string layers;
  std::string synthetic;
  std::uint64_t seed = 1;

  bool synthetic_mode() const { return !synthetic.empty(); }

  NetworkSpec network() const {
    if (!weights.empty()) return load_weights(std::filesystem::path(weights));
    if (synthetic_mode()) return toy_network(seed);
    throw Error(ErrorCode::format, "--weights is required unless --synthetic is given");
  }

  LayerRange range(const NetworkSpec& net) const {
    if (!layers.empty()) return parse_layers(layers);
    if (weights.empty()) return {0, net.layer_count()};
    return {2, 8};
  }
};

void add_net_options(CLI::App* cmd, NetOptions& o) {
  cmd->add_option("--weights", o.weights, "NPW1 weight file");
  cmd->add_option("--layers", o.layers, "layer range s:t (default 2:8; 0:3 for the toy network)");
  cmd->add_option("--synthetic", o.synthetic, "synthetic pair: d0=K[,noise=x]");
  cmd->add_option("--seed", o.seed, "seed for synthetic data and the toy network");
}

// --- stereo ---------------------------------------------------------------

struct StereoArgs {
  NetOptions net;
  std::string left, right, out, volume_out;
  std::optional<int> dmax;
  std::string semiring = "sum-product";
  std::string arc_mode = "full";
  std::string baseline = "path";
  bool lr = false;
};

int mode_of(const DisparityMap& m, int margin) {
  std::map<int, int> hist;
  for (int x = margin; x < m.width - margin; ++x)
    for (int y = margin; y < m.height - margin; ++y)
      if (m.is_valid(x, y)) ++hist[static_cast<int>(m.at(x, y))];
  int best = -1, count = 0;
  for (auto [d, n] : hist)
    if (n > count) {
      best = d;
      count = n;
    }
  return best;
}

int run_stereo(const StereoArgs& a) {
  const NetworkSpec net = a.net.network();
  StereoOptions opt;
  opt.range = a.net.range(net);
  opt.semiring = parse_semiring(a.semiring);
  opt.arc_mode = parse_arc_mode(a.arc_mode);
  if (a.baseline != "path" && a.baseline != "corr")
    throw Error(ErrorCode::format, "--baseline must be path or corr");
  opt.corr_baseline = a.baseline == "corr";

  ImageGrid left, right;
  std::optional<SyntheticPair> pair;
  if (a.net.synthetic_mode()) {
    const SyntheticSpec s = parse_synthetic(a.net.synthetic);
    pair = make_synthetic_pair(kSyntheticExtent, kSyntheticExtent, s.shift, s.noise, a.net.seed + 100);
    left = pair->reference;
    right = pair->searched;
    opt.max_disparity = a.dmax.value_or(15);
  } else {
    if (a.left.empty() || a.right.empty()) throw Error(ErrorCode::format, "--left and --right are required");
    left = read_image(std::filesystem::path(a.left));
    right = read_image(std::filesystem::path(a.right));
    opt.max_disparity = a.dmax.value_or(228);
  }

  StereoResult r = match_stereo(net, left, right, opt);
  if (a.lr) {
    const DisparityMap rv = match_stereo_right(net, left, right, opt);
    r.disparity = lr_check(r.disparity, rv);
  }

  std::printf("range %d:%d  semiring %s  arcs %s  method %s  shifts %d  extent %dx%d\n", opt.range.start,
              opt.range.end, std::string(to_string(opt.semiring)).c_str(),
              std::string(to_string(opt.arc_mode)).c_str(), a.baseline.c_str(), opt.max_disparity + 1,
              r.disparity.width, r.disparity.height);
  double total = 0.0;
  for (const auto& [name, secs] : r.timings) {
    std::printf("  %-12s %9.4f s\n", name.c_str(), secs);
    total += secs;
  }
  std::printf("  %-12s %9.4f s\n", "total", total);

  if (pair && r.disparity.width == pair->truth.width && r.disparity.height == pair->truth.height) {
    const int margin = receptive_margin(net, opt.range.start, opt.range.end) + opt.max_disparity;
    std::printf("interior mode %d\n", mode_of(r.disparity, margin));
    std::fputs(format_report(err_metric(r.disparity, pair->truth)).c_str(), stdout);
  }
  if (!a.out.empty()) write_disparity(std::filesystem::path(a.out), r.disparity);
  if (!a.volume_out.empty()) save_volume(std::filesystem::path(a.volume_out), r.volume);
  return 0;
}

// --- oracle ---------------------------------------------------------------

struct OracleArgs {
  int cases = 50;
  std::uint64_t seed = 0;
  std::string semiring, arc_mode;
};

int run_oracle(const OracleArgs& a) {
  std::optional<SemiringId> sr;
  std::optional<ArcMode> mode;
  if (!a.semiring.empty()) sr = parse_semiring(a.semiring);
  if (!a.arc_mode.empty()) mode = parse_arc_mode(a.arc_mode);
  int failures = 0;
  for (int i = 0; i < a.cases; ++i) {
    const OracleCase c = make_oracle_case(a.seed + static_cast<std::uint64_t>(i), sr ? &*sr : nullptr,
                                          mode ? &*mode : nullptr);
    const OracleOutcome o = run_oracle_case(c);
    std::printf("%s  %s  deviation %.3e  paths %llu\n", o.passed() ? "ok  " : "FAIL", c.describe().c_str(),
                o.max_relative_deviation, static_cast<unsigned long long>(o.enumerated_paths));
    if (!o.passed()) {
      ++failures;
      std::fprintf(stderr, "mismatch: %s%s\n", c.describe().c_str(),
                   o.counts_match ? "" : " (path counts differ)");
    }
  }
  std::printf("%d/%d cases agree\n", a.cases - failures, a.cases);
  return failures == 0 ? 0 : kExitMismatch;
}

// --- bench ----------------------------------------------------------------

int run_bench_cmd(BenchConfig cfg, const std::string& semiring) {
  cfg.semiring = parse_semiring(semiring);
  const auto rows = run_bench(cfg);
  const std::size_t shifts = static_cast<std::size_t>(cfg.max_shift) + 1;
  std::printf("extent %dx%d  channels %d  shifts %zu  threads %d\n", cfg.extent, cfg.extent, cfg.channels, shifts,
              thread_count());
  for (const BenchRow& r : rows)
    std::printf("L=%d  backward %.4f s  arcs %llu  %.3e s/arc/shift  paths/origin %llu\n", r.layers, r.seconds,
                static_cast<unsigned long long>(r.arcs), r.seconds_per_arc(shifts),
                static_cast<unsigned long long>(r.max_paths));
  for (std::size_t i = 1; i < rows.size(); ++i)
    std::printf("ratio L=%d/L=%d  time %.2f  paths %.3g\n", rows[i].layers, rows[i - 1].layers,
                rows[i].seconds / rows[i - 1].seconds,
                static_cast<double>(rows[i].max_paths) / static_cast<double>(rows[i - 1].max_paths));
  return 0;
}

// --- eval -----------------------------------------------------------------

int run_eval(const std::string& pred, const std::string& gt) {
  const EvalReport r = err_metric(read_disparity(std::filesystem::path(pred)), read_disparity(std::filesystem::path(gt)));
  std::fputs(format_report(r).c_str(), stdout);
  std::printf("evaluated %zu\n", r.evaluated);
  return 0;
}

// --- forward --------------------------------------------------------------

int run_forward(const NetOptions& o, const std::string& image) {
  const NetworkSpec net = o.network();
  const LayerRange range = o.range(net);
  ImageGrid img;
  if (o.synthetic_mode()) {
    const SyntheticSpec s = parse_synthetic(o.synthetic);
    img = make_synthetic_pair(kSyntheticExtent, kSyntheticExtent, s.shift, s.noise, o.seed + 100).reference;
  } else {
    if (image.empty()) throw Error(ErrorCode::format, "--left is required");
    img = read_image(std::filesystem::path(image));
  }
  const ActivationStack s = forward(net, prepare_image(net, img, range.end), range.start, range.end);
  for (int l = 0; l <= s.top(); ++l) {
    const ImageGrid& a = s.at(l);
    double sum = 0.0;
    std::uint64_t hash = 1469598103934665603ull;
    for (float v : a.data()) {
      sum += v;
      hash = (hash ^ std::bit_cast<std::uint32_t>(v)) * 1099511628211ull;
    }
    const char* kind = l == 0 ? "input" : (s.shape(l).is_pool() ? "maxpool" : "conv+relu");
    std::printf("layer %d %-9s %dx%dx%d  sum %.6g  fnv %016llx%s\n", l, kind, a.width(), a.height(), a.channels(),
                sum, static_cast<unsigned long long>(hash), l == range.start ? "  (base)" : "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural-path correspondence search"};
  app.require_subcommand(1);

  StereoArgs stereo;
  auto* st = app.add_subcommand("stereo", "compute a disparity map for an image pair");
  add_net_options(st, stereo.net);
  st->add_option("--left", stereo.left, "reference image (PGM/PPM)");
  st->add_option("--right", stereo.right, "searched image (PGM/PPM)");
  st->add_option("--dmax", stereo.dmax, "largest disparity (default 228; 15 for --synthetic)");
  st->add_option("--semiring", stereo.semiring, "sum-product | max-product | max-min");
  st->add_option("--arc-mode", stereo.arc_mode, "full | central");
  st->add_option("--baseline", stereo.baseline, "path | corr");
  st->add_option("--out", stereo.out, "disparity output (16-bit PGM)");
  st->add_option("--volume-out", stereo.volume_out, "cost volume output (NPCV)");
  st->add_flag("--lr-check", stereo.lr, "invalidate pixels failing a left-right consistency check");

  OracleArgs oracle;
  auto* orc = app.add_subcommand("oracle", "compare the backward pass with path enumeration");
  orc->add_option("--cases", oracle.cases, "number of random configurations");
  orc->add_option("--seed", oracle.seed, "seed of the first configuration");
  orc->add_option("--semiring", oracle.semiring, "fix the semiring (default: cycle)");
  orc->add_option("--arc-mode", oracle.arc_mode, "fix the arc mode (default: alternate)");

  BenchConfig bench;
  std::string bench_semiring = "sum-product";
  auto* bn = app.add_subcommand("bench", "time the backward pass against network depth");
  bn->add_option("--extent", bench.extent, "image width and height");
  bn->add_option("--channels", bench.channels, "channels per layer");
  bn->add_option("--dmax", bench.max_shift, "largest shift (|D| = dmax + 1)");
  bn->add_option("--repeats", bench.repeats, "timed runs per depth (best is reported)");
  bn->add_option("--seed", bench.seed, "seed");
  bn->add_option("--semiring", bench_semiring, "semiring");

  std::string pred, gt;
  auto* ev = app.add_subcommand("eval", "Err_t of a disparity map against ground truth");
  ev->add_option("--pred", pred, "predicted disparity (16-bit PGM)")->required();
  ev->add_option("--gt", gt, "ground-truth disparity (16-bit PGM)")->required();

  NetOptions fwd;
  std::string fwd_image;
  auto* fw = app.add_subcommand("forward", "print activation extents and checksums");
  add_net_options(fw, fwd);
  fw->add_option("--left", fwd_image, "input image (PGM/PPM)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*st) return run_stereo(stereo);
    if (*orc) return run_oracle(oracle);
    if (*bn) return run_bench_cmd(bench, bench_semiring);
    if (*ev) return run_eval(pred, gt);
    if (*fw) return run_forward(fwd, fwd_image);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return 0;
}
