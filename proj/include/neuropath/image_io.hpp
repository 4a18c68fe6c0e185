#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "neuropath/binary_io.hpp"
#include "neuropath/grid.hpp"

namespace neuropath {

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

namespace detail {

inline int read_pnm_int(std::istream& in) {
  int ch = in.get();
  for (;;) {
    while (ch != EOF && std::isspace(ch)) ch = in.get();
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
      continue;
    }
    break;
  }
  if (ch == EOF || !std::isdigit(ch)) throw Error(ErrorCode::format, "malformed PNM header");
  long value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    if (value > (1L << 24)) throw Error(ErrorCode::format, "PNM header value too large");
    ch = in.get();
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (ch == EOF || !std::isspace(ch)) throw Error(ErrorCode::format, "malformed PNM header");
  return static_cast<int>(value);
}

inline PnmHeader read_pnm_header(std::istream& in) {
  PnmHeader h;
  char m[2] = {};
  in.read(m, 2);
  if (in.gcount() != 2 || m[0] != 'P') throw Error(ErrorCode::format, "not a binary PGM/PPM file");
  h.magic.assign(m, 2);
  h.width = read_pnm_int(in);
  h.height = read_pnm_int(in);
  h.maxval = read_pnm_int(in);
  if (h.width <= 0 || h.height <= 0) throw Error(ErrorCode::format, "PNM extents must be positive");
  return h;
}

}  // namespace detail

/// Reads 8-bit P5 (gray) or P6 (RGB) into [0, 1].
inline ImageGrid read_image(std::istream& in) {
  const PnmHeader h = detail::read_pnm_header(in);
  int channels = 0;
  if (h.magic == "P5") channels = 1;
  else if (h.magic == "P6") channels = 3;
  else throw Error(ErrorCode::format, "unsupported PNM type " + h.magic + " (need P5 or P6)");
  if (h.maxval != 255) throw Error(ErrorCode::format, "only 8-bit images (maxval 255) are supported");
  std::vector<unsigned char> raster(static_cast<std::size_t>(h.width) * h.height * channels);
  io::read_exact(in, raster.data(), raster.size(), "image raster");
  ImageGrid g(h.width, h.height, channels);
  std::size_t i = 0;
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x)
      for (int c = 0; c < channels; ++c) g(x, y, c) = static_cast<float>(raster[i++]) / 255.0f;
  return g;
}

inline ImageGrid read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open image '" + path.string() + "'");
  return read_image(in);
}

/// Writes a 1- or 3-channel grid in [0, 1] as 8-bit P5/P6.
inline void write_image(std::ostream& out, const ImageGrid& g) {
  if (g.channels() != 1 && g.channels() != 3)
    throw Error(ErrorCode::invalid_channel, "can only write 1- or 3-channel images");
  out << (g.channels() == 1 ? "P5" : "P6") << '\n' << g.width() << ' ' << g.height() << "\n255\n";
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      for (int c = 0; c < g.channels(); ++c) {
        const double v = std::clamp(static_cast<double>(g(x, y, c)), 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
}

inline void write_image(const std::filesystem::path& path, const ImageGrid& g) {
  io::write_atomically(path, [&](std::ostream& out) { write_image(out, g); });
}

}  // namespace neuropath
