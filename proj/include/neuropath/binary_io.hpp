#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "neuropath/error.hpp"

namespace neuropath::io {

// Little-endian primitives shared by the NPW1 and NPCV formats.

inline void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw Error(ErrorCode::truncated, std::string("stream ended while reading ") + what);
}

inline std::uint8_t read_u8(std::istream& in, const char* what) {
  std::uint8_t b = 0;
  read_exact(in, &b, 1, what);
  return b;
}

inline std::uint32_t read_u32_le(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  read_exact(in, b.data(), b.size(), what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline float read_f32_le(std::istream& in, const char* what) {
  return std::bit_cast<float>(read_u32_le(in, what));
}

inline void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline void write_f32_le(std::ostream& out, float v) {
  write_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temp file, then renames over `path`, so readers
/// never observe a partially written file.
template <typename WriteFn>
void write_atomically(const std::filesystem::path& path, WriteFn&& write) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot create '" + tmp.string() + "'");
    write(out);
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::io, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::io, "cannot rename to '" + path.string() + "': " + ec.message());
  }
}

}  // namespace neuropath::io
