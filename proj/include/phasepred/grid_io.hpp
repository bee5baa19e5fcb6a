/*
 * Copyright 2026 The phasepred Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Tabular outputs: binary grid blobs and CSV.
//
// Grid blob layout: "PHPRGRID" magic, u32 version (1), u32 reserved (0),
// u64 rows, u64 cols, then rows*cols little-endian f64 values, row-major.

#include <charconv>
#include <cstring>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include "phasepred/binary_io.hpp"
#include "phasepred/grid.hpp"

namespace phasepred {

inline constexpr char kGridMagic[8] = {'P', 'H', 'P', 'R', 'G', 'R', 'I', 'D'};

inline std::string encode_grid(const RealGrid& g) {
  detail::ByteWriter w;
  w.raw(kGridMagic, sizeof kGridMagic);
  w.u32(1);
  w.u32(0);
  w.u64(g.rows());
  w.u64(g.cols());
  for (double v : g.data()) w.f64(v);
  return w.bytes();
}

inline RealGrid decode_grid(const std::string& bytes) {
  detail::ByteReader r(bytes, "grid blob");
  char magic[8];
  r.raw(magic, sizeof magic);
  detail::require(std::memcmp(magic, kGridMagic, sizeof magic) == 0, "grid blob: bad magic");
  detail::require(r.u32() == 1, "grid blob: unsupported version");
  r.u32();
  const std::uint64_t rows = r.u64(), cols = r.u64();
  detail::require(cols == 0 || rows <= r.remaining() / 8 / cols, "grid blob: truncated data");
  std::vector<double> data(rows * cols);
  for (double& v : data) v = r.f64();
  detail::require(r.done(), "grid blob: trailing bytes");
  return RealGrid(rows, cols, std::move(data));
}

inline void save_grid(const std::filesystem::path& path, const RealGrid& g) {
  detail::write_file(path, encode_grid(g));
}

inline RealGrid load_grid(const std::filesystem::path& path) {
  return decode_grid(detail::read_file(path));
}

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Plain CSV of a grid, one row per line, no header.
inline std::string grid_to_csv(const RealGrid& g) {
  std::string out;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (c) out.push_back(',');
      out += format_double(g(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace phasepred
