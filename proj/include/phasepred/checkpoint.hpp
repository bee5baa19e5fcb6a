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

// Model checkpoint container.
//
// Layout (all integers little-endian):
//   "PHPRCKPT"                         8-byte magic
//   u32 version                        currently 1
//   u32 heads (0 phase, 1 hybrid), u32 kernel, u32 embedding_dim, u32 pool,
//   u32 input_frames, u32 input_bins, u32 depth, u32 channels[depth]
//   u64 init seed
//   u8 has_tau_bar, f64 tau_bar
//   u32 block count, then per block:
//     str name (u32 length + bytes), u32 rank, u64 dims[rank], f64 values[]

#include <cstring>
#include <filesystem>
#include <optional>
#include <string>

#include "phasepred/binary_io.hpp"
#include "phasepred/model.hpp"

namespace phasepred {

inline constexpr char kCheckpointMagic[8] = {'P', 'H', 'P', 'R', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::optional<double> tau_bar;  // mean group delay calibrated at training time
};

inline std::string encode_checkpoint(const Checkpoint& ckpt) {
  ModelParams params = ckpt.params;  // param_blocks needs mutable access
  const ArchConfig& a = params.arch;
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(a.heads == Heads::kPhase ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(a.kernel));
  w.u32(static_cast<std::uint32_t>(a.embedding_dim));
  w.u32(static_cast<std::uint32_t>(a.pool));
  w.u32(static_cast<std::uint32_t>(a.input_frames));
  w.u32(static_cast<std::uint32_t>(a.input_bins));
  w.u32(static_cast<std::uint32_t>(a.channels.size()));
  for (int c : a.channels) w.u32(static_cast<std::uint32_t>(c));
  w.u64(params.seed);
  w.u8(ckpt.tau_bar ? 1 : 0);
  w.f64(ckpt.tau_bar.value_or(0.0));
  const auto blocks = param_blocks(params);
  w.u32(static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    w.str(b.name);
    w.u32(static_cast<std::uint32_t>(b.shape.size()));
    for (std::size_t d : b.shape) w.u64(d);
    for (double v : b.values) w.f64(v);
  }
  return w.bytes();
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  char magic[8];
  r.raw(magic, sizeof magic);
  detail::require(std::memcmp(magic, kCheckpointMagic, sizeof magic) == 0,
                  "checkpoint: bad magic (not a phasepred checkpoint)");
  const std::uint32_t version = r.u32();
  detail::require(version == kCheckpointVersion,
                  "checkpoint: unsupported version " + std::to_string(version));
  ArchConfig a;
  const std::uint32_t heads = r.u32();
  detail::require(heads <= 1, "checkpoint: bad heads field");
  a.heads = heads == 0 ? Heads::kPhase : Heads::kPhaseAndMagnitude;
  a.kernel = static_cast<int>(r.u32());
  a.embedding_dim = static_cast<int>(r.u32());
  a.pool = static_cast<int>(r.u32());
  a.input_frames = static_cast<int>(r.u32());
  a.input_bins = static_cast<int>(r.u32());
  const std::uint32_t depth = r.u32();
  detail::require(depth > 0 && depth < 64, "checkpoint: bad depth");
  a.channels.resize(depth);
  for (auto& c : a.channels) c = static_cast<int>(r.u32());

  Checkpoint ckpt;
  ckpt.params = zero_model(a);
  ckpt.params.seed = r.u64();
  const bool has_tau = r.u8() != 0;
  const double tau = r.f64();
  if (has_tau) ckpt.tau_bar = tau;

  auto blocks = param_blocks(ckpt.params);
  detail::require(r.u32() == blocks.size(), "checkpoint: block count does not match architecture");
  for (auto& b : blocks) {
    const std::string name = r.str();
    detail::require(name == b.name, "checkpoint: expected block " + b.name + ", found " + name);
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = r.u64();
    detail::require(shape == b.shape, "checkpoint: shape mismatch for " + name);
    for (double& v : b.values) v = r.f64();
  }
  detail::require(r.done(), "checkpoint: trailing bytes");
  return ckpt;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  detail::write_file(path, encode_checkpoint(ckpt));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(detail::read_file(path));
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [" + path.string() + "]");
  }
}

}  // namespace phasepred
