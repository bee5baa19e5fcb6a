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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "phasepred/error.hpp"

namespace phasepred {

/// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
};

inline void validate(const AudioClip& clip) {
  detail::require(clip.sample_rate > 0, "AudioClip: sample_rate must be > 0");
  for (double s : clip.samples) {
    detail::require(std::isfinite(s), "AudioClip: non-finite sample");
  }
}

/// Non-overlapping slices of slice_length samples; a trailing partial slice is
/// dropped.
inline std::vector<AudioClip> slice_clip(const AudioClip& clip, std::size_t slice_length) {
  detail::require(slice_length > 0, "slice_clip: slice_length must be > 0");
  std::vector<AudioClip> out;
  for (std::size_t start = 0; start + slice_length <= clip.size(); start += slice_length) {
    out.push_back({std::vector<double>(clip.samples.begin() + start,
                                       clip.samples.begin() + start + slice_length),
                   clip.sample_rate});
  }
  return out;
}

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Decodes a RIFF/WAVE byte buffer holding 16-bit PCM. Channels are averaged
/// to mono and samples are scaled by 1/32768.
inline AudioClip decode_wav(const std::vector<unsigned char>& bytes,
                            std::optional<int> expected_rate = std::nullopt) {
  using detail::read_u16le;
  using detail::read_u32le;
  detail::require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                      std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
                  "wav: not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32le(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      detail::require(len >= 16 && avail >= 16, "wav: truncated fmt chunk");
      std::uint16_t format = read_u16le(chunk + 8);
      channels = read_u16le(chunk + 10);
      rate = read_u32le(chunk + 12);
      bits = read_u16le(chunk + 22);
      // WAVE_FORMAT_EXTENSIBLE: the real format tag opens the sub-format GUID.
      if (format == 0xFFFE && len >= 40 && avail >= 40) {
        format = read_u16le(chunk + 32);
      }
      detail::require(format == 1, "wav: unsupported encoding (PCM only)");
      detail::require(bits == 16, "wav: unsupported bit depth " +
                                      std::to_string(bits) + " (16-bit only)");
      detail::require(channels > 0, "wav: zero channels");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = std::min<std::size_t>(len, avail);
    }
    pos = body + len + (len & 1u);
  }
  detail::require(have_fmt, "wav: missing fmt chunk");
  detail::require(data != nullptr, "wav: missing data chunk");
  if (expected_rate && static_cast<int>(rate) != *expected_rate) {
    throw Error("wav: sample rate " + std::to_string(rate) + " Hz, expected " +
                std::to_string(*expected_rate) + " Hz (resampling is not supported)");
  }

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data_len / frame_bytes;
  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(
          read_u16le(data + i * frame_bytes + 2 * c));
      acc += raw / 32768.0;
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

inline AudioClip load_wav(const std::filesystem::path& path,
                          std::optional<int> expected_rate = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("wav: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, expected_rate);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [" + path.string() + "]");
  }
}

/// Encodes interleaved 16-bit PCM. Samples are clamped to the int16 range
/// after scaling by 32768 and rounding.
inline std::string encode_wav(const std::vector<std::vector<double>>& channels,
                              int sample_rate) {
  detail::require(!channels.empty(), "wav: no channels to encode");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    detail::require(ch.size() == frames, "wav: channel lengths differ");
  }
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * nch * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  detail::put_u32le(out, 36 + data_len);
  out += "WAVEfmt ";
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);
  detail::put_u16le(out, nch);
  detail::put_u32le(out, static_cast<std::uint32_t>(sample_rate));
  detail::put_u32le(out, static_cast<std::uint32_t>(sample_rate) * nch * 2);
  detail::put_u16le(out, static_cast<std::uint16_t>(nch * 2));
  detail::put_u16le(out, 16);
  out += "data";
  detail::put_u32le(out, data_len);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      const double scaled = std::round(ch[i] * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      detail::put_u16le(out, static_cast<std::uint16_t>(v));
    }
  }
  return out;
}

inline void save_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const std::string bytes = encode_wav({clip.samples}, clip.sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("wav: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("wav: write failed for " + path.string());
}

}  // namespace phasepred
