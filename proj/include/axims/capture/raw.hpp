// Copyright 2026 The AXIMS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "axims/capture/capture.hpp"
#include "axims/capture/schema.hpp"
#include "axims/errors.hpp"

namespace axims {

// Raw capture image:
//   "AXIC" | version u8 | sample count u64 LE | samples
// Each sample packs the 57 captured fields LSB-first in column order using
// the widths in schema.hpp (290 bits), padded with zeros to 37 bytes.
// Protocol fields saturate at their width; debug counters wrap.
inline constexpr std::array<char, 4> kRawMagic = {'A', 'X', 'I', 'C'};
inline constexpr std::uint8_t kRawVersion = 1;
inline constexpr std::size_t kRawSampleBytes = (kRawSampleBits + 7) / 8;

inline std::vector<std::uint8_t> pack_raw_sample(const CaptureRecord& r) {
  if (r.values.size() != kNumCaptured) {
    throw SchemaError("raw image needs " + std::to_string(kNumCaptured) + " fields, record has " +
                      std::to_string(r.values.size()));
  }
  std::vector<std::uint8_t> img(kRawSampleBytes, 0);
  std::size_t bit = 0;
  auto put = [&](std::uint64_t v, unsigned width) {
    for (unsigned b = 0; b < width; ++b, ++bit) {
      if ((v >> b) & 1) img[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  };
  for (std::size_t i = 0; i < kNumProtocol; ++i) {
    const unsigned w = kProtocolColumns[i].bits;
    const std::uint64_t max = w >= 64 ? ~0ULL : (1ULL << w) - 1;
    const double x = std::max(0.0, r.values[i]);
    put(x >= static_cast<double>(max) ? max : static_cast<std::uint64_t>(x), w);
  }
  for (std::size_t i = 0; i < kNumDebug; ++i) {
    put(static_cast<std::uint64_t>(std::max(0.0, r.values[kNumProtocol + i])), kDebugColumns[i].bits);
  }
  return img;
}

inline std::array<std::uint64_t, kNumCaptured> unpack_raw_sample(const std::uint8_t* img) {
  std::array<std::uint64_t, kNumCaptured> out{};
  std::size_t bit = 0;
  auto get = [&](unsigned width) {
    std::uint64_t v = 0;
    for (unsigned b = 0; b < width; ++b, ++bit) {
      if ((img[bit / 8] >> (bit % 8)) & 1) v |= 1ULL << b;
    }
    return v;
  };
  for (std::size_t i = 0; i < kNumProtocol; ++i) out[i] = get(kProtocolColumns[i].bits);
  for (std::size_t i = 0; i < kNumDebug; ++i) out[kNumProtocol + i] = get(kDebugColumns[i].bits);
  return out;
}

inline void write_raw(const Dataset& ds, std::ostream& os) {
  if (ds.schema != capture_schema()) throw SchemaError("raw export needs the 57-field capture schema");
  os.write(kRawMagic.data(), kRawMagic.size());
  os.put(static_cast<char>(kRawVersion));
  const std::uint64_t n = ds.rows.size();
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((n >> (8 * i)) & 0xFF));
  for (const auto& r : ds.rows) {
    const auto img = pack_raw_sample(r);
    os.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  }
}

inline std::vector<std::array<std::uint64_t, kNumCaptured>> read_raw(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  if (!is || magic != kRawMagic) throw SchemaError("not an AXIC raw capture");
  const int version = is.get();
  if (version != kRawVersion) throw SchemaError("unsupported raw version " + std::to_string(version));
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(is.get())) << (8 * i);
  if (!is) throw SchemaError("truncated raw header");
  std::vector<std::array<std::uint64_t, kNumCaptured>> out;
  std::vector<std::uint8_t> img(kRawSampleBytes);
  for (std::uint64_t s = 0; s < n; ++s) {
    is.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!is) throw SchemaError("truncated raw sample " + std::to_string(s));
    out.push_back(unpack_raw_sample(img.data()));
  }
  return out;
}

inline void export_raw(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_raw(ds, os);
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace axims
