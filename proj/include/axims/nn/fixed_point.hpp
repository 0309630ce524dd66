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

#include <cmath>
#include <cstdint>
#include <string>

#include "axims/errors.hpp"

namespace axims {

// Signed two's-complement <W,I>: W total bits, I integer bits including the
// sign, F = W - I fractional bits.
struct FixedFormat {
  int total_bits = 8;
  int integer_bits = 5;

  constexpr int fractional_bits() const noexcept { return total_bits - integer_bits; }
  constexpr std::int64_t min_code() const noexcept { return -(std::int64_t{1} << (total_bits - 1)); }
  constexpr std::int64_t max_code() const noexcept { return (std::int64_t{1} << (total_bits - 1)) - 1; }
  double step() const noexcept { return std::ldexp(1.0, -fractional_bits()); }
  double min_value() const noexcept { return static_cast<double>(min_code()) * step(); }
  double max_value() const noexcept { return static_cast<double>(max_code()) * step(); }

  void validate() const {
    if (total_bits < 2 || total_bits > 32) {
      throw FormatError("fixed-point width must be in [2, 32], got " + std::to_string(total_bits));
    }
    if (integer_bits < 0 || integer_bits > total_bits) {
      throw FormatError("integer bits must be in [0, W], got " + to_string());
    }
  }

  std::string to_string() const {
    return "<" + std::to_string(total_bits) + "," + std::to_string(integer_bits) + ">";
  }

  friend constexpr bool operator==(const FixedFormat&, const FixedFormat&) = default;
};

inline constexpr FixedFormat kActivationFormat{16, 8};

// Parses "8,5" or "<8,5>".
inline FixedFormat parse_fixed_format(std::string s) {
  if (!s.empty() && s.front() == '<') s.erase(0, 1);
  if (!s.empty() && s.back() == '>') s.pop_back();
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("fixed format must look like W,I: '" + s + "'");
  FixedFormat f;
  try {
    std::size_t p1 = 0, p2 = 0;
    f.total_bits = std::stoi(s.substr(0, comma), &p1);
    f.integer_bits = std::stoi(s.substr(comma + 1), &p2);
    if (p1 != comma || p2 != s.size() - comma - 1) throw std::invalid_argument("trailing");
  } catch (const std::logic_error&) {
    throw ConfigError("fixed format must look like W,I: '" + s + "'");
  }
  f.validate();
  return f;
}

inline std::int64_t saturate_code(std::int64_t c, const FixedFormat& f) noexcept {
  return c < f.min_code() ? f.min_code() : (c > f.max_code() ? f.max_code() : c);
}

// Round to nearest, ties to even, saturating. NaN maps to 0.
inline std::int64_t quantize_value(double x, const FixedFormat& f) {
  if (std::isnan(x)) return 0;
  const double scaled = std::ldexp(x, f.fractional_bits());
  if (scaled <= static_cast<double>(f.min_code())) return f.min_code();
  if (scaled >= static_cast<double>(f.max_code())) return f.max_code();
  return static_cast<std::int64_t>(std::nearbyint(scaled));  // default FE_TONEAREST
}

inline double dequantize(std::int64_t code, const FixedFormat& f) noexcept {
  return std::ldexp(static_cast<double>(code), -f.fractional_bits());
}

inline double fake_quantize(double x, const FixedFormat& f) { return dequantize(quantize_value(x, f), f); }

// Arithmetic right shift by `s` bits with round-half-to-even.
inline std::int64_t shift_round_even(std::int64_t v, int s) noexcept {
  if (s <= 0) return v << (-s);
  const std::int64_t q = v >> s;  // floor
  const std::int64_t rem = v - (q << s);
  const std::int64_t half = std::int64_t{1} << (s - 1);
  if (rem > half || (rem == half && (q & 1))) return q + 1;
  return q;
}

}  // namespace axims
