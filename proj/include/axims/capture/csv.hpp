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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "axims/capture/capture.hpp"
#include "axims/capture/schema.hpp"
#include "axims/errors.hpp"

namespace axims {

namespace detail {

inline void append_number(std::string& out, double v) {
  if (std::isfinite(v) && v == std::nearbyint(v) && std::fabs(v) < 9.007199254740992e15) {
    out += std::to_string(static_cast<long long>(v));
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  }
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Decimal, 0x-hexadecimal, or 0b-binary field; throws on anything else.
inline double parse_field(std::string_view tok, std::size_t line_no, std::string_view column) {
  auto fail = [&]() -> double {
    throw SchemaError("line " + std::to_string(line_no) + ": column '" + std::string(column) +
                      "': cannot parse '" + std::string(tok) + "'");
  };
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) {
    tok.remove_suffix(1);
  }
  if (tok.empty()) return fail();
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X' || tok[1] == 'b' || tok[1] == 'B')) {
    const int base = (tok[1] == 'x' || tok[1] == 'X') ? 16 : 2;
    unsigned long long u = 0;
    const auto res = std::from_chars(tok.data() + 2, tok.data() + tok.size(), u, base);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) return fail();
    return static_cast<double>(u);
  }
  const std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return fail();
  return v;
}

}  // namespace detail

inline void write_csv(const Dataset& ds, std::ostream& os) {
  ds.validate();
  os << "#schema_version=" << kSchemaVersion << '\n';
  std::string line;
  for (const auto& c : ds.schema) {
    line += c;
    line += ',';
  }
  line += kLabelColumn;
  line += ',';
  line += kAttackColumn;
  os << line << '\n';
  for (const auto& r : ds.rows) {
    line.clear();
    for (double v : r.values) {
      detail::append_number(line, v);
      line += ',';
    }
    line += std::to_string(r.label);
    line += ',';
    line += std::to_string(r.attack_kind ? static_cast<int>(*r.attack_kind) : 0);
    os << line << '\n';
  }
}

inline Dataset read_csv(std::istream& is) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool have_version = false;
  std::optional<std::size_t> window_col, trigger_col, counter_col;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view key = "#schema_version=";
      if (line.rfind(key, 0) == 0) {
        if (line.substr(key.size()) != std::to_string(kSchemaVersion)) {
          throw SchemaError("line " + std::to_string(line_no) + ": unsupported schema version " +
                            line.substr(key.size()));
        }
        have_version = true;
      }
      continue;
    }
    const auto fields = detail::split_fields(line);
    if (!have_header) {
      if (!have_version) throw SchemaError("line " + std::to_string(line_no) + ": missing #schema_version");
      if (fields.size() < 2 || fields[fields.size() - 2] != kLabelColumn ||
          fields.back() != kAttackColumn) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": header must end with label,attack_kind");
      }
      for (std::size_t i = 0; i + 2 < fields.size(); ++i) ds.schema.emplace_back(fields[i]);
      window_col = ds.column(kDebugColumns[1].name);
      trigger_col = ds.column(kDebugColumns[0].name);
      counter_col = ds.column(kDebugColumns[3].name);
      have_header = true;
      continue;
    }
    if (fields.size() != ds.schema.size() + 2) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(ds.schema.size() + 2) + " fields, got " +
                        std::to_string(fields.size()));
    }
    CaptureRecord r;
    r.values.reserve(ds.schema.size());
    for (std::size_t i = 0; i < ds.schema.size(); ++i) {
      r.values.push_back(detail::parse_field(fields[i], line_no, ds.schema[i]));
    }
    const double label = detail::parse_field(fields[ds.schema.size()], line_no, kLabelColumn);
    const double code = detail::parse_field(fields[ds.schema.size() + 1], line_no, kAttackColumn);
    if ((label != 0 && label != 1) || code < 0 || code > 7 || code != std::nearbyint(code)) {
      throw SchemaError("line " + std::to_string(line_no) + ": invalid label/attack_kind");
    }
    r.label = static_cast<int>(label);
    r.attack_kind = attack_kind_from_code(static_cast<int>(code));
    if ((r.label == 1) != r.attack_kind.has_value()) {
      throw SchemaError("line " + std::to_string(line_no) + ": label disagrees with attack_kind");
    }
    r.sample_index = counter_col ? static_cast<std::uint64_t>(r.values[*counter_col]) : ds.rows.size();
    if (window_col && trigger_col) {
      r.cycle = static_cast<std::uint64_t>(r.values[*window_col]) * kCaptureWindowCycles +
                static_cast<std::uint64_t>(r.values[*trigger_col]);
    }
    ds.rows.push_back(std::move(r));
  }
  if (!have_header) throw SchemaError("CSV has no header row");
  return ds;
}

inline void export_csv(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_csv(ds, os);
  if (!os) throw IoError("write failed: " + path);
}

inline Dataset import_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_csv(is);
}

}  // namespace axims
