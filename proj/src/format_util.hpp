// Copyright 2026 The resebm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RESEBM_SRC_FORMAT_UTIL_HPP_
#define RESEBM_SRC_FORMAT_UTIL_HPP_

#include <charconv>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "resebm/errors.hpp"

namespace resebm::detail {

// Parses `#<tag> k1=v1 k2=v2 ...` into a map. Throws IoError on mismatch.
inline std::map<std::string, std::string> parse_header(const std::string& line,
                                                       const std::string& tag) {
  std::istringstream ss(line);
  std::string head;
  ss >> head;
  if (head != "#" + tag) throw IoError("expected header '#" + tag + "', got '" + line + "'");
  std::map<std::string, std::string> fields;
  std::string kv;
  while (ss >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw IoError("malformed header field '" + kv + "'");
    fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return fields;
}

inline const std::string& header_field(const std::map<std::string, std::string>& fields,
                                       const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw IoError("header is missing field '" + key + "'");
  return it->second;
}

inline long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("not an integer: '" + s + "'");
  return v;
}

inline double parse_real(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IoError("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

inline std::string read_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) throw IoError(std::string("unexpected end of input reading ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace resebm::detail

#endif  // RESEBM_SRC_FORMAT_UTIL_HPP_
