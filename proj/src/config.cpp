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

#include "resebm/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "resebm/errors.hpp"

namespace resebm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  return true;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    if (!valid_key(key))
      throw ValidationError("config line " + std::to_string(lineno) + ": invalid key '" + key + "'");
    if (cfg.has(key))
      throw ValidationError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.set(key, value);
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  require(valid_key(key), "invalid config key '" + key + "'");
  require(value.find('\n') == std::string::npos && trim(value) == value,
          "config value for '" + key + "' must be a single trimmed line");
  entries_[key] = value;
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  require(it != entries_.end(), "config is missing required key '" + key + "'");
  return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::int64_t ExperimentConfig::get_int(const std::string& key) const {
  const auto s = get_string(key);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(),
          "config key '" + key + "' is not an integer: '" + s + "'");
  return v;
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t ExperimentConfig::get_seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto s = get_string(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(),
          "config key '" + key + "' is not a non-negative integer: '" + s + "'");
  return v;
}

double ExperimentConfig::get_real(const std::string& key) const {
  const auto s = get_string(key);
  if (s == "inf") return INFINITY;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size() && std::isfinite(v),
          "config key '" + key + "' is not a real number: '" + s + "'");
  return v;
}

double ExperimentConfig::get_real(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto s = get_string(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("config key '" + key + "' is not a boolean: '" + s + "'");
}

void ExperimentConfig::check_keys(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : entries_)
    require(allowed.count(k) != 0, "unknown config key '" + k + "'");
}

}  // namespace resebm
