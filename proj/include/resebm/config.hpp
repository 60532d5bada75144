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

#ifndef RESEBM_CONFIG_HPP_
#define RESEBM_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace resebm {

// Flat `key = value` experiment configuration. Blank lines and lines starting
// with '#' are ignored. Values are typed at lookup; every getter throws
// ValidationError on a missing or malformed value.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::string_view text);

  // Canonical form: one `key=value` line per entry in key order.
  std::string serialize() const;

  // FNV-1a 64 of serialize(), as 16 hex digits.
  std::string content_hash() const;

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Rejects keys outside `allowed`.
  void check_keys(const std::set<std::string>& allowed) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace resebm

#endif  // RESEBM_CONFIG_HPP_
