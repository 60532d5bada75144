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

#ifndef RESEBM_ERRORS_HPP_
#define RESEBM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace resebm {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, malformed inputs, shape or range mismatches.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An exact enumeration would exceed the configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable files, malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace resebm

#endif  // RESEBM_ERRORS_HPP_
