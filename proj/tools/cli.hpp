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

#ifndef RESEBM_TOOLS_CLI_HPP_
#define RESEBM_TOOLS_CLI_HPP_

#include <iosfwd>
#include <span>
#include <string>

namespace resebm::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kBudget = 3,
  kIo = 4,
};

// Runs one pipeline stage. `args` excludes the program name. The one-line
// JSON summary goes to `out`, diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace resebm::cli

#endif  // RESEBM_TOOLS_CLI_HPP_
