// Copyright 2026 The mcrelax Authors
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

// The mcrelax command line: gen | solve | bench | report.

#ifndef MCRELAX_TOOLS_CLI_H_
#define MCRELAX_TOOLS_CLI_H_

#include <ostream>

namespace mcrelax::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

// Parses and runs one invocation. Normal output goes to `out`, diagnostics
// to `err`; returns the process exit code.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcrelax::cli

#endif  // MCRELAX_TOOLS_CLI_H_
