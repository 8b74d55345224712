// Copyright 2026 The MIDA Authors. All Rights Reserved.
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

#ifndef MIDA_CLI_HPP_
#define MIDA_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace mida::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `mida` tool. args excludes the program name. Returns
// the process exit code; diagnostics go to err as single lines.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mida::cli

#endif  // MIDA_CLI_HPP_
