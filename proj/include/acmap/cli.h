// Copyright 2026 The acmap Authors
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

// The acmap command-line driver.
//
//   acmap <subcommand> [--config FILE] [--key value ...]
//
// Config files hold the same keys as the long options, with underscores in
// place of dashes; command-line flags override them.

#ifndef ACMAP_CLI_H_
#define ACMAP_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace acmap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default output root.
inline constexpr const char* kOutputDirEnv = "ACMAP_OUTPUT_DIR";

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace acmap

#endif  // ACMAP_CLI_H_
