// Copyright 2026 The rlsum Authors
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

#ifndef RLSUM_CLI_HPP_
#define RLSUM_CLI_HPP_

#include <string>
#include <vector>

namespace rlsum {

/// Runs the command-line tool. Exit codes: 0 success, 1 configuration or
/// usage error, 2 I/O or input-parsing error, 3 numerical failure.
/// Every run resolves defaults < config file < --set overrides < named
/// flags (RLSUM_SEED fills the seed when nothing else does) and persists
/// config_resolved.json before doing real work.
int run_cli(int argc, const char* const* argv);

/// Same, for tests: args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace rlsum

#endif  // RLSUM_CLI_HPP_
