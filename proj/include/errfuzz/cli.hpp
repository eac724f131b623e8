// Copyright 2026 The errfuzz Authors.
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

#pragma once

// The `errfuzz` command line. Exit codes: 0 success, 1 usage or bad
// configuration, 2 unreadable or invalid target (or a reproducer that does
// not reproduce), 3 internal failure.

#include <ostream>
#include <string>
#include <vector>

namespace errfuzz {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitTarget = 2;
inline constexpr int kExitInternal = 3;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace errfuzz
