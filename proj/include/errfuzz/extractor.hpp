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

// Error-point extraction: candidate fallible sites, the check that consumes
// each result, the handling found on its error branch, and the derived
// block that locates the point for clustering.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "errfuzz/cfg.hpp"
#include "errfuzz/ir.hpp"
#include "errfuzz/vm.hpp"
#include "json.hpp"

namespace errfuzz {

// The consuming branch must come within this many instructions of the
// call, the terminator counting as one.
inline constexpr std::uint32_t kCheckWindow = 3;

struct ErrorPoint {
  std::string label;
  std::uint32_t function = 0;
  std::uint32_t block = 0;
  std::uint32_t instruction = 0;
  std::string callee;
  ReturnKind return_kind = ReturnKind::PointerLike;
  bool fallible = false;  // an `fcall`; plain checked calls cannot be injected
  bool check = false;     // a branch in the window separates ERR from OK
  std::optional<std::uint32_t> err_successor;  // IR block index
  std::set<HandlerKind> handlers;
  bool reachable = false;
  bool realistic = false;
  std::optional<BlockId> primary;  // derived instance nearest the entry
  std::vector<BlockId> instances;
};

// Every fcall plus each plain `r = call f` whose result reaches a branch
// within the window, in program text order. Location and realism are left
// unset.
std::vector<ErrorPoint> extract_candidates(const Program& program);

// Handling kinds on the error branch of the point's check, from the
// branch target up to (not including) the check block's post-dominator,
// restricted to blocks the branch target dominates.
std::set<HandlerKind> classify_handler(const Program& program, const ErrorPoint& point);

// Per-label manual decisions: `allow <label>` / `deny <label>` lines.
struct Overrides {
  std::set<std::string> allow;
  std::set<std::string> deny;

  static Overrides parse(std::string_view text);
};

// Candidates located in the derived graph and classified. A fallible point
// is realistic when it is reachable and has a check, unless denied; allow
// makes a reachable fallible point realistic without a check.
std::vector<ErrorPoint> extract_error_points(const Target& target, const Overrides& overrides = {});

// The realistic subset, the input to clustering.
std::vector<ErrorPoint> realistic_points(const std::vector<ErrorPoint>& points);

struct ErrorPointPath {
  std::string point;
  std::optional<PathSpec> path;
  std::string error;  // set when the point is not located or unreachable
};

// Shortest entry path to each point's primary block (ties: smallest id
// sequence).
std::vector<ErrorPointPath> error_point_paths(const Cfg& cfg, const std::vector<ErrorPoint>& points);

nlohmann::json to_json(const std::vector<ErrorPoint>& points, const Target& target);

}  // namespace errfuzz
