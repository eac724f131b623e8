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

// DOT serialization of a Cfg.
//
//   digraph cfg {
//     "main" [entry=true];
//     "A";
//     "main" -> "A" [pred="c1: b0 == 72"];
//   }
//
// The importer accepts the usual DOT statement forms and ignores attributes
// it does not know (so overlays written by `cluster` load back as plain
// graphs). Block ids follow first appearance.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "errfuzz/cfg.hpp"

namespace errfuzz {

// Extra node attributes emitted by export_dot, keyed by block.
using DotNodeAttributes = std::map<BlockId, std::vector<std::pair<std::string, std::string>>>;

std::string export_dot(const Cfg& cfg, const DotNodeAttributes& extra = {});

// Throws ParseError (with the offending line) on malformed text, several
// entry nodes, a missing entry, or an unreachable block.
Cfg import_dot(std::string_view text);

}  // namespace errfuzz
