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

// Synthetic targets built from error-handling motifs, with the ground truth
// needed to score clustering and campaigns against them.

#include <cstdint>
#include <string>
#include <vector>

#include "errfuzz/ir.hpp"
#include "errfuzz/vm.hpp"
#include "json.hpp"

namespace errfuzz {

struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::uint32_t functions = 0;  // helpers hosting the filler points
  std::uint32_t switch_dispatch = 0;
  std::uint32_t chain = 0;
  std::uint32_t deep_magic = 0;
  std::uint32_t diamond = 0;
  std::uint32_t arms = 3;          // per switch-dispatch motif, 2..8
  std::uint32_t chain_length = 3;  // 1..3
  std::uint32_t magic_bytes = 4;   // guard width, 1..4
  std::uint32_t depth = 64;        // easy diamonds in front of a guard
  std::uint32_t density = 0;       // filler points, at most 4 per helper
  double bug_rate = 0.0;           // chance a chain or switch motif carries a bug
  std::uint32_t spacer = 3;        // blocks between motifs, 2..64 and >= chain_length;
                                   // truth.k = spacer - 1

  // Throws ConfigError for out-of-range fields or more filler points than
  // the helpers can host.
  void check() const;
};

struct TruthCluster {
  std::string motif;
  std::vector<std::string> members;  // error-point labels
  bool guarded = false;              // behind a magic guard

  bool operator==(const TruthCluster&) const = default;
};

struct PlantedBug {
  std::string label;
  std::vector<std::uint8_t> input;
  ErrorSequence errors;  // witness, checked at generation time
};

struct GroundTruth {
  std::vector<std::string> points;
  std::vector<std::string> guarded;
  std::vector<TruthCluster> clusters;
  std::vector<PlantedBug> bugs;
  std::uint32_t k = 2;  // clusters are intended for this k
};

struct GeneratedTarget {
  std::string name;
  Program program;
  GroundTruth truth;
};

// Deterministic in spec (including spec.seed).
GeneratedTarget generate_target(const GeneratorSpec& spec, const std::string& name = "gen");

nlohmann::json to_json(const GroundTruth& truth);
nlohmann::json to_json(const GeneratorSpec& spec);

// Fixed corpora used by the benchmarks: every target carries at least one
// magic-guarded region.
std::vector<GeneratorSpec> motif_corpus(std::uint64_t seed, std::size_t count);
std::vector<GeneratorSpec> deep_magic_corpus(std::uint64_t seed, std::size_t count);

}  // namespace errfuzz
