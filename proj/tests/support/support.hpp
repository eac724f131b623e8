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

// Shared helpers for the test binaries: fixture paths, random graphs and
// programs, and brute-force oracles that do not reuse library code paths.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "errfuzz/cfg.hpp"
#include "errfuzz/clustering.hpp"
#include "errfuzz/constraint.hpp"
#include "errfuzz/ir.hpp"

namespace errfuzz::test {

using Rng = std::mt19937_64;

inline std::uint64_t pick(Rng& rng, std::uint64_t n) { return rng() % n; }
inline bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::string fixture(std::string_view name);
std::string read_file(const std::string& path);

// A temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(std::string_view name) const { return path_ + "/" + std::string(name); }

 private:
  std::string path_;
};

void write_file(const std::string& path, std::string_view text);

// Blocks b0..b{n-1}, entry b0; every block gets an edge from a random
// earlier block, plus extra forward edges with probability `extra`.
Cfg random_dag(Rng& rng, std::size_t blocks, double extra = 0.3);

// A general graph (back edges allowed) with random edge predicates that
// still pass sibling-exclusivity validation.
Cfg random_graph(Rng& rng, std::size_t blocks);

// Up to `max_points` error points on distinct non-entry blocks.
std::vector<PointLocation> random_points(Rng& rng, const Cfg& cfg, std::size_t max_points);

inline constexpr std::uint32_t kInf = UINT32_MAX;

// Floyd-Warshall hop distances, d[a][b] from a to b; kInf when unreachable.
std::vector<std::vector<std::uint32_t>> all_pairs(const Cfg& cfg);

// Random linear conjunction over `bytes` distinct offsets in [0, 8). The
// satisfiable flavor builds every atom around `witness`.
ByteConstraint random_satisfiable(Rng& rng, std::uint32_t bytes, std::vector<std::uint8_t>& witness);
ByteConstraint random_constraint(Rng& rng, std::uint32_t bytes);

// Complete search over every byte the constraint mentions. Returns a model
// or nullopt when none exists.
std::optional<std::vector<std::uint8_t>> exhaustive_solve(const ByteConstraint& c);

struct OracleCluster {
  std::vector<std::uint32_t> members;  // ascending
  BlockId parent;
};

// Strict clustering by exhaustion: every set partition of the points is
// enumerated and the one accepted by replaying the greedy same-path-first
// absorption (same pivot draws) is returned, in pivot order. Built only on
// all_pairs() and plain sets. Throws on zero or several matches.
std::vector<OracleCluster> partition_oracle(const std::vector<PointLocation>& points,
                                            const Cfg& cfg, std::uint32_t k, std::uint64_t seed);

struct RandomProgramOptions {
  std::uint32_t functions = 3;
  std::uint32_t blocks = 4;
  std::uint32_t input_bytes = 4;
  bool calls = true;
  bool nonlinear = false;
  bool loops = false;
  double fcall_rate = 0.3;
};

std::string random_program(Rng& rng, const RandomProgramOptions& options);

// Derived block count by walking explicit call-site strings.
std::size_t enumerate_derived_blocks(const Program& program, std::uint32_t context_depth);

}  // namespace errfuzz::test
