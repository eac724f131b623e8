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

// The fault-injection fuzzer: a round-robin seed queue, input and
// error-sequence mutation, coverage accounting and crash collection, with
// an optional concolic scheduler in the loop.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "errfuzz/scheduler.hpp"
#include "errfuzz/vm.hpp"
#include "json.hpp"

namespace errfuzz {

using Rng = std::mt19937_64;

// Uniform in [0, n); n must be positive.
inline std::uint64_t below(Rng& rng, std::uint64_t n) { return rng() % n; }

enum class Provenance : std::uint8_t { Initial, Mutation, Concolic };

std::string_view to_string(Provenance p);

struct Seed {
  std::vector<std::uint8_t> input;
  ErrorSequence errors;
  Provenance provenance = Provenance::Initial;
  std::uint32_t energy = 1;

  // Filled in once the seed has been executed.
  std::uint32_t encounters = 0;
  std::uint64_t iteration = 0;  // error-sequence mutations drawn so far
};

enum class InputMutation : std::uint8_t { BitFlip, ByteSet, ByteDelta, Resize, Splice };

inline constexpr InputMutation kAllInputMutations[] = {
    InputMutation::BitFlip, InputMutation::ByteSet, InputMutation::ByteDelta,
    InputMutation::Resize, InputMutation::Splice};

// One mutation of the seed's input, no longer than max_len. Splice takes
// its tail from a random corpus member.
std::vector<std::uint8_t> mutate_input(const Seed& seed, std::span<const Seed> corpus, Rng& rng,
                                       std::size_t max_len);
std::vector<std::uint8_t> mutate_input(const Seed& seed, std::span<const Seed> corpus, Rng& rng,
                                       std::size_t max_len, InputMutation op);

// The seed's next error sequence, sized to its encounter count n. The
// first n draws inject exactly one fault each, the next is all zero (unless
// the seed's own sequence already is), after that 1..ceil(n/4) distinct
// bits of the seed's sequence are flipped. Advances seed.iteration.
ErrorSequence mutate_error_sequence(Seed& seed, Rng& rng);

struct EnergyConfig {
  std::uint32_t concolic = 16;
  std::uint32_t new_edges = 4;
  std::uint32_t other = 1;
};

struct FuzzConfig {
  std::uint64_t executions = 100000;
  std::optional<double> seconds;  // wall-clock budget; executions is then ignored
  std::uint64_t rng_seed = 0;
  std::size_t max_len = 4096;
  std::uint64_t sample_every = 100;
  EnergyConfig energy;
  bool context_insensitive = false;
  bool record_wall_time = false;
  // Execution units charged per constraint solve, capped at what is left of
  // an execution budget.
  std::uint64_t concolic_cost = 1000;
  bool retain_sequences = false;  // keep raw sequences next to digests
  ExecOptions exec;
};

struct PointCoverage {
  bool seen = false;
  bool fault_covered = false;
  bool operator==(const PointCoverage&) const = default;
};

struct CoverageLedger {
  std::vector<std::uint8_t> edges;  // byte map over derived edges
  std::size_t branch_edges = 0;
  std::unordered_set<std::uint64_t> sequences;
  std::set<std::string> raw_sequences;  // only with retain_sequences
  std::map<std::pair<std::string, std::uint64_t>, PointCoverage> points;  // (label, context)
  // Per machine point: execution count at its first injected encounter.
  std::vector<std::optional<std::uint64_t>> first_fault;

  std::size_t fault_covered_points() const;
};

struct BugReport {
  std::string label;
  std::vector<std::uint8_t> input;
  ErrorSequence errors;
  std::uint64_t digest = 0;
  std::string crash_block;
  std::uint64_t execution = 0;

  std::pair<std::string, std::string> key() const { return {label, crash_block}; }
  bool operator==(const BugReport&) const = default;
};

struct Sample {
  std::uint64_t executions = 0;
  std::uint64_t wall_ms = 0;
  std::uint64_t branch_edges = 0;
  std::uint64_t error_sequences = 0;
  std::uint64_t bugs = 0;
  bool operator==(const Sample&) const = default;
};

struct FuzzResult {
  CoverageLedger ledger;
  std::vector<BugReport> bugs;
  std::vector<Sample> samples;
  std::uint64_t executions = 0;  // including concolic charges
  std::uint64_t runs = 0;        // actual VM executions
  std::uint64_t solves = 0;
  std::size_t queue_size = 0;
};

// Order-sensitive digest of an encounter list over (label, context, bit).
std::uint64_t sequence_digest(const Machine& machine, std::span<const Encounter> encounters,
                              bool context_insensitive = false);

// Runs the campaign. An empty seed list starts from 64 zero bytes. The
// scheduler, when given, must be Idle; it is started on the first seed's
// trace and then fed every trace until it completes.
FuzzResult fuzz_loop(const Target& target, std::vector<Seed> seeds, const FuzzConfig& config,
                     Scheduler* scheduler = nullptr);

std::string to_csv(const std::vector<Sample>& samples);
nlohmann::json to_json(const BugReport& bug);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);
std::string to_bits(const ErrorSequence& errors);
ErrorSequence from_bits(std::string_view bits);

// `bug <label>`, `input <hex>`, `errseq <bits>` lines.
struct Repro {
  std::string label;
  std::vector<std::uint8_t> input;
  ErrorSequence errors;
};

std::string write_repro(const BugReport& bug);
Repro read_repro(std::string_view text);

// Re-executes a reproducer; true when it crashes with the recorded label.
bool replay_repro(const Target& target, const Repro& repro, ExecutionTrace* trace = nullptr);

}  // namespace errfuzz
