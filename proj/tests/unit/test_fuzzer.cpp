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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "errfuzz/campaign.hpp"
#include "errfuzz/error.hpp"
#include "errfuzz/fuzzer.hpp"
#include "support.hpp"

using namespace errfuzz;
using namespace errfuzz::test;

namespace {

FuzzConfig budget(std::uint64_t n, std::uint64_t seed = 0) {
  FuzzConfig c;
  c.executions = n;
  c.rng_seed = seed;
  c.sample_every = 100;
  return c;
}

std::size_t guarded_covered(const Target& t, const FuzzResult& r, const std::vector<std::string>& guarded) {
  std::size_t n = 0;
  for (const auto& label : guarded) {
    const auto p = t.machine().find_point(label);
    REQUIRE(p);
    n += r.ledger.first_fault[*p].has_value();
  }
  return n;
}

}  // namespace

TEST_SUITE("fuzzer") {

TEST_CASE("input mutators") {
  Rng rng(1);
  Seed empty;
  for (auto op : kAllInputMutations) {
    const auto out = mutate_input(empty, {}, rng, 16, op);
    if (op == InputMutation::BitFlip || op == InputMutation::ByteSet || op == InputMutation::ByteDelta)
      CHECK(out.size() == 1);
    CHECK(out.size() <= 16);
  }
  CHECK(mutate_input(empty, {}, rng, 0).empty());

  Seed s;
  s.input = {1, 2, 3, 4, 5, 6, 7, 8};
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(mutate_input(s, {}, a, 64) == mutate_input(s, {}, b, 64));

  Seed other;
  other.input.assign(12, 9);
  const std::vector<Seed> corpus{s, other};
  std::size_t longer = 0, shorter = 0, same = 0, changed_same = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto out = mutate_input(s, corpus, rng, 32);
    REQUIRE(out.size() <= 32);
    if (out.size() > s.input.size()) ++longer;
    else if (out.size() < s.input.size()) ++shorter;
    else {
      ++same;
      changed_same += out != s.input;
    }
  }
  // Three of five operators keep the length; resize and splice move it.
  CHECK(same > 5000);
  CHECK(longer > 500);
  CHECK(shorter > 500);
  CHECK(changed_same > same * 8 / 10);

  // BitFlip changes exactly one bit.
  for (int i = 0; i < 500; ++i) {
    const auto out = mutate_input(s, {}, rng, 64, InputMutation::BitFlip);
    int bits = 0;
    for (std::size_t j = 0; j < out.size(); ++j) bits += __builtin_popcount(out[j] ^ s.input[j]);
    CHECK(bits == 1);
  }
}

TEST_CASE("error sequence schedule") {
  Rng rng(2);
  Seed s;
  s.encounters = 3;
  CHECK(mutate_error_sequence(s, rng) == ErrorSequence{1, 0, 0});
  CHECK(mutate_error_sequence(s, rng) == ErrorSequence{0, 1, 0});
  CHECK(mutate_error_sequence(s, rng) == ErrorSequence{0, 0, 1});
  CHECK(s.iteration == 3);

  Seed none;
  CHECK(mutate_error_sequence(none, rng).empty());

  Seed faulty;
  faulty.encounters = 2;
  faulty.errors = {1, 1};
  faulty.iteration = 2;
  CHECK(mutate_error_sequence(faulty, rng) == ErrorSequence{0, 0});

  for (int iter = 0; iter < 2000; ++iter) {
    Seed t;
    t.encounters = static_cast<std::uint32_t>(1 + pick(rng, 40));
    t.errors.resize(pick(rng, 50));
    for (auto& b : t.errors) b = chance(rng, 0.3);
    t.iteration = t.encounters + 1 + pick(rng, 5);
    const auto out = mutate_error_sequence(t, rng);
    REQUIRE(out.size() == t.encounters);
    std::size_t flips = 0;
    for (std::size_t i = 0; i < out.size(); ++i)
      flips += out[i] != (i < t.errors.size() ? t.errors[i] : 0);
    CHECK(flips >= 1);
    CHECK(flips <= (t.encounters + 3) / 4);
  }
}

TEST_CASE("switch3 reaches single-fault sequences for every point") {
  const Target t = Target::load(fixture("switch3.ir"));
  const auto r = fuzz_loop(t, {}, budget(10000));
  CHECK(r.executions == 10000);
  CHECK(r.ledger.fault_covered_points() >= 3);
  CHECK(r.ledger.sequences.size() >= 6);
  CHECK(r.ledger.branch_edges > 0);
}

TEST_CASE("budget edges") {
  const Target t = Target::load(fixture("fig2.ir"));
  const auto one = fuzz_loop(t, {}, budget(1));
  CHECK(one.executions == 1);
  CHECK(one.runs == 1);
  REQUIRE(one.samples.size() == 1);
  CHECK(one.samples[0].executions == 1);
  CHECK(to_csv(one.samples).rfind("executions,wall_ms,branch_edges,error_sequences,bugs\n1,0,", 0) == 0);
  CHECK_THROWS_AS(fuzz_loop(t, {}, budget(0)), ConfigError);
}

TEST_CASE("samples are monotone and runs are deterministic") {
  const Target t = Target::load(fixture("switch3.ir"));
  auto cfg = budget(3000, 9);
  cfg.retain_sequences = true;
  const auto a = fuzz_loop(t, {}, cfg);
  const auto b = fuzz_loop(t, {}, cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.bugs == b.bugs);
  CHECK(to_csv(a.samples) == to_csv(b.samples));
  for (std::size_t i = 1; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].executions > a.samples[i - 1].executions);
    CHECK(a.samples[i].branch_edges >= a.samples[i - 1].branch_edges);
    CHECK(a.samples[i].error_sequences >= a.samples[i - 1].error_sequences);
    CHECK(a.samples[i].bugs >= a.samples[i - 1].bugs);
  }
  CHECK(a.samples.back().executions == 3000);
  // The digest keeps distinct sequences apart.
  CHECK(a.ledger.raw_sequences.size() == a.ledger.sequences.size());
  CHECK(fuzz_loop(t, {}, budget(3000, 10)).samples != a.samples);
}

TEST_CASE("bugs carry reproducers that replay") {
  const Target t = Target::load(fixture("switch3.ir"));
  const auto r = fuzz_loop(t, {}, budget(5000));
  REQUIRE_FALSE(r.bugs.empty());
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& bug : r.bugs) {
    CHECK(keys.insert(bug.key()).second);
    const auto repro = read_repro(write_repro(bug));
    CHECK(repro.label == bug.label);
    CHECK(repro.input == bug.input);
    CHECK(repro.errors == bug.errors);
    ExecutionTrace trace;
    CHECK(replay_repro(t, repro, &trace));
    CHECK(trace.outcome == Outcome::Crash);
  }
  Repro wrong = read_repro(write_repro(r.bugs[0]));
  wrong.label = "bug-none";
  CHECK_FALSE(replay_repro(t, wrong));
}

TEST_CASE("hex and bit encodings") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> bytes(pick(rng, 40));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    CHECK(from_hex(to_hex(bytes)) == bytes);
    ErrorSequence bits(pick(rng, 40));
    for (auto& b : bits) b = chance(rng, 0.5);
    CHECK(from_bits(to_bits(bits)) == bits);
  }
  CHECK(to_hex(std::vector<std::uint8_t>{0x0a, 0xff}) == "0aff");
  CHECK(to_bits({1, 0, 1}) == "101");
  CHECK_THROWS(from_hex("abc"));
  CHECK_THROWS(from_bits("102"));
}

TEST_CASE("sequence digest") {
  const Target t = Target::load(fixture("switch3.ir"));
  const auto& m = t.machine();
  const std::vector<Encounter> a{{0, 0, false}, {1, 0, true}};
  const std::vector<Encounter> b{{0, 0, true}, {1, 0, false}};
  const std::vector<Encounter> c{{1, 0, true}, {0, 0, false}};
  CHECK(sequence_digest(m, a) != sequence_digest(m, b));
  CHECK(sequence_digest(m, a) != sequence_digest(m, c));
  CHECK(sequence_digest(m, a) == sequence_digest(m, a));
  CHECK(sequence_digest(m, {}) != sequence_digest(m, a));
}

TEST_CASE("the scheduler opens a guarded region") {
  const Target t = Target::load(fixture("deep_magic.ir"));
  const auto truth = nlohmann::json::parse(read_file(fixture("deep_magic.truth.json")));
  const auto guarded = truth["guarded"].get<std::vector<std::string>>();
  CampaignConfig cfg;
  cfg.budget.executions = 30000;
  const auto with = run_campaign(t, cfg);
  cfg.mode = CampaignMode::NoConcolic;
  const auto without = run_campaign(t, cfg);
  CHECK(guarded_covered(t, with.fuzz, guarded) >= guarded.size() * 9 / 10);
  CHECK(guarded_covered(t, without.fuzz, guarded) == 0);
  CHECK(with.fuzz.solves > 0);
  CHECK(without.fuzz.solves == 0);
  CHECK(with.fuzz.executions == 30000);
}

}  // TEST_SUITE
