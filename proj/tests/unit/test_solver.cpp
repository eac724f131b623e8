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

#include "doctest.h"
#include "errfuzz/solver.hpp"
#include "support.hpp"

using namespace errfuzz;
using namespace errfuzz::test;

TEST_SUITE("solver") {

TEST_CASE("forced and empty domains") {
  const auto sat = solve(parse_constraint("b0 == 7"));
  REQUIRE(sat.status == SolveStatus::Sat);
  CHECK(sat.input.at(0) == 7);
  CHECK(solve(parse_constraint("b0 < 3 && b0 > 5")).status == SolveStatus::Unsat);
  CHECK(solve(parse_constraint("true")).status == SolveStatus::Sat);
  CHECK(solve(parse_constraint("b0 + b1 > 510")).status == SolveStatus::Unsat);
  CHECK(solve(parse_constraint("2*b0 == 7")).status == SolveStatus::Unsat);
}

TEST_CASE("magic word guard") {
  const auto c = parse_constraint("b0 + 256*b1 + 65536*b2 + 16777216*b3 == 2237241703");
  const auto r = solve(c);
  REQUIRE(r.status == SolveStatus::Sat);
  CHECK(c.holds(r.input));
  CHECK(r.input[3] == 2237241703u >> 24);
}

TEST_CASE("unmentioned bytes keep the hint") {
  const std::vector<std::uint8_t> hint{9, 8, 7, 6, 5};
  const auto r = solve(parse_constraint("b2 == 100"), {}, hint);
  REQUIRE(r.status == SolveStatus::Sat);
  REQUIRE(r.input.size() >= 5);
  CHECK(r.input[0] == 9);
  CHECK(r.input[1] == 8);
  CHECK(r.input[2] == 100);
  CHECK(r.input[4] == 5);
}

TEST_CASE("bytes beyond the length limit are not assigned") {
  SolverOptions o;
  o.max_len = 4;
  CHECK(solve(parse_constraint("b9 == 3"), o).status != SolveStatus::Sat);
  CHECK(solve(parse_constraint("b9 == 0"), o).status == SolveStatus::Sat);
}

TEST_CASE("random satisfiable constraints solve and verify") {
  Rng rng(51);
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<std::uint8_t> witness;
    const auto c = random_satisfiable(rng, 1 + static_cast<std::uint32_t>(pick(rng, 4)), witness);
    REQUIRE(c.holds(witness));
    const auto r = solve(c);
    INFO(to_string(c));
    REQUIRE(r.status == SolveStatus::Sat);
    CHECK(c.holds(r.input));
  }
}

TEST_CASE("unsat answers agree with the exhaustive search") {
  Rng rng(52);
  int unsat = 0;
  for (int iter = 0; iter < 1500; ++iter) {
    const auto c = random_constraint(rng, 1 + static_cast<std::uint32_t>(pick(rng, 4)));
    const auto r = solve(c);
    const auto model = exhaustive_solve(c);
    INFO(to_string(c));
    REQUIRE(r.status != SolveStatus::Unknown);
    if (r.status == SolveStatus::Sat) {
      CHECK(c.holds(r.input));
      CHECK(model.has_value());
    } else {
      CHECK_FALSE(model.has_value());
      ++unsat;
    }
  }
  CHECK(unsat > 50);
}

TEST_CASE("exhaustive oracle finds the planted witnesses") {
  Rng rng(53);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::uint8_t> witness;
    const auto c = random_satisfiable(rng, 1 + static_cast<std::uint32_t>(pick(rng, 4)), witness);
    const auto model = exhaustive_solve(c);
    REQUIRE(model.has_value());
    CHECK(c.holds(*model));
  }
}

}  // TEST_SUITE
