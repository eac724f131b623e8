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
#include <functional>
#include <set>

#include "doctest.h"
#include "errfuzz/cfg.hpp"
#include "errfuzz/dot.hpp"
#include "errfuzz/error.hpp"
#include "support.hpp"

using namespace errfuzz;
using namespace errfuzz::test;

namespace {

Cfg fig2() { return import_dot(read_file(fixture("fig2.dot"))); }

std::set<std::string> names(const Cfg& g, const std::vector<BlockId>& blocks) {
  std::set<std::string> out;
  for (BlockId b : blocks) out.insert(g.name(b));
  return out;
}

PathSpec path_of(const Cfg& g, std::initializer_list<const char*> labels) {
  PathSpec p;
  for (const char* l : labels) p.blocks.push_back(g.at(l));
  return p;
}

// Every block at the end of a reverse walk of 1..k steps from b.
std::set<std::uint32_t> reverse_walks(const Cfg& g, BlockId b, std::uint32_t k) {
  std::set<std::uint32_t> out;
  std::function<void(BlockId, std::uint32_t)> walk = [&](BlockId cur, std::uint32_t left) {
    if (left == 0) return;
    for (EdgeId e : g.in_edges(cur)) {
      const BlockId p = g.edge(e).from;
      out.insert(p.value);
      walk(p, left - 1);
    }
  };
  walk(b, k);
  out.erase(b.value);
  return out;
}

PathSpec random_walk(Rng& rng, const Cfg& g, std::size_t max_len) {
  PathSpec p{{g.entry()}};
  while (p.blocks.size() < max_len) {
    auto outs = g.out_edges(p.blocks.back());
    if (outs.empty()) break;
    p.blocks.push_back(g.edge(outs[pick(rng, outs.size())]).to);
  }
  return p;
}

}  // namespace

TEST_SUITE("cfg") {

TEST_CASE("fig2 fixture loads with its nine blocks") {
  const Cfg g = fig2();
  CHECK(g.size() == 9);
  for (const char* n : {"main", "A", "B", "D", "E", "EP1", "EP2", "EP3", "EP4"})
    CHECK(g.find(n).has_value());
  CHECK(g.name(g.entry()) == "main");
}

TEST_CASE("k-hop ancestors of the fig2 error points") {
  const Cfg g = fig2();
  auto bbk = [&](const char* n) { return names(g, k_hop_ancestors(g, g.at(n), 2)); };
  CHECK(bbk("EP1") == std::set<std::string>{"B", "A"});
  CHECK(bbk("EP2") == std::set<std::string>{"EP1", "B"});
  CHECK(bbk("EP3") == std::set<std::string>{"B", "A"});
  CHECK(bbk("EP4") == std::set<std::string>{"D", "A"});
  CHECK(k_hop_ancestors(g, g.at("EP4"), 0).empty());
  CHECK_THROWS_AS(k_hop_ancestors(g, BlockId{99}, 2), GraphError);
}

TEST_CASE("k-hop ancestors equal the reverse-walk enumeration") {
  Rng rng(11);
  for (int iter = 0; iter < 300; ++iter) {
    const Cfg g = random_dag(rng, 1 + pick(rng, 12));
    const auto d = all_pairs(g);
    for (std::uint32_t b = 0; b < g.size(); ++b) {
      std::vector<BlockId> previous;
      for (std::uint32_t k = 0; k <= 5; ++k) {
        const auto got = k_hop_ancestors(g, BlockId{b}, k);
        std::set<std::uint32_t> ids;
        for (BlockId x : got) ids.insert(x.value);
        REQUIRE(ids == reverse_walks(g, BlockId{b}, k));
        for (std::uint32_t a = 0; a < g.size(); ++a)
          CHECK(ids.contains(a) == (a != b && d[a][b] >= 1 && d[a][b] <= k));
        CHECK(std::includes(got.begin(), got.end(), previous.begin(), previous.end()));
        previous = got;
      }
    }
  }
}

TEST_CASE("ancestry terminates on cycles and lists each block once") {
  CfgBuilder b;
  const BlockId x = b.add_block("x"), y = b.add_block("y"), z = b.add_block("z");
  b.add_edge(x, y);
  b.add_edge(y, z);
  b.add_edge(z, y);
  b.set_entry(x);
  const Cfg g = std::move(b).build();
  CHECK(names(g, k_hop_ancestors(g, z, 10)) == std::set<std::string>{"x", "y"});
  CHECK(names(g, k_hop_ancestors(g, y, 10)) == std::set<std::string>{"x", "z"});
}

TEST_CASE("shortest distances") {
  const Cfg g = fig2();
  CHECK(shortest_distance(g, g.at("A"), g.at("B")) == 1u);
  CHECK(shortest_distance(g, g.at("B"), g.at("B")) == 0u);
  CHECK(shortest_distance(g, g.at("main"), g.at("EP2")) == 4u);
  CHECK_FALSE(shortest_distance(g, g.at("EP4"), g.at("A")).has_value());
  CHECK_THROWS_AS(shortest_distance(g, BlockId{42}, g.at("A")), GraphError);

  Rng rng(12);
  for (int iter = 0; iter < 200; ++iter) {
    const Cfg r = random_graph(rng, 1 + pick(rng, 20));
    const auto d = all_pairs(r);
    for (std::uint32_t a = 0; a < r.size(); ++a)
      for (std::uint32_t b = 0; b < r.size(); ++b) {
        const auto got = shortest_distance(r, BlockId{a}, BlockId{b});
        REQUIRE(got.value_or(kInf) == d[a][b]);
      }
  }
}

TEST_CASE("path distance") {
  const Cfg g = fig2();
  const PathSpec p = path_of(g, {"main", "A", "D", "E"});
  CHECK(path_distance(g, p, g.at("B")) == 1u);
  CHECK(path_distance(g, p, g.at("D")) == 0u);
  CHECK(path_distance(g, p, g.at("EP4")) == 1u);
  CHECK(path_distance(g, p, g.at("EP2")) == 3u);
  CHECK_THROWS_AS(path_distance(g, path_of(g, {"main", "B"}), g.at("B")), GraphError);
  CHECK_THROWS_AS(path_distance(g, path_of(g, {"A", "B"}), g.at("B")), GraphError);

  Rng rng(13);
  for (int iter = 0; iter < 300; ++iter) {
    const Cfg r = random_dag(rng, 1 + pick(rng, 15));
    const auto d = all_pairs(r);
    const PathSpec walk = random_walk(rng, r, 1 + pick(rng, 6));
    for (std::uint32_t t = 0; t < r.size(); ++t) {
      std::uint32_t best = kInf;
      for (BlockId p : walk.blocks) best = std::min(best, d[p.value][t]);
      const auto got = path_distance(r, walk, BlockId{t});
      REQUIRE(got.value_or(kInf) == best);
      const bool on_path = std::count(walk.blocks.begin(), walk.blocks.end(), BlockId{t}) > 0;
      CHECK((got == 0u) == on_path);
    }
  }
}

TEST_CASE("shortest entry path breaks ties by block ids") {
  CfgBuilder b;
  const BlockId e = b.add_block("e"), x = b.add_block("x"), y = b.add_block("y"),
                t = b.add_block("t");
  b.add_edge(e, y);
  b.add_edge(e, x);
  b.add_edge(x, t);
  b.add_edge(y, t);
  b.set_entry(e);
  const Cfg g = std::move(b).build();
  CHECK(shortest_entry_path(g, t)->blocks == std::vector<BlockId>{e, x, t});
  CHECK(shortest_entry_path(g, e)->blocks == std::vector<BlockId>{e});
}

TEST_CASE("path constraints fold edge predicates") {
  const Cfg g = fig2();
  const PathSpec p = path_of(g, {"main", "A", "B"});
  CHECK(path_predicate_ids(g, p) == std::vector<std::string>{"c1", "c3"});
  CHECK(path_constraints(g, p) == parse_constraint("b0 == 1 && b1 < 128"));
  CHECK(path_constraints(g, path_of(g, {"main", "A", "B", "EP1", "EP2", "E"})).atoms.size() == 3);
  CHECK(path_constraints(g, path_of(g, {"main"})).always_true());

  CfgBuilder b;
  const BlockId x = b.add_block("x"), y = b.add_block("y");
  b.add_edge(x, y);
  b.set_entry(x);
  const Cfg plain = std::move(b).build();
  CHECK(path_constraints(plain, PathSpec{{x, y}}).always_true());

  Rng rng(14);
  for (int iter = 0; iter < 300; ++iter) {
    const Cfg r = random_graph(rng, 2 + pick(rng, 15));
    const PathSpec walk = random_walk(rng, r, 1 + pick(rng, 10));
    ByteConstraint fold;
    for (std::size_t i = 0; i + 1 < walk.blocks.size(); ++i)
      for (const auto& e : r.edges())
        if (e.from == walk.blocks[i] && e.to == walk.blocks[i + 1] && e.predicate)
          fold.atoms.insert(fold.atoms.end(), e.predicate->constraint.atoms.begin(),
                            e.predicate->constraint.atoms.end());
    REQUIRE(path_constraints(r, walk) == fold);
  }
}

TEST_CASE("builder validation") {
  SUBCASE("duplicate edge") {
    CfgBuilder b;
    const BlockId x = b.add_block("x"), y = b.add_block("y");
    b.add_edge(x, y);
    CHECK_THROWS_AS(b.add_edge(x, y), ValidationError);
  }
  SUBCASE("unreachable block") {
    CfgBuilder b;
    const BlockId x = b.add_block("x");
    b.add_block("lost");
    b.set_entry(x);
    CHECK_THROWS_WITH_AS(std::move(b).build(), doctest::Contains("lost"), ValidationError);
  }
  SUBCASE("two entries") {
    CfgBuilder b;
    const BlockId x = b.add_block("x"), y = b.add_block("y");
    b.set_entry(x);
    CHECK_THROWS_AS(b.set_entry(y), ValidationError);
  }
  SUBCASE("overlapping sibling predicates") {
    CfgBuilder b;
    const BlockId x = b.add_block("x"), y = b.add_block("y"), z = b.add_block("z");
    b.add_edge(x, y, EdgePredicate{"p", parse_constraint("b0 < 10")});
    b.add_edge(x, z, EdgePredicate{"q", parse_constraint("b0 > 5")});
    b.set_entry(x);
    CHECK_THROWS_AS(std::move(b).build(), ValidationError);
  }
  SUBCASE("no entry") {
    CfgBuilder b;
    b.add_block("x");
    CHECK_THROWS_AS(std::move(b).build(), ValidationError);
  }
}

TEST_CASE("dot import of a single entry node") {
  const Cfg g = import_dot("digraph g { \"only\" [entry=true]; }");
  CHECK(g.size() == 1);
  CHECK(g.edge_count() == 0);
  CHECK(g.name(g.entry()) == "only");
}

TEST_CASE("dot export and import round-trip") {
  Rng rng(15);
  for (int iter = 0; iter < 50; ++iter) {
    const Cfg g = random_graph(rng, 1 + pick(rng, 30));
    const std::string text = export_dot(g);
    const Cfg back = import_dot(text);
    REQUIRE(export_dot(back) == text);
    REQUIRE(back.size() == g.size());
    REQUIRE(back.edge_count() == g.edge_count());
    CHECK(back.entry() == g.entry());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      const Edge& a = g.edge(static_cast<EdgeId>(e));
      const Edge& b = back.edge(static_cast<EdgeId>(e));
      CHECK(g.name(a.from) == back.name(b.from));
      CHECK(g.name(a.to) == back.name(b.to));
      CHECK(a.predicate == b.predicate);
    }
  }
  // The fixture normalizes to the same graph after one pass.
  const std::string once = export_dot(fig2());
  CHECK(export_dot(import_dot(once)) == once);
}

TEST_CASE("dot import errors carry the line") {
  auto line_of = [](const std::string& text) {
    try {
      import_dot(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("digraph g {\n  \"a\" [entry=true];\n  \"a\" -> \n}\n") == 4);
  CHECK(line_of("digraph g {\n  a [entry=true];\n  b [entry=true];\n  a -> b;\n}\n") == 3);
  // b and c are both unreachable; the first declared one is reported.
  CHECK(line_of("digraph g {\n  a [entry=true];\n  b;\n  c -> b;\n}\n") == 3);
  CHECK(line_of("digraph g {\n  a [entry=true];\n  c -> b;\n}\n") == 3);
  CHECK(line_of("digraph g {\n  a;\n}\n") > 0);
  CHECK(line_of("digraph g {\n  a [entry=true];\n  a -> b;\n  a -> b;\n}\n") == 4);
  CHECK(line_of("digraph g {\n  a [entry=true];\n  a -> b [pred=\"b0 <> 3\"];\n}\n") == 3);
  CHECK(line_of("graph g { a }") == 1);
}

TEST_CASE("constraint text round-trips") {
  for (const char* text : {"b0 == 7", "3*b0 - b2 + b7 >= 10", "b1 != -4", "true",
                           "b0 < 3 && b0 > 5", "-b3 <= 0"}) {
    const auto c = parse_constraint(text);
    CHECK(parse_constraint(to_string(c)) == c);
  }
  CHECK(to_string(parse_constraint("true")) == "true");
  CHECK_THROWS_AS(parse_constraint("b0 =< 3"), ParseError);
  CHECK(parse_constraint("b0 + b0 == 4").atoms[0].terms.size() == 1);
}

}  // TEST_SUITE
