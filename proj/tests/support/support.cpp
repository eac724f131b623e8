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

#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "errfuzz/vm.hpp"

#ifndef ERRFUZZ_FIXTURE_DIR
#error "ERRFUZZ_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace errfuzz::test {

std::string fixture(std::string_view name) {
  return std::string(ERRFUZZ_FIXTURE_DIR) + "/" + std::string(name);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto p = base / ("errfuzz-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directory(p)) {
      path_ = p.string();
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Cfg random_dag(Rng& rng, std::size_t blocks, double extra) {
  CfgBuilder b;
  for (std::size_t i = 0; i < blocks; ++i) b.add_block("b" + std::to_string(i));
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 1; i < blocks; ++i) edges.insert({pick(rng, i), i});
  for (std::size_t i = 1; i < blocks; ++i)
    if (chance(rng, extra)) edges.insert({pick(rng, i), i});
  for (auto [from, to] : edges)
    b.add_edge(BlockId{static_cast<std::uint32_t>(from)}, BlockId{static_cast<std::uint32_t>(to)});
  b.set_entry(BlockId{0});
  return std::move(b).build();
}

Cfg random_graph(Rng& rng, std::size_t blocks) {
  CfgBuilder b;
  for (std::size_t i = 0; i < blocks; ++i) b.add_block("n" + std::to_string(i));
  std::map<std::size_t, std::vector<std::size_t>> out;
  for (std::size_t i = 1; i < blocks; ++i) out[pick(rng, i)].push_back(i);
  for (std::size_t i = 0; i < blocks; ++i)
    if (chance(rng, 0.3)) {
      const std::size_t to = pick(rng, blocks);
      auto& v = out[i];
      if (std::find(v.begin(), v.end(), to) == v.end()) v.push_back(to);
    }
  for (auto& [from, targets] : out) {
    const BlockId f{static_cast<std::uint32_t>(from)};
    const auto offset = static_cast<std::uint32_t>(pick(rng, 6));
    const auto cut = static_cast<std::int64_t>(1 + pick(rng, 254));
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const BlockId t{static_cast<std::uint32_t>(targets[i])};
      std::optional<EdgePredicate> pred;
      const std::string id = "p" + std::to_string(from) + "_" + std::to_string(i);
      if (targets.size() == 2 && chance(rng, 0.7)) {
        // A complementary pair keeps the siblings exclusive.
        Atom a{{{offset, 1}}, i == 0 ? Relation::Lt : Relation::Ge, cut};
        pred = EdgePredicate{id, ByteConstraint{{a}}};
      } else if (targets.size() == 1 && chance(rng, 0.3)) {
        Atom a{{{offset, 2}, {offset + 1, -1}}, Relation::Ne, cut};
        pred = EdgePredicate{id, ByteConstraint{{a}}};
      }
      b.add_edge(f, t, pred);
    }
  }
  b.set_entry(BlockId{0});
  return std::move(b).build();
}

std::vector<PointLocation> random_points(Rng& rng, const Cfg& cfg, std::size_t max_points) {
  std::vector<std::uint32_t> blocks(cfg.size() - 1);
  std::iota(blocks.begin(), blocks.end(), 1u);
  std::shuffle(blocks.begin(), blocks.end(), rng);
  const std::size_t n = std::min(blocks.size(), max_points == 0 ? 0 : 1 + pick(rng, max_points));
  std::vector<PointLocation> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"ep" + std::to_string(i), BlockId{blocks[i]}});
  return out;
}

std::vector<std::vector<std::uint32_t>> all_pairs(const Cfg& cfg) {
  const std::size_t n = cfg.size();
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : cfg.edges())
    if (e.from != e.to) d[e.from.value][e.to.value] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] != kInf && d[k][j] != kInf) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

namespace {

std::vector<std::uint32_t> random_offsets(Rng& rng, std::uint32_t bytes) {
  std::vector<std::uint32_t> all(8);
  std::iota(all.begin(), all.end(), 0u);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(bytes);
  std::sort(all.begin(), all.end());
  return all;
}

Atom random_lhs(Rng& rng, const std::vector<std::uint32_t>& offsets) {
  Atom a;
  if (chance(rng, 0.1)) {
    // Little-endian word compare, the shape of a magic-value guard.
    std::int32_t scale = 1;
    for (std::uint32_t o : offsets) {
      a.terms.push_back({o, scale});
      scale *= 256;
    }
    return a;
  }
  for (std::uint32_t o : offsets) {
    if (a.terms.empty() ? false : chance(rng, 0.4)) continue;
    std::int32_t coef = 0;
    while (coef == 0) coef = static_cast<std::int32_t>(pick(rng, 11)) - 5;
    a.terms.push_back({o, coef});
  }
  return a;
}

constexpr Relation kRelations[] = {Relation::Eq, Relation::Ne, Relation::Lt,
                                   Relation::Le, Relation::Gt, Relation::Ge};

}  // namespace

ByteConstraint random_satisfiable(Rng& rng, std::uint32_t bytes, std::vector<std::uint8_t>& witness) {
  const auto offsets = random_offsets(rng, bytes);
  witness.assign(8, 0);
  for (auto& w : witness) w = static_cast<std::uint8_t>(pick(rng, 256));
  ByteConstraint c;
  const std::size_t atoms = 1 + pick(rng, 4);
  for (std::size_t i = 0; i < atoms; ++i) {
    Atom a = random_lhs(rng, offsets);
    a.rel = kRelations[pick(rng, 6)];
    const std::int64_t lhs = a.lhs(witness);
    const auto slack = static_cast<std::int64_t>(pick(rng, 4) == 0 ? pick(rng, 400) : pick(rng, 4));
    switch (a.rel) {
      case Relation::Eq: a.rhs = lhs; break;
      case Relation::Ne: a.rhs = lhs + (chance(rng, 0.5) ? 1 : -1) * (1 + slack); break;
      case Relation::Lt: a.rhs = lhs + 1 + slack; break;
      case Relation::Le: a.rhs = lhs + slack; break;
      case Relation::Gt: a.rhs = lhs - 1 - slack; break;
      case Relation::Ge: a.rhs = lhs - slack; break;
    }
    c.conjoin(std::move(a));
  }
  return c;
}

ByteConstraint random_constraint(Rng& rng, std::uint32_t bytes) {
  const auto offsets = random_offsets(rng, bytes);
  ByteConstraint c;
  const std::size_t atoms = 1 + pick(rng, 4);
  for (std::size_t i = 0; i < atoms; ++i) {
    Atom a = random_lhs(rng, offsets);
    a.rel = kRelations[pick(rng, 6)];
    std::int64_t lo = 0, hi = 0;
    for (const auto& t : a.terms) (t.coef > 0 ? hi : lo) += std::int64_t{t.coef} * 255;
    a.rhs = lo + static_cast<std::int64_t>(pick(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    c.conjoin(std::move(a));
  }
  return c;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

class Exhaustive {
 public:
  explicit Exhaustive(const ByteConstraint& c) : c_(c) {
    std::set<std::uint32_t> used;
    for (const auto& a : c.atoms)
      for (const auto& t : a.terms) used.insert(t.offset);
    offsets_.assign(used.begin(), used.end());
    const std::uint32_t len = offsets_.empty() ? 0 : offsets_.back() + 1;
    model_.assign(len, 0);
  }

  std::optional<std::vector<std::uint8_t>> run() {
    if (offsets_.empty()) {
      if (c_.holds(model_)) return model_;
      return std::nullopt;
    }
    if (search(0)) return model_;
    return std::nullopt;
  }

 private:
  // Bounds of an atom's left side with offsets_[depth..] still free.
  std::pair<std::int64_t, std::int64_t> bounds(const Atom& a, std::size_t depth) const {
    std::int64_t lo = 0, hi = 0;
    for (const auto& t : a.terms) {
      const bool free = std::find(offsets_.begin() + static_cast<std::ptrdiff_t>(depth),
                                  offsets_.end(), t.offset) != offsets_.end();
      if (free) {
        (t.coef > 0 ? hi : lo) += std::int64_t{t.coef} * 255;
      } else {
        lo += std::int64_t{t.coef} * model_[t.offset];
        hi += std::int64_t{t.coef} * model_[t.offset];
      }
    }
    return {lo, hi};
  }

  bool feasible(std::size_t depth) const {
    for (const auto& a : c_.atoms) {
      auto [lo, hi] = bounds(a, depth);
      switch (a.rel) {
        case Relation::Eq: if (a.rhs < lo || a.rhs > hi) return false; break;
        case Relation::Ne: if (lo == hi && lo == a.rhs) return false; break;
        case Relation::Lt: if (lo >= a.rhs) return false; break;
        case Relation::Le: if (lo > a.rhs) return false; break;
        case Relation::Gt: if (hi <= a.rhs) return false; break;
        case Relation::Ge: if (hi < a.rhs) return false; break;
      }
    }
    return true;
  }

  // The last free byte: every atom restricts it to an interval, minus at
  // most a few excluded points.
  bool last_byte(std::uint32_t offset) {
    std::int64_t lo = 0, hi = 255;
    std::vector<std::int64_t> excluded;
    for (const auto& a : c_.atoms) {
      std::int64_t coef = 0, rest = 0;
      for (const auto& t : a.terms) {
        if (t.offset == offset) coef += t.coef;
        else rest += std::int64_t{t.coef} * model_[t.offset];
      }
      std::int64_t target = a.rhs - rest;
      Relation rel = a.rel;
      if (coef == 0) {
        if (!a.holds(model_)) return false;
        continue;
      }
      if (coef < 0) {
        coef = -coef;
        target = -target;
        switch (rel) {
          case Relation::Lt: rel = Relation::Gt; break;
          case Relation::Le: rel = Relation::Ge; break;
          case Relation::Gt: rel = Relation::Lt; break;
          case Relation::Ge: rel = Relation::Le; break;
          default: break;
        }
      }
      switch (rel) {
        case Relation::Eq:
          if (target % coef != 0) return false;
          lo = std::max(lo, target / coef);
          hi = std::min(hi, target / coef);
          break;
        case Relation::Ne:
          if (target % coef == 0) excluded.push_back(target / coef);
          break;
        case Relation::Lt: hi = std::min(hi, floor_div(target - 1, coef)); break;
        case Relation::Le: hi = std::min(hi, floor_div(target, coef)); break;
        case Relation::Gt: lo = std::max(lo, floor_div(target, coef) + 1); break;
        case Relation::Ge: lo = std::max(lo, -floor_div(-target, coef)); break;
      }
    }
    for (std::int64_t v = lo; v <= hi; ++v) {
      if (std::find(excluded.begin(), excluded.end(), v) != excluded.end()) continue;
      model_[offset] = static_cast<std::uint8_t>(v);
      if (c_.holds(model_)) return true;
    }
    return false;
  }

  bool search(std::size_t depth) {
    if (depth + 1 == offsets_.size()) return last_byte(offsets_[depth]);
    for (int v = 0; v < 256; ++v) {
      model_[offsets_[depth]] = static_cast<std::uint8_t>(v);
      if (feasible(depth + 1) && search(depth + 1)) return true;
    }
    model_[offsets_[depth]] = 0;
    return false;
  }

  const ByteConstraint& c_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint8_t> model_;
};

}  // namespace

std::optional<std::vector<std::uint8_t>> exhaustive_solve(const ByteConstraint& c) {
  return Exhaustive(c).run();
}

namespace {

using Set = std::set<std::uint32_t>;

Set meet(const Set& a, const Set& b) {
  Set out;
  for (auto x : a)
    if (b.contains(x)) out.insert(x);
  return out;
}

}  // namespace

std::vector<OracleCluster> partition_oracle(const std::vector<PointLocation>& points,
                                            const Cfg& cfg, std::uint32_t k, std::uint64_t seed) {
  const auto d = all_pairs(cfg);
  const auto n = static_cast<std::uint32_t>(points.size());
  std::vector<Set> bbk(n), ext(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto b = points[i].block.value;
    for (std::uint32_t a = 0; a < cfg.size(); ++a)
      if (a != b && d[a][b] >= 1 && d[a][b] <= k) bbk[i].insert(a);
    ext[i] = bbk[i];
    ext[i].insert(b);
  }
  auto same = [&](std::uint32_t a, std::uint32_t b) {
    return d[points[a].block.value][points[b].block.value] != kInf ||
           d[points[b].block.value][points[a].block.value] != kInf;
  };
  auto deepest = [&](const Set& s) {
    std::uint32_t best = *s.begin();
    for (auto x : s)
      if (d[0][x] > d[0][best]) best = x;
    return BlockId{best};
  };

  // Replays the greedy draws against a fixed partition; returns the
  // clusters in pivot order when the partition is exactly what the greedy
  // procedure builds.
  auto accept = [&](const std::vector<std::uint32_t>& part) -> std::optional<std::vector<Set>> {
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> unvisited(n);
    std::iota(unvisited.begin(), unvisited.end(), 0u);
    std::vector<Set> order;
    while (!unvisited.empty()) {
      const std::size_t at = rng() % unvisited.size();
      const std::uint32_t pivot = unvisited[at];
      unvisited.erase(unvisited.begin() + static_cast<std::ptrdiff_t>(at));
      Set cluster{pivot};
      Set common = ext[pivot];
      if (k > 0) {
        for (int pass = 0; pass < 2; ++pass) {
          for (auto it = unvisited.begin(); it != unvisited.end();) {
            const std::uint32_t j = *it;
            const bool related = pass == 0 ? same(pivot, j) : !meet(bbk[pivot], bbk[j]).empty();
            if (related && !meet(common, ext[j]).empty()) {
              common = meet(common, ext[j]);
              cluster.insert(j);
              it = unvisited.erase(it);
            } else {
              ++it;
            }
          }
        }
      }
      for (std::uint32_t i = 0; i < n; ++i)
        if ((part[i] == part[pivot]) != cluster.contains(i)) return std::nullopt;
      order.push_back(cluster);
    }
    return order;
  };

  std::vector<OracleCluster> found;
  int matches = 0;
  // Restricted growth strings enumerate every set partition once.
  std::vector<std::uint32_t> part(n, 0);
  std::function<void(std::uint32_t, std::uint32_t)> rec = [&](std::uint32_t i, std::uint32_t used) {
    if (i == n) {
      if (auto order = accept(part)) {
        ++matches;
        found.clear();
        for (const Set& c : *order) {
          Set common_bbk = bbk[*c.begin()], common_ext = ext[*c.begin()];
          for (auto m : c) {
            common_bbk = meet(common_bbk, bbk[m]);
            common_ext = meet(common_ext, ext[m]);
          }
          OracleCluster oc;
          oc.members.assign(c.begin(), c.end());
          oc.parent = k == 0 ? points[*c.begin()].block
                             : deepest(common_bbk.empty() ? common_ext : common_bbk);
          found.push_back(oc);
        }
      }
      return;
    }
    for (std::uint32_t v = 0; v <= used && v < n; ++v) {
      part[i] = v;
      rec(i + 1, std::max(used, v + 1));
    }
  };
  if (n == 0) return {};
  rec(0, 0);
  if (matches != 1) throw std::runtime_error("partition oracle matched " + std::to_string(matches));
  // k == 0 skips the draws entirely: singletons in point order.
  if (k == 0)
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.members < b.members; });
  return found;
}

std::string random_program(Rng& rng, const RandomProgramOptions& o) {
  std::ostringstream out;
  const char* ops[] = {"+", "-", "==", "!=", "<", "<=", ">", ">="};
  const char* handlers[] = {"log", "free", "close", "delete"};
  for (std::uint32_t f = 0; f < o.functions; ++f) {
    const std::string fname = f == 0 ? "main" : "f" + std::to_string(f);
    out << (f ? "\n" : "") << "func " << fname << ":\n";
    std::vector<std::string> regs;
    std::uint32_t next_reg = 0;
    auto fresh = [&] { return "r" + std::to_string(next_reg++); };
    auto any_reg = [&] { return regs[pick(rng, regs.size())]; };
    const std::uint32_t nblocks = 1 + static_cast<std::uint32_t>(pick(rng, o.blocks));
    for (std::uint32_t b = 0; b < nblocks; ++b) {
      out << "block b" << b << ":\n";
      if (b == 0) {
        for (int i = 0; i < 2; ++i) {
          const std::string r = fresh();
          out << "  " << r << " = input " << pick(rng, o.input_bytes) << "\n";
          regs.push_back(r);
        }
      }
      const std::uint64_t insts = pick(rng, 4);
      for (std::uint64_t i = 0; i < insts; ++i) {
        const std::string r = fresh();
        const auto kind = pick(rng, 10);
        if (kind < 2) {
          out << "  " << r << " = input " << pick(rng, o.input_bytes) << "\n";
        } else if (kind < 5) {
          const std::string rhs = chance(rng, 0.5) ? any_reg() : std::to_string(pick(rng, 256));
          out << "  " << r << " = " << any_reg() << " " << ops[pick(rng, 8)] << " " << rhs << "\n";
        } else if (kind == 5) {
          if (o.nonlinear) out << "  " << r << " = " << any_reg() << " * " << any_reg() << "\n";
          else out << "  " << r << " = " << any_reg() << " * " << 1 + pick(rng, 7) << "\n";
        } else if (kind < 8 && chance(rng, o.fcall_rate * 3)) {
          out << "  fcall " << r << " = " << (chance(rng, 0.5) ? "malloc" : "read:int") << " @ep_"
              << f << "_" << b << "_" << i << "\n";
        } else if (kind == 8 && o.calls && o.functions > 1) {
          const std::uint32_t lo = o.loops ? 0 : f + 1;
          if (lo < o.functions) {
            const auto callee = lo + static_cast<std::uint32_t>(pick(rng, o.functions - lo));
            const std::string cname = callee == 0 ? "main" : "f" + std::to_string(callee);
            if (chance(rng, 0.5)) out << "  " << r << " = call " << cname << "\n";
            else out << "  call " << cname << "\n";
          }
          continue;
        } else {
          out << "  handle " << handlers[pick(rng, 4)] << "\n";
          continue;
        }
        regs.push_back(r);
      }
      if (chance(rng, 0.05)) out << "  crash bug_" << f << "_" << b << " if " << any_reg() << "\n";
      // Forward targets unless loops are enabled.
      std::vector<std::uint32_t> targets;
      for (std::uint32_t t = o.loops ? 0 : b + 1; t < nblocks; ++t)
        if (t != b) targets.push_back(t);
      std::shuffle(targets.begin(), targets.end(), rng);
      const auto kind = pick(rng, 10);
      if (targets.empty() || kind == 0) {
        out << "  " << (f == 0 && chance(rng, 0.5) ? "halt" : "ret " + any_reg()) << "\n";
      } else if (targets.size() >= 3 && kind < 3) {
        out << "  switch " << any_reg() << " [0:b" << targets[0] << " " << 1 + pick(rng, 200)
            << ":b" << targets[1] << "] default:b" << targets[2] << "\n";
      } else if (targets.size() >= 2 && kind < 7) {
        out << "  br " << any_reg() << " b" << targets[0] << " b" << targets[1] << "\n";
      } else {
        out << "  jmp b" << targets[0] << "\n";
      }
    }
  }
  return out.str();
}

std::size_t enumerate_derived_blocks(const Program& program, std::uint32_t depth) {
  // Returns (blocks materialized, whether the instance can return).
  std::function<std::pair<std::size_t, bool>(std::uint32_t, std::size_t, bool)> instance =
      [&](std::uint32_t fn, std::size_t stack, bool root) -> std::pair<std::size_t, bool> {
    const Function& f = program.functions[fn];
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> work{{0, 0}};
    std::size_t count = 0;
    bool returns = false;
    while (!work.empty()) {
      auto node = work.back();
      work.pop_back();
      if (!seen.insert(node).second) continue;
      ++count;
      const auto [b, seg] = node;
      const Block& block = f.blocks[b];
      std::vector<const Call*> calls;
      for (const auto& inst : block.body)
        if (const auto* c = std::get_if<Call>(&inst)) calls.push_back(c);
      if (seg < calls.size()) {
        const auto callee = static_cast<std::uint32_t>(*program.function_index(calls[seg]->callee));
        if (stack >= depth) {
          ++count;  // the summary node
          work.push_back({b, seg + 1});
        } else {
          auto [n, ret] = instance(callee, stack + 1, false);
          count += n;
          if (ret) work.push_back({b, seg + 1});
        }
        continue;
      }
      if (std::holds_alternative<Return>(block.term)) {
        returns = !root;
        continue;
      }
      for (const auto& s : successors(block.term))
        work.push_back({static_cast<std::uint32_t>(*f.block_index(s)), 0});
    }
    return {count, returns};
  };
  return instance(static_cast<std::uint32_t>(*program.function_index(program.entry)), 0, true).first;
}

}  // namespace errfuzz::test
