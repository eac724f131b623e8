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

#include "errfuzz/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>

#include "errfuzz/dominators.hpp"
#include "errfuzz/error.hpp"

namespace errfuzz {
namespace {

// Concrete evaluation of the check window with the call result fixed.
// Returns the successor index the terminator takes, or nullopt when the
// branch depends on anything else.
std::optional<std::size_t> window_successor(const Block& block, std::uint32_t call,
                                            const std::string& dst, std::int64_t value) {
  std::map<std::string, std::int64_t> known{{dst, value}};
  auto read = [&](const Operand& o) -> std::optional<std::int64_t> {
    if (!o.is_register()) return o.imm();
    auto it = known.find(o.reg());
    if (it == known.end()) return std::nullopt;
    return it->second;
  };
  for (std::uint32_t i = call + 1; i < block.body.size(); ++i) {
    const auto& inst = block.body[i];
    if (const auto* a = std::get_if<Assign>(&inst)) {
      auto l = read(a->lhs);
      auto r = a->op ? read(a->rhs) : std::optional<std::int64_t>(0);
      if (!l || !r) {
        known.erase(a->dst);
        continue;
      }
      std::int64_t v = *l;
      if (a->op) {
        const auto ul = static_cast<std::uint64_t>(*l);
        const auto ur = static_cast<std::uint64_t>(*r);
        switch (*a->op) {
          case BinOp::Add: v = static_cast<std::int64_t>(ul + ur); break;
          case BinOp::Sub: v = static_cast<std::int64_t>(ul - ur); break;
          case BinOp::Mul: v = static_cast<std::int64_t>(ul * ur); break;
          case BinOp::Eq: v = *l == *r; break;
          case BinOp::Ne: v = *l != *r; break;
          case BinOp::Lt: v = *l < *r; break;
          case BinOp::Le: v = *l <= *r; break;
          case BinOp::Gt: v = *l > *r; break;
          case BinOp::Ge: v = *l >= *r; break;
        }
      }
      known[a->dst] = v;
    } else if (const auto* r = std::get_if<ReadInput>(&inst)) {
      known.erase(r->dst);
    } else if (const auto* f = std::get_if<FallibleCall>(&inst)) {
      known.erase(f->dst);
    } else if (const auto* c = std::get_if<Call>(&inst)) {
      if (c->dst) known.erase(*c->dst);
    }
  }
  if (const auto* br = std::get_if<Branch>(&block.term)) {
    auto v = known.find(br->reg);
    if (v == known.end()) return std::nullopt;
    return v->second != 0 ? 0 : 1;
  }
  if (const auto* sw = std::get_if<Switch>(&block.term)) {
    auto v = known.find(sw->reg);
    if (v == known.end()) return std::nullopt;
    for (std::size_t i = 0; i < sw->cases.size(); ++i)
      if (sw->cases[i].first == v->second) return i;
    return sw->cases.size();
  }
  return std::nullopt;
}

// True when the call result (or a value computed from it) decides the
// block's branch and at most kCheckWindow instructions separate them.
bool feeds_branch(const Block& block, std::uint32_t call, const std::string& dst) {
  if (block.body.size() - call > kCheckWindow) return false;
  std::set<std::string> tainted{dst};
  for (std::uint32_t i = call + 1; i < block.body.size(); ++i) {
    const auto& inst = block.body[i];
    std::optional<std::string> def;
    bool from_taint = false;
    if (const auto* a = std::get_if<Assign>(&inst)) {
      def = a->dst;
      from_taint = (a->lhs.is_register() && tainted.contains(a->lhs.reg())) ||
                   (a->op && a->rhs.is_register() && tainted.contains(a->rhs.reg()));
    } else if (const auto* r = std::get_if<ReadInput>(&inst)) {
      def = r->dst;
    } else if (const auto* f = std::get_if<FallibleCall>(&inst)) {
      def = f->dst;
    } else if (const auto* c = std::get_if<Call>(&inst)) {
      def = c->dst;
    }
    if (!def) continue;
    if (from_taint) tainted.insert(*def);
    else tainted.erase(*def);
  }
  if (const auto* br = std::get_if<Branch>(&block.term)) return tainted.contains(br->reg);
  if (const auto* sw = std::get_if<Switch>(&block.term)) return tainted.contains(sw->reg);
  return false;
}

void find_check(const Function& fn, ErrorPoint& ep) {
  const Block& block = fn.blocks[ep.block];
  const auto& inst = block.body[ep.instruction];
  std::string dst;
  if (const auto* f = std::get_if<FallibleCall>(&inst)) dst = f->dst;
  if (const auto* c = std::get_if<Call>(&inst)) dst = c->dst.value_or("");
  if (dst.empty() || !feeds_branch(block, ep.instruction, dst)) return;
  auto err = window_successor(block, ep.instruction, dst, err_value(ep.return_kind));
  auto ok = window_successor(block, ep.instruction, dst, ok_value(ep.return_kind));
  if (!err || !ok || *err == *ok) return;
  const auto targets = successors(block.term);
  ep.check = true;
  ep.err_successor = static_cast<std::uint32_t>(*fn.block_index(targets[*err]));
}

std::optional<HandlerKind> kind_of_callee(std::string_view callee) {
  std::string name(callee);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto has = [&](std::string_view part) { return name.find(part) != std::string::npos; };
  if (has("log") || has("print") || has("warn") || has("perror")) return HandlerKind::Log;
  if (has("exit") || has("abort")) return HandlerKind::Exit;
  if (has("close")) return HandlerKind::Close;
  if (has("delete") || has("remove") || has("unlink")) return HandlerKind::Delete;
  if (has("free") || has("release")) return HandlerKind::Free;
  return std::nullopt;
}

}  // namespace

std::vector<ErrorPoint> extract_candidates(const Program& program) {
  std::vector<ErrorPoint> out;
  for (std::uint32_t f = 0; f < program.functions.size(); ++f) {
    const Function& fn = program.functions[f];
    for (std::uint32_t b = 0; b < fn.blocks.size(); ++b) {
      const Block& block = fn.blocks[b];
      for (std::uint32_t i = 0; i < block.body.size(); ++i) {
        ErrorPoint ep;
        ep.function = f;
        ep.block = b;
        ep.instruction = i;
        if (const auto* fc = std::get_if<FallibleCall>(&block.body[i])) {
          ep.label = fc->label;
          ep.callee = fc->callee;
          ep.return_kind = fc->return_kind();
          ep.fallible = true;
        } else if (const auto* c = std::get_if<Call>(&block.body[i])) {
          if (!c->dst || !feeds_branch(block, i, *c->dst)) continue;
          ep.label = "call@" + fn.name + ":" + block.label + ":" + std::to_string(i);
          ep.callee = c->callee;
          ep.return_kind = guess_return_kind(c->callee);
        } else {
          continue;
        }
        find_check(fn, ep);
        out.push_back(std::move(ep));
      }
    }
  }
  return out;
}

std::set<HandlerKind> classify_handler(const Program& program, const ErrorPoint& point) {
  std::set<HandlerKind> kinds;
  if (!point.err_successor) return kinds;
  const Function& fn = program.functions.at(point.function);
  std::vector<std::vector<std::uint32_t>> succ(fn.blocks.size());
  for (std::uint32_t b = 0; b < fn.blocks.size(); ++b)
    for (const auto& s : successors(fn.blocks[b].term))
      succ[b].push_back(static_cast<std::uint32_t>(*fn.block_index(s)));
  const auto idom = immediate_dominators(succ, 0);
  const auto ipdom = immediate_post_dominators(succ);
  const std::int32_t rejoin = ipdom[point.block];
  const std::uint32_t start = *point.err_successor;

  std::vector<bool> seen(fn.blocks.size(), false);
  std::deque<std::uint32_t> queue;
  auto visit = [&](std::uint32_t b) {
    if (seen[b] || static_cast<std::int32_t>(b) == rejoin) return;
    if (!dominates(idom, start, b)) return;
    seen[b] = true;
    queue.push_back(b);
  };
  visit(start);
  while (!queue.empty()) {
    const std::uint32_t b = queue.front();
    queue.pop_front();
    const Block& block = fn.blocks[b];
    for (const auto& inst : block.body) {
      if (const auto* h = std::get_if<HandlerOp>(&inst)) {
        kinds.insert(h->kind);
      } else if (const auto* c = std::get_if<Call>(&inst)) {
        if (auto k = kind_of_callee(c->callee)) kinds.insert(*k);
      } else if (const auto* fc = std::get_if<FallibleCall>(&inst)) {
        if (auto k = kind_of_callee(fc->callee)) kinds.insert(*k);
      }
    }
    if (std::holds_alternative<Return>(block.term)) kinds.insert(HandlerKind::Return);
    for (std::uint32_t s : succ[b]) visit(s);
  }
  return kinds;
}

Overrides Overrides::parse(std::string_view text) {
  Overrides out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    std::vector<std::string> words;
    std::string cur;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) words.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    if (words.empty()) continue;
    if (words.size() != 2 || (words[0] != "allow" && words[0] != "deny"))
      throw ParseError(line_no, 1, "expected 'allow <label>' or 'deny <label>'");
    (words[0] == "allow" ? out.allow : out.deny).insert(words[1]);
  }
  return out;
}

std::vector<ErrorPoint> extract_error_points(const Target& target, const Overrides& overrides) {
  auto points = extract_candidates(target.program());
  const auto dist = distances_from(target.cfg(), target.cfg().entry());
  for (auto& ep : points) {
    ep.handlers = classify_handler(target.program(), ep);
    const Block& block = target.program().functions[ep.function].blocks[ep.block];
    ep.instances = target.derived().instances(ep.function, ep.block,
                                              segment_of(block, ep.instruction));
    for (BlockId b : ep.instances) {
      if (!dist[b.value]) continue;
      if (!ep.primary || *dist[b.value] < *dist[ep.primary->value]) ep.primary = b;
    }
    ep.reachable = ep.primary.has_value();
    const bool allowed = overrides.allow.contains(ep.label);
    const bool denied = overrides.deny.contains(ep.label);
    ep.realistic = ep.fallible && ep.reachable && !denied && (ep.check || allowed);
  }
  return points;
}

std::vector<ErrorPoint> realistic_points(const std::vector<ErrorPoint>& points) {
  std::vector<ErrorPoint> out;
  for (const auto& p : points)
    if (p.realistic) out.push_back(p);
  return out;
}

std::vector<ErrorPointPath> error_point_paths(const Cfg& cfg, const std::vector<ErrorPoint>& points) {
  std::vector<ErrorPointPath> out;
  for (const auto& p : points) {
    ErrorPointPath e{p.label, std::nullopt, ""};
    if (!p.primary || !cfg.contains(*p.primary)) {
      e.error = "error point '" + p.label + "' is not located in the graph";
    } else {
      e.path = shortest_entry_path(cfg, *p.primary);
      if (!e.path) e.error = "error point '" + p.label + "' is unreachable from entry";
    }
    out.push_back(std::move(e));
  }
  return out;
}

nlohmann::json to_json(const std::vector<ErrorPoint>& points, const Target& target) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : points) {
    const Function& fn = target.program().functions[p.function];
    nlohmann::json handlers = nlohmann::json::array();
    for (HandlerKind k : p.handlers) handlers.push_back(std::string(to_string(k)));
    nlohmann::json j = {
        {"label", p.label},
        {"function", fn.name},
        {"block", fn.blocks[p.block].label},
        {"instruction", p.instruction},
        {"callee", p.callee},
        {"return_kind", std::string(to_string(p.return_kind))},
        {"fallible", p.fallible},
        {"check", p.check},
        {"handlers", handlers},
        {"reachable", p.reachable},
        {"realistic", p.realistic},
    };
    if (p.primary) j["cfg_block"] = target.cfg().name(*p.primary);
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace errfuzz
