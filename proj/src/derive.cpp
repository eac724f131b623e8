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

#include <deque>
#include <limits>
#include <map>
#include <unordered_map>

#include "errfuzz/dominators.hpp"
#include "errfuzz/error.hpp"
#include "errfuzz/vm.hpp"

namespace errfuzz {

std::vector<std::uint32_t> call_positions(const Block& block) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < block.body.size(); ++i)
    if (std::holds_alternative<Call>(block.body[i])) out.push_back(i);
  return out;
}

std::uint32_t segment_of(const Block& block, std::uint32_t inst) {
  std::uint32_t seg = 0;
  for (std::uint32_t i = 0; i < inst && i < block.body.size(); ++i)
    if (std::holds_alternative<Call>(block.body[i])) ++seg;
  return seg;
}

std::uint64_t context_hash(std::span<const std::string> stack, bool truncated) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  };
  for (const auto& site : stack) {
    for (char c : site) mix(c);
    mix('/');
  }
  if (truncated) mix('~');
  return h;
}

std::vector<BlockId> DerivedCfg::instances(std::uint32_t function, std::uint32_t block,
                                           std::uint32_t segment) const {
  std::vector<BlockId> out;
  for (std::uint32_t b = 0; b < origins.size(); ++b) {
    const auto& o = origins[b];
    if (!o.summary && o.function == function && o.block == block && o.segment == segment)
      out.push_back(BlockId{b});
  }
  return out;
}

namespace {

using StaticValue = std::variant<LinearExpr, Atom>;

constexpr std::int64_t kMaxStaticConstant = std::int64_t{1} << 40;

// Registers whose value is a fixed linear function of the input bytes
// (single definition dominating every use, built from input reads and
// linear arithmetic), giving exact predicates on the edges they decide.
class StaticAnalysis {
 public:
  explicit StaticAnalysis(const Function& fn) : fn_(fn) {
    std::vector<std::vector<std::uint32_t>> succ(fn.blocks.size());
    for (std::uint32_t b = 0; b < fn.blocks.size(); ++b)
      for (const auto& s : successors(fn.blocks[b].term))
        succ[b].push_back(static_cast<std::uint32_t>(*fn.block_index(s)));
    idom_ = immediate_dominators(succ, 0);
    for (std::uint32_t b = 0; b < fn.blocks.size(); ++b) {
      const auto& body = fn.blocks[b].body;
      for (std::uint32_t i = 0; i < body.size(); ++i) {
        std::visit(
            [&](const auto& inst) {
              using T = std::decay_t<decltype(inst)>;
              if constexpr (std::is_same_v<T, Call>) {
                if (inst.dst) defs_[*inst.dst].push_back({b, i});
              } else if constexpr (!std::is_same_v<T, HandlerOp> && !std::is_same_v<T, CrashIf>) {
                defs_[inst.dst].push_back({b, i});
              }
            },
            body[i]);
      }
    }
  }

  // One optional predicate per successor of block `b`'s terminator.
  std::vector<std::optional<ByteConstraint>> edge_predicates(std::uint32_t b) {
    const auto& term = fn_.blocks[b].term;
    const std::uint32_t end = static_cast<std::uint32_t>(fn_.blocks[b].body.size());
    std::vector<std::optional<ByteConstraint>> out(successors(term).size());
    if (const auto* br = std::get_if<Branch>(&term)) {
      auto v = value_at(br->reg, b, end);
      if (!v) return out;
      if (const auto* atom = std::get_if<Atom>(&*v)) {
        out[0] = ByteConstraint{{*atom}};
        out[1] = ByteConstraint{{atom->negated()}};
      } else {
        const auto& e = std::get<LinearExpr>(*v);
        auto ne = e.compare(Relation::Ne, LinearExpr::constant(0));
        auto eq = e.compare(Relation::Eq, LinearExpr::constant(0));
        if (!ne || !eq) return out;
        out[0] = ByteConstraint{{*ne}};
        out[1] = ByteConstraint{{*eq}};
      }
    } else if (const auto* sw = std::get_if<Switch>(&term)) {
      auto v = value_at(sw->reg, b, end);
      if (!v || !std::holds_alternative<LinearExpr>(*v)) return out;
      const auto& e = std::get<LinearExpr>(*v);
      ByteConstraint fallthrough;
      std::vector<std::optional<ByteConstraint>> cases;
      for (const auto& [value, label] : sw->cases) {
        auto eq = e.compare(Relation::Eq, LinearExpr::constant(value));
        auto ne = e.compare(Relation::Ne, LinearExpr::constant(value));
        if (!eq || !ne) return out;
        cases.push_back(ByteConstraint{{*eq}});
        fallthrough.conjoin(*ne);
      }
      for (std::size_t i = 0; i < cases.size(); ++i) out[i] = std::move(cases[i]);
      out.back() = std::move(fallthrough);
    }
    return out;
  }

 private:
  struct Def {
    std::uint32_t block;
    std::uint32_t inst;
  };

  // Value of `reg` as seen by instruction `inst` of block `b`.
  std::optional<StaticValue> value_at(const std::string& reg, std::uint32_t b, std::uint32_t inst) {
    auto it = defs_.find(reg);
    if (it == defs_.end() || it->second.size() != 1) return std::nullopt;
    const Def d = it->second.front();
    const bool dominated =
        d.block == b ? d.inst < inst
                     : (idom_[b] != kNoDominator && d.block != b && dominates(idom_, d.block, b));
    if (!dominated) return std::nullopt;
    return value_of(reg, d);
  }

  std::optional<StaticValue> value_of(const std::string& reg, Def d) {
    if (auto it = memo_.find(reg); it != memo_.end()) return it->second;
    memo_[reg] = std::nullopt;  // guards against cycles through this register
    std::optional<StaticValue> result;
    const auto& inst = fn_.blocks[d.block].body[d.inst];
    if (const auto* in = std::get_if<ReadInput>(&inst)) {
      result = LinearExpr::byte(in->offset);
    } else if (const auto* a = std::get_if<Assign>(&inst)) {
      result = assign_value(*a, d);
    }
    memo_[reg] = result;
    return result;
  }

  std::optional<LinearExpr> linear_operand(const Operand& o, Def d) {
    if (!o.is_register()) {
      if (o.imm() > kMaxStaticConstant || o.imm() < -kMaxStaticConstant) return std::nullopt;
      return LinearExpr::constant(o.imm());
    }
    auto v = value_at(o.reg(), d.block, d.inst);
    if (!v || !std::holds_alternative<LinearExpr>(*v)) return std::nullopt;
    return std::get<LinearExpr>(*v);
  }

  std::optional<StaticValue> assign_value(const Assign& a, Def d) {
    if (!a.op) {
      if (!a.lhs.is_register()) {
        auto c = linear_operand(a.lhs, d);
        if (!c) return std::nullopt;
        return StaticValue{*c};
      }
      return value_at(a.lhs.reg(), d.block, d.inst);
    }
    auto lhs = linear_operand(a.lhs, d);
    auto rhs = linear_operand(a.rhs, d);
    if (!lhs || !rhs) return std::nullopt;
    std::optional<LinearExpr> out;
    switch (*a.op) {
      case BinOp::Add: out = *lhs + *rhs; break;
      case BinOp::Sub: out = *lhs - *rhs; break;
      case BinOp::Mul: {
        const LinearExpr* var = lhs->is_constant() ? &*rhs : &*lhs;
        const LinearExpr* k = lhs->is_constant() ? &*lhs : &*rhs;
        if (!k->is_constant()) return std::nullopt;
        if (k->constant_part() > INT32_MAX || k->constant_part() < INT32_MIN) return std::nullopt;
        out = var->scaled(k->constant_part());
        break;
      }
      default: {
        constexpr Relation rels[] = {Relation::Eq, Relation::Ne, Relation::Lt,
                                     Relation::Le, Relation::Gt, Relation::Ge};
        const Relation rel = rels[static_cast<int>(*a.op) - static_cast<int>(BinOp::Eq)];
        auto atom = lhs->compare(rel, *rhs);
        if (!atom) return std::nullopt;
        return StaticValue{std::move(*atom)};
      }
    }
    if (!out->fits_int32_coefficients()) return std::nullopt;
    if (out->constant_part() > kMaxStaticConstant || out->constant_part() < -kMaxStaticConstant)
      return std::nullopt;
    return StaticValue{std::move(*out)};
  }

  const Function& fn_;
  std::vector<std::int32_t> idom_;
  std::unordered_map<std::string, std::vector<Def>> defs_;
  std::unordered_map<std::string, std::optional<StaticValue>> memo_;
};

struct NodeKey {
  std::uint32_t context;
  std::uint32_t block;
  std::uint32_t segment;
  bool summary;
  auto operator<=>(const NodeKey&) const = default;
};

class Deriver {
 public:
  Deriver(const Program& p, const DeriveOptions& o) : program_(p), options_(o) {
    for (std::uint32_t f = 0; f < p.functions.size(); ++f) {
      analyses_.emplace_back(p.functions[f]);
      std::vector<std::vector<std::optional<ByteConstraint>>> per_block;
      for (std::uint32_t b = 0; b < p.functions[f].blocks.size(); ++b)
        per_block.push_back(analyses_.back().edge_predicates(b));
      predicates_.push_back(std::move(per_block));
    }
  }

  DerivedCfg run() {
    const auto entry_fn = static_cast<std::uint32_t>(*program_.function_index(program_.entry));
    ContextInfo root;
    root.function = entry_fn;
    root.hash = context_hash({}, false);
    out_.contexts.push_back(std::move(root));
    const BlockId entry = node({0, 0, 0, false});
    builder_.set_entry(entry);
    while (!queue_.empty()) {
      const NodeKey key = keys_[queue_.front().value];
      const BlockId from = queue_.front();
      queue_.pop_front();
      expand(from, key);
    }
    out_.cfg = std::move(builder_).build();
    return std::move(out_);
  }

 private:
  const Function& function_of(std::uint32_t ctx) const {
    return program_.functions[out_.contexts[ctx].function];
  }

  std::string site_label(std::uint32_t ctx, std::uint32_t block, std::uint32_t seg) const {
    const auto& fn = function_of(ctx);
    return fn.name + ":" + fn.blocks[block].label + "#" + std::to_string(seg);
  }

  std::string prefix(std::uint32_t ctx) const {
    std::string out;
    for (const auto& s : out_.contexts[ctx].stack) out += s + "/";
    return out;
  }

  BlockId node(const NodeKey& key) {
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
    if (keys_.size() >= options_.block_budget)
      throw ValidationError("context-inlined graph exceeds the block budget of " +
                            std::to_string(options_.block_budget) + " blocks");
    std::string name;
    BlockOrigin origin{key.context, out_.contexts[key.context].function, key.block, key.segment,
                       key.summary};
    if (key.summary) {
      // Summary nodes live in their own truncated context.
      const auto& info = out_.contexts[key.context];
      name = prefix(info.parent) + info.stack.back() + "/~" + program_.functions[info.function].name;
      origin.function = info.function;
    } else {
      const auto& fn = function_of(key.context);
      name = key.context == 0 ? "" : prefix(key.context) + fn.name + ":";
      name += fn.blocks[key.block].label;
      if (key.segment > 0) name += "." + std::to_string(key.segment);
    }
    const BlockId id = builder_.add_block(std::move(name));
    if (id.value != keys_.size()) throw ValidationError("derived block name collision");
    ids_.emplace(key, id);
    keys_.push_back(key);
    out_.origins.push_back(origin);
    queue_.push_back(id);
    return id;
  }

  std::uint32_t child_context(std::uint32_t ctx, std::uint32_t block, std::uint32_t seg,
                              std::uint32_t callee, bool truncated) {
    const auto key = std::make_tuple(ctx, block, seg);
    if (auto it = children_.find(key); it != children_.end()) return it->second;
    ContextInfo info;
    info.parent = ctx;
    info.function = callee;
    info.stack = out_.contexts[ctx].stack;
    info.stack.push_back(site_label(ctx, block, seg));
    info.truncated = truncated;
    info.hash = context_hash(info.stack, truncated);
    const auto id = static_cast<std::uint32_t>(out_.contexts.size());
    out_.contexts.push_back(std::move(info));
    children_.emplace(key, id);
    continuation_.push_back({ctx, block, seg + 1, false});
    return id;
  }

  void edge(BlockId from, BlockId to, std::optional<ByteConstraint> pred = std::nullopt) {
    std::optional<EdgePredicate> p;
    if (pred) p = EdgePredicate{"c" + std::to_string(++predicate_count_), std::move(*pred)};
    builder_.add_edge(from, to, std::move(p));
  }

  void expand(BlockId from, const NodeKey& key) {
    const auto& info = out_.contexts[key.context];
    if (key.summary) {
      const NodeKey& cont = continuation_[key.context - 1];
      edge(from, node({cont.context, cont.block, cont.segment, false}));
      return;
    }
    const auto& fn = function_of(key.context);
    const Block& block = fn.blocks[key.block];
    const auto calls = call_positions(block);
    if (key.segment < calls.size()) {
      const auto& call = std::get<Call>(block.body[calls[key.segment]]);
      const auto callee = static_cast<std::uint32_t>(*program_.function_index(call.callee));
      const bool deep = info.stack.size() >= options_.context_depth;
      const auto child = child_context(key.context, key.block, key.segment, callee, deep);
      edge(from, node({child, 0, 0, deep}));
      return;
    }
    if (std::holds_alternative<Return>(block.term)) {
      if (key.context == 0) return;
      const NodeKey& cont = continuation_[key.context - 1];
      edge(from, node({cont.context, cont.block, cont.segment, false}));
      return;
    }
    const auto targets = successors(block.term);
    const auto& preds = predicates_[info.function][key.block];
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto target = static_cast<std::uint32_t>(*fn.block_index(targets[i]));
      edge(from, node({key.context, target, 0, false}), preds[i]);
    }
  }

  const Program& program_;
  DeriveOptions options_;
  std::vector<StaticAnalysis> analyses_;
  std::vector<std::vector<std::vector<std::optional<ByteConstraint>>>> predicates_;
  CfgBuilder builder_;
  DerivedCfg out_;
  std::map<NodeKey, BlockId> ids_;
  std::vector<NodeKey> keys_;
  std::deque<BlockId> queue_;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, std::uint32_t> children_;
  std::vector<NodeKey> continuation_;  // per non-root context, the caller's next segment
  std::uint32_t predicate_count_ = 0;
};

}  // namespace

DerivedCfg derive_cfg(const Program& program, const DeriveOptions& options) {
  validate(program);
  return Deriver(program, options).run();
}

}  // namespace errfuzz
