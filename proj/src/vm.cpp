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

#include "errfuzz/vm.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "compiled.hpp"
#include "errfuzz/error.hpp"
#include "interp.hpp"

namespace errfuzz {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Ok: return "ok";
    case Outcome::Crash: return "crash";
    case Outcome::Exit: return "exit";
    case Outcome::BudgetExceeded: return "budget-exceeded";
  }
  return "?";
}

std::vector<EdgeId> ExecutionTrace::covered_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < edge_hits.size(); ++e)
    if (edge_hits[e]) out.push_back(e);
  return out;
}

namespace {

using detail::CompiledFunction;
using detail::CompiledProgram;
using detail::Inst;
using detail::Op;
using detail::Segment;
using detail::TermKind;

class Compiler {
 public:
  Compiler(const Program& p, const DerivedCfg& d) : program_(p), derived_(d) {}

  CompiledProgram run() {
    for (const auto& f : program_.functions)
      for (const auto& b : f.blocks)
        for (const auto& inst : b.body) {
          if (const auto* fc = std::get_if<FallibleCall>(&inst)) {
            point_ids_.emplace(fc->label, static_cast<std::uint32_t>(out_.points.size()));
            const ReturnKind kind = fc->return_kind();
            out_.points.push_back({fc->label, ok_value(kind), err_value(kind)});
          } else if (const auto* ci = std::get_if<CrashIf>(&inst)) {
            bug(ci->label);
          }
        }
    for (const auto& f : program_.functions)
      for (const auto& b : f.blocks)
        if (const auto* c = std::get_if<Crash>(&b.term)) bug(c->label);

    for (const auto& f : program_.functions) out_.functions.push_back(compile(f));
    out_.entry = static_cast<std::uint32_t>(*program_.function_index(program_.entry));
    link();
    return std::move(out_);
  }

 private:
  std::uint32_t bug(const std::string& label) {
    auto [it, fresh] = bug_ids_.emplace(label, static_cast<std::uint32_t>(out_.bugs.size()));
    if (fresh) out_.bugs.push_back(label);
    return it->second;
  }

  CompiledFunction compile(const Function& f) {
    CompiledFunction cf;
    std::unordered_map<std::string, std::uint32_t> regs;
    auto reg = [&](const std::string& name) {
      auto [it, fresh] = regs.emplace(name, static_cast<std::uint32_t>(regs.size()));
      return it->second;
    };
    auto operand = [&](const Operand& o, bool& imm) -> std::int64_t {
      imm = !o.is_register();
      return imm ? o.imm() : reg(o.reg());
    };
    for (const auto& b : f.blocks) {
      cf.block_segment.push_back(static_cast<std::uint32_t>(cf.segments.size()));
      const auto calls = call_positions(b);
      cf.segments.resize(cf.segments.size() + calls.size() + 1);
    }
    for (std::uint32_t bi = 0; bi < f.blocks.size(); ++bi) {
      const Block& b = f.blocks[bi];
      std::uint32_t s = cf.block_segment[bi];
      cf.segments[s].begin = static_cast<std::uint32_t>(cf.code.size());
      for (const auto& inst : b.body) {
        Inst in;
        if (const auto* c = std::get_if<Call>(&inst)) {
          Segment& seg = cf.segments[s];
          seg.end = static_cast<std::uint32_t>(cf.code.size());
          seg.is_call = true;
          seg.callee = static_cast<std::uint32_t>(*program_.function_index(c->callee));
          seg.call_dst = c->dst ? reg(*c->dst) : kNone;
          cf.segments[++s].begin = seg.end;
          continue;
        }
        if (const auto* r = std::get_if<ReadInput>(&inst)) {
          in.op = Op::Input;
          in.dst = reg(r->dst);
          in.a = r->offset;
        } else if (const auto* a = std::get_if<Assign>(&inst)) {
          in.dst = reg(a->dst);
          in.a = operand(a->lhs, in.a_imm);
          if (!a->op) {
            in.op = Op::Copy;
          } else {
            in.op = static_cast<Op>(static_cast<int>(Op::Add) + static_cast<int>(*a->op));
            in.b = operand(a->rhs, in.b_imm);
          }
        } else if (const auto* fc = std::get_if<FallibleCall>(&inst)) {
          in.op = Op::FCall;
          in.dst = reg(fc->dst);
          in.a = point_ids_.at(fc->label);
        } else if (const auto* h = std::get_if<HandlerOp>(&inst)) {
          in.op = Op::Handle;
          in.a = static_cast<std::int64_t>(h->kind);
        } else if (const auto* ci = std::get_if<CrashIf>(&inst)) {
          in.op = Op::CrashIf;
          in.a = reg(ci->reg);
          in.b = bug_ids_.at(ci->label);
        }
        cf.code.push_back(in);
      }
      Segment& last = cf.segments[s];
      last.end = static_cast<std::uint32_t>(cf.code.size());
      last.targets_begin = static_cast<std::uint32_t>(cf.targets.size());
      auto target = [&](const std::string& label) {
        cf.targets.push_back(cf.block_segment[*f.block_index(label)]);
        cf.case_values.push_back(0);
      };
      std::visit(
          [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Jump>) {
              last.term = TermKind::Jump;
              target(t.target);
            } else if constexpr (std::is_same_v<T, Branch>) {
              last.term = TermKind::Branch;
              last.reg = reg(t.reg);
              target(t.then_target);
              target(t.else_target);
            } else if constexpr (std::is_same_v<T, Switch>) {
              last.term = TermKind::Switch;
              last.reg = reg(t.reg);
              for (const auto& [v, l] : t.cases) {
                target(l);
                cf.case_values.back() = v;
              }
              target(t.default_target);
            } else if constexpr (std::is_same_v<T, Return>) {
              last.term = TermKind::Ret;
              if (t.reg) last.reg = reg(*t.reg);
            } else if constexpr (std::is_same_v<T, Halt>) {
              last.term = TermKind::Halt;
            } else {
              last.term = TermKind::Crash;
              last.bug = bug_ids_.at(t.label);
            }
          },
          b.term);
      last.targets_end = static_cast<std::uint32_t>(cf.targets.size());
    }
    cf.registers = static_cast<std::uint32_t>(regs.size());
    return cf;
  }

  void link() {
    const auto& cfg = derived_.cfg;
    const std::size_t nctx = derived_.contexts.size();
    out_.segment_block.resize(nctx);
    out_.call_child.resize(nctx);
    out_.summary_block.assign(nctx, kNone);
    out_.truncated.assign(nctx, 0);
    for (std::size_t c = 0; c < nctx; ++c) {
      const auto& info = derived_.contexts[c];
      out_.context_hash.push_back(info.hash);
      out_.truncated[c] = info.truncated;
      if (info.truncated) continue;
      const auto nseg = out_.functions[info.function].segments.size();
      out_.segment_block[c].assign(nseg, kNone);
      out_.call_child[c].assign(nseg, kNone);
    }
    for (std::uint32_t b = 0; b < derived_.origins.size(); ++b) {
      const auto& o = derived_.origins[b];
      if (o.summary) {
        out_.summary_block[o.context] = b;
        continue;
      }
      const auto seg = out_.functions[o.function].block_segment[o.block] + o.segment;
      out_.segment_block[o.context][seg] = b;
      if (out_.functions[o.function].segments[seg].is_call) {
        const auto succ = cfg.out_edges(BlockId{b});
        out_.call_child[o.context][seg] = derived_.origins[cfg.edge(succ[0]).to.value].context;
      }
    }
    out_.edge_count = cfg.edge_count();
    for (std::uint32_t b = 0; b < cfg.size(); ++b) {
      out_.out_begin.push_back(static_cast<std::uint32_t>(out_.out_edges.size()));
      for (EdgeId e : cfg.out_edges(BlockId{b})) out_.out_edges.push_back(e);
    }
    out_.out_begin.push_back(static_cast<std::uint32_t>(out_.out_edges.size()));
  }

  const Program& program_;
  const DerivedCfg& derived_;
  CompiledProgram out_;
  std::unordered_map<std::string, std::uint32_t> point_ids_;
  std::unordered_map<std::string, std::uint32_t> bug_ids_;
};

}  // namespace

Machine::Machine(const Program& program, const DerivedCfg& derived)
    : code_(std::make_unique<detail::CompiledProgram>(Compiler(program, derived).run())) {}
Machine::~Machine() = default;
Machine::Machine(Machine&&) noexcept = default;
Machine& Machine::operator=(Machine&&) noexcept = default;

void Machine::execute(std::span<const std::uint8_t> input, std::span<const std::uint8_t> errors,
                      const ExecOptions& options, ExecutionTrace& out) const {
  detail::NullObserver obs;
  detail::interpret(*code_, input, errors, options, out, obs);
}

ExecutionTrace Machine::execute(std::span<const std::uint8_t> input,
                                std::span<const std::uint8_t> errors,
                                const ExecOptions& options) const {
  ExecutionTrace out;
  execute(input, errors, options, out);
  return out;
}

std::size_t Machine::point_count() const { return code_->points.size(); }
const std::string& Machine::point_label(std::uint32_t point) const {
  return code_->points.at(point).label;
}
std::optional<std::uint32_t> Machine::find_point(std::string_view label) const {
  for (std::uint32_t i = 0; i < code_->points.size(); ++i)
    if (code_->points[i].label == label) return i;
  return std::nullopt;
}
std::size_t Machine::bug_count() const { return code_->bugs.size(); }
const std::string& Machine::bug_label(std::uint32_t bug) const { return code_->bugs.at(bug); }
std::optional<std::uint32_t> Machine::find_bug(std::string_view label) const {
  for (std::uint32_t i = 0; i < code_->bugs.size(); ++i)
    if (code_->bugs[i] == label) return i;
  return std::nullopt;
}
std::uint64_t Machine::context_hash(std::uint32_t context) const {
  return code_->context_hash.at(context);
}
std::size_t Machine::edge_count() const { return code_->edge_count; }

Target::Target(Program program, const DeriveOptions& options)
    : program_(std::move(program)),
      derived_(derive_cfg(program_, options)),
      machine_(program_, derived_) {}

Target Target::parse(std::string_view text, const DeriveOptions& options) {
  return Target(parse_program(text), options);
}

Target Target::load(const std::string& path, const DeriveOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read target '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), options);
}

}  // namespace errfuzz
