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

// The interpreter loop. `Obs` receives dataflow events; the concrete
// machine passes NullObserver and the symbolic tracer its own observer.

#include <algorithm>

#include "compiled.hpp"

namespace errfuzz::detail {

struct NullObserver {
  void frame(std::size_t, std::size_t) {}
  void input(std::uint32_t, std::uint32_t) {}
  void assign(const Inst&, std::size_t, std::int64_t, std::int64_t) {}
  void concrete(std::uint32_t) {}
  void returned(std::uint32_t, std::uint32_t) {}
  void branch(std::uint32_t, std::int64_t, std::uint32_t, EdgeId) {}
  void dispatch(std::uint32_t, std::int64_t, std::span<const std::int64_t>, std::uint32_t,
                EdgeId) {}
};

inline std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

inline std::int64_t binary(Op op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case Op::Add: return wrap_add(a, b);
    case Op::Sub: return wrap_sub(a, b);
    case Op::Mul: return wrap_mul(a, b);
    case Op::Eq: return a == b;
    case Op::Ne: return a != b;
    case Op::Lt: return a < b;
    case Op::Le: return a <= b;
    case Op::Gt: return a > b;
    case Op::Ge: return a >= b;
    default: return 0;
  }
}

inline constexpr std::size_t kMaxFrames = 1 << 16;

struct Frame {
  std::uint32_t function;
  std::uint32_t context;
  std::uint32_t segment;
  std::uint32_t base;
  std::uint32_t ret_dst;
  bool summarized;
};

template <class Obs>
void interpret(const CompiledProgram& P, std::span<const std::uint8_t> input,
               std::span<const std::uint8_t> errors, const ExecOptions& options,
               ExecutionTrace& t, Obs& obs) {
  thread_local std::vector<std::int64_t> regs;
  thread_local std::vector<Frame> frames;
  frames.clear();

  t.path.clear();
  t.encounters.clear();
  t.edge_hits.assign(P.edge_count, 0);
  t.outcome = Outcome::Ok;
  t.bug = kNone;
  t.crash_block = BlockId{};
  t.steps = 0;

  std::uint32_t fn = P.entry;
  std::uint32_t ctx = 0;
  std::uint32_t seg = 0;
  std::uint32_t base = 0;
  bool summarized = false;
  const CompiledFunction* F = &P.functions[fn];
  regs.assign(F->registers, 0);
  obs.frame(0, F->registers);
  std::uint32_t last = P.segment_block[0][0];
  if (options.record_path) t.path.push_back(BlockId{last});

  const std::uint64_t budget = options.step_budget;
  std::uint64_t steps = 0;
  std::size_t next_bit = 0;

  auto move_to = [&](std::uint32_t k, std::uint32_t block) -> EdgeId {
    const EdgeId e = P.out_edges[P.out_begin[last] + k];
    t.edge_hits[e] = 1;
    last = block;
    if (options.record_path) t.path.push_back(BlockId{block});
    return e;
  };
  auto finish = [&](Outcome o) {
    t.outcome = o;
    t.steps = steps;
  };
  auto operand = [&](bool imm, std::int64_t v) { return imm ? v : regs[base + v]; };

  for (;;) {
    const Segment& s = F->segments[seg];
    for (std::uint32_t i = s.begin; i < s.end; ++i) {
      if (++steps > budget) return finish(Outcome::BudgetExceeded);
      const Inst& in = F->code[i];
      const std::size_t dst = base + in.dst;
      switch (in.op) {
        case Op::Input:
          regs[dst] = in.a < static_cast<std::int64_t>(input.size()) ? input[in.a] : 0;
          obs.input(static_cast<std::uint32_t>(dst), static_cast<std::uint32_t>(in.a));
          break;
        case Op::Copy: {
          const std::int64_t av = operand(in.a_imm, in.a);
          obs.assign(in, base, av, 0);
          regs[dst] = av;
          break;
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Eq:
        case Op::Ne:
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: {
          const std::int64_t av = operand(in.a_imm, in.a);
          const std::int64_t bv = operand(in.b_imm, in.b);
          obs.assign(in, base, av, bv);
          regs[dst] = binary(in.op, av, bv);
          break;
        }
        case Op::FCall: {
          const bool inject = next_bit < errors.size() && errors[next_bit] != 0;
          ++next_bit;
          const PointInfo& p = P.points[in.a];
          regs[dst] = inject ? p.err : p.ok;
          t.encounters.push_back({static_cast<std::uint32_t>(in.a), ctx, inject});
          obs.concrete(static_cast<std::uint32_t>(dst));
          break;
        }
        case Op::Handle:
          if (in.a == static_cast<std::int64_t>(HandlerKind::Exit)) return finish(Outcome::Exit);
          break;
        case Op::CrashIf:
          if (regs[base + in.a] != 0) {
            t.bug = static_cast<std::uint32_t>(in.b);
            t.crash_block = BlockId{last};
            return finish(Outcome::Crash);
          }
          break;
      }
    }
    if (++steps > budget) return finish(Outcome::BudgetExceeded);

    if (s.is_call) {
      if (frames.size() >= kMaxFrames) return finish(Outcome::BudgetExceeded);
      std::uint32_t child = ctx;
      if (!summarized) {
        child = P.call_child[ctx][seg];
        const bool deep = P.truncated[child] != 0;
        move_to(0, deep ? P.summary_block[child] : P.segment_block[child][0]);
      }
      frames.push_back({fn, ctx, seg, base, s.call_dst, summarized});
      summarized = summarized || P.truncated[child] != 0;
      base += F->registers;
      fn = s.callee;
      ctx = child;
      seg = 0;
      F = &P.functions[fn];
      if (regs.size() < base + F->registers) regs.resize(base + F->registers);
      std::fill(regs.begin() + base, regs.begin() + base + F->registers, 0);
      obs.frame(base, F->registers);
      continue;
    }

    switch (s.term) {
      case TermKind::Jump: {
        const std::uint32_t target = F->targets[s.targets_begin];
        if (!summarized) move_to(0, P.segment_block[ctx][target]);
        seg = target;
        break;
      }
      case TermKind::Branch: {
        const std::int64_t v = regs[base + s.reg];
        const std::uint32_t k = v != 0 ? 0 : 1;
        const std::uint32_t target = F->targets[s.targets_begin + k];
        EdgeId e = kNone;
        if (!summarized) e = move_to(k, P.segment_block[ctx][target]);
        obs.branch(base + s.reg, v, k, e);
        seg = target;
        break;
      }
      case TermKind::Switch: {
        const std::int64_t v = regs[base + s.reg];
        const std::uint32_t n = s.targets_end - s.targets_begin;
        std::uint32_t k = n - 1;
        for (std::uint32_t i = 0; i + 1 < n; ++i)
          if (F->case_values[s.targets_begin + i] == v) {
            k = i;
            break;
          }
        const std::uint32_t target = F->targets[s.targets_begin + k];
        EdgeId e = kNone;
        if (!summarized) e = move_to(k, P.segment_block[ctx][target]);
        obs.dispatch(base + s.reg, v,
                     std::span<const std::int64_t>(F->case_values.data() + s.targets_begin, n - 1),
                     k, e);
        seg = target;
        break;
      }
      case TermKind::Ret: {
        if (frames.empty()) return finish(Outcome::Ok);
        const std::int64_t value = s.reg == kNone ? 0 : regs[base + s.reg];
        const std::uint32_t src = s.reg == kNone ? kNone : base + s.reg;
        const Frame caller = frames.back();
        frames.pop_back();
        fn = caller.function;
        ctx = caller.context;
        seg = caller.segment + 1;
        base = caller.base;
        summarized = caller.summarized;
        F = &P.functions[fn];
        if (caller.ret_dst != kNone) {
          regs[base + caller.ret_dst] = value;
          if (src == kNone) obs.concrete(base + caller.ret_dst);
          else obs.returned(base + caller.ret_dst, src);
        }
        if (!summarized) move_to(0, P.segment_block[ctx][seg]);
        break;
      }
      case TermKind::Halt:
        return finish(Outcome::Ok);
      case TermKind::Crash:
        t.bug = s.bug;
        t.crash_block = BlockId{last};
        return finish(Outcome::Crash);
    }
  }
}

}  // namespace errfuzz::detail
