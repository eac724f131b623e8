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

#include "errfuzz/symbolic.hpp"

#include <algorithm>

#include "interp.hpp"

namespace errfuzz {

ByteConstraint SymbolicTrace::conjunction() const {
  ByteConstraint out;
  for (const auto& c : conditions) out.conjoin(c.constraint);
  return out;
}

namespace {

struct SymValue {
  enum class Kind : std::uint8_t { Concrete, Linear, Compare, Opaque };
  Kind kind = Kind::Concrete;
  LinearExpr linear;               // Linear
  Atom atom;                       // Compare: value is atom truth
  std::vector<std::uint32_t> bytes;  // Opaque: input bytes it depends on
};

class SymbolicObserver {
 public:
  SymbolicObserver(std::span<const std::uint8_t> input, std::vector<PathCondition>& out)
      : input_(input), out_(out) {}

  void frame(std::size_t base, std::size_t registers) {
    if (values_.size() < base + registers) values_.resize(base + registers);
    for (std::size_t i = base; i < base + registers; ++i) values_[i] = SymValue{};
  }

  void input(std::uint32_t dst, std::uint32_t offset) {
    SymValue v;
    v.kind = SymValue::Kind::Linear;
    v.linear = LinearExpr::byte(offset);
    values_[dst] = std::move(v);
  }

  void concrete(std::uint32_t dst) { values_[dst] = SymValue{}; }
  void returned(std::uint32_t dst, std::uint32_t src) { values_[dst] = values_[src]; }

  void assign(const detail::Inst& in, std::size_t base, std::int64_t av, std::int64_t bv) {
    const std::size_t dst = base + in.dst;
    SymValue a = operand(in.a_imm, in.a, base, av);
    if (in.op == detail::Op::Copy) {
      values_[dst] = std::move(a);
      return;
    }
    SymValue b = operand(in.b_imm, in.b, base, bv);
    values_[dst] = combine(in.op, a, b);
  }

  void branch(std::uint32_t reg, std::int64_t value, std::uint32_t, EdgeId edge) {
    const SymValue& v = values_[reg];
    ByteConstraint c;
    switch (v.kind) {
      case SymValue::Kind::Concrete: return;
      case SymValue::Kind::Compare:
        c.conjoin(value != 0 ? v.atom : v.atom.negated());
        break;
      case SymValue::Kind::Linear: {
        if (v.linear.is_constant()) return;
        auto atom = v.linear.compare(value != 0 ? Relation::Ne : Relation::Eq,
                                     LinearExpr::constant(0));
        if (!atom) return pin(bytes_of(v), edge);
        c.conjoin(std::move(*atom));
        break;
      }
      case SymValue::Kind::Opaque: return pin(v.bytes, edge);
    }
    out_.push_back({edge, std::move(c)});
  }

  void dispatch(std::uint32_t reg, std::int64_t, std::span<const std::int64_t> cases,
                std::uint32_t taken, EdgeId edge) {
    const SymValue& v = values_[reg];
    if (v.kind == SymValue::Kind::Concrete) return;
    if (v.kind == SymValue::Kind::Linear && v.linear.is_constant()) return;
    if (v.kind != SymValue::Kind::Linear) return pin(bytes_of(v), edge);
    ByteConstraint c;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (taken < cases.size() && i != taken) continue;
      const Relation rel = taken < cases.size() ? Relation::Eq : Relation::Ne;
      auto atom = v.linear.compare(rel, LinearExpr::constant(cases[i]));
      if (!atom) return pin(bytes_of(v), edge);
      c.conjoin(std::move(*atom));
    }
    if (c.atoms.empty()) return;
    out_.push_back({edge, std::move(c)});
  }

 private:
  static constexpr std::int64_t kLimit = std::int64_t{1} << 40;

  // Concrete operands become constants; out-of-range constants are left
  // concrete so they never enter an atom.
  SymValue operand(bool imm, std::int64_t reg, std::size_t base, std::int64_t value) const {
    if (!imm && values_[base + reg].kind != SymValue::Kind::Concrete) return values_[base + reg];
    SymValue out;
    if (value > kLimit || value < -kLimit) return out;
    out.kind = SymValue::Kind::Linear;
    out.linear = LinearExpr::constant(value);
    return out;
  }

  std::vector<std::uint32_t> bytes_of(const SymValue& v) const {
    std::vector<std::uint32_t> out;
    if (v.kind == SymValue::Kind::Linear)
      for (const auto& [off, c] : v.linear.terms()) out.push_back(off);
    if (v.kind == SymValue::Kind::Compare)
      for (const auto& t : v.atom.terms) out.push_back(t.offset);
    if (v.kind == SymValue::Kind::Opaque) out = v.bytes;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  SymValue opaque(const SymValue& a, const SymValue& b) const {
    SymValue out;
    out.kind = SymValue::Kind::Opaque;
    out.bytes = bytes_of(a);
    const auto more = bytes_of(b);
    out.bytes.insert(out.bytes.end(), more.begin(), more.end());
    std::sort(out.bytes.begin(), out.bytes.end());
    out.bytes.erase(std::unique(out.bytes.begin(), out.bytes.end()), out.bytes.end());
    if (out.bytes.empty()) out.kind = SymValue::Kind::Concrete;
    return out;
  }

  static bool in_range(const LinearExpr& e) {
    return e.fits_int32_coefficients() && e.constant_part() <= kLimit &&
           e.constant_part() >= -kLimit;
  }

  SymValue combine(detail::Op op, const SymValue& a, const SymValue& b) const {
    using K = SymValue::Kind;
    auto constant = [](const SymValue& v) {
      return v.kind == K::Concrete || (v.kind == K::Linear && v.linear.is_constant());
    };
    if (constant(a) && constant(b)) return SymValue{};
    const bool lin_a = a.kind == K::Linear;
    const bool lin_b = b.kind == K::Linear;
    if (!lin_a || !lin_b) return opaque(a, b);
    SymValue out;
    out.kind = K::Linear;
    switch (op) {
      case detail::Op::Add: out.linear = a.linear + b.linear; break;
      case detail::Op::Sub: out.linear = a.linear - b.linear; break;
      case detail::Op::Mul: {
        const LinearExpr* var = a.linear.is_constant() ? &b.linear : &a.linear;
        const LinearExpr* k = a.linear.is_constant() ? &a.linear : &b.linear;
        if (!k->is_constant() || k->constant_part() > INT32_MAX || k->constant_part() < INT32_MIN)
          return opaque(a, b);
        out.linear = var->scaled(k->constant_part());
        break;
      }
      default: {
        constexpr Relation rels[] = {Relation::Eq, Relation::Ne, Relation::Lt,
                                     Relation::Le, Relation::Gt, Relation::Ge};
        const auto rel = rels[static_cast<int>(op) - static_cast<int>(detail::Op::Eq)];
        auto atom = a.linear.compare(rel, b.linear);
        if (!atom) return opaque(a, b);
        out.kind = K::Compare;
        out.atom = std::move(*atom);
        return out;
      }
    }
    if (!in_range(out.linear)) return opaque(a, b);
    if (out.linear.is_constant()) return SymValue{};
    return out;
  }

  void pin(const std::vector<std::uint32_t>& bytes, EdgeId edge) {
    ByteConstraint c;
    for (std::uint32_t off : bytes) {
      Atom atom;
      atom.terms.push_back({off, 1});
      atom.rel = Relation::Eq;
      atom.rhs = input_byte(input_, off);
      atom.concretized = true;
      c.conjoin(std::move(atom));
    }
    if (!c.atoms.empty()) out_.push_back({edge, std::move(c)});
  }

  std::span<const std::uint8_t> input_;
  std::vector<PathCondition>& out_;
  std::vector<SymValue> values_;
};

}  // namespace

SymbolicTrace symbolic_trace(const Target& target, std::span<const std::uint8_t> input,
                             std::span<const std::uint8_t> errors, const ExecOptions& options) {
  SymbolicTrace out;
  SymbolicObserver obs(input, out.conditions);
  detail::interpret(target.machine().compiled(), input, errors, options, out.trace, obs);
  return out;
}

}  // namespace errfuzz
