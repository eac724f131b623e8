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

// The target IR: a small imperative language with fallible call sites.
// See docs/ir.md for the grammar; serialize() produces the canonical form
// and parse_program(serialize(p)) == p.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace errfuzz {

enum class BinOp : std::uint8_t { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(BinOp op);
inline bool is_comparison(BinOp op) { return op >= BinOp::Eq; }

enum class HandlerKind : std::uint8_t {
  Return, Break, Continue, Goto, Log, Exit, Close, Delete, Free
};

inline constexpr HandlerKind kAllHandlerKinds[] = {
    HandlerKind::Return, HandlerKind::Break, HandlerKind::Continue,
    HandlerKind::Goto,   HandlerKind::Log,   HandlerKind::Exit,
    HandlerKind::Close,  HandlerKind::Delete, HandlerKind::Free};

std::string_view to_string(HandlerKind kind);
std::optional<HandlerKind> handler_kind_from(std::string_view name);

enum class ReturnKind : std::uint8_t { PointerLike, IntegerLike };

std::string_view to_string(ReturnKind kind);
// Name-based guess used when a call site carries no `:ptr` / `:int` suffix.
ReturnKind guess_return_kind(std::string_view callee);

// Value a fallible call hands back when it succeeds or when a fault is
// injected, by return kind.
std::int64_t ok_value(ReturnKind kind);
std::int64_t err_value(ReturnKind kind);

struct Operand {
  std::variant<std::string, std::int64_t> value;  // register or immediate

  bool is_register() const { return std::holds_alternative<std::string>(value); }
  const std::string& reg() const { return std::get<std::string>(value); }
  std::int64_t imm() const { return std::get<std::int64_t>(value); }
  bool operator==(const Operand&) const = default;
};

struct ReadInput {
  std::string dst;
  std::uint32_t offset = 0;
  bool operator==(const ReadInput&) const = default;
};

struct Assign {
  std::string dst;
  Operand lhs;
  std::optional<BinOp> op;  // absent for a plain copy
  Operand rhs;              // unused without op
  bool operator==(const Assign&) const = default;
};

struct FallibleCall {
  std::string dst;
  std::string callee;
  std::optional<ReturnKind> kind;  // explicit `:ptr` / `:int` suffix
  std::string label;               // error-point label, unique program-wide

  ReturnKind return_kind() const { return kind ? *kind : guess_return_kind(callee); }
  bool operator==(const FallibleCall&) const = default;
};

struct Call {
  std::optional<std::string> dst;
  std::string callee;
  bool operator==(const Call&) const = default;
};

struct HandlerOp {
  HandlerKind kind = HandlerKind::Log;
  bool operator==(const HandlerOp&) const = default;
};

struct CrashIf {
  std::string label;
  std::string reg;
  bool operator==(const CrashIf&) const = default;
};

using Instruction = std::variant<ReadInput, Assign, FallibleCall, Call, HandlerOp, CrashIf>;

struct Jump {
  std::string target;
  bool operator==(const Jump&) const = default;
};

struct Branch {
  std::string reg;
  std::string then_target;
  std::string else_target;
  bool operator==(const Branch&) const = default;
};

struct Switch {
  std::string reg;
  std::vector<std::pair<std::int64_t, std::string>> cases;
  std::string default_target;
  bool operator==(const Switch&) const = default;
};

struct Return {
  std::optional<std::string> reg;
  bool operator==(const Return&) const = default;
};

struct Halt {
  bool operator==(const Halt&) const = default;
};

struct Crash {
  std::string label;
  bool operator==(const Crash&) const = default;
};

using Terminator = std::variant<Jump, Branch, Switch, Return, Halt, Crash>;

struct Block {
  std::string label;
  std::vector<Instruction> body;
  Terminator term;
  int line = 0;  // source line of the `block` header, 0 when built in code

  bool operator==(const Block& other) const {
    return label == other.label && body == other.body && term == other.term;
  }
};

struct Function {
  std::string name;
  std::vector<Block> blocks;  // blocks.front() is the function entry

  const Block* find_block(std::string_view label) const;
  std::optional<std::size_t> block_index(std::string_view label) const;
  bool operator==(const Function&) const = default;
};

struct Program {
  std::string entry = "main";
  std::vector<Function> functions;

  const Function* find_function(std::string_view name) const;
  std::optional<std::size_t> function_index(std::string_view name) const;
  const Function& entry_function() const;
  bool operator==(const Program&) const = default;
};

// Successor labels of a terminator in branch order (then/else, cases then
// default).
std::vector<std::string> successors(const Terminator& term);

// Parses and validates. Syntax errors throw ParseError with line/column;
// structural errors (duplicate or undefined labels, a missing entry
// function, ...) throw ValidationError naming the offending label.
Program parse_program(std::string_view text);

// Structural checks shared by the parser and programmatic builders.
void validate(const Program& program);

std::string serialize(const Program& program);
std::string serialize(const Instruction& inst);
std::string serialize(const Terminator& term);

}  // namespace errfuzz
