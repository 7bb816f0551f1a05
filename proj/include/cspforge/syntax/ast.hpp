/*
 * Copyright 2026 The cspforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cspforge::syntax {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class UnaryOp { Not, Negate };
enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };

struct IntLit {
  std::int64_t value = 0;
};
struct BoolLit {
  bool value = false;
};
/// Reference to a constant, scalar variable or #define predicate.
struct NameRef {
  std::string name;
};
/// Array element `name[index]`.
struct IndexRef {
  std::string name;
  ExprPtr index;
};
struct Unary {
  UnaryOp op;
  ExprPtr operand;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Expr {
  std::variant<IntLit, BoolLit, NameRef, IndexRef, Unary, Binary> node;
  SourceLoc loc;
};

// Structural equality; source locations are ignored.
bool operator==(const Expr& a, const Expr& b);
bool same_expr(const ExprPtr& a, const ExprPtr& b);

ExprPtr make_int(std::int64_t v, SourceLoc loc = {});
ExprPtr make_bool(bool v, SourceLoc loc = {});
ExprPtr make_name(std::string name, SourceLoc loc = {});
ExprPtr make_index(std::string name, ExprPtr index, SourceLoc loc = {});
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceLoc loc = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc = {});

/// `target = value;` or `target[index] = value;` inside an event program.
struct Assignment {
  std::string target;
  ExprPtr index;  // null for scalar targets
  ExprPtr value;
  SourceLoc loc;
};
bool operator==(const Assignment& a, const Assignment& b);

// ---------------------------------------------------------------------------
// Process expressions
// ---------------------------------------------------------------------------

struct ProcessExpr;
using ProcPtr = std::shared_ptr<const ProcessExpr>;

struct Stop {};
struct Skip {};
/// `[guard] event{program} -> continuation`. A null guard means `true`.
struct EventPrefix {
  ExprPtr guard;
  std::string event;
  std::vector<Assignment> program;
  ProcPtr continuation;
};
struct ExternalChoice {
  ProcPtr left;
  ProcPtr right;
};
struct IfElse {
  ExprPtr condition;
  ProcPtr then_branch;
  ProcPtr else_branch;
};
struct Sequential {
  ProcPtr left;
  ProcPtr right;
};
/// `left ||{alphabet} right`; the alphabet is kept sorted and unique.
struct ParallelSync {
  ProcPtr left;
  ProcPtr right;
  std::vector<std::string> alphabet;
};
struct Interleave {
  ProcPtr left;
  ProcPtr right;
};
struct ProcessCall {
  std::string name;
};

struct ProcessExpr {
  std::variant<Stop, Skip, EventPrefix, ExternalChoice, IfElse, Sequential,
               ParallelSync, Interleave, ProcessCall>
      node;
  SourceLoc loc;
};

bool operator==(const ProcessExpr& a, const ProcessExpr& b);
bool same_process(const ProcPtr& a, const ProcPtr& b);

ProcPtr make_stop(SourceLoc loc = {});
ProcPtr make_skip(SourceLoc loc = {});
ProcPtr make_prefix(ExprPtr guard, std::string event,
                    std::vector<Assignment> program, ProcPtr continuation,
                    SourceLoc loc = {});
ProcPtr make_choice(ProcPtr left, ProcPtr right, SourceLoc loc = {});
ProcPtr make_if(ExprPtr cond, ProcPtr then_branch, ProcPtr else_branch,
                SourceLoc loc = {});
ProcPtr make_seq(ProcPtr left, ProcPtr right, SourceLoc loc = {});
ProcPtr make_parallel(ProcPtr left, ProcPtr right,
                      std::vector<std::string> alphabet, SourceLoc loc = {});
ProcPtr make_interleave(ProcPtr left, ProcPtr right, SourceLoc loc = {});
ProcPtr make_call(std::string name, SourceLoc loc = {});

// ---------------------------------------------------------------------------
// LTL formulas
// ---------------------------------------------------------------------------

struct LtlFormula;
using LtlPtr = std::shared_ptr<const LtlFormula>;

enum class LtlUnaryOp { Not, Next, Finally, Globally };
enum class LtlBinaryOp { And, Or, Implies, Until };

struct LtlConst {
  bool value = true;
};
/// A #define name (state proposition) or an event name (event proposition).
struct LtlAtom {
  std::string name;
};
struct LtlUnary {
  LtlUnaryOp op;
  LtlPtr operand;
};
struct LtlBinary {
  LtlBinaryOp op;
  LtlPtr lhs;
  LtlPtr rhs;
};

struct LtlFormula {
  std::variant<LtlConst, LtlAtom, LtlUnary, LtlBinary> node;
  SourceLoc loc;
};

bool operator==(const LtlFormula& a, const LtlFormula& b);
bool same_ltl(const LtlPtr& a, const LtlPtr& b);

LtlPtr make_ltl_const(bool v, SourceLoc loc = {});
LtlPtr make_ltl_atom(std::string name, SourceLoc loc = {});
LtlPtr make_ltl_unary(LtlUnaryOp op, LtlPtr operand, SourceLoc loc = {});
LtlPtr make_ltl_binary(LtlBinaryOp op, LtlPtr lhs, LtlPtr rhs, SourceLoc loc = {});

/// Temporal + boolean nesting depth; atoms and constants have depth 0.
int ltl_depth(const LtlFormula& f);

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

struct ConstDecl {
  std::string name;
  std::int64_t value = 0;
  SourceLoc loc;
};

struct VarRange {
  ExprPtr low;
  ExprPtr high;
};

/// `var name : {lo..hi} = init;` or `var name[size] = [v0, ...];`.
/// Arrays with an empty initializer start zero-filled.
struct VarDecl {
  std::string name;
  std::optional<std::int64_t> array_size;
  std::vector<ExprPtr> init;
  std::optional<VarRange> range;
  SourceLoc loc;

  bool is_array() const { return array_size.has_value(); }
};

struct DefineDecl {
  std::string name;
  ExprPtr expr;
  SourceLoc loc;
};

struct ProcessDef {
  std::string name;
  ProcPtr body;
  SourceLoc loc;
};

struct DeadlockFree {};
struct Reaches {
  std::string predicate;
};
struct Ltl {
  LtlPtr formula;
};

struct AssertDecl {
  std::string process;
  std::variant<DeadlockFree, Reaches, Ltl> kind;
  SourceLoc loc;
};

enum class AssertKind { DeadlockFree, Reaches, Ltl };
AssertKind assert_kind(const AssertDecl& a);

bool operator==(const ConstDecl& a, const ConstDecl& b);
bool operator==(const VarDecl& a, const VarDecl& b);
bool operator==(const DefineDecl& a, const DefineDecl& b);
bool operator==(const ProcessDef& a, const ProcessDef& b);
bool operator==(const AssertDecl& a, const AssertDecl& b);

struct ModelAst {
  std::vector<ConstDecl> constants;
  std::vector<VarDecl> variables;
  std::vector<DefineDecl> defines;
  std::vector<ProcessDef> processes;
  std::vector<AssertDecl> asserts;

  const ConstDecl* find_constant(std::string_view name) const;
  const VarDecl* find_variable(std::string_view name) const;
  const DefineDecl* find_define(std::string_view name) const;
  const ProcessDef* find_process(std::string_view name) const;

  /// Event names occurring syntactically anywhere in process bodies, sorted.
  std::vector<std::string> events() const;
};

bool operator==(const ModelAst& a, const ModelAst& b);

}  // namespace cspforge::syntax
