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

#include "cspforge/syntax/ast.hpp"

#include <algorithm>
#include <set>

#include "cspforge/common/overloaded.hpp"

namespace cspforge::syntax {

namespace {

using cspforge::overloaded;

bool same_program(const std::vector<Assignment>& a,
                  const std::vector<Assignment>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

bool same_init(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), same_expr);
}

void collect_events(const ProcessExpr& p, std::set<std::string>& out) {
  std::visit(overloaded{
                 [](const Stop&) {},
                 [](const Skip&) {},
                 [&](const EventPrefix& e) {
                   out.insert(e.event);
                   collect_events(*e.continuation, out);
                 },
                 [&](const ExternalChoice& c) {
                   collect_events(*c.left, out);
                   collect_events(*c.right, out);
                 },
                 [&](const IfElse& c) {
                   collect_events(*c.then_branch, out);
                   collect_events(*c.else_branch, out);
                 },
                 [&](const Sequential& c) {
                   collect_events(*c.left, out);
                   collect_events(*c.right, out);
                 },
                 [&](const ParallelSync& c) {
                   collect_events(*c.left, out);
                   collect_events(*c.right, out);
                 },
                 [&](const Interleave& c) {
                   collect_events(*c.left, out);
                   collect_events(*c.right, out);
                 },
                 [](const ProcessCall&) {},
             },
             p.node);
}

template <class T>
const T* find_named(const std::vector<T>& items, std::string_view name) {
  for (const auto& item : items) {
    if (item.name == name) return &item;
  }
  return nullptr;
}

}  // namespace

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const IntLit& x) { return x.value == std::get<IntLit>(b.node).value; },
          [&](const BoolLit& x) { return x.value == std::get<BoolLit>(b.node).value; },
          [&](const NameRef& x) { return x.name == std::get<NameRef>(b.node).name; },
          [&](const IndexRef& x) {
            const auto& y = std::get<IndexRef>(b.node);
            return x.name == y.name && same_expr(x.index, y.index);
          },
          [&](const Unary& x) {
            const auto& y = std::get<Unary>(b.node);
            return x.op == y.op && same_expr(x.operand, y.operand);
          },
          [&](const Binary& x) {
            const auto& y = std::get<Binary>(b.node);
            return x.op == y.op && same_expr(x.lhs, y.lhs) && same_expr(x.rhs, y.rhs);
          },
      },
      a.node);
}

bool operator==(const Assignment& a, const Assignment& b) {
  return a.target == b.target && same_expr(a.index, b.index) &&
         same_expr(a.value, b.value);
}

ExprPtr make_int(std::int64_t v, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{IntLit{v}, loc});
}
ExprPtr make_bool(bool v, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{BoolLit{v}, loc});
}
ExprPtr make_name(std::string name, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{NameRef{std::move(name)}, loc});
}
ExprPtr make_index(std::string name, ExprPtr index, SourceLoc loc) {
  return std::make_shared<const Expr>(
      Expr{IndexRef{std::move(name), std::move(index)}, loc});
}
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceLoc loc) {
  return std::make_shared<const Expr>(Expr{Unary{op, std::move(operand)}, loc});
}
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc) {
  return std::make_shared<const Expr>(
      Expr{Binary{op, std::move(lhs), std::move(rhs)}, loc});
}

bool same_process(const ProcPtr& a, const ProcPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const ProcessExpr& a, const ProcessExpr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [](const Stop&) { return true; },
          [](const Skip&) { return true; },
          [&](const EventPrefix& x) {
            const auto& y = std::get<EventPrefix>(b.node);
            return x.event == y.event && same_expr(x.guard, y.guard) &&
                   same_program(x.program, y.program) &&
                   same_process(x.continuation, y.continuation);
          },
          [&](const ExternalChoice& x) {
            const auto& y = std::get<ExternalChoice>(b.node);
            return same_process(x.left, y.left) && same_process(x.right, y.right);
          },
          [&](const IfElse& x) {
            const auto& y = std::get<IfElse>(b.node);
            return same_expr(x.condition, y.condition) &&
                   same_process(x.then_branch, y.then_branch) &&
                   same_process(x.else_branch, y.else_branch);
          },
          [&](const Sequential& x) {
            const auto& y = std::get<Sequential>(b.node);
            return same_process(x.left, y.left) && same_process(x.right, y.right);
          },
          [&](const ParallelSync& x) {
            const auto& y = std::get<ParallelSync>(b.node);
            return x.alphabet == y.alphabet && same_process(x.left, y.left) &&
                   same_process(x.right, y.right);
          },
          [&](const Interleave& x) {
            const auto& y = std::get<Interleave>(b.node);
            return same_process(x.left, y.left) && same_process(x.right, y.right);
          },
          [&](const ProcessCall& x) {
            return x.name == std::get<ProcessCall>(b.node).name;
          },
      },
      a.node);
}

ProcPtr make_stop(SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(ProcessExpr{Stop{}, loc});
}
ProcPtr make_skip(SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(ProcessExpr{Skip{}, loc});
}
ProcPtr make_prefix(ExprPtr guard, std::string event,
                    std::vector<Assignment> program, ProcPtr continuation,
                    SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(
      ProcessExpr{EventPrefix{std::move(guard), std::move(event),
                              std::move(program), std::move(continuation)},
                  loc});
}
ProcPtr make_choice(ProcPtr left, ProcPtr right, SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(
      ProcessExpr{ExternalChoice{std::move(left), std::move(right)}, loc});
}
ProcPtr make_if(ExprPtr cond, ProcPtr then_branch, ProcPtr else_branch,
                SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(ProcessExpr{
      IfElse{std::move(cond), std::move(then_branch), std::move(else_branch)},
      loc});
}
ProcPtr make_seq(ProcPtr left, ProcPtr right, SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(
      ProcessExpr{Sequential{std::move(left), std::move(right)}, loc});
}
ProcPtr make_parallel(ProcPtr left, ProcPtr right,
                      std::vector<std::string> alphabet, SourceLoc loc) {
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  return std::make_shared<const ProcessExpr>(ProcessExpr{
      ParallelSync{std::move(left), std::move(right), std::move(alphabet)}, loc});
}
ProcPtr make_interleave(ProcPtr left, ProcPtr right, SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(
      ProcessExpr{Interleave{std::move(left), std::move(right)}, loc});
}
ProcPtr make_call(std::string name, SourceLoc loc) {
  return std::make_shared<const ProcessExpr>(
      ProcessExpr{ProcessCall{std::move(name)}, loc});
}

bool same_ltl(const LtlPtr& a, const LtlPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const LtlFormula& a, const LtlFormula& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const LtlConst& x) { return x.value == std::get<LtlConst>(b.node).value; },
          [&](const LtlAtom& x) { return x.name == std::get<LtlAtom>(b.node).name; },
          [&](const LtlUnary& x) {
            const auto& y = std::get<LtlUnary>(b.node);
            return x.op == y.op && same_ltl(x.operand, y.operand);
          },
          [&](const LtlBinary& x) {
            const auto& y = std::get<LtlBinary>(b.node);
            return x.op == y.op && same_ltl(x.lhs, y.lhs) && same_ltl(x.rhs, y.rhs);
          },
      },
      a.node);
}

LtlPtr make_ltl_const(bool v, SourceLoc loc) {
  return std::make_shared<const LtlFormula>(LtlFormula{LtlConst{v}, loc});
}
LtlPtr make_ltl_atom(std::string name, SourceLoc loc) {
  return std::make_shared<const LtlFormula>(LtlFormula{LtlAtom{std::move(name)}, loc});
}
LtlPtr make_ltl_unary(LtlUnaryOp op, LtlPtr operand, SourceLoc loc) {
  return std::make_shared<const LtlFormula>(
      LtlFormula{LtlUnary{op, std::move(operand)}, loc});
}
LtlPtr make_ltl_binary(LtlBinaryOp op, LtlPtr lhs, LtlPtr rhs, SourceLoc loc) {
  return std::make_shared<const LtlFormula>(
      LtlFormula{LtlBinary{op, std::move(lhs), std::move(rhs)}, loc});
}

int ltl_depth(const LtlFormula& f) {
  return std::visit(overloaded{
                        [](const LtlConst&) { return 0; },
                        [](const LtlAtom&) { return 0; },
                        [](const LtlUnary& u) { return 1 + ltl_depth(*u.operand); },
                        [](const LtlBinary& b) {
                          return 1 + std::max(ltl_depth(*b.lhs), ltl_depth(*b.rhs));
                        },
                    },
                    f.node);
}

AssertKind assert_kind(const AssertDecl& a) {
  return static_cast<AssertKind>(a.kind.index());
}

bool operator==(const ConstDecl& a, const ConstDecl& b) {
  return a.name == b.name && a.value == b.value;
}

bool operator==(const VarDecl& a, const VarDecl& b) {
  if (a.name != b.name || a.array_size != b.array_size || !same_init(a.init, b.init))
    return false;
  if (a.range.has_value() != b.range.has_value()) return false;
  if (!a.range) return true;
  return same_expr(a.range->low, b.range->low) && same_expr(a.range->high, b.range->high);
}

bool operator==(const DefineDecl& a, const DefineDecl& b) {
  return a.name == b.name && same_expr(a.expr, b.expr);
}

bool operator==(const ProcessDef& a, const ProcessDef& b) {
  return a.name == b.name && same_process(a.body, b.body);
}

bool operator==(const AssertDecl& a, const AssertDecl& b) {
  if (a.process != b.process || a.kind.index() != b.kind.index()) return false;
  if (const auto* r = std::get_if<Reaches>(&a.kind)) {
    return r->predicate == std::get<Reaches>(b.kind).predicate;
  }
  if (const auto* l = std::get_if<Ltl>(&a.kind)) {
    return same_ltl(l->formula, std::get<Ltl>(b.kind).formula);
  }
  return true;
}

bool operator==(const ModelAst& a, const ModelAst& b) {
  return a.constants == b.constants && a.variables == b.variables &&
         a.defines == b.defines && a.processes == b.processes &&
         a.asserts == b.asserts;
}

const ConstDecl* ModelAst::find_constant(std::string_view name) const {
  return find_named(constants, name);
}
const VarDecl* ModelAst::find_variable(std::string_view name) const {
  return find_named(variables, name);
}
const DefineDecl* ModelAst::find_define(std::string_view name) const {
  return find_named(defines, name);
}
const ProcessDef* ModelAst::find_process(std::string_view name) const {
  return find_named(processes, name);
}

std::vector<std::string> ModelAst::events() const {
  std::set<std::string> out;
  for (const auto& p : processes) collect_events(*p.body, out);
  return {out.begin(), out.end()};
}

}  // namespace cspforge::syntax
