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

#include <functional>
#include <map>
#include <set>

#include "cspforge/common/overloaded.hpp"
#include "cspforge/syntax/parser.hpp"

namespace cspforge::syntax {

namespace {

enum class NameKind { Constant, Variable, Array, Define, Process };

class Validator {
 public:
  explicit Validator(const ModelAst& ast) : ast_(ast) {}

  void run() {
    collect_names();
    for (const auto& v : ast_.variables) {
      for (const auto& e : v.init) check_constant_expr(*e);
      if (v.range) {
        check_constant_expr(*v.range->low);
        check_constant_expr(*v.range->high);
      }
    }
    for (const auto& d : ast_.defines) check_expr(*d.expr);
    check_define_cycles();
    auto events = ast_.events();
    events_.insert(events.begin(), events.end());
    for (const auto& d : ast_.defines) {
      if (events_.count(d.name)) {
        throw NameError(d.loc, "'" + d.name + "' is both a #define and an event name");
      }
    }
    for (const auto& p : ast_.processes) check_process(*p.body);
    for (const auto& a : ast_.asserts) check_assert(a);
  }

 private:
  const ModelAst& ast_;
  std::map<std::string, NameKind> names_;
  std::set<std::string> events_;
  std::set<std::string> processes_;

  void declare(const std::string& name, NameKind kind, SourceLoc loc) {
    if (!names_.emplace(name, kind).second) {
      throw NameError(loc, "duplicate declaration of '" + name + "'");
    }
  }

  void collect_names() {
    for (const auto& c : ast_.constants) declare(c.name, NameKind::Constant, c.loc);
    for (const auto& v : ast_.variables) {
      declare(v.name, v.is_array() ? NameKind::Array : NameKind::Variable, v.loc);
    }
    for (const auto& d : ast_.defines) declare(d.name, NameKind::Define, d.loc);
    for (const auto& p : ast_.processes) {
      declare(p.name, NameKind::Process, p.loc);
      processes_.insert(p.name);
    }
  }

  const NameKind* lookup(const std::string& name) const {
    auto it = names_.find(name);
    return it == names_.end() ? nullptr : &it->second;
  }

  void check_constant_expr(const Expr& e) {
    std::visit(overloaded{
                   [](const IntLit&) {},
                   [](const BoolLit&) {},
                   [&](const NameRef& n) {
                     const auto* k = lookup(n.name);
                     if (!k || *k != NameKind::Constant) {
                       throw NameError(e.loc, "'" + n.name +
                                                  "' is not a constant; variable initializers "
                                                  "and ranges may only use constants");
                     }
                   },
                   [&](const IndexRef& r) {
                     throw NameError(e.loc, "array element '" + r.name +
                                                "[...]' cannot appear in an initializer");
                   },
                   [&](const Unary& u) { check_constant_expr(*u.operand); },
                   [&](const Binary& b) {
                     check_constant_expr(*b.lhs);
                     check_constant_expr(*b.rhs);
                   },
               },
               e.node);
  }

  void check_expr(const Expr& e) {
    std::visit(overloaded{
                   [](const IntLit&) {},
                   [](const BoolLit&) {},
                   [&](const NameRef& n) {
                     const auto* k = lookup(n.name);
                     if (!k) throw NameError(e.loc, "undeclared identifier '" + n.name + "'");
                     if (*k == NameKind::Array) {
                       throw NameError(e.loc, "array '" + n.name + "' used without an index");
                     }
                     if (*k == NameKind::Process) {
                       throw NameError(e.loc, "process '" + n.name + "' used in an expression");
                     }
                   },
                   [&](const IndexRef& r) {
                     const auto* k = lookup(r.name);
                     if (!k) throw NameError(e.loc, "undeclared identifier '" + r.name + "'");
                     if (*k != NameKind::Array) {
                       throw NameError(e.loc, "'" + r.name + "' is not an array");
                     }
                     check_expr(*r.index);
                   },
                   [&](const Unary& u) { check_expr(*u.operand); },
                   [&](const Binary& b) {
                     check_expr(*b.lhs);
                     check_expr(*b.rhs);
                   },
               },
               e.node);
  }

  static void define_refs(const Expr& e, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const IntLit&) {},
                   [](const BoolLit&) {},
                   [&](const NameRef& n) { out.insert(n.name); },
                   [&](const IndexRef& r) { define_refs(*r.index, out); },
                   [&](const Unary& u) { define_refs(*u.operand, out); },
                   [&](const Binary& b) {
                     define_refs(*b.lhs, out);
                     define_refs(*b.rhs, out);
                   },
               },
               e.node);
  }

  void check_define_cycles() {
    std::map<std::string, int> state;  // 1 = on stack, 2 = done
    std::function<void(const DefineDecl&)> visit = [&](const DefineDecl& d) {
      state[d.name] = 1;
      std::set<std::string> refs;
      define_refs(*d.expr, refs);
      for (const auto& r : refs) {
        const auto* next = ast_.find_define(r);
        if (!next) continue;
        if (state[r] == 1) {
          throw NameError(d.loc, "#define '" + d.name + "' is defined in terms of itself");
        }
        if (state[r] == 0) visit(*next);
      }
      state[d.name] = 2;
    };
    for (const auto& d : ast_.defines) {
      if (state[d.name] == 0) visit(d);
    }
  }

  void check_assignment(const Assignment& a) {
    const auto* k = lookup(a.target);
    if (!k) throw NameError(a.loc, "assignment to undeclared variable '" + a.target + "'");
    if (*k != NameKind::Variable && *k != NameKind::Array) {
      throw NameError(a.loc, "'" + a.target + "' is not a variable and cannot be assigned");
    }
    if ((*k == NameKind::Array) != static_cast<bool>(a.index)) {
      throw NameError(a.loc, *k == NameKind::Array
                                 ? "array '" + a.target + "' assigned without an index"
                                 : "'" + a.target + "' is not an array");
    }
    if (a.index) check_expr(*a.index);
    check_expr(*a.value);
  }

  void check_process(const ProcessExpr& p) {
    std::visit(overloaded{
                   [](const Stop&) {},
                   [](const Skip&) {},
                   [&](const EventPrefix& e) {
                     if (e.guard) check_expr(*e.guard);
                     for (const auto& a : e.program) check_assignment(a);
                     check_process(*e.continuation);
                   },
                   [&](const ExternalChoice& c) {
                     check_process(*c.left);
                     check_process(*c.right);
                   },
                   [&](const IfElse& c) {
                     check_expr(*c.condition);
                     check_process(*c.then_branch);
                     check_process(*c.else_branch);
                   },
                   [&](const Sequential& c) {
                     check_process(*c.left);
                     check_process(*c.right);
                   },
                   [&](const ParallelSync& c) {
                     for (const auto& ev : c.alphabet) {
                       if (!events_.count(ev)) {
                         throw NameError(p.loc, "synchronisation event '" + ev +
                                                    "' never occurs in any process");
                       }
                     }
                     check_process(*c.left);
                     check_process(*c.right);
                   },
                   [&](const Interleave& c) {
                     check_process(*c.left);
                     check_process(*c.right);
                   },
                   [&](const ProcessCall& c) {
                     if (!processes_.count(c.name)) {
                       throw NameError(p.loc, "call to undefined process '" + c.name + "()'");
                     }
                   },
               },
               p.node);
  }

  void check_ltl(const LtlFormula& f) {
    std::visit(overloaded{
                   [](const LtlConst&) {},
                   [&](const LtlAtom& a) {
                     const auto* k = lookup(a.name);
                     bool ok = (k && *k == NameKind::Define) || events_.count(a.name);
                     if (!ok) {
                       throw NameError(f.loc, "LTL proposition '" + a.name +
                                                  "' is neither a #define nor an event");
                     }
                   },
                   [&](const LtlUnary& u) { check_ltl(*u.operand); },
                   [&](const LtlBinary& b) {
                     check_ltl(*b.lhs);
                     check_ltl(*b.rhs);
                   },
               },
               f.node);
  }

  void check_assert(const AssertDecl& a) {
    if (!processes_.count(a.process)) {
      throw NameError(a.loc, "assertion refers to undefined process '" + a.process + "'");
    }
    std::visit(overloaded{
                   [](const DeadlockFree&) {},
                   [&](const Reaches& r) {
                     const auto* pk = lookup(r.predicate);
                     if (!pk || *pk != NameKind::Define) throw UnknownPredicate(a.loc, r.predicate);
                   },
                   [&](const Ltl& l) { check_ltl(*l.formula); },
               },
               a.kind);
  }
};

}  // namespace

void validate_model(const ModelAst& ast) { Validator(ast).run(); }

}  // namespace cspforge::syntax
