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

#include "cspforge/syntax/printer.hpp"

#include "cspforge/common/overloaded.hpp"

namespace cspforge::syntax {

namespace {

constexpr int kUnaryPrec = 7;

int prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 3;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    default: return 6;
  }
}

const char* spelling(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return "||";
    case BinaryOp::And: return "&&";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    default: return "%";
  }
}

int expr_prec(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) return prec(b->op);
  if (std::holds_alternative<Unary>(e.node)) return kUnaryPrec;
  return kUnaryPrec + 1;
}

std::string expr_at(const Expr& e, int min_prec) {
  std::string s = render_expr(e);
  return expr_prec(e) < min_prec ? "(" + s + ")" : s;
}

// Process levels: 1 sequencing, 2 parallel/interleave, 3 choice, 4 prefix, 5 atom.
int proc_prec(const ProcessExpr& p) {
  return std::visit(overloaded{
                        [](const Sequential&) { return 1; },
                        [](const ParallelSync&) { return 2; },
                        [](const Interleave&) { return 2; },
                        [](const ExternalChoice&) { return 3; },
                        [](const EventPrefix&) { return 4; },
                        [](const auto&) { return 5; },
                    },
                    p.node);
}

std::string proc_at(const ProcessExpr& p, int min_prec) {
  std::string s = render_process(p);
  return proc_prec(p) < min_prec ? "(" + s + ")" : s;
}

std::string render_assignment(const Assignment& a) {
  std::string s = a.target;
  if (a.index) s += "[" + render_expr(*a.index) + "]";
  return s + " = " + render_expr(*a.value);
}

int ltl_prec(const LtlFormula& f) {
  if (const auto* b = std::get_if<LtlBinary>(&f.node)) {
    switch (b->op) {
      case LtlBinaryOp::Implies: return 1;
      case LtlBinaryOp::Or: return 2;
      case LtlBinaryOp::And: return 3;
      case LtlBinaryOp::Until: return 4;
    }
  }
  if (std::holds_alternative<LtlUnary>(f.node)) return 5;
  return 6;
}

std::string ltl_at(const LtlFormula& f, int min_prec) {
  std::string s = render_ltl(f);
  return ltl_prec(f) < min_prec ? "(" + s + ")" : s;
}

void flatten_choice(const ProcessExpr& p, std::vector<const ProcessExpr*>& out) {
  if (const auto* c = std::get_if<ExternalChoice>(&p.node)) {
    flatten_choice(*c->left, out);
    out.push_back(c->right.get());
  } else {
    out.push_back(&p);
  }
}

}  // namespace

std::string render_expr(const Expr& e) {
  return std::visit(
      overloaded{
          [](const IntLit& i) { return std::to_string(i.value); },
          [](const BoolLit& b) { return std::string(b.value ? "true" : "false"); },
          [](const NameRef& n) { return n.name; },
          [](const IndexRef& r) { return r.name + "[" + render_expr(*r.index) + "]"; },
          [](const Unary& u) {
            return std::string(u.op == UnaryOp::Not ? "!" : "-") +
                   expr_at(*u.operand, kUnaryPrec);
          },
          [](const Binary& b) {
            int p = prec(b.op);
            return expr_at(*b.lhs, p) + " " + spelling(b.op) + " " + expr_at(*b.rhs, p + 1);
          },
      },
      e.node);
}

std::string render_process(const ProcessExpr& p) {
  return std::visit(
      overloaded{
          [](const Stop&) { return std::string("Stop"); },
          [](const Skip&) { return std::string("Skip"); },
          [](const EventPrefix& e) {
            std::string s;
            if (e.guard) s += "[" + render_expr(*e.guard) + "] ";
            s += e.event;
            if (!e.program.empty()) {
              s += "{";
              for (std::size_t i = 0; i < e.program.size(); ++i) {
                if (i) s += "; ";
                s += render_assignment(e.program[i]);
              }
              s += "}";
            }
            return s + " -> " + proc_at(*e.continuation, 4);
          },
          [](const ExternalChoice& c) {
            return proc_at(*c.left, 3) + " [] " + proc_at(*c.right, 4);
          },
          [](const IfElse& c) {
            return "if (" + render_expr(*c.condition) + ") { " + render_process(*c.then_branch) +
                   " } else { " + render_process(*c.else_branch) + " }";
          },
          [](const Sequential& c) {
            return proc_at(*c.left, 1) + "; " + proc_at(*c.right, 2);
          },
          [](const ParallelSync& c) {
            std::string alpha;
            for (std::size_t i = 0; i < c.alphabet.size(); ++i) {
              if (i) alpha += ", ";
              alpha += c.alphabet[i];
            }
            return proc_at(*c.left, 2) + " ||{" + alpha + "} " + proc_at(*c.right, 3);
          },
          [](const Interleave& c) {
            return proc_at(*c.left, 2) + " ||| " + proc_at(*c.right, 3);
          },
          [](const ProcessCall& c) { return c.name + "()"; },
      },
      p.node);
}

std::string render_ltl(const LtlFormula& f) {
  return std::visit(
      overloaded{
          [](const LtlConst& c) { return std::string(c.value ? "true" : "false"); },
          [](const LtlAtom& a) { return a.name; },
          [](const LtlUnary& u) {
            const char* op = u.op == LtlUnaryOp::Not       ? "!"
                             : u.op == LtlUnaryOp::Next    ? "X "
                             : u.op == LtlUnaryOp::Finally ? "<>"
                                                           : "[]";
            return op + ltl_at(*u.operand, 5);
          },
          [](const LtlBinary& b) {
            switch (b.op) {
              case LtlBinaryOp::Implies:
                return ltl_at(*b.lhs, 2) + " -> " + ltl_at(*b.rhs, 1);
              case LtlBinaryOp::Or:
                return ltl_at(*b.lhs, 2) + " || " + ltl_at(*b.rhs, 3);
              case LtlBinaryOp::And:
                return ltl_at(*b.lhs, 3) + " && " + ltl_at(*b.rhs, 4);
              case LtlBinaryOp::Until:
                break;
            }
            return ltl_at(*b.lhs, 5) + " U " + ltl_at(*b.rhs, 4);
          },
      },
      f.node);
}

std::string render_assert(const AssertDecl& a) {
  std::string s = "#assert " + a.process;
  std::visit(overloaded{
                 [&](const DeadlockFree&) { s += " deadlockfree"; },
                 [&](const Reaches& r) { s += " reaches " + r.predicate; },
                 [&](const Ltl& l) { s += " |= " + render_ltl(*l.formula); },
             },
             a.kind);
  return s + ";";
}

std::string render_model(const ModelAst& m) {
  std::string out;
  for (const auto& c : m.constants) {
    out += "#define " + c.name + " " + std::to_string(c.value) + ";\n";
  }
  if (!m.constants.empty()) out += "\n";
  for (const auto& v : m.variables) {
    out += "var " + v.name;
    if (v.array_size) out += "[" + std::to_string(*v.array_size) + "]";
    if (v.range) {
      out += " : {" + render_expr(*v.range->low) + ".." + render_expr(*v.range->high) + "}";
    }
    if (v.is_array() && !v.init.empty()) {
      out += " = [";
      for (std::size_t i = 0; i < v.init.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(*v.init[i]);
      }
      out += "]";
    } else if (!v.is_array() && !v.init.empty()) {
      out += " = " + render_expr(*v.init.front());
    }
    out += ";\n";
  }
  if (!m.variables.empty()) out += "\n";
  for (const auto& d : m.defines) {
    out += "#define " + d.name + " (" + render_expr(*d.expr) + ");\n";
  }
  if (!m.defines.empty()) out += "\n";
  for (const auto& p : m.processes) {
    std::vector<const ProcessExpr*> alts;
    flatten_choice(*p.body, alts);
    out += p.name + "() = ";
    if (alts.size() == 1) {
      out += render_process(*p.body);
    } else {
      for (std::size_t i = 0; i < alts.size(); ++i) {
        if (i) out += "\n\t[] ";
        out += proc_at(*alts[i], 4);
      }
    }
    out += ";\n";
  }
  if (!m.processes.empty() && !m.asserts.empty()) out += "\n";
  for (const auto& a : m.asserts) out += render_assert(a) + "\n";
  return out;
}

}  // namespace cspforge::syntax
