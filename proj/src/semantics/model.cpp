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

#include "cspforge/semantics/model.hpp"

#include <algorithm>

#include "cspforge/common/overloaded.hpp"
#include "cspforge/syntax/printer.hpp"

namespace cspforge::semantics {

using namespace syntax;

namespace {

std::string join_trace(const std::vector<std::string>& trace) {
  std::string s = "<init";
  for (const auto& e : trace) s += " -> " + e;
  return s + ">";
}

void overflow_check(bool overflow, const Expr& e) {
  if (overflow) throw EvaluationError("integer overflow in '" + render_expr(e) + "'");
}

}  // namespace

EvaluationError::EvaluationError(const std::string& message, std::vector<std::string> trace)
    : Error("EvaluationError", message + " after " + join_trace(trace)),
      reason_(message),
      trace_(std::move(trace)) {}

CompiledModel::CompiledModel(ModelAst ast) : ast_(std::move(ast)) {
  std::int64_t max_const = 0;
  for (const auto& c : ast_.constants) {
    bindings_[c.name] = Binding{BindingKind::Constant, c.value};
    max_const = std::max(max_const, c.value);
  }
  for (const auto& d : ast_.defines) {
    Binding b{BindingKind::Define};
    b.expr = d.expr.get();
    bindings_[d.name] = b;
  }
  for (const auto& var : ast_.variables) {
    VarSlot slot;
    slot.name = var.name;
    slot.offset = width_;
    slot.array = var.is_array();
    slot.size = var.is_array() ? static_cast<std::size_t>(*var.array_size) : 1;
    width_ += slot.size;

    std::vector<std::int64_t> inits;
    for (const auto& e : var.init) inits.push_back(const_eval(*e));
    if (var.range) {
      slot.low = const_eval(*var.range->low);
      slot.high = const_eval(*var.range->high);
      if (slot.low > slot.high) {
        throw EvaluationError("variable '" + var.name + "' has an empty range");
      }
    } else {
      // Undeclared ranges span zero, every constant and the initial values.
      slot.low = 0;
      slot.high = max_const;
      for (auto x : inits) {
        slot.low = std::min(slot.low, x);
        slot.high = std::max(slot.high, x);
      }
    }
    Binding b{BindingKind::Variable};
    b.slot = slots_.size();
    bindings_[var.name] = b;
    slots_.push_back(slot);
  }
}

std::int64_t CompiledModel::const_eval(const Expr& e) const {
  Valuation none;
  return eval(e, none);
}

const CompiledModel::Binding& CompiledModel::lookup(const std::string& name) const {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw EvaluationError("unresolved name '" + name + "'");
  return it->second;
}

Valuation CompiledModel::initial_valuation() const {
  Valuation v(width_, 0);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto& slot = slots_[i];
    const auto& decl = ast_.variables[i];
    for (std::size_t k = 0; k < decl.init.size(); ++k) {
      v[slot.offset + k] = const_eval(*decl.init[k]);
    }
    for (std::size_t k = 0; k < slot.size; ++k) {
      auto x = v[slot.offset + k];
      if (x < slot.low || x > slot.high) {
        throw EvaluationError("initial value " + std::to_string(x) + " of '" + slot.name +
                              "' is outside its range " + std::to_string(slot.low) + ".." +
                              std::to_string(slot.high));
      }
    }
  }
  return v;
}

std::size_t CompiledModel::element(const VarSlot& slot, const Expr* index,
                                   const Valuation& v) const {
  if (!index) return slot.offset;
  auto i = eval(*index, v);
  if (i < 0 || static_cast<std::size_t>(i) >= slot.size) {
    throw EvaluationError("index " + std::to_string(i) + " out of bounds for '" + slot.name +
                          "[" + std::to_string(slot.size) + "]' in '" + render_expr(*index) +
                          "'");
  }
  return slot.offset + static_cast<std::size_t>(i);
}

std::int64_t CompiledModel::eval(const Expr& e, const Valuation& v) const {
  return std::visit(
      overloaded{
          [](const IntLit& i) { return i.value; },
          [](const BoolLit& b) -> std::int64_t { return b.value ? 1 : 0; },
          [&](const NameRef& n) -> std::int64_t {
            const auto& b = lookup(n.name);
            switch (b.kind) {
              case BindingKind::Constant: return b.value;
              case BindingKind::Variable: return v.at(slots_[b.slot].offset);
              case BindingKind::Define: return eval(*b.expr, v) != 0 ? 1 : 0;
            }
            return 0;
          },
          [&](const IndexRef& r) -> std::int64_t {
            const auto& slot = slots_[lookup(r.name).slot];
            return v.at(element(slot, r.index.get(), v));
          },
          [&](const Unary& u) -> std::int64_t {
            auto x = eval(*u.operand, v);
            if (u.op == UnaryOp::Not) return x == 0 ? 1 : 0;
            std::int64_t r = 0;
            overflow_check(__builtin_sub_overflow(std::int64_t{0}, x, &r), e);
            return r;
          },
          [&](const Binary& b) -> std::int64_t {
            if (b.op == BinaryOp::And) return eval(*b.lhs, v) != 0 && eval(*b.rhs, v) != 0;
            if (b.op == BinaryOp::Or) return eval(*b.lhs, v) != 0 || eval(*b.rhs, v) != 0;
            auto x = eval(*b.lhs, v);
            auto y = eval(*b.rhs, v);
            std::int64_t r = 0;
            switch (b.op) {
              case BinaryOp::Eq: return x == y;
              case BinaryOp::Ne: return x != y;
              case BinaryOp::Lt: return x < y;
              case BinaryOp::Le: return x <= y;
              case BinaryOp::Gt: return x > y;
              case BinaryOp::Ge: return x >= y;
              case BinaryOp::Add:
                overflow_check(__builtin_add_overflow(x, y, &r), e);
                return r;
              case BinaryOp::Sub:
                overflow_check(__builtin_sub_overflow(x, y, &r), e);
                return r;
              case BinaryOp::Mul:
                overflow_check(__builtin_mul_overflow(x, y, &r), e);
                return r;
              case BinaryOp::Div:
              case BinaryOp::Mod:
                if (y == 0) throw EvaluationError("division by zero in '" + render_expr(e) + "'");
                overflow_check(x == INT64_MIN && y == -1, e);
                return b.op == BinaryOp::Div ? x / y : x % y;
              default: return 0;
            }
          },
      },
      e.node);
}

bool CompiledModel::define_holds(const std::string& name, const Valuation& v) const {
  const auto* d = ast_.find_define(name);
  if (!d) throw EvaluationError("'" + name + "' is not a #define");
  return eval(*d->expr, v) != 0;
}

void CompiledModel::execute(const std::vector<Assignment>& program, Valuation& v) const {
  for (const auto& a : program) {
    const auto& slot = slots_[lookup(a.target).slot];
    auto pos = element(slot, a.index.get(), v);
    auto value = eval(*a.value, v);
    if (value < slot.low || value > slot.high) {
      throw EvaluationError("assignment '" + a.target + (a.index ? "[...]" : "") + " = " +
                            render_expr(*a.value) + "' yields " + std::to_string(value) +
                            ", outside the range " + std::to_string(slot.low) + ".." +
                            std::to_string(slot.high));
    }
    v[pos] = value;
  }
}

std::string CompiledModel::describe_valuation(const Valuation& v) const {
  std::string s = "{";
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto& slot = slots_[i];
    if (i) s += ", ";
    s += slot.name + "=";
    if (slot.array) {
      s += "[";
      for (std::size_t k = 0; k < slot.size; ++k) {
        if (k) s += ",";
        s += std::to_string(v[slot.offset + k]);
      }
      s += "]";
    } else {
      s += std::to_string(v[slot.offset]);
    }
  }
  return s + "}";
}

}  // namespace cspforge::semantics
