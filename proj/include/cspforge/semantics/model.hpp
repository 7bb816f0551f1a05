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
#include <string>
#include <unordered_map>
#include <vector>

#include "cspforge/common/error.hpp"
#include "cspforge/syntax/ast.hpp"

namespace cspforge::semantics {

using Valuation = std::vector<std::int64_t>;

/// Runtime modelling error: division by zero, index out of bounds, value out
/// of range, unguarded recursion. `trace` is the event path to the failing
/// state when raised during exploration.
class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& message) : Error("EvaluationError", message) {}
  EvaluationError(const std::string& message, std::vector<std::string> trace);

  const std::vector<std::string>& trace() const noexcept { return trace_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
  std::vector<std::string> trace_;
};

CSPFORGE_DEFINE_ERROR(UnknownProcess);

/// Storage for one declared variable inside a flat valuation vector.
struct VarSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 1;
  bool array = false;
  std::int64_t low = 0;
  std::int64_t high = 0;
};

/// Name-resolved view of a ModelAst used by the explorer and the checkers.
class CompiledModel {
 public:
  explicit CompiledModel(syntax::ModelAst ast);

  const syntax::ModelAst& ast() const noexcept { return ast_; }
  const std::vector<VarSlot>& slots() const noexcept { return slots_; }
  std::size_t width() const noexcept { return width_; }

  Valuation initial_valuation() const;

  std::int64_t eval(const syntax::Expr& e, const Valuation& v) const;
  bool truthy(const syntax::Expr& e, const Valuation& v) const { return eval(e, v) != 0; }
  bool define_holds(const std::string& name, const Valuation& v) const;

  /// Runs assignments left to right; each sees the effect of the previous one.
  void execute(const std::vector<syntax::Assignment>& program, Valuation& v) const;

  /// `{"x": 1, "arr": [0, 2]}` style rendering in declaration order.
  std::string describe_valuation(const Valuation& v) const;

 private:
  enum class BindingKind { Constant, Variable, Define };
  struct Binding {
    BindingKind kind;
    std::int64_t value = 0;        // constants
    std::size_t slot = 0;          // variables
    const syntax::Expr* expr = nullptr;  // defines
  };

  syntax::ModelAst ast_;
  std::unordered_map<std::string, Binding> bindings_;
  std::vector<VarSlot> slots_;
  std::size_t width_ = 0;

  const Binding& lookup(const std::string& name) const;
  std::size_t element(const VarSlot& slot, const syntax::Expr* index, const Valuation& v) const;
  std::int64_t const_eval(const syntax::Expr& e) const;
};

}  // namespace cspforge::semantics
