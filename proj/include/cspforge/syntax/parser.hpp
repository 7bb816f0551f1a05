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

#include <string_view>
#include <vector>

#include "cspforge/syntax/ast.hpp"
#include "cspforge/syntax/lexer.hpp"

namespace cspforge::syntax {

/// Parses a complete model and checks every name-resolution invariant.
/// Throws SyntaxError or NameError.
ModelAst parse_model(std::string_view source);

/// A standalone `#assert`, optionally preceded by the `#define` lines it
/// depends on.
struct AssertionSnippet {
  std::vector<ConstDecl> constants;
  std::vector<DefineDecl> defines;
  AssertDecl assertion;
};

/// When `context` is given, the process, predicate and propositions are
/// resolved against it (plus the snippet's own defines).
AssertionSnippet parse_assertion_snippet(std::string_view source,
                                         const ModelAst* context = nullptr);
AssertDecl parse_assertion(std::string_view source, const ModelAst* context = nullptr);

ExprPtr parse_expression(std::string_view source);
LtlPtr parse_ltl(std::string_view source);

/// Name-resolution checks shared by the parser and by callers that assemble
/// ASTs programmatically (e.g. a model with requirement defines attached).
void validate_model(const ModelAst& ast);

}  // namespace cspforge::syntax
