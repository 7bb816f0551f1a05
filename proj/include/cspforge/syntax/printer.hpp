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

#include <string>

#include "cspforge/syntax/ast.hpp"

namespace cspforge::syntax {

// Canonical CSP# text. parse_model(render_model(m)) == m for every model the
// parser can produce.
std::string render_expr(const Expr& e);
std::string render_process(const ProcessExpr& p);
std::string render_ltl(const LtlFormula& f);
std::string render_assert(const AssertDecl& a);
std::string render_model(const ModelAst& m);

}  // namespace cspforge::syntax
