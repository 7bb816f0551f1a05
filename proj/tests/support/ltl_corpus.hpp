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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cspforge/semantics/lts.hpp"
#include "cspforge/syntax/ast.hpp"
#include "cspforge/verify/buchi.hpp"

namespace cspforge::testing {

/// Single-process model with at most six states over `var s`: entry `P`,
/// events q and r, and a `#define p` over s.
std::string small_system(std::uint32_t seed);

/// Every formula over atoms p and q of depth at most `depth`, built with
/// ! X <> [] && || -> U.
std::vector<syntax::LtlPtr> formulas_up_to_depth(int depth);

/// Every formula over atoms p and q of depth at most `depth` in the core
/// syntax ! X && U.
std::vector<syntax::LtlPtr> core_formulas_up_to_depth(int depth);

/// Random formula over p and q of depth at most `depth`.
syntax::LtlPtr random_formula(std::mt19937& rng, int depth);

/// Compares check_ltl (with `negated` when given) against the oracle and
/// validates any counterexample: it must replay, close its lasso and
/// falsify the formula. Returns a description of the first problem.
std::optional<std::string> ltl_disagreement(const semantics::Lts& lts, const syntax::LtlFormula& f,
                                            const verify::Buchi* negated, bool& invalid);

}  // namespace cspforge::testing
