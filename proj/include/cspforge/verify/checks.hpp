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

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspforge/semantics/lts.hpp"
#include "cspforge/syntax/ast.hpp"
#include "cspforge/verify/buchi.hpp"

namespace cspforge::verify {

enum class Outcome { Valid, Invalid };
enum class Status { Match, Mismatch };

std::string to_string(Outcome o);
std::string to_string(Status s);
Outcome parse_outcome(const std::string& text);

CSPFORGE_DEFINE_ERROR(UnknownProposition);

/// Label used for the implicit self-loop on states without successors.
inline const std::string kStutterLabel = "<stutter>";

/// Event path from the initial state. For LTL counterexamples `lasso_start`
/// indexes the first event of the repeating cycle; a cycle that is empty
/// (lasso_start == events.size()) means the run stays in a state without
/// successors forever.
struct Trace {
  std::vector<std::string> events;
  std::optional<std::size_t> lasso_start;
  std::vector<semantics::StateId> states;  // events.size() + 1 entries

  std::string render() const;
};

struct CheckResult {
  Outcome outcome = Outcome::Valid;
  std::optional<Trace> trace;
};

CheckResult check_deadlockfree(const semantics::Lts& lts);
CheckResult check_reaches(const semantics::Lts& lts, const std::string& predicate);
CheckResult check_ltl(const semantics::Lts& lts, const syntax::LtlFormula& formula,
                      std::size_t product_limit = semantics::kDefaultStateLimit * 4);
/// Same check with a prebuilt automaton for the negated formula, so one
/// automaton can be reused across systems.
CheckResult check_ltl(const semantics::Lts& lts, const Buchi& negated,
                      std::size_t product_limit = semantics::kDefaultStateLimit * 4);
CheckResult check_assertion(const semantics::Lts& lts, const syntax::AssertDecl& assertion);

/// An assertion paired with the outcome the user expects.
struct Requirement {
  std::string id;
  std::string description;
  std::string source;  // optional #define lines followed by one #assert
  syntax::AssertDecl assertion;
  std::vector<syntax::ConstDecl> constants;
  std::vector<syntax::DefineDecl> defines;
  Outcome expected = Outcome::Valid;
};

/// Parses `source` (context-free: Reaches targets must be defined inline).
Requirement make_requirement(const std::string& source, Outcome expected,
                             std::string description = {}, std::string id = {});
Requirement requirement_from_json(const nlohmann::json& j);
nlohmann::json requirement_to_json(const Requirement& r);
std::vector<Requirement> requirements_from_json(const nlohmann::json& j);

struct Verdict {
  std::string assertion;
  Outcome expected = Outcome::Valid;
  Outcome raw = Outcome::Valid;
  Status status = Status::Match;
  std::optional<Trace> trace;
};

Verdict check_requirement(const semantics::Lts& lts, const Requirement& req);

struct CheckOptions {
  std::size_t state_limit = semantics::kDefaultStateLimit;
};

/// Result of checking every requirement against one model. `compiled` is
/// false when the model (merged with the requirements' #defines) fails to
/// parse, validate or explore; no verdicts are produced then.
struct CheckReport {
  bool compiled = false;
  std::string error_kind;
  std::string error;
  std::vector<Verdict> verdicts;
  std::optional<std::size_t> first_mismatch;
  std::optional<Trace> counterexample;  // trace of the first mismatch
  std::map<std::string, std::size_t> state_counts;  // per explored process

  bool all_match() const;
  std::size_t matches() const;
};

/// Merges requirement constants and #defines into the model. Throws
/// syntax::NameError on conflicting redefinitions.
syntax::ModelAst merge_requirements(const syntax::ModelAst& ast,
                                    const std::vector<Requirement>& reqs);

/// Each requirement is checked against the process its assertion names;
/// explored systems are shared between requirements on the same process.
CheckReport check_all(const syntax::ModelAst& ast, const std::vector<Requirement>& reqs,
                      const CheckOptions& options = {});
CheckReport check_all(const std::string& model_source, const std::vector<Requirement>& reqs,
                      const CheckOptions& options = {});

nlohmann::json to_json(const Trace& t);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const CheckReport& r);

}  // namespace cspforge::verify
