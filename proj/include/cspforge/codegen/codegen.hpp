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

#include <optional>
#include <string>
#include <vector>

#include "cspforge/common/error.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/planner/planner.hpp"
#include "cspforge/planner/prompt.hpp"
#include "cspforge/syntax/ast.hpp"

namespace cspforge::codegen {

struct CommonError {
  std::string pattern;
  std::string hint;
};

/// Documentation excerpt plus the list of frequent mistakes embedded in
/// generation prompts.
struct SyntaxCue {
  std::string documentation;
  std::vector<CommonError> errors;

  /// Reads the documentation text and a JSON list of {pattern, hint}.
  static SyntaxCue load(const std::string& doc_path, const std::string& errors_path);
  static SyntaxCue load_default();

  /// Throws PreconditionError when empty.
  void validate() const;
  /// One "- Avoid <pattern>: <hint>" rule line per entry.
  std::string render_errors() const;
};

struct Exemplar {
  std::string id;
  planner::GenerationPlan plan;
  std::string code;
};

CSPFORGE_DEFINE_ERROR(EmptyStore);

struct Retrieved {
  Exemplar exemplar;
  double similarity = 0.0;
};

/// Exemplar whose plan text has the highest TF-IDF cosine with `plan`'s;
/// ties go to the smallest id. Throws EmptyStore.
Retrieved retrieve_exemplar(const planner::GenerationPlan& plan,
                            const std::vector<Exemplar>& exemplars);

/// Exemplar code with each plan line inserted as a `//` comment above the
/// first line declaring the action, variable or constant it names; lines
/// naming none of them lead the listing.
std::string interleave_plan(const planner::GenerationPlan& plan, const std::string& code);

/// Contents of the first fenced code block (preferring one tagged csp), or
/// the whole reply when it has no fence.
std::string extract_code(const std::string& reply);

class UnparseableAfterRetries : public Error {
 public:
  explicit UnparseableAfterRetries(std::string diagnostics)
      : Error("UnparseableAfterRetries",
              "model still fails to parse after fix-up calls: " + diagnostics),
        diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

struct Generated {
  std::string source;
  syntax::ModelAst ast;
  int fixups = 0;  // fix-up calls made
};

inline constexpr int kMaxFixups = 3;

/// Parses `reply`'s code; on failure asks the backend to fix it, up to
/// `max_fixups` times, each call carrying the latest parser diagnostic.
Generated parse_gate(llm::ChatBackend& backend, const std::string& reply, const SyntaxCue& cue,
                     const planner::PromptLibrary& prompts, int max_fixups = kMaxFixups);

/// Generation prompt: role, plan annotations, syntax cue, and the exemplar
/// (if any) with its plan interleaved; the reply goes through parse_gate.
Generated generate_code(llm::ChatBackend& backend, const planner::GenerationPlan& plan,
                        const SyntaxCue& cue, const Exemplar* exemplar,
                        const planner::PromptLibrary& prompts, int max_fixups = kMaxFixups);

/// The filled generation prompt, for inspection.
llm::ChatRequest generation_request(const planner::GenerationPlan& plan, const SyntaxCue& cue,
                                    const Exemplar* exemplar, const planner::PromptLibrary& prompts);

}  // namespace cspforge::codegen
