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

#include "cspforge/codegen/codegen.hpp"
#include "cspforge/common/error.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/planner/prompt.hpp"
#include "cspforge/verify/checks.hpp"

namespace cspforge::repair {

struct Suspect {
  std::string action;
  double score = 0.0;

  bool operator==(const Suspect&) const = default;
};

inline constexpr double kRecencyWeight = 0.7;
inline constexpr double kFrequencyWeight = 0.3;
inline constexpr std::size_t kTopSuspects = 3;
inline constexpr int kDefaultMaxRounds = 5;

/// False for the init marker, τ, ✓ and the stutter label.
bool is_action(const std::string& label);

/// score(a) = w_r·(last_index(a)+1)/n + w_f·count(a)/n over the n action
/// events of the trace; sorted by score descending, then name ascending.
std::vector<Suspect> rank_suspects(const std::vector<std::string>& events,
                                   double recency_weight = kRecencyWeight,
                                   double frequency_weight = kFrequencyWeight);

CSPFORGE_DEFINE_ERROR(NotAMismatch);

struct RepairDirective {
  std::vector<Suspect> ranking;
  std::vector<std::string> commands;
  std::optional<verify::Requirement> requirement;  // absent for model errors
  std::optional<verify::Trace> trace;
  std::string failure;  // one-line description of what went wrong

  std::string render() const;
};

nlohmann::json to_json(const RepairDirective& d);

/// Edit commands chosen by property kind and the direction of the mismatch.
/// Throws NotAMismatch when `verdict` matches.
RepairDirective make_directives(const verify::Verdict& verdict, const verify::Requirement& req,
                                const std::vector<Suspect>& ranking);

/// Directive for a model that failed to merge, validate or explore.
RepairDirective model_error_directive(const verify::CheckReport& report);

/// Directive for the first mismatch of `report` (or its model error).
/// Throws NotAMismatch when every verdict matches.
RepairDirective directive_for(const verify::CheckReport& report,
                              const std::vector<verify::Requirement>& reqs);

/// The repair prompt carries only the current source, the failing
/// requirement, the trace and the directives.
llm::ChatRequest repair_request(const std::string& source, const RepairDirective& directive,
                                const codegen::SyntaxCue& cue, const planner::PromptLibrary& prompts);

/// One repair call followed by the parse gate.
codegen::Generated revise_model(llm::ChatBackend& backend, const std::string& source,
                                const RepairDirective& directive, const codegen::SyntaxCue& cue,
                                const planner::PromptLibrary& prompts,
                                int max_fixups = codegen::kMaxFixups);

struct RepairOptions {
  int k_max = kDefaultMaxRounds;
  verify::CheckOptions check;
  int max_fixups = codegen::kMaxFixups;
};

struct RepairOutcome {
  std::string final_source;
  int rounds_used = 0;
  bool success = false;
  int verification_passes = 0;
  std::vector<verify::CheckReport> history;  // one report per round
  std::vector<std::string> sources;          // model checked at each round
  std::vector<RepairDirective> directives;   // directive issued after round k
  verify::CheckReport final_report;             // verification of final_source
  std::optional<verify::Trace> counterexample;  // of final_report, if any
  double repair_seconds = 0.0;        // backend revision calls
  double verification_seconds = 0.0;  // check_all calls
};

nlohmann::json to_json(const RepairOutcome& o);

/// Verify, and while some requirement mismatches and fewer than `k_max`
/// repair rounds have run, revise the model from the first mismatch's
/// directive. A revision that stays unparseable after its fix-ups records
/// a failed round and keeps the previous model.
RepairOutcome repair_loop(llm::ChatBackend& backend, const std::string& model0,
                          const std::vector<verify::Requirement>& reqs,
                          const codegen::SyntaxCue& cue, const planner::PromptLibrary& prompts,
                          const RepairOptions& options = {});

/// Line diff as "- old" / "+ new" lines (unchanged lines omitted).
std::string line_diff(const std::string& before, const std::string& after);

/// Directive commands followed by the source diff.
std::string change_summary(const RepairDirective& d, const std::string& before,
                           const std::string& after);

}  // namespace cspforge::repair
