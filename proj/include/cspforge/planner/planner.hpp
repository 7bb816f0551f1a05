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
#include <vector>

#include "json.hpp"

#include "cspforge/common/error.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/planner/prompt.hpp"

namespace cspforge::planner {

CSPFORGE_DEFINE_ERROR(EmptyDescription);
CSPFORGE_DEFINE_ERROR(SchemaError);
CSPFORGE_DEFINE_ERROR(ValidationError);
CSPFORGE_DEFINE_ERROR(EmptyPlan);

struct Constant {
  std::string name;
  std::int64_t value = 0;
  std::string description;

  bool operator==(const Constant&) const = default;
};

/// `possible_values` entries are integers, constant names, or ranges
/// "lo..hi" whose bounds are integers or constant names.
struct Variable {
  std::string name;
  std::string type;
  std::vector<std::string> possible_values;
  std::string initial_value;
  std::string description;

  bool operator==(const Variable&) const = default;
};

struct Action {
  std::string name;
  std::string guard;
  std::string state_changes;

  bool operator==(const Action&) const = default;
};

/// Elements grouped by the subsystem (process) that introduces them.
struct ProcessElements {
  std::string name;
  std::vector<Constant> constants;
  std::vector<Variable> variables;
  std::vector<Action> actions;

  bool operator==(const ProcessElements&) const = default;
};

struct ExtractedElements {
  std::vector<ProcessElements> processes;

  /// Declaration order: per process, constants then variables.
  std::vector<const Constant*> constants() const;
  std::vector<const Variable*> variables() const;
  std::vector<const Action*> actions() const;

  bool operator==(const ExtractedElements&) const = default;
};

/// {"processes": [{"name", "constants", "variables", "actions"}]}; keys
/// keep declaration order.
nlohmann::ordered_json to_json(const ExtractedElements& e);
/// Throws SchemaError on a malformed document.
ExtractedElements elements_from_json(const nlohmann::json& j);

struct Violation {
  std::string rule;  // unique-names, constants-before-variables, undeclared-constant
  std::vector<std::string> identifiers;
  std::string message;

  bool operator==(const Violation&) const = default;
  bool operator<(const Violation& o) const;
};

/// Sorted list of rule violations; empty iff the elements are well formed.
std::vector<Violation> validate_elements(const ExtractedElements& e);
std::string describe(const std::vector<Violation>& vs);

struct Subsystem {
  std::string name;
  std::string description;
};

/// {"modelName", "modelDesc", "interaction", "subsystemCount", "subsystems"}.
nlohmann::ordered_json build_context(const std::string& model_name, const std::string& model_desc,
                                     const std::string& interaction,
                                     const std::vector<Subsystem>& subsystems);

/// First JSON object or array in a reply, tolerating prose and code fences.
/// Throws SchemaError when none parses.
nlohmann::json extract_json(const std::string& reply);

/// Constant and variable analysis: one call, plus one retry carrying the
/// parse error or violation list.
ExtractedElements extract_variables(llm::ChatBackend& backend, const nlohmann::ordered_json& context,
                                    const PromptLibrary& prompts);
/// Guarded-action extraction over previously extracted elements, with the
/// same single retry; returns the merged, validated elements.
ExtractedElements extract_actions(llm::ChatBackend& backend, const nlohmann::ordered_json& context,
                                  const ExtractedElements& partial, const PromptLibrary& prompts);
ExtractedElements extract_elements(llm::ChatBackend& backend, const nlohmann::ordered_json& context,
                                   const PromptLibrary& prompts);

struct GenerationPlan {
  ExtractedElements elements;
  std::vector<std::string> annotations;

  bool operator==(const GenerationPlan&) const = default;
};

nlohmann::ordered_json to_json(const GenerationPlan& p);
GenerationPlan plan_from_json(const nlohmann::json& j);

/// Plain text used for similarity retrieval: process names, then annotations.
std::string plan_text(const GenerationPlan& p);

/// Annotations mentioning `action` as a whole word.
std::vector<std::size_t> annotations_for(const GenerationPlan& p, const std::string& action);

/// Asks the backend for line-level annotations. Actions the reply leaves
/// unannotated get one sentence composed from their extracted guard and
/// state changes.
GenerationPlan make_plan(llm::ChatBackend& backend, const ExtractedElements& elements,
                         const std::string& descriptions, const PromptLibrary& prompts);

/// `If <guard>, the action "<name>" makes <changes>` for one action.
std::string default_annotation(const Action& a);

}  // namespace cspforge::planner
