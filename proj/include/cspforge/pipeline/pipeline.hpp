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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspforge/codegen/codegen.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/planner/planner.hpp"
#include "cspforge/planner/prompt.hpp"
#include "cspforge/repair/repair.hpp"
#include "cspforge/verify/checks.hpp"

namespace cspforge::pipeline {

enum class Stage {
  VariableAnalysis,
  ActionExtraction,
  InstructionGeneration,
  CodeGeneration,
  Repair,
  Verification
};

std::string stage_name(Stage s);
const std::vector<Stage>& all_stages();

struct PipelineConfig {
  planner::PromptLibrary prompts;
  codegen::SyntaxCue cue;
  std::vector<codegen::Exemplar> exemplars;
  repair::RepairOptions repair;
  bool repair_enabled = true;

  /// Prompts, syntax cue and exemplars from the shipped data directory.
  static PipelineConfig load_default();
};

struct PipelineInput {
  nlohmann::ordered_json context;  // build_context output
  std::string descriptions;        // free text handed to the planning prompt
  std::vector<verify::Requirement> requirements;
};

struct PipelineResult {
  std::optional<planner::ExtractedElements> elements;
  std::optional<planner::GenerationPlan> plan;
  std::optional<std::string> exemplar_id;
  double exemplar_similarity = 0.0;
  std::optional<codegen::Generated> generated;
  std::optional<repair::RepairOutcome> outcome;  // present once verification ran

  std::optional<Stage> failed_stage;
  std::string error_kind;
  std::string error;
  std::map<std::string, double> timings;  // seconds per stage name

  bool success() const { return outcome && outcome->success; }
};

/// plan → generate → verify → repair. Stage errors are captured in the
/// result rather than thrown.
PipelineResult run_pipeline(llm::ChatBackend& backend, const PipelineInput& input,
                            const PipelineConfig& config);

nlohmann::json to_json(const PipelineResult& r);

}  // namespace cspforge::pipeline
