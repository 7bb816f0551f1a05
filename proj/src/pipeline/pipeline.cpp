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

#include "cspforge/pipeline/pipeline.hpp"

#include <chrono>

#include "cspforge/store/store.hpp"

namespace cspforge::pipeline {

using nlohmann::json;

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::VariableAnalysis: return "constant/variable analysis";
    case Stage::ActionExtraction: return "action extraction";
    case Stage::InstructionGeneration: return "instruction generation";
    case Stage::CodeGeneration: return "code generation";
    case Stage::Repair: return "repair";
    case Stage::Verification: return "verification";
  }
  return "?";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {Stage::VariableAnalysis,      Stage::ActionExtraction,
                                            Stage::InstructionGeneration, Stage::CodeGeneration,
                                            Stage::Repair,                Stage::Verification};
  return stages;
}

PipelineConfig PipelineConfig::load_default() {
  PipelineConfig c{planner::PromptLibrary(), codegen::SyntaxCue::load_default(), {}, {}, true};
  c.exemplars = store::Store(store::default_store_dir()).load_exemplars();
  return c;
}

PipelineResult run_pipeline(llm::ChatBackend& backend, const PipelineInput& input,
                            const PipelineConfig& config) {
  using Clock = std::chrono::steady_clock;
  PipelineResult r;
  Stage stage = Stage::VariableAnalysis;
  auto timed = [&](Stage s, auto&& fn) {
    stage = s;
    auto t = Clock::now();
    fn();
    r.timings[stage_name(s)] += std::chrono::duration<double>(Clock::now() - t).count();
  };
  try {
    planner::ExtractedElements partial;
    timed(Stage::VariableAnalysis,
          [&] { partial = planner::extract_variables(backend, input.context, config.prompts); });
    timed(Stage::ActionExtraction, [&] {
      r.elements = planner::extract_actions(backend, input.context, partial, config.prompts);
    });
    timed(Stage::InstructionGeneration, [&] {
      r.plan = planner::make_plan(backend, *r.elements, input.descriptions, config.prompts);
    });
    timed(Stage::CodeGeneration, [&] {
      std::optional<codegen::Retrieved> retrieved;
      if (!config.exemplars.empty()) {
        retrieved = codegen::retrieve_exemplar(*r.plan, config.exemplars);
        r.exemplar_id = retrieved->exemplar.id;
        r.exemplar_similarity = retrieved->similarity;
      }
      r.generated = codegen::generate_code(backend, *r.plan, config.cue,
                                           retrieved ? &retrieved->exemplar : nullptr,
                                           config.prompts, config.repair.max_fixups);
    });
    stage = Stage::Verification;
    auto options = config.repair;
    if (!config.repair_enabled) options.k_max = 0;
    r.outcome = repair::repair_loop(backend, r.generated->source, input.requirements, config.cue,
                                    config.prompts, options);
    r.timings[stage_name(Stage::Verification)] += r.outcome->verification_seconds;
    r.timings[stage_name(Stage::Repair)] += r.outcome->repair_seconds;
  } catch (const Error& e) {
    r.failed_stage = stage;
    r.error_kind = e.kind();
    r.error = e.what();
  }
  return r;
}

json to_json(const PipelineResult& r) {
  json j;
  j["elements"] = r.elements ? json::parse(planner::to_json(*r.elements).dump()) : json(nullptr);
  j["plan"] = r.plan ? json::parse(planner::to_json(*r.plan).dump()) : json(nullptr);
  j["exemplar"] = r.exemplar_id ? json{{"id", *r.exemplar_id}, {"similarity", r.exemplar_similarity}}
                                : json(nullptr);
  j["generated"] = r.generated ? json{{"source", r.generated->source}, {"fixups", r.generated->fixups}}
                               : json(nullptr);
  j["repair"] = r.outcome ? repair::to_json(*r.outcome) : json(nullptr);
  j["success"] = r.success();
  j["failed_stage"] = r.failed_stage ? json(stage_name(*r.failed_stage)) : json(nullptr);
  j["error_kind"] = r.error_kind;
  j["error"] = r.error;
  j["timings"] = r.timings;
  return j;
}

}  // namespace cspforge::pipeline
