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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

#include "cspforge/llm/backend.hpp"
#include "cspforge/planner/planner.hpp"
#include "cspforge/planner/prompt.hpp"

using namespace cspforge::planner;
using cspforge::llm::ScriptedBackend;
using cspforge::llm::ScriptEntry;
using cspforge::testing::data_path;
using cspforge::testing::read_fixture;
using cspforge::testing::read_text;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::string kCarCase = "datasets/scripted/car/";

ordered_json car_context() {
  return ordered_json::parse(read_text(data_path(kCarCase + "context.json")));
}

std::unique_ptr<ScriptedBackend> car_backend() {
  auto b = ScriptedBackend::from_file(data_path(kCarCase + "script.json"));
  b->set_recording(true);
  return b;
}

ExtractedElements car_elements() { return elements_from_json(json::parse(read_fixture("car_elements.json"))); }

std::vector<Subsystem> car_subsystems() {
  std::vector<Subsystem> out;
  const auto ctx = car_context();
  for (const auto& s : ctx["subsystems"]) out.push_back({s["name"], s["description"]});
  return out;
}

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.rule == rule; });
}

const std::string kElementsRole = "Extract constants and variables";
const std::string kActionsRole = "Extract the guarded actions";
const std::string kPlanRole = "Write the model generation plan";

}  // namespace

TEST_CASE("build_context produces the supporting-context document") {
  auto ctx = build_context("car", "A simplified car.", "They share variables.", car_subsystems());
  CHECK(ctx["subsystemCount"] == 4);
  CHECK(ctx["subsystems"].size() == 4);
  std::vector<std::string> keys;
  for (auto it = ctx.begin(); it != ctx.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"modelName", "modelDesc", "interaction", "subsystemCount",
                                         "subsystems"});
  CHECK(ctx["subsystems"][3]["name"] == "motor");

  auto one = build_context("lamp", "A lamp.", "", {{"lamp", "Turns on and off."}});
  CHECK(one["subsystemCount"] == 1);

  CHECK_THROWS_AS(build_context("x", "A thing.", "", {}), EmptyDescription);
  CHECK_THROWS_AS(build_context("x", "  \n", "", {{"a", "b"}}), EmptyDescription);
}

TEST_CASE("validate_elements accepts the curated car elements") {
  CHECK(validate_elements(car_elements()).empty());
}

TEST_CASE("validate_elements reports each broken rule") {
  SUBCASE("a name used as constant and process") {
    ExtractedElements e{{{"door", {{"door", 1, ""}}, {}, {}}}};
    auto vs = validate_elements(e);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "unique-names");
    CHECK(vs[0].identifiers == std::vector<std::string>{"door"});
  }
  SUBCASE("a symbolic possible value that is not a constant") {
    ExtractedElements e{{{"p", {{"on", 1, ""}}, {{"light", "int", {"on", "dim"}, "on", ""}}, {}}}};
    auto vs = validate_elements(e);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "undeclared-constant");
    CHECK(vs[0].identifiers == std::vector<std::string>{"light", "dim"});
  }
  SUBCASE("a variable declared before the constants it uses") {
    ExtractedElements e{{{"first", {}, {{"mode", "int", {"idle", "busy"}, "idle", ""}}, {}},
                         {"second", {{"idle", 0, ""}, {"busy", 1, ""}}, {}, {}}}};
    auto vs = validate_elements(e);
    REQUIRE(vs.size() == 2);
    CHECK(vs[0].rule == "constants-before-variables");
    CHECK(vs[0].identifiers == std::vector<std::string>{"mode", "busy"});
    CHECK(vs[1].identifiers == std::vector<std::string>{"mode", "idle"});
    CHECK(describe(vs).find("all constants must be declared before variables") != std::string::npos);
  }
  SUBCASE("range bounds and integers") {
    ExtractedElements e{{{"p", {{"MAX", 3, ""}}, {{"n", "int", {"0..MAX", "7"}, "0", ""},
                                                 {"m", "int", {"0..LIMIT"}, "0", ""}}, {}}}};
    auto vs = validate_elements(e);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].identifiers == std::vector<std::string>{"m", "LIMIT"});
  }
  SUBCASE("a variable whose possible value repeats a variable name") {
    ExtractedElements e{{{"p", {}, {{"a", "int", {"0"}, "0", ""}, {"a", "int", {"1"}, "1", ""}}, {}}}};
    auto vs = validate_elements(e);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "unique-names");
  }
}

TEST_CASE("validate_elements is idempotent and insensitive to order within a process") {
  std::mt19937 rng(11);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e", "p", "q"};
  for (int trial = 0; trial < 300; ++trial) {
    ExtractedElements e;
    const int nproc = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < nproc; ++i) {
      ProcessElements p;
      p.name = names[rng() % names.size()];
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
        p.constants.push_back({names[rng() % names.size()], static_cast<int>(rng() % 4), ""});
      }
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
        Variable v{names[rng() % names.size()], "int", {}, "0", ""};
        for (int m = static_cast<int>(rng() % 3); m > 0; --m) v.possible_values.push_back(names[rng() % names.size()]);
        if (rng() % 2) v.initial_value = names[rng() % names.size()];
        p.variables.push_back(v);
      }
      e.processes.push_back(p);
    }
    auto first = validate_elements(e);
    CHECK(validate_elements(e) == first);
    CHECK(std::is_sorted(first.begin(), first.end()));
    auto shuffled = e;
    for (auto& p : shuffled.processes) {
      std::shuffle(p.constants.begin(), p.constants.end(), rng);
      std::shuffle(p.variables.begin(), p.variables.end(), rng);
    }
    CHECK(validate_elements(shuffled) == first);
  }
}

TEST_CASE("elements json round trip keeps declaration order") {
  auto e = car_elements();
  auto j = to_json(e);
  CHECK(elements_from_json(json::parse(j.dump())) == e);
  std::vector<std::string> keys;
  for (auto it = j["processes"][0].begin(); it != j["processes"][0].end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"name", "constants", "variables", "actions"});
  CHECK_THROWS_AS(elements_from_json(json::array()), SchemaError);
  CHECK_THROWS_AS(elements_from_json(json::parse(R"({"processes": [{"name": "p", "constants": [{"name": "c", "value": "high"}]}]})")), SchemaError);
}

TEST_CASE("extract_json tolerates prose and code fences") {
  CHECK(extract_json("{\"a\": 1}")["a"] == 1);
  CHECK(extract_json("Here you go:\n```json\n{\"a\": [1, 2]}\n```\nDone.")["a"].size() == 2);
  CHECK(extract_json("list: [1, 2, 3]").size() == 3);
  CHECK_THROWS_AS(extract_json("no json here"), SchemaError);
}

TEST_CASE("car extraction with the scripted backend reproduces the stored elements") {
  auto backend = car_backend();
  PromptLibrary prompts;
  auto e = extract_elements(*backend, car_context(), prompts);
  CHECK(e == car_elements());
  std::vector<std::string> vars;
  for (const auto* v : e.variables()) vars.push_back(v->name);
  for (const auto* name : {"carMotion", "fuel", "engineStatus"}) {
    CHECK(std::find(vars.begin(), vars.end(), name) != vars.end());
  }
  CHECK(e.actions().size() == 16);
  CHECK(backend->transcript().size() == 2);

  auto again = car_backend();
  CHECK(extract_elements(*again, car_context(), prompts) == e);
}

TEST_CASE("prose instead of JSON twice fails with SchemaError") {
  ScriptedBackend b({{{kElementsRole}, {"I think the car has an engine.", "Sure! The car has doors."}, false}});
  b.set_recording(true);
  CHECK_THROWS_AS(extract_variables(b, car_context(), PromptLibrary()), SchemaError);
  auto t = b.transcript();
  REQUIRE(t.size() == 2);
  CHECK(t[0].request.user.find("could not be used") == std::string::npos);
  CHECK(t[1].request.user.find("Your previous reply could not be used") != std::string::npos);
}

TEST_CASE("one bad reply is retried with feedback") {
  auto good = read_text(data_path(kCarCase + "replies/elements.json"));
  ScriptedBackend b({{{kElementsRole}, {"no idea", good}, false}});
  b.set_recording(true);
  auto e = extract_variables(b, car_context(), PromptLibrary());
  CHECK(e.variables().size() == 6);
  CHECK(e.actions().empty());
  CHECK(b.transcript().size() == 2);
}

TEST_CASE("a variable declared before its value constants fails validation") {
  const std::string reordered = R"({"processes": [
      {"name": "motor", "constants": [], "variables": [
          {"name": "engineStatus", "type": "int", "possible_values": ["engineOff", "engineOn"],
           "initial_value": "engineOff", "description": ""}]},
      {"name": "engine", "constants": [
          {"name": "engineOff", "value": 0, "description": ""},
          {"name": "engineOn", "value": 1, "description": ""}], "variables": []}]})";
  ScriptedBackend b({{{kElementsRole}, {reordered}, true}});
  b.set_recording(true);
  try {
    extract_variables(b, car_context(), PromptLibrary());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("constants-before-variables") != std::string::npos);
  }
  auto t = b.transcript();
  REQUIRE(t.size() == 2);
  CHECK(t[1].request.user.find("constants-before-variables") != std::string::npos);
}

TEST_CASE("actions merge into the processes that declared the state") {
  auto partial = car_elements();
  for (auto& p : partial.processes) p.actions.clear();
  ScriptedBackend b({{{kActionsRole},
                      {R"({"processes": [{"name": "motor", "actions": [
                           {"name": "honk", "guard": "", "state_changes": []}]},
                          {"name": "horn", "actions": [{"name": "beep", "guard": "true", "state_changes": ""}]}]})"},
                      false}});
  auto e = extract_actions(b, car_context(), partial, PromptLibrary());
  CHECK(e.processes.size() == 5);
  CHECK(e.processes[3].actions.size() == 1);
  CHECK(e.processes[3].actions[0].name == "honk");
  CHECK(e.processes[4].name == "horn");
  CHECK(e.processes[0].actions.empty());
}

TEST_CASE("the car plan contains the start_driving annotation and covers every action") {
  auto backend = car_backend();
  auto elements = car_elements();
  auto plan = make_plan(*backend, elements, read_text(data_path(kCarCase + "description.txt")), PromptLibrary());
  auto hits = annotations_for(plan, "start_driving");
  REQUIRE(hits.size() == 1);
  CHECK(plan.annotations[hits[0]].rfind("If \"engineStatus\" is \"engineOn\"", 0) == 0);
  for (const auto* a : elements.actions()) CHECK(!annotations_for(plan, a->name).empty());
  CHECK(plan.elements == elements);
}

TEST_CASE("a single-action system gets exactly one action annotation") {
  ExtractedElements e{{{"lamp", {}, {{"on", "int", {"0", "1"}, "0", ""}}, {{"toggle", "on == 0", "on = 1"}}}}};
  SUBCASE("annotated by the backend") {
    ScriptedBackend b({{{kPlanRole}, {R"(["Variable \"on\" starts at 0", "If on is 0, the action \"toggle\" makes on become 1"])"}, false}});
    auto plan = make_plan(b, e, "A lamp.", PromptLibrary());
    CHECK(plan.annotations.size() == 2);
    CHECK(annotations_for(plan, "toggle").size() == 1);
  }
  SUBCASE("left out by the backend") {
    ScriptedBackend b({{{kPlanRole}, {"- Variable \"on\" starts at 0\n"}, false}});
    auto plan = make_plan(b, e, "A lamp.", PromptLibrary());
    REQUIRE(plan.annotations.size() == 2);
    CHECK(plan.annotations[1] == default_annotation(e.processes[0].actions[0]));
    CHECK(plan.annotations[1] == "If on == 0, the action \"toggle\" makes on = 1");
  }
  SUBCASE("an empty plan") {
    ScriptedBackend b({{{kPlanRole}, {R"({"annotations": []})"}, false}});
    CHECK_THROWS_AS(make_plan(b, e, "A lamp.", PromptLibrary()), EmptyPlan);
  }
}

TEST_CASE("annotations_for matches whole words only") {
  GenerationPlan p{{}, {"the action \"start\" begins", "start_driving moves", "restart later"}};
  CHECK(annotations_for(p, "start") == std::vector<std::size_t>{0});
  CHECK(annotations_for(p, "start_driving") == std::vector<std::size_t>{1});
  CHECK(annotations_for(p, "stop").empty());
}

TEST_CASE("plans round-trip through the store format") {
  std::mt19937 rng(5);
  auto base = car_elements();
  for (int trial = 0; trial < 100; ++trial) {
    GenerationPlan p;
    p.elements = base;
    std::shuffle(p.elements.processes.begin(), p.elements.processes.end(), rng);
    p.elements.processes.resize(1 + rng() % p.elements.processes.size());
    for (int i = static_cast<int>(rng() % 6); i >= 0; --i) {
      p.annotations.push_back("line " + std::to_string(rng() % 100) + " \"quoted\" \\ slash\nnewline");
    }
    auto text = to_json(p).dump();
    auto back = plan_from_json(json::parse(text));
    CHECK(back == p);
    CHECK(to_json(back).dump() == text);
  }
  auto p = plan_from_json(json::parse(to_json(GenerationPlan{base, {"a"}}).dump()));
  CHECK(plan_text(p).find("driver") != std::string::npos);
}

TEST_CASE("prompt assembly is deterministic") {
  auto run = [] {
    auto b = car_backend();
    PromptLibrary prompts;
    auto e = extract_elements(*b, car_context(), prompts);
    make_plan(*b, e, "A car.", prompts);
    std::vector<std::string> out;
    for (const auto& x : b->transcript()) out.push_back(cspforge::llm::to_json(x.request).dump());
    return out;
  };
  auto a = run();
  CHECK(a.size() == 3);
  CHECK(a == run());
}

TEST_CASE("templates fill slots by name and reject unfilled ones") {
  auto t = PromptTemplate::parse(
      "# comment line\n[role]\nYou are {who}.\n[context]\nContext: {ctx}\n[structure]\nJSON.\n"
      "[rules]\n- First rule\n  continues here.\n- Second rule about {who}.\n",
      "demo");
  CHECK(t.placeholders() == std::vector<std::string>{"ctx", "who"});
  auto p = t.fill({{"who", "a tester"}, {"ctx", "none"}});
  CHECK(p.role == "You are a tester.");
  CHECK(p.context == "Context: none");
  CHECK(p.rules == std::vector<std::string>{"First rule continues here.", "Second rule about a tester."});
  try {
    t.fill({{"who", "x"}});
    FAIL("expected TemplateError");
  } catch (const TemplateError& e) {
    CHECK(std::string(e.what()).find("{ctx}") != std::string::npos);
  }
  CHECK_THROWS_AS(PromptTemplate::parse("[role]\nx\n[context]\ny\n[rules]\n- z\n"), TemplateError);

  auto req = p.to_request(cspforge::llm::ResponseFormat::Json);
  CHECK(req.system == p.role);
  CHECK(req.user.find("## Rules\n- First rule continues here.") != std::string::npos);
  CHECK(req.format == cspforge::llm::ResponseFormat::Json);

  SemanticPrompt empty{"", "c", "s", {"r"}};
  CHECK_THROWS_AS(empty.check_complete(), TemplateError);
}

TEST_CASE("every shipped template has the four parts and fills completely") {
  PromptLibrary lib;
  for (const auto* name : {"elements", "actions", "plan", "codegen", "codegen_fix", "repair"}) {
    const auto& t = lib.get(name);
    std::map<std::string, std::string> values;
    for (const auto& slot : t.placeholders()) values[slot] = "<" + slot + ">";
    auto p = t.fill(values);
    CHECK_NOTHROW(p.check_complete());
    CHECK(!p.rules.empty());
  }
  CHECK_THROWS_AS(lib.get("no_such_template"), TemplateError);
}
