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

#include "cspforge/service/service.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "httplib.h"

#include "cspforge/codegen/codegen.hpp"
#include "cspforge/syntax/lexer.hpp"
#include "cspforge/syntax/parser.hpp"
#include "cspforge/text/tfidf.hpp"

namespace cspforge::service {

using nlohmann::json;
using pipeline::Stage;

StageError::StageError(Stage stage, const Error& cause)
    : Error("StageError", pipeline::stage_name(stage) + ": " + cause.kind() + ": " + cause.what()),
      stage_(stage),
      cause_kind_(cause.kind()) {}

namespace {

const std::vector<std::pair<Phase, std::string>>& phase_names() {
  static const std::vector<std::pair<Phase, std::string>> names = {
      {Phase::Describing, "Describing"},
      {Phase::Reusing, "Reusing"},
      {Phase::ReviewingElements, "ReviewingElements"},
      {Phase::SpecifyingRequirements, "SpecifyingRequirements"},
      {Phase::Planned, "Planned"},
      {Phase::Generated, "Generated"},
      {Phase::Verified, "Verified"},
      {Phase::Repairing, "Repairing"},
      {Phase::Done, "Done"}};
  return names;
}

void require_phase(const Session& s, std::initializer_list<Phase> allowed, const std::string& action) {
  if (std::find(allowed.begin(), allowed.end(), s.phase) != allowed.end()) return;
  std::string names;
  for (auto p : allowed) names += (names.empty() ? "" : ", ") + phase_name(p);
  throw PhaseViolation("cannot " + action + " in phase " + phase_name(s.phase) + " (allowed: " +
                       names + ")");
}

template <class Fn>
auto in_stage(Stage stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::string random_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  std::ostringstream ss;
  ss << "s" << std::hex << (rng() & 0xffffffffffffULL);
  return ss.str();
}

const std::set<std::string> kOps = {"==", "!=", "<", "<=", ">", ">="};
const std::regex kIdentifier("[A-Za-z_][A-Za-z0-9_]*");
const std::regex kInteger("-?[0-9]+");

std::string predicate(const std::vector<Condition>& conditions,
                      const planner::ExtractedElements& elements) {
  std::set<std::string> variables, constants;
  for (const auto& v : elements.variables()) variables.insert(v->name);
  for (const auto& c : elements.constants()) constants.insert(c->name);
  std::string out;
  for (const auto& c : conditions) {
    if (c.variable.empty() || c.value.empty()) {
      throw IncompleteParts("condition needs a variable and a value");
    }
    if (!kOps.count(c.op)) throw IncompleteParts("unsupported comparison '" + c.op + "'");
    if (!variables.count(c.variable)) throw UnknownVariable("unknown variable '" + c.variable + "'");
    if (!std::regex_match(c.value, kInteger) && !constants.count(c.value) &&
        !variables.count(c.value)) {
      throw UnknownVariable("unknown value '" + c.value + "' for '" + c.variable + "'");
    }
    out += (out.empty() ? "" : " && ") + c.variable + " " + c.op + " " + c.value;
  }
  return "(" + out + ")";
}

void require_name(const std::string& name, const std::string& what) {
  if (name.empty()) throw IncompleteParts(what + " needs a name");
  if (!std::regex_match(name, kIdentifier)) throw IncompleteParts("'" + name + "' is not an identifier");
}

std::vector<Condition> conditions_from_json(const json& j) {
  std::vector<Condition> out;
  if (j.is_null()) return out;
  for (const auto& c : j) {
    out.push_back({c.value("variable", ""), c.value("op", "=="), c.contains("value") && c["value"].is_number()
                                                                     ? std::to_string(c["value"].get<long long>())
                                                                     : c.value("value", "")});
  }
  return out;
}

/// Constants and variables declared by a model, for requirements built
/// against reused code that has no extracted elements.
planner::ExtractedElements elements_of_model(const std::string& code) {
  auto ast = syntax::parse_model(code);
  planner::ProcessElements p;
  p.name = "model";
  for (const auto& c : ast.constants) p.constants.push_back({c.name, c.value, ""});
  for (const auto& v : ast.variables) p.variables.push_back({v.name, "int", {}, "", ""});
  return planner::ExtractedElements{{p}};
}

}  // namespace

std::string phase_name(Phase p) {
  for (const auto& [phase, name] : phase_names()) {
    if (phase == p) return name;
  }
  return "?";
}

Phase phase_from_name(const std::string& name) {
  for (const auto& [phase, n] : phase_names()) {
    if (n == name) return phase;
  }
  throw BadRequest("unknown phase '" + name + "'");
}

std::string route_kind_name(Route::Kind k) {
  switch (k) {
    case Route::Kind::Reuse: return "Reuse";
    case Route::Kind::Fresh: return "Fresh";
    case Route::Kind::Clarify: return "Clarify";
  }
  return "?";
}

json to_json(const Route& r) {
  json j{{"kind", route_kind_name(r.kind)}};
  if (r.kind == Route::Kind::Reuse) {
    j["candidates"] = json::array();
    for (const auto& h : r.candidates) j["candidates"].push_back({{"id", h.id}, {"score", h.score}});
  }
  if (r.kind == Route::Kind::Clarify) j["question"] = r.question;
  return j;
}

Route route_description(const store::Store& store, const std::string& text, double threshold,
                        std::size_t min_tokens) {
  Route r;
  if (store.size() > 0) {
    auto hits = store.search_similar(text, 3);
    if (!hits.empty() && hits.front().score >= threshold) {
      r.kind = Route::Kind::Reuse;
      for (const auto& h : hits) {
        if (h.score >= threshold) r.candidates.push_back(h);
      }
      return r;
    }
  }
  if (text::tokenize(text).size() < min_tokens) {
    r.kind = Route::Kind::Clarify;
    r.question =
        "Could you describe the system in more detail: its components, the state each one keeps, "
        "and the actions that change that state?";
    return r;
  }
  r.kind = Route::Kind::Fresh;
  return r;
}

RequirementParts parts_from_json(const json& j) {
  RequirementParts p;
  p.kind = j.value("kind", "");
  p.process = j.value("process", "");
  p.name = j.value("name", "");
  p.conditions = conditions_from_json(j.value("conditions", json()));
  p.pattern = j.value("pattern", "");
  p.response_name = j.value("response_name", "");
  p.response = conditions_from_json(j.value("response", json()));
  if (j.contains("expected") && !j["expected"].is_null()) {
    p.expected = verify::parse_outcome(j["expected"].get<std::string>());
  }
  p.text = j.value("text", "");
  p.id = j.value("id", "");
  return p;
}

verify::Requirement build_requirement(const RequirementParts& parts,
                                      const planner::ExtractedElements& elements) {
  if (parts.process.empty()) throw IncompleteParts("requirement needs a process");
  if (!std::regex_match(parts.process, kIdentifier)) {
    throw IncompleteParts("'" + parts.process + "' is not a process name");
  }
  if (!parts.expected) throw IncompleteParts("requirement needs an expected outcome");
  std::string source;
  if (parts.kind == "deadlockfree") {
    source = "#assert " + parts.process + " deadlockfree;";
  } else if (parts.kind == "reaches") {
    if (parts.conditions.empty()) throw IncompleteParts("reaches needs at least one condition");
    require_name(parts.name, "the target predicate");
    source = "#define " + parts.name + " " + predicate(parts.conditions, elements) + ";\n#assert " +
             parts.process + " reaches " + parts.name + ";";
  } else if (parts.kind == "ltl") {
    if (parts.conditions.empty()) throw IncompleteParts("ltl needs at least one condition");
    require_name(parts.name, "the predicate");
    source = "#define " + parts.name + " " + predicate(parts.conditions, elements) + ";\n";
    std::string formula;
    if (parts.pattern == "always") {
      formula = "[] " + parts.name;
    } else if (parts.pattern == "never") {
      formula = "[] !" + parts.name;
    } else if (parts.pattern == "eventually") {
      formula = "<> " + parts.name;
    } else if (parts.pattern == "infinitely_often") {
      formula = "[] <> " + parts.name;
    } else if (parts.pattern == "leads_to") {
      if (parts.response.empty()) throw IncompleteParts("leads_to needs response conditions");
      require_name(parts.response_name, "the response predicate");
      source += "#define " + parts.response_name + " " + predicate(parts.response, elements) + ";\n";
      formula = "[] (" + parts.name + " -> <> " + parts.response_name + ")";
    } else {
      throw IncompleteParts("unknown ltl pattern '" + parts.pattern + "'");
    }
    source += "#assert " + parts.process + " |= " + formula + ";";
  } else {
    throw IncompleteParts("unknown requirement kind '" + parts.kind + "'");
  }
  return verify::make_requirement(source, *parts.expected, parts.text, parts.id);
}

json to_json(const Session& s) {
  json j;
  j["id"] = s.id;
  j["phase"] = phase_name(s.phase);
  j["token"] = s.token;
  j["description"] = s.description;
  j["context"] = json::parse(s.context.dump());
  j["route"] = s.route ? to_json(*s.route) : json(nullptr);
  j["reused_from"] = s.reused_from ? json(*s.reused_from) : json(nullptr);
  j["elements"] = s.elements ? json::parse(planner::to_json(*s.elements).dump()) : json(nullptr);
  j["plan"] = s.plan ? json::parse(planner::to_json(*s.plan).dump()) : json(nullptr);
  j["code"] = s.code;
  j["requirements"] = json::array();
  for (const auto& r : s.requirements) j["requirements"].push_back(verify::requirement_to_json(r));
  j["verdict_history"] = s.verdict_history;
  j["repairs"] = s.repairs;
  return j;
}

Session session_from_json(const json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.phase = phase_from_name(j.at("phase").get<std::string>());
  s.token = j.value("token", std::uint64_t{0});
  s.description = j.value("description", "");
  if (j.contains("context") && !j["context"].is_null()) {
    s.context = nlohmann::ordered_json::parse(j["context"].dump());
  }
  if (j.contains("route") && !j["route"].is_null()) {
    const auto& r = j["route"];
    Route route;
    const auto kind = r.at("kind").get<std::string>();
    route.kind = kind == "Reuse" ? Route::Kind::Reuse
                 : kind == "Clarify" ? Route::Kind::Clarify
                                     : Route::Kind::Fresh;
    for (const auto& c : r.value("candidates", json::array())) {
      route.candidates.push_back({c.at("id").get<std::string>(), c.at("score").get<double>()});
    }
    route.question = r.value("question", "");
    s.route = route;
  }
  if (j.contains("reused_from") && !j["reused_from"].is_null()) s.reused_from = j["reused_from"];
  if (j.contains("elements") && !j["elements"].is_null()) {
    s.elements = planner::elements_from_json(j["elements"]);
  }
  if (j.contains("plan") && !j["plan"].is_null()) s.plan = planner::plan_from_json(j["plan"]);
  s.code = j.value("code", "");
  for (const auto& r : j.value("requirements", json::array())) {
    s.requirements.push_back(verify::requirement_from_json(r));
  }
  for (const auto& v : j.value("verdict_history", json::array())) s.verdict_history.push_back(v);
  for (const auto& r : j.value("repairs", json::array())) s.repairs.push_back(r);
  return s;
}

ServiceConfig ServiceConfig::from_json(const json& j, const std::string& base_dir) {
  ServiceConfig c;
  c.base_dir = base_dir;
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  if (j.contains("store")) {
    std::filesystem::path p = j["store"].get<std::string>();
    c.store_dir = (p.is_absolute() ? p : std::filesystem::path(base_dir) / p).string();
  }
  if (j.contains("backend")) c.backend = j["backend"];
  c.similarity_threshold = j.value("similarity_threshold", c.similarity_threshold);
  c.min_description_tokens = j.value("min_description_tokens", c.min_description_tokens);
  return c;
}

ServiceConfig ServiceConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw PreconditionError(path + ": " + e.what());
  }
  auto base = std::filesystem::path(path).parent_path();
  return from_json(j, base.empty() ? "." : base.string());
}

// ---- SessionManager ---------------------------------------------------------

SessionManager::SessionManager(store::Store store, std::shared_ptr<llm::ChatBackend> backend,
                               pipeline::PipelineConfig pipeline, ServiceConfig config)
    : store_(std::move(store)),
      backend_(std::move(backend)),
      pipeline_(std::move(pipeline)),
      config_(std::move(config)) {}

std::shared_ptr<SessionManager::Slot> SessionManager::slot(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;
  auto doc = store_.load_session(id);
  if (!doc) throw NotFound("no session '" + id + "'");
  auto s = std::make_shared<Slot>();
  s->session = session_from_json(*doc);
  sessions_[id] = s;
  return s;
}

json SessionManager::snapshot(const Session& s) const { return to_json(s); }

void SessionManager::persist(const Session& s) { store_.save_session(s.id, to_json(s)); }

template <class Fn>
json SessionManager::mutate(const std::string& id, const json& body, Fn&& fn) {
  auto sl = slot(id);
  std::unique_lock write(sl->write, std::try_to_lock);
  if (!write.owns_lock()) throw Conflict("session '" + id + "' is busy with another request");
  Session working;
  {
    std::lock_guard data(sl->data);
    working = sl->session;
  }
  if (body.contains("token") && !body["token"].is_null() &&
      body["token"].get<std::uint64_t>() != working.token) {
    throw PhaseViolation("stale token " + body["token"].dump() + " (current " +
                         std::to_string(working.token) + ")");
  }
  // The working copy is only published when fn succeeds.
  json extra = fn(working);
  working.token += 1;
  persist(working);
  {
    std::lock_guard data(sl->data);
    sl->session = working;
  }
  json out = snapshot(working);
  for (auto& [k, v] : extra.items()) out[k] = v;
  return out;
}

void SessionManager::run_verification(Session& s) {
  if (s.requirements.empty()) throw PhaseViolation("no requirements to verify");
  auto report = verify::check_all(s.code, s.requirements, pipeline_.repair.check);
  s.verdict_history.push_back(verify::to_json(report));
  s.phase = report.compiled && report.all_match() ? Phase::Done : Phase::Verified;
}

json SessionManager::create(const json& body) {
  Session s;
  s.id = random_id();
  s.description = body.value("description", "");
  {
    std::lock_guard lock(sessions_mutex_);
    while (sessions_.count(s.id) || store_.load_session(s.id)) s.id = random_id();
    auto sl = std::make_shared<Slot>();
    sl->session = s;
    sessions_[s.id] = sl;
  }
  persist(s);
  return snapshot(s);
}

json SessionManager::describe(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    require_phase(s, {Phase::Describing, Phase::Reusing}, "describe the system");
    auto extract = [&] {
      s.elements = in_stage(Stage::VariableAnalysis, [&] {
        auto partial = planner::extract_variables(*backend_, s.context, pipeline_.prompts);
        return in_stage(Stage::ActionExtraction, [&] {
          return planner::extract_actions(*backend_, s.context, partial, pipeline_.prompts);
        });
      });
      s.phase = Phase::ReviewingElements;
    };
    if (s.phase == Phase::Reusing) {
      const auto choice = body.value("choice", "");
      if (choice == "reuse") {
        const auto entry_id = body.value("id", s.route && !s.route->candidates.empty()
                                                   ? s.route->candidates.front().id
                                                   : std::string());
        auto entry = store_.get(entry_id);
        if (!entry) throw NotFound("no stored model '" + entry_id + "'");
        s.reused_from = entry->id;
        s.plan = entry->plan;
        s.code = entry->code;
        s.requirements = entry->checked_requirements();
        s.phase = Phase::SpecifyingRequirements;
      } else if (choice == "fresh") {
        extract();
      } else {
        throw BadRequest("in phase Reusing the body needs choice \"reuse\" or \"fresh\"");
      }
      return json::object();
    }
    const auto text = body.value("text", "");
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw BadRequest("description text is empty");
    }
    s.description = text;
    if (body.contains("context")) {
      s.context = nlohmann::ordered_json::parse(body["context"].dump());
    } else {
      const auto name = body.value("model_name", std::string("model"));
      std::vector<planner::Subsystem> subsystems;
      for (const auto& sub : body.value("subsystems", json::array())) {
        subsystems.push_back({sub.at("name").get<std::string>(), sub.at("description").get<std::string>()});
      }
      if (subsystems.empty()) subsystems.push_back({name, text});
      s.context = in_stage(Stage::VariableAnalysis, [&] {
        return planner::build_context(name, text, body.value("interaction", ""), subsystems);
      });
    }
    s.route = body.value("fresh", false) ? Route{}
                                         : route_description(store_, text, config_.similarity_threshold,
                                                             config_.min_description_tokens);
    switch (s.route->kind) {
      case Route::Kind::Reuse: s.phase = Phase::Reusing; break;
      case Route::Kind::Clarify: s.phase = Phase::Describing; break;
      case Route::Kind::Fresh: extract(); break;
    }
    return json{{"route", to_json(*s.route)}};
  });
}

json SessionManager::get_elements(const std::string& id) {
  auto sl = slot(id);
  std::lock_guard data(sl->data);
  const auto& s = sl->session;
  return json{{"id", s.id},
              {"phase", phase_name(s.phase)},
              {"token", s.token},
              {"elements", s.elements ? json::parse(planner::to_json(*s.elements).dump()) : json(nullptr)}};
}

json SessionManager::put_elements(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    require_phase(s,
                  {Phase::ReviewingElements, Phase::SpecifyingRequirements, Phase::Planned,
                   Phase::Generated, Phase::Verified, Phase::Done},
                  "edit elements");
    if (!body.contains("elements")) throw BadRequest("body needs \"elements\"");
    auto elements = planner::elements_from_json(body["elements"]);
    auto violations = planner::validate_elements(elements);
    if (!violations.empty()) throw planner::ValidationError(planner::describe(violations));
    s.elements = std::move(elements);
    s.plan.reset();
    s.code.clear();
    s.requirements.clear();
    s.verdict_history.clear();
    s.repairs.clear();
    s.reused_from.reset();
    s.phase = Phase::ReviewingElements;
    return json::object();
  });
}

json SessionManager::put_requirements(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    require_phase(s,
                  {Phase::ReviewingElements, Phase::SpecifyingRequirements, Phase::Planned,
                   Phase::Generated, Phase::Verified, Phase::Done},
                  "set requirements");
    if (!body.contains("requirements") || !body["requirements"].is_array() ||
        body["requirements"].empty()) {
      throw BadRequest("body needs a non-empty \"requirements\" array");
    }
    std::optional<planner::ExtractedElements> known = s.elements;
    std::vector<verify::Requirement> reqs;
    const auto& list = body["requirements"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& r = list[i];
      verify::Requirement req;
      if (r.contains("kind")) {
        if (!known) {
          if (s.code.empty()) throw PhaseViolation("no elements to build requirements against");
          known = elements_of_model(s.code);
        }
        req = build_requirement(parts_from_json(r), *known);
      } else {
        req = verify::make_requirement(r.at("assertion").get<std::string>(),
                                       verify::parse_outcome(r.at("expected").get<std::string>()),
                                       r.value("text", r.value("description", std::string())),
                                       r.value("id", std::string()));
      }
      if (req.id.empty()) req.id = "R" + std::to_string(i + 1);
      reqs.push_back(std::move(req));
    }
    s.requirements = std::move(reqs);
    s.phase = !s.code.empty() ? Phase::Generated
              : s.plan        ? Phase::Planned
                              : Phase::SpecifyingRequirements;
    return json::object();
  });
}

json SessionManager::plan(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    require_phase(s, {Phase::SpecifyingRequirements, Phase::Planned}, "plan");
    if (!s.elements) throw PhaseViolation("no extracted elements to plan from");
    if (s.requirements.empty()) throw PhaseViolation("requirements must be specified before planning");
    s.plan = in_stage(Stage::InstructionGeneration, [&] {
      return planner::make_plan(*backend_, *s.elements, s.description, pipeline_.prompts);
    });
    s.code.clear();
    s.verdict_history.clear();
    s.repairs.clear();
    s.phase = Phase::Planned;
    return json::object();
  });
}

json SessionManager::code(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    if (body.contains("code")) {
      require_phase(s, {Phase::Planned, Phase::Generated, Phase::Verified, Phase::Done},
                    "edit code");
      const auto source = body["code"].get<std::string>();
      syntax::parse_model(source);  // parse gate: rejected edits never reach the session
      s.code = source;
      run_verification(s);
      return json{{"report", s.verdict_history.back()}};
    }
    require_phase(s, {Phase::Planned, Phase::Generated}, "generate code");
    if (!s.plan) throw PhaseViolation("no plan to generate from");
    json exemplar = nullptr;
    auto generated = in_stage(Stage::CodeGeneration, [&] {
      auto exemplars = store_.load_exemplars();
      std::optional<codegen::Retrieved> retrieved;
      if (!exemplars.empty()) {
        retrieved = codegen::retrieve_exemplar(*s.plan, exemplars);
        exemplar = {{"id", retrieved->exemplar.id}, {"similarity", retrieved->similarity}};
      }
      return codegen::generate_code(*backend_, *s.plan, pipeline_.cue,
                                    retrieved ? &retrieved->exemplar : nullptr, pipeline_.prompts,
                                    pipeline_.repair.max_fixups);
    });
    s.code = generated.source;
    s.verdict_history.clear();
    s.repairs.clear();
    s.phase = Phase::Generated;
    return json{{"exemplar", exemplar}, {"fixups", generated.fixups}};
  });
}

json SessionManager::verify(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    require_phase(s, {Phase::Generated, Phase::Verified, Phase::Done}, "verify");
    run_verification(s);
    json extra{{"report", s.verdict_history.back()}};
    if (s.phase == Phase::Done && body.value("save", false)) {
      if (!s.plan) throw PhaseViolation("only planned models can be saved to the store");
      store::VerifiedEntry entry;
      entry.id = body.value("id", "");
      entry.description = s.description;
      for (const auto& d : body.value("descriptors", json::array())) {
        entry.descriptors.push_back(d.get<std::string>());
      }
      for (const auto& r : s.requirements) entry.requirements.push_back(store::stored_requirement(r));
      entry.plan = *s.plan;
      entry.code = s.code;
      extra["stored_id"] = store_.add_verified(std::move(entry), pipeline_.repair.check);
    }
    return extra;
  });
}

json SessionManager::repair(const std::string& id, const json& body) {
  return mutate(id, body, [&](Session& s) -> json {
    require_phase(s, {Phase::Verified}, "repair");
    s.phase = Phase::Repairing;
    // Recheck the stored code: the directive needs the full report, traces included.
    auto report = verify::check_all(s.code, s.requirements, pipeline_.repair.check);
    auto directive = in_stage(Stage::Repair, [&] { return repair::directive_for(report, s.requirements); });
    auto revised = in_stage(Stage::Repair, [&] {
      return repair::revise_model(*backend_, s.code, directive, pipeline_.cue, pipeline_.prompts,
                                  pipeline_.repair.max_fixups);
    });
    auto summary = repair::change_summary(directive, s.code, revised.source);
    s.code = revised.source;
    s.repairs.push_back({{"directive", repair::to_json(directive)}, {"summary", summary}});
    run_verification(s);
    return json{{"summary", summary}, {"report", s.verdict_history.back()}};
  });
}

json SessionManager::get(const std::string& id) {
  auto sl = slot(id);
  std::lock_guard data(sl->data);
  return snapshot(sl->session);
}

json SessionManager::search(const std::string& query, std::size_t k) {
  json hits = json::array();
  for (const auto& h : store_.search_similar(query, k)) hits.push_back({{"id", h.id}, {"score", h.score}});
  return json{{"query", query}, {"hits", hits}};
}

// ---- HTTP -------------------------------------------------------------------

namespace {

int status_for(const Error& e) {
  const auto& k = e.kind();
  if (k == "NotFound") return 404;
  if (k == "PhaseViolation" || k == "Conflict") return 409;
  if (k == "BadRequest" || k == "PreconditionError") return 400;
  return 422;
}

json error_body(const Error& e) {
  json err{{"kind", e.kind()}, {"message", e.what()}};
  if (const auto* se = dynamic_cast<const StageError*>(&e)) {
    err["stage"] = pipeline::stage_name(se->stage());
    err["cause"] = se->cause_kind();
  }
  return json{{"error", err}};
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw BadRequest(std::string("malformed JSON body: ") + e.what());
  }
}

template <class Fn>
httplib::Server::Handler handler(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(fn(req).dump(), "application/json");
    } catch (const Error& e) {
      res.status = status_for(e);
      res.set_content(error_body(e).dump(), "application/json");
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", {{"kind", "BadRequest"}, {"message", e.what()}}}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", {{"kind", "Internal"}, {"message", e.what()}}}}.dump(),
                      "application/json");
    }
  };
}

}  // namespace

void mount(httplib::Server& server, SessionManager& m) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  const std::string sid = R"(/sessions/([A-Za-z0-9_-]+))";
  auto id = [](const httplib::Request& r) { return r.matches[1].str(); };

  server.Post("/sessions", handler([&m](const auto& r) { return m.create(parse_body(r)); }));
  server.Get(sid, handler([&m, id](const auto& r) { return m.get(id(r)); }));
  server.Post(sid + "/description",
              handler([&m, id](const auto& r) { return m.describe(id(r), parse_body(r)); }));
  server.Get(sid + "/elements", handler([&m, id](const auto& r) { return m.get_elements(id(r)); }));
  server.Put(sid + "/elements",
             handler([&m, id](const auto& r) { return m.put_elements(id(r), parse_body(r)); }));
  server.Put(sid + "/requirements",
             handler([&m, id](const auto& r) { return m.put_requirements(id(r), parse_body(r)); }));
  server.Post(sid + "/plan", handler([&m, id](const auto& r) { return m.plan(id(r), parse_body(r)); }));
  server.Post(sid + "/code", handler([&m, id](const auto& r) { return m.code(id(r), parse_body(r)); }));
  server.Post(sid + "/verify",
              handler([&m, id](const auto& r) { return m.verify(id(r), parse_body(r)); }));
  server.Post(sid + "/repair",
              handler([&m, id](const auto& r) { return m.repair(id(r), parse_body(r)); }));
  server.Get("/store/search", handler([&m](const httplib::Request& r) {
               if (!r.has_param("q")) throw BadRequest("missing query parameter q");
               std::size_t k = 5;
               if (r.has_param("k")) {
                 try {
                   k = std::stoul(r.get_param_value("k"));
                 } catch (const std::exception&) {
                   throw BadRequest("k must be a positive integer");
                 }
               }
               return m.search(r.get_param_value("q"), k);
             }));
}

void serve(const ServiceConfig& config) {
  store::Store store(config.store_dir.empty() ? store::default_store_dir()
                                              : std::filesystem::path(config.store_dir));
  std::shared_ptr<llm::ChatBackend> backend = llm::make_backend(config.backend, config.base_dir);
  SessionManager manager(std::move(store), backend, pipeline::PipelineConfig::load_default(), config);
  httplib::Server server;
  mount(server, manager);
  if (!server.listen(config.host, config.port)) {
    throw PreconditionError("cannot listen on " + config.host + ":" + std::to_string(config.port));
  }
}

}  // namespace cspforge::service
