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

#include "cspforge/planner/planner.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace cspforge::planner {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool contains_word(const std::string& text, const std::string& word) {
  if (word.empty()) return false;
  for (auto pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) {
    bool left = pos == 0 || !is_word_char(text[pos - 1]);
    auto end = pos + word.size();
    bool right = end == text.size() || !is_word_char(text[end]);
    if (left && right) return true;
  }
  return false;
}

std::vector<std::string> identifiers_in(const std::string& s) {
  static const std::regex ident(R"([A-Za-z_][A-Za-z0-9_]*)");
  std::vector<std::string> out;
  for (std::sregex_iterator it(s.begin(), s.end(), ident), end; it != end; ++it) {
    std::string id = (*it)[0];
    if (id != "true" && id != "false") out.push_back(id);
  }
  return out;
}

std::string scalar_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw SchemaError(where + " must be a string or an integer");
}

std::string string_field(const json& obj, const char* key, const std::string& where,
                         bool required) {
  if (!obj.contains(key)) {
    if (required) throw SchemaError(where + " lacks \"" + key + "\"");
    return "";
  }
  return scalar_text(obj[key], where + "." + key);
}

const json& array_field(const json& obj, const char* key, const std::string& where) {
  static const json empty = json::array();
  if (!obj.contains(key) || obj[key].is_null()) return empty;
  if (!obj[key].is_array()) throw SchemaError(where + "." + key + " must be an array");
  return obj[key];
}

}  // namespace

// ---------------------------------------------------------------------------
// Elements

std::vector<const Constant*> ExtractedElements::constants() const {
  std::vector<const Constant*> out;
  for (const auto& p : processes) {
    for (const auto& c : p.constants) out.push_back(&c);
  }
  return out;
}

std::vector<const Variable*> ExtractedElements::variables() const {
  std::vector<const Variable*> out;
  for (const auto& p : processes) {
    for (const auto& v : p.variables) out.push_back(&v);
  }
  return out;
}

std::vector<const Action*> ExtractedElements::actions() const {
  std::vector<const Action*> out;
  for (const auto& p : processes) {
    for (const auto& a : p.actions) out.push_back(&a);
  }
  return out;
}

ordered_json to_json(const ExtractedElements& e) {
  ordered_json processes = ordered_json::array();
  for (const auto& p : e.processes) {
    ordered_json consts = ordered_json::array(), vars = ordered_json::array(),
                 acts = ordered_json::array();
    for (const auto& c : p.constants) {
      consts.push_back({{"name", c.name}, {"value", c.value}, {"description", c.description}});
    }
    for (const auto& v : p.variables) {
      vars.push_back({{"name", v.name},
                      {"type", v.type},
                      {"possible_values", v.possible_values},
                      {"initial_value", v.initial_value},
                      {"description", v.description}});
    }
    for (const auto& a : p.actions) {
      acts.push_back({{"name", a.name}, {"guard", a.guard}, {"state_changes", a.state_changes}});
    }
    processes.push_back(
        {{"name", p.name}, {"constants", consts}, {"variables", vars}, {"actions", acts}});
  }
  return {{"processes", processes}};
}

ExtractedElements elements_from_json(const json& j) {
  if (!j.is_object() || !j.contains("processes") || !j["processes"].is_array()) {
    throw SchemaError("expected an object with a \"processes\" array");
  }
  ExtractedElements e;
  for (std::size_t i = 0; i < j["processes"].size(); ++i) {
    const auto& pj = j["processes"][i];
    const std::string where = "processes[" + std::to_string(i) + "]";
    if (!pj.is_object()) throw SchemaError(where + " must be an object");
    ProcessElements p;
    p.name = string_field(pj, "name", where, true);
    const auto& consts = array_field(pj, "constants", where);
    for (std::size_t k = 0; k < consts.size(); ++k) {
      const auto& c = consts[k];
      const std::string w = where + ".constants[" + std::to_string(k) + "]";
      if (!c.is_object()) throw SchemaError(w + " must be an object");
      Constant out;
      out.name = string_field(c, "name", w, true);
      if (!c.contains("value") || !c["value"].is_number_integer()) {
        throw SchemaError(w + ".value must be an integer");
      }
      out.value = c["value"].get<std::int64_t>();
      out.description = string_field(c, "description", w, false);
      p.constants.push_back(std::move(out));
    }
    const auto& vars = array_field(pj, "variables", where);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const auto& v = vars[k];
      const std::string w = where + ".variables[" + std::to_string(k) + "]";
      if (!v.is_object()) throw SchemaError(w + " must be an object");
      Variable out;
      out.name = string_field(v, "name", w, true);
      out.type = v.contains("type") ? string_field(v, "type", w, false) : "int";
      if (v.contains("possible_values")) {
        const auto& pv = v["possible_values"];
        if (pv.is_array()) {
          for (const auto& x : pv) out.possible_values.push_back(scalar_text(x, w + ".possible_values"));
        } else {
          out.possible_values.push_back(scalar_text(pv, w + ".possible_values"));
        }
      }
      out.initial_value = string_field(v, "initial_value", w, false);
      out.description = string_field(v, "description", w, false);
      p.variables.push_back(std::move(out));
    }
    const auto& acts = array_field(pj, "actions", where);
    for (std::size_t k = 0; k < acts.size(); ++k) {
      const auto& a = acts[k];
      const std::string w = where + ".actions[" + std::to_string(k) + "]";
      if (!a.is_object()) throw SchemaError(w + " must be an object");
      Action out;
      out.name = string_field(a, "name", w, true);
      out.guard = string_field(a, "guard", w, false);
      if (a.contains("state_changes") && a["state_changes"].is_array()) {
        for (const auto& s : a["state_changes"]) {
          if (!out.state_changes.empty()) out.state_changes += "; ";
          out.state_changes += scalar_text(s, w + ".state_changes");
        }
      } else {
        out.state_changes = string_field(a, "state_changes", w, false);
      }
      p.actions.push_back(std::move(out));
    }
    e.processes.push_back(std::move(p));
  }
  return e;
}

bool Violation::operator<(const Violation& o) const {
  return std::tie(rule, identifiers, message) < std::tie(o.rule, o.identifiers, o.message);
}

std::vector<Violation> validate_elements(const ExtractedElements& e) {
  std::vector<Violation> out;

  std::map<std::string, std::vector<std::string>> kinds;
  for (const auto& p : e.processes) {
    kinds[p.name].push_back("process");
    for (const auto& c : p.constants) kinds[c.name].push_back("constant");
    for (const auto& v : p.variables) kinds[v.name].push_back("variable");
  }
  for (const auto& [name, ks] : kinds) {
    if (ks.size() < 2) continue;
    std::string msg = "name '" + name + "' is declared " + std::to_string(ks.size()) + " times (";
    for (std::size_t i = 0; i < ks.size(); ++i) msg += (i ? ", " : "") + ks[i];
    out.push_back({"unique-names", {name}, msg + "); names must be unique and non-conflicting"});
  }

  // Position of each constant in declaration order (constants precede the
  // variables of their own process).
  std::map<std::string, std::size_t> const_pos;
  std::size_t pos = 0;
  std::vector<std::pair<const Variable*, std::size_t>> var_pos;
  for (const auto& p : e.processes) {
    for (const auto& c : p.constants) const_pos.emplace(c.name, pos++);
    for (const auto& v : p.variables) var_pos.emplace_back(&v, pos++);
  }
  for (const auto& [v, at] : var_pos) {
    std::set<std::string> refs;
    for (const auto& pv : v->possible_values) {
      for (auto& id : identifiers_in(pv)) refs.insert(id);
    }
    for (auto& id : identifiers_in(v->initial_value)) refs.insert(id);
    for (const auto& r : refs) {
      auto it = const_pos.find(r);
      if (it == const_pos.end()) {
        out.push_back({"undeclared-constant", {v->name, r},
                       "variable '" + v->name + "' uses '" + r +
                           "', which is not declared as a constant"});
      } else if (it->second > at) {
        out.push_back({"constants-before-variables", {v->name, r},
                       "variable '" + v->name + "' is declared before constant '" + r +
                           "'; all constants must be declared before variables"});
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string describe(const std::vector<Violation>& vs) {
  std::string s;
  for (const auto& v : vs) s += "- [" + v.rule + "] " + v.message + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Context and extraction

ordered_json build_context(const std::string& model_name, const std::string& model_desc,
                           const std::string& interaction, const std::vector<Subsystem>& subsystems) {
  if (model_desc.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw EmptyDescription("the model description is empty");
  }
  if (subsystems.empty()) throw EmptyDescription("at least one subsystem is required");
  ordered_json subs = ordered_json::array();
  for (const auto& s : subsystems) subs.push_back({{"name", s.name}, {"description", s.description}});
  return {{"modelName", model_name},
          {"modelDesc", model_desc},
          {"interaction", interaction},
          {"subsystemCount", subsystems.size()},
          {"subsystems", subs}};
}

json extract_json(const std::string& reply) {
  try {
    return json::parse(reply);
  } catch (const json::exception&) {
  }
  for (char open : {'{', '['}) {
    const char close = open == '{' ? '}' : ']';
    auto b = reply.find(open);
    auto e = reply.rfind(close);
    if (b == std::string::npos || e == std::string::npos || e < b) continue;
    try {
      return json::parse(reply.substr(b, e - b + 1));
    } catch (const json::exception&) {
    }
  }
  std::string head = reply.substr(0, 80);
  throw SchemaError("reply is not JSON: \"" + head + (reply.size() > 80 ? "...\"" : "\""));
}

namespace {

// Runs one prompt with a single retry carrying the failure as feedback.
template <typename Parse>
ExtractedElements prompt_with_retry(llm::ChatBackend& backend, const PromptTemplate& tmpl,
                                    std::map<std::string, std::string> values, Parse parse) {
  values["feedback"] = "";
  for (int attempt = 0;; ++attempt) {
    auto req = tmpl.fill(values).to_request(llm::ResponseFormat::Json);
    auto reply = backend.complete(req);
    ExtractedElements e;
    try {
      e = parse(extract_json(reply));
    } catch (const SchemaError& ex) {
      if (attempt == 1) throw;
      values["feedback"] = std::string("Your previous reply could not be used: ") + ex.what() +
                           "\nReply again with JSON only.";
      continue;
    }
    auto vs = validate_elements(e);
    if (vs.empty()) return e;
    if (attempt == 1) throw ValidationError("extracted elements violate:\n" + describe(vs));
    values["feedback"] = "Your previous reply violated these rules:\n" + describe(vs) +
                         "Reply again with the corrected JSON.";
  }
}

}  // namespace

ExtractedElements extract_variables(llm::ChatBackend& backend, const ordered_json& context,
                                    const PromptLibrary& prompts) {
  return prompt_with_retry(backend, prompts.get("elements"), {{"context", context.dump(2)}},
                           [](const json& j) {
                             auto e = elements_from_json(j);
                             for (auto& p : e.processes) p.actions.clear();
                             return e;
                           });
}

ExtractedElements extract_actions(llm::ChatBackend& backend, const ordered_json& context,
                                  const ExtractedElements& partial, const PromptLibrary& prompts) {
  return prompt_with_retry(
      backend, prompts.get("actions"),
      {{"context", context.dump(2)}, {"elements", to_json(partial).dump(2)}},
      [&](const json& j) {
        auto found = elements_from_json(j);
        ExtractedElements merged = partial;
        for (auto& p : found.processes) {
          auto it = std::find_if(merged.processes.begin(), merged.processes.end(),
                                 [&](const ProcessElements& m) { return m.name == p.name; });
          if (it == merged.processes.end()) {
            merged.processes.push_back({p.name, {}, {}, p.actions});
          } else {
            it->actions = p.actions;
          }
        }
        return merged;
      });
}

ExtractedElements extract_elements(llm::ChatBackend& backend, const ordered_json& context,
                                   const PromptLibrary& prompts) {
  return extract_actions(backend, context, extract_variables(backend, context, prompts), prompts);
}

// ---------------------------------------------------------------------------
// Plan

ordered_json to_json(const GenerationPlan& p) {
  auto j = to_json(p.elements);
  j["annotations"] = p.annotations;
  return j;
}

GenerationPlan plan_from_json(const json& j) {
  GenerationPlan p;
  p.elements = elements_from_json(j);
  if (j.contains("annotations")) {
    for (const auto& a : j["annotations"]) {
      if (!a.is_string()) throw SchemaError("annotations must be strings");
      p.annotations.push_back(a.get<std::string>());
    }
  }
  return p;
}

std::string plan_text(const GenerationPlan& p) {
  std::string s;
  for (const auto& proc : p.elements.processes) s += proc.name + "\n";
  for (const auto& a : p.annotations) s += a + "\n";
  return s;
}

std::vector<std::size_t> annotations_for(const GenerationPlan& p, const std::string& action) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.annotations.size(); ++i) {
    if (contains_word(p.annotations[i], action)) out.push_back(i);
  }
  return out;
}

std::string default_annotation(const Action& a) {
  std::string changes = a.state_changes.empty() ? "no variable change" : a.state_changes;
  if (a.guard.empty()) return "The action \"" + a.name + "\" is always enabled and makes " + changes;
  return "If " + a.guard + ", the action \"" + a.name + "\" makes " + changes;
}

namespace {

std::vector<std::string> parse_annotations(const std::string& reply) {
  std::vector<std::string> out;
  try {
    auto j = extract_json(reply);
    const json* arr = nullptr;
    if (j.is_object() && j.contains("annotations")) arr = &j["annotations"];
    if (j.is_array()) arr = &j;
    if (arr && arr->is_array()) {
      for (const auto& a : *arr) {
        if (a.is_string() && !a.get<std::string>().empty()) out.push_back(a.get<std::string>());
      }
      return out;
    }
  } catch (const SchemaError&) {
  }
  static const std::regex lead(R"(^\s*(//+|[-*]|\d+[.)])?\s*)");
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("```", 0) == 0) continue;
    line = std::regex_replace(line, lead, "", std::regex_constants::format_first_only);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

GenerationPlan make_plan(llm::ChatBackend& backend, const ExtractedElements& elements,
                         const std::string& descriptions, const PromptLibrary& prompts) {
  auto req = prompts.get("plan")
                 .fill({{"descriptions", descriptions}, {"elements", to_json(elements).dump(2)}})
                 .to_request(llm::ResponseFormat::Json);
  GenerationPlan plan{elements, parse_annotations(backend.complete(req))};
  if (plan.annotations.empty()) throw EmptyPlan("the backend returned no plan annotations");
  for (const auto* a : elements.actions()) {
    if (annotations_for(plan, a->name).empty()) plan.annotations.push_back(default_annotation(*a));
  }
  return plan;
}

}  // namespace cspforge::planner
