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

#include "cspforge/planner/prompt.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace cspforge::planner {

namespace {

const std::regex& slot_pattern() {
  static const std::regex re(R"(\{([a-z_]+)\})");
  return re;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void SemanticPrompt::check_complete() const {
  std::vector<std::string> missing;
  if (trim(role).empty()) missing.push_back("role");
  if (trim(context).empty()) missing.push_back("context");
  if (trim(structure).empty()) missing.push_back("structure");
  if (rules.empty()) missing.push_back("rules");
  if (!missing.empty()) {
    std::string msg = "semantic prompt is missing:";
    for (const auto& m : missing) msg += " " + m;
    throw TemplateError(msg);
  }
}

llm::ChatRequest SemanticPrompt::to_request(llm::ResponseFormat format) const {
  check_complete();
  llm::ChatRequest req;
  req.system = role;
  std::string user = "## Context\n" + context + "\n\n## Output structure\n" + structure +
                     "\n\n## Rules\n";
  for (const auto& r : rules) user += "- " + r + "\n";
  req.user = user;
  req.format = format;
  return req;
}

PromptTemplate PromptTemplate::parse(const std::string& text, const std::string& name) {
  static const std::set<std::string> known = {"role", "context", "structure", "rules"};
  PromptTemplate t;
  t.name_ = name;
  std::istringstream in(text);
  std::string line, current;
  while (std::getline(in, line)) {
    if (line.size() > 2 && line.front() == '[' && line.back() == ']' &&
        known.count(line.substr(1, line.size() - 2))) {
      current = line.substr(1, line.size() - 2);
      if (t.sections_.count(current)) throw TemplateError(name + ": duplicate section " + line);
      t.sections_[current];
      continue;
    }
    if (current.empty()) {
      if (!trim(line).empty() && line.rfind("#", 0) != 0) {
        throw TemplateError(name + ": text before the first section");
      }
      continue;
    }
    t.sections_[current] += line + "\n";
  }
  for (const auto& s : known) {
    if (!t.sections_.count(s)) throw TemplateError(name + ": missing section [" + s + "]");
  }
  return t;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot read prompt template " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::filesystem::path(path).stem().string());
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::set<std::string> names;
  for (const auto& [_, body] : sections_) {
    for (std::sregex_iterator it(body.begin(), body.end(), slot_pattern()), end; it != end; ++it) {
      names.insert((*it)[1]);
    }
  }
  return {names.begin(), names.end()};
}

SemanticPrompt PromptTemplate::fill(const std::map<std::string, std::string>& values) const {
  std::set<std::string> unfilled;
  auto subst = [&](const std::string& body) {
    std::string out;
    std::size_t last = 0;
    for (std::sregex_iterator it(body.begin(), body.end(), slot_pattern()), end; it != end; ++it) {
      out += body.substr(last, it->position() - last);
      auto v = values.find((*it)[1]);
      if (v == values.end()) {
        unfilled.insert((*it)[1]);
      } else {
        out += v->second;
      }
      last = it->position() + it->length();
    }
    return out + body.substr(last);
  };
  SemanticPrompt p;
  p.role = trim(subst(sections_.at("role")));
  p.context = trim(subst(sections_.at("context")));
  p.structure = trim(subst(sections_.at("structure")));
  std::istringstream rules(subst(sections_.at("rules")));
  std::string line;
  while (std::getline(rules, line)) {
    line = trim(line);
    if (line.rfind("- ", 0) == 0) {
      p.rules.push_back(trim(line.substr(2)));
    } else if (!line.empty() && !p.rules.empty()) {
      p.rules.back() += " " + line;
    }
  }
  if (!unfilled.empty()) {
    std::string msg = name_ + ": unfilled placeholders:";
    for (const auto& u : unfilled) msg += " {" + u + "}";
    throw TemplateError(msg);
  }
  p.check_complete();
  return p;
}

PromptLibrary::PromptLibrary(std::string dir)
    : dir_(std::move(dir)), cache_(std::make_shared<Cache>()) {}

std::string PromptLibrary::default_dir() { return std::string(CSPFORGE_DATA_DIR) + "/prompts"; }

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->templates.find(name);
  if (it != cache_->templates.end()) return it->second;
  auto path = (std::filesystem::path(dir_) / (name + ".txt")).string();
  return cache_->templates.emplace(name, PromptTemplate::load(path)).first->second;
}

}  // namespace cspforge::planner
