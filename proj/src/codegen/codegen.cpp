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

#include "cspforge/codegen/codegen.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "cspforge/syntax/parser.hpp"
#include "cspforge/text/tfidf.hpp"

namespace cspforge::codegen {

using planner::GenerationPlan;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool word_at(const std::string& text, const std::string& word) {
  static const auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  for (auto pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) {
    auto end = pos + word.size();
    if ((pos == 0 || !is_word(text[pos - 1])) && (end == text.size() || !is_word(text[end]))) {
      return true;
    }
  }
  return false;
}

std::string quote_regex(const std::string& s) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  return std::regex_replace(s, special, R"(\$&)");
}

}  // namespace

SyntaxCue SyntaxCue::load(const std::string& doc_path, const std::string& errors_path) {
  SyntaxCue cue;
  cue.documentation = read_text(doc_path);
  auto j = nlohmann::json::parse(read_text(errors_path));
  for (const auto& e : j) {
    cue.errors.push_back({e.at("pattern").get<std::string>(), e.at("hint").get<std::string>()});
  }
  cue.validate();
  return cue;
}

SyntaxCue SyntaxCue::load_default() {
  const std::string dir = std::string(CSPFORGE_DATA_DIR) + "/syntax/";
  return load(dir + "doc.txt", dir + "errors.json");
}

void SyntaxCue::validate() const {
  if (documentation.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw PreconditionError("syntax cue documentation is empty");
  }
  if (errors.empty()) throw PreconditionError("syntax cue lists no common errors");
}

std::string SyntaxCue::render_errors() const {
  std::string s;
  for (const auto& e : errors) s += "- Avoid " + e.pattern + ": " + e.hint + "\n";
  return s;
}

Retrieved retrieve_exemplar(const GenerationPlan& plan, const std::vector<Exemplar>& exemplars) {
  if (exemplars.empty()) throw EmptyStore("no exemplars to retrieve from");
  std::vector<std::string> docs;
  for (const auto& e : exemplars) docs.push_back(planner::plan_text(e.plan));
  text::TfIdf model(docs);
  auto sims = model.similarities(planner::plan_text(plan));
  std::size_t best = 0;
  for (std::size_t i = 1; i < exemplars.size(); ++i) {
    if (sims[i] > sims[best] || (sims[i] == sims[best] && exemplars[i].id < exemplars[best].id)) {
      best = i;
    }
  }
  return {exemplars[best], sims[best]};
}

std::string interleave_plan(const GenerationPlan& plan, const std::string& code) {
  std::vector<std::string> lines;
  {
    std::istringstream in(code);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  // Declaration patterns per named element.
  std::vector<std::pair<std::string, std::regex>> targets;
  for (const auto* a : plan.elements.actions()) {
    targets.emplace_back(a->name, std::regex("(^|[^A-Za-z0-9_])" + quote_regex(a->name) +
                                             R"(\s*(\{|->))"));
  }
  for (const auto* v : plan.elements.variables()) {
    targets.emplace_back(v->name, std::regex(R"(^\s*var\s+)" + quote_regex(v->name) + R"(\b)"));
  }
  for (const auto* c : plan.elements.constants()) {
    targets.emplace_back(c->name, std::regex(R"(^\s*#define\s+)" + quote_regex(c->name) + R"(\b)"));
  }

  std::vector<std::vector<std::string>> above(lines.size());
  std::vector<std::string> header;
  for (const auto& ann : plan.annotations) {
    std::optional<std::size_t> at;
    for (const auto& [name, re] : targets) {
      if (!word_at(ann, name)) continue;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (std::regex_search(lines[i], re)) {
          at = i;
          break;
        }
      }
      if (at) break;
    }
    if (at) {
      above[*at].push_back(ann);
    } else {
      header.push_back(ann);
    }
  }
  std::string out;
  for (const auto& h : header) out += "// " + h + "\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string indent = lines[i].substr(0, lines[i].find_first_not_of(" \t"));
    if (indent.size() == lines[i].size()) indent.clear();
    for (const auto& a : above[i]) out += indent + "// " + a + "\n";
    out += lines[i] + "\n";
  }
  return out;
}

std::string extract_code(const std::string& reply) {
  static const std::regex fence(R"(```([A-Za-z#+]*)[^\n]*\n([\s\S]*?)```)");
  std::optional<std::string> first;
  for (std::sregex_iterator it(reply.begin(), reply.end(), fence), end; it != end; ++it) {
    std::string tag = (*it)[1];
    std::transform(tag.begin(), tag.end(), tag.begin(), ::tolower);
    if (tag == "csp" || tag == "csp#" || tag == "pat") return (*it)[2];
    if (!first) first = (*it)[2];
  }
  if (first) return *first;
  return reply;
}

Generated parse_gate(llm::ChatBackend& backend, const std::string& reply, const SyntaxCue& cue,
                     const planner::PromptLibrary& prompts, int max_fixups) {
  std::string source = extract_code(reply);
  for (int fix = 0;; ++fix) {
    std::string diagnostic;
    try {
      auto ast = syntax::parse_model(source);
      return {source, std::move(ast), fix};
    } catch (const Error& e) {
      diagnostic = e.kind() + ": " + e.what();
    }
    if (fix >= max_fixups) throw UnparseableAfterRetries(diagnostic);
    auto req = prompts.get("codegen_fix")
                   .fill({{"code", source},
                          {"diagnostics", diagnostic},
                          {"syntax_doc", cue.documentation},
                          {"common_errors", cue.render_errors()}})
                   .to_request(llm::ResponseFormat::Free);
    source = extract_code(backend.complete(req));
  }
}

llm::ChatRequest generation_request(const GenerationPlan& plan, const SyntaxCue& cue,
                                    const Exemplar* exemplar, const planner::PromptLibrary& prompts) {
  if (plan.annotations.empty()) throw PreconditionError("the generation plan is empty");
  std::string annotations;
  for (const auto& a : plan.annotations) annotations += "// " + a + "\n";
  std::string shown = "(no stored example)";
  if (exemplar) shown = "```csp\n" + interleave_plan(exemplar->plan, exemplar->code) + "```";
  return prompts.get("codegen")
      .fill({{"annotations", annotations},
             {"exemplar", shown},
             {"syntax_doc", cue.documentation},
             {"common_errors", cue.render_errors()}})
      .to_request(llm::ResponseFormat::Free);
}

Generated generate_code(llm::ChatBackend& backend, const GenerationPlan& plan, const SyntaxCue& cue,
                        const Exemplar* exemplar, const planner::PromptLibrary& prompts,
                        int max_fixups) {
  auto reply = backend.complete(generation_request(plan, cue, exemplar, prompts));
  return parse_gate(backend, reply, cue, prompts, max_fixups);
}

}  // namespace cspforge::codegen
