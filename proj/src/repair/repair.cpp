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

#include "cspforge/repair/repair.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

#include "cspforge/common/overloaded.hpp"
#include "cspforge/syntax/printer.hpp"

namespace cspforge::repair {

using nlohmann::json;
using verify::Outcome;

bool is_action(const std::string& label) {
  return label != "init" && label != "τ" && label != "✓" && label != verify::kStutterLabel;
}

std::vector<Suspect> rank_suspects(const std::vector<std::string>& events, double recency_weight,
                                   double frequency_weight) {
  std::vector<std::string> actions;
  for (const auto& e : events) {
    if (is_action(e)) actions.push_back(e);
  }
  const double n = static_cast<double>(actions.size());
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // last index, count
  for (std::size_t i = 0; i < actions.size(); ++i) {
    auto& s = stats[actions[i]];
    s.first = i;
    ++s.second;
  }
  std::vector<Suspect> out;
  for (const auto& [name, s] : stats) {
    double score = recency_weight * static_cast<double>(s.first + 1) / n +
                   frequency_weight * static_cast<double>(s.second) / n;
    out.push_back({name, score});
  }
  std::stable_sort(out.begin(), out.end(), [](const Suspect& a, const Suspect& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.action < b.action;
  });
  return out;
}

namespace {

std::string render_trace(const std::optional<verify::Trace>& t) {
  if (!t) return "(no trace)";
  return t->render();
}

std::string predicate_text(const verify::Requirement& req, const std::string& name) {
  for (const auto& d : req.defines) {
    if (d.name == name) return name + " (" + syntax::render_expr(*d.expr) + ")";
  }
  return name;
}

std::vector<std::string> top_actions(const std::vector<Suspect>& ranking) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranking.size() && i < kTopSuspects; ++i) out.push_back(ranking[i].action);
  return out;
}

}  // namespace

std::string RepairDirective::render() const {
  std::string s;
  if (!failure.empty()) s += failure + "\n";
  if (!ranking.empty()) {
    s += "Suspect actions (most likely first):\n";
    for (const auto& r : ranking) {
      std::ostringstream score;
      score.precision(4);
      score << r.score;
      s += "  " + r.action + " (" + score.str() + ")\n";
    }
  }
  s += "Edit commands:\n";
  for (const auto& c : commands) s += "  - " + c + "\n";
  return s;
}

json to_json(const RepairDirective& d) {
  json ranking = json::array();
  for (const auto& r : d.ranking) ranking.push_back({{"action", r.action}, {"score", r.score}});
  json j = {{"ranking", ranking}, {"commands", d.commands}, {"failure", d.failure}};
  j["requirement"] = d.requirement ? verify::requirement_to_json(*d.requirement) : json(nullptr);
  j["trace"] = d.trace ? verify::to_json(*d.trace) : json(nullptr);
  return j;
}

RepairDirective make_directives(const verify::Verdict& verdict, const verify::Requirement& req,
                                const std::vector<Suspect>& ranking) {
  if (verdict.status == verify::Status::Match) {
    throw NotAMismatch("requirement '" + verdict.assertion + "' already matches");
  }
  RepairDirective d;
  d.ranking = ranking;
  d.requirement = req;
  d.trace = verdict.trace;
  d.failure = "Requirement " + verdict.assertion + " expected " + to_string(verdict.expected) +
              " but verification returned " + to_string(verdict.raw) + ".";
  const auto top = top_actions(ranking);
  const bool expected_valid = verdict.expected == Outcome::Valid;

  std::visit(
      overloaded{
          [&](const syntax::DeadlockFree&) {
            if (expected_valid) {
              d.commands.push_back(
                  "ensure every state has at least one outgoing transition or relax overly strict "
                  "conditions");
              for (const auto& a : top) {
                d.commands.push_back("loosen guards of the actions that should follow " + a +
                                     ", or add an enabling transition after " + a);
              }
            } else {
              d.commands.push_back(
                  "the model never deadlocks although a deadlock is expected: add the blocking "
                  "condition the requirement describes");
            }
          },
          [&](const syntax::Reaches& r) {
            const auto pred = predicate_text(req, r.predicate);
            if (!expected_valid) {
              for (const auto& a : top) d.commands.push_back("tighten guard of " + a);
              d.commands.push_back("no reachable state may satisfy " + pred);
            } else {
              d.commands.push_back("loosen guards or add enabling transitions so that a state "
                                   "satisfying " + pred + " becomes reachable");
              for (const auto& a : top) d.commands.push_back("loosen guard of " + a);
            }
          },
          [&](const syntax::Ltl& l) {
            const auto formula = syntax::render_ltl(*l.formula);
            if (expected_valid) {
              for (const auto& a : top) {
                d.commands.push_back("loosen guards or add enabling transitions around " + a +
                                     " so that every run satisfies " + formula);
              }
              if (top.empty()) {
                d.commands.push_back("loosen guards or add enabling transitions so that every run "
                                     "satisfies " + formula);
              }
              if (!top.empty()) {
                d.commands.push_back("if " + top.front() + " itself causes the violation, tighten guard of " +
                                     top.front());
              }
            } else {
              d.commands.push_back("loosen guards or add transitions so that some run violates " +
                                   formula);
            }
          },
      },
      req.assertion.kind);
  return d;
}

RepairDirective model_error_directive(const verify::CheckReport& report) {
  RepairDirective d;
  d.failure = "The model fails before verification: " + report.error_kind + ": " + report.error;
  d.commands.push_back("fix the " + report.error_kind + " reported above without changing the "
                       "intended behaviour");
  if (report.error_kind == "EvaluationError") {
    d.commands.push_back("keep every assignment within the declared variable ranges and avoid "
                         "division by zero and out-of-bounds indexing");
  }
  if (report.error_kind == "NameError" || report.error_kind == "UnknownPredicate") {
    d.commands.push_back("make every name used by the requirements exist in the model and keep "
                         "model names distinct from requirement #define names");
  }
  return d;
}

RepairDirective directive_for(const verify::CheckReport& report,
                              const std::vector<verify::Requirement>& reqs) {
  if (!report.compiled) return model_error_directive(report);
  if (!report.first_mismatch) throw NotAMismatch("every requirement matches");
  const auto k = *report.first_mismatch;
  const auto& v = report.verdicts[k];
  std::vector<Suspect> ranking;
  if (v.trace) ranking = rank_suspects(v.trace->events);
  return make_directives(v, reqs[k], ranking);
}

llm::ChatRequest repair_request(const std::string& source, const RepairDirective& directive,
                                const codegen::SyntaxCue& cue, const planner::PromptLibrary& prompts) {
  std::string requirement = "(model error, no requirement checked)";
  if (directive.requirement) {
    requirement = directive.requirement->source + "\nExpected outcome: " +
                  to_string(directive.requirement->expected);
  }
  std::string trace = render_trace(directive.trace);
  if (directive.trace && directive.trace->lasso_start) {
    trace += "\n(the events from position " + std::to_string(*directive.trace->lasso_start) +
             " on repeat forever)";
  }
  return prompts.get("repair")
      .fill({{"code", source},
             {"requirement", requirement},
             {"trace", trace},
             {"directives", directive.render()},
             {"syntax_doc", cue.documentation},
             {"common_errors", cue.render_errors()}})
      .to_request(llm::ResponseFormat::Free);
}

codegen::Generated revise_model(llm::ChatBackend& backend, const std::string& source,
                                const RepairDirective& directive, const codegen::SyntaxCue& cue,
                                const planner::PromptLibrary& prompts, int max_fixups) {
  auto reply = backend.complete(repair_request(source, directive, cue, prompts));
  return codegen::parse_gate(backend, reply, cue, prompts, max_fixups);
}

json to_json(const RepairOutcome& o) {
  json history = json::array();
  for (const auto& r : o.history) history.push_back(verify::to_json(r));
  json directives = json::array();
  for (const auto& d : o.directives) directives.push_back(to_json(d));
  return {{"success", o.success},
          {"final_report", verify::to_json(o.final_report)},
          {"repair_seconds", o.repair_seconds},
          {"verification_seconds", o.verification_seconds},
          {"rounds_used", o.rounds_used},
          {"verification_passes", o.verification_passes},
          {"final_source", o.final_source},
          {"history", history},
          {"sources", o.sources},
          {"directives", directives},
          {"counterexample", o.counterexample ? verify::to_json(*o.counterexample) : json(nullptr)}};
}

RepairOutcome repair_loop(llm::ChatBackend& backend, const std::string& model0,
                          const std::vector<verify::Requirement>& reqs, const codegen::SyntaxCue& cue,
                          const planner::PromptLibrary& prompts, const RepairOptions& options) {
  if (reqs.empty()) throw PreconditionError("repair needs at least one requirement");
  RepairOutcome out;
  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
  };
  auto verify_now = [&](const std::string& source) {
    auto t = Clock::now();
    auto r = verify::check_all(source, reqs, options.check);
    out.verification_seconds += seconds_since(t);
    ++out.verification_passes;
    return r;
  };
  std::string current = model0;
  verify::CheckReport verified = verify_now(current);
  verify::CheckReport round = verified;
  for (int k = 0;; ++k) {
    out.history.push_back(round);
    out.sources.push_back(current);
    out.rounds_used = k;
    if (round.compiled && round.all_match()) {
      out.success = true;
      break;
    }
    if (k >= options.k_max) break;
    auto directive = directive_for(verified, reqs);
    out.directives.push_back(directive);
    auto t = Clock::now();
    try {
      auto revised = revise_model(backend, current, directive, cue, prompts, options.max_fixups);
      out.repair_seconds += seconds_since(t);
      current = revised.source;
      verified = verify_now(current);
      round = verified;
    } catch (const codegen::UnparseableAfterRetries& e) {
      out.repair_seconds += seconds_since(t);
      round = verify::CheckReport{};
      round.error_kind = e.kind();
      round.error = e.diagnostics();
    }
  }
  out.final_source = current;
  out.final_report = verified;
  out.counterexample = verified.counterexample;
  return out;
}

std::string line_diff(const std::string& before, const std::string& after) {
  auto split = [](const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
  };
  const auto a = split(before), b = split(after);
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::string out;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      ++i;
      ++j;
    } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
      out += "- " + a[i++] + "\n";
    } else {
      out += "+ " + b[j++] + "\n";
    }
  }
  return out;
}

std::string change_summary(const RepairDirective& d, const std::string& before,
                           const std::string& after) {
  std::string s = d.failure.empty() ? "" : d.failure + "\n";
  s += "Applied directives:\n";
  for (const auto& c : d.commands) s += "  - " + c + "\n";
  auto diff = line_diff(before, after);
  s += diff.empty() ? "The model text did not change.\n" : "Changes:\n" + diff;
  return s;
}

}  // namespace cspforge::repair
