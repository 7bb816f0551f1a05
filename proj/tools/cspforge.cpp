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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cspforge/harness/harness.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/pipeline/pipeline.hpp"
#include "cspforge/repair/repair.hpp"
#include "cspforge/semantics/lts.hpp"
#include "cspforge/service/service.hpp"
#include "cspforge/store/store.hpp"
#include "cspforge/syntax/parser.hpp"
#include "cspforge/syntax/printer.hpp"
#include "cspforge/verify/checks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cspforge;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path);
  out << text;
}

/// Accepts the dataset layout ([{text|description, assertion, expected, id?}]).
std::vector<verify::Requirement> load_requirements(const std::string& path) {
  auto doc = json::parse(read_file(path));
  std::vector<verify::Requirement> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& r = doc[i];
    auto text = r.value("text", r.value("description", std::string()));
    out.push_back(verify::make_requirement(r.at("assertion").get<std::string>(),
                                           verify::parse_outcome(r.at("expected").get<std::string>()),
                                           text, r.value("id", "R" + std::to_string(i + 1))));
  }
  return out;
}

void print_report(const verify::CheckReport& report, bool as_json) {
  if (as_json) {
    std::cout << verify::to_json(report).dump(2) << "\n";
    return;
  }
  if (!report.compiled) {
    std::cout << "model error (" << report.error_kind << "): " << report.error << "\n";
    return;
  }
  for (const auto& v : report.verdicts) {
    std::cout << verify::to_string(v.status) << "  raw " << verify::to_string(v.raw) << "  expected "
              << verify::to_string(v.expected) << "  " << v.assertion << "\n";
    if (v.trace) std::cout << "    trace: " << v.trace->render() << "\n";
  }
  std::cout << report.matches() << "/" << report.verdicts.size() << " match\n";
}

int run_parse(const std::string& file, bool render) {
  auto ast = syntax::parse_model(read_file(file));
  if (render) {
    std::cout << syntax::render_model(ast);
  } else {
    std::cout << "ok: " << ast.processes.size() << " process definitions, " << ast.asserts.size()
              << " assertions\n";
  }
  return 0;
}

int run_explore(const std::string& file, const std::string& process, std::size_t limit, bool as_json) {
  auto ast = syntax::parse_model(read_file(file));
  auto lts = semantics::explore(ast, process, limit);
  if (as_json) {
    std::cout << lts.to_json() << "\n";
  } else {
    std::size_t deadlocks = 0;
    for (std::size_t s = 0; s < lts.state_count(); ++s) deadlocks += lts.deadlocked(s) ? 1 : 0;
    std::cout << process << ": " << lts.state_count() << " states, " << lts.transition_count()
              << " transitions, " << deadlocks << " deadlocked\n";
  }
  return 0;
}

int run_check(const std::string& file, const std::string& reqs_path, bool as_json) {
  std::vector<verify::Requirement> reqs;
  if (!reqs_path.empty()) {
    reqs = load_requirements(reqs_path);
  } else {
    // The model's own #assert lines, expected VALID.
    auto ast = syntax::parse_model(read_file(file));
    for (const auto& a : ast.asserts) {
      reqs.push_back(verify::make_requirement(syntax::render_assert(a), verify::Outcome::Valid));
    }
  }
  auto report = verify::check_all(read_file(file), reqs);
  print_report(report, as_json);
  return report.compiled && report.all_match() ? 0 : 1;
}

int run_pipeline_cmd(const std::string& case_dir, int max_repair, bool no_repair, const std::string& out) {
  auto c = harness::load_case(case_dir);
  auto config = pipeline::PipelineConfig::load_default();
  config.repair.k_max = max_repair;
  config.repair_enabled = !no_repair;
  harness::HarnessConfig hc{config};
  auto backend = harness::case_backend(c, hc);
  auto result = pipeline::run_pipeline(*backend, harness::case_input(c), config);
  auto doc = pipeline::to_json(result).dump(2);
  if (!out.empty()) write_file(out, doc + "\n");
  if (result.outcome) {
    print_report(result.outcome->final_report, false);
    std::cout << "rounds used: " << result.outcome->rounds_used << "\n";
  } else {
    std::cout << "failed in " << pipeline::stage_name(*result.failed_stage) << ": "
              << result.error_kind << ": " << result.error << "\n";
  }
  return result.success() ? 0 : 1;
}

int run_repair_cmd(const std::string& file, const std::string& reqs_path, const std::string& script,
                   int max_repair, const std::string& out) {
  auto backend = llm::ScriptedBackend::from_file(script);
  auto config = pipeline::PipelineConfig::load_default();
  config.repair.k_max = max_repair;
  auto outcome = repair::repair_loop(*backend, read_file(file), load_requirements(reqs_path),
                                     config.cue, config.prompts, config.repair);
  for (std::size_t k = 0; k < outcome.directives.size(); ++k) {
    std::cout << "round " << k + 1 << ":\n"
              << repair::change_summary(outcome.directives[k], outcome.sources[k],
                                        outcome.sources[k + 1])
              << "\n";
  }
  print_report(outcome.final_report, false);
  if (!out.empty()) write_file(out, outcome.final_source);
  return outcome.success ? 0 : 1;
}

int run_eval(const std::string& dataset, const std::string& backend, const std::string& http_config,
             int max_repair, bool no_repair, bool check_only, std::size_t parallel,
             const std::string& out, const std::string& csv) {
  harness::HarnessConfig hc{pipeline::PipelineConfig::load_default()};
  hc.pipeline.repair.k_max = max_repair;
  hc.pipeline.repair_enabled = !no_repair;
  hc.check_only = check_only;
  hc.parallel = parallel;
  if (backend == "http") {
    if (http_config.empty()) throw PreconditionError("--backend http needs --http-config");
    hc.backend = harness::BackendKind::Http;
    hc.http = json::parse(read_file(http_config));
  } else if (backend != "scripted") {
    throw PreconditionError("unknown backend '" + backend + "'");
  }
  auto records = harness::run_dataset(harness::load_dataset(dataset), hc);
  auto metrics = harness::compute_metrics(records, no_repair ? 0 : max_repair);
  for (const auto& r : metrics.records) {
    std::cout << r.id << ": " << (r.compiled ? "compiled" : "not compiled") << ", " << r.passed << "/"
              << r.total << " passed, " << r.rounds << " repair rounds";
    if (!r.error.empty()) std::cout << " (" << r.error << ")";
    std::cout << "\n";
  }
  std::cout << harness::metrics_csv(metrics);
  if (!out.empty()) write_file(out, harness::to_json(metrics).dump(2) + "\n");
  if (!csv.empty()) write_file(csv, harness::metrics_csv(metrics));
  return 0;
}

int run_store_add(const std::string& store_dir, const std::string& case_dir, const std::string& plan,
                  const std::string& id, const std::vector<std::string>& descriptors) {
  auto c = harness::load_case(case_dir);
  if (!c.golden) throw PreconditionError("case " + c.id + " has no golden.csp");
  store::VerifiedEntry entry;
  entry.id = id.empty() ? c.id : id;
  entry.description = c.description;
  entry.descriptors = descriptors;
  for (const auto& r : c.requirements) entry.requirements.push_back(store::stored_requirement(r));
  auto plan_doc = json::parse(read_file(plan));
  // A saved pipeline result carries the plan under "plan".
  entry.plan = planner::plan_from_json(plan_doc.contains("annotations") ? plan_doc : plan_doc.at("plan"));
  entry.code = *c.golden;
  store::Store st(store_dir);
  std::cout << "stored " << st.add_verified(std::move(entry)) << " (store version " << st.version()
            << ")\n";
  return 0;
}

int run_store_search(const std::string& store_dir, const std::string& query, std::size_t k) {
  store::Store st(store_dir);
  for (const auto& h : st.search_similar(query, k)) std::cout << h.id << "  " << h.score << "\n";
  return 0;
}

int run_serve(const std::string& config_path, int port) {
  auto config = config_path.empty() ? service::ServiceConfig{}
                                    : service::ServiceConfig::from_file(config_path);
  if (port > 0) config.port = port;
  service::serve(config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cspforge: CSP# modelling, verification and LLM-driven model generation"};
  app.require_subcommand(1);

  std::string file, process, reqs, case_dir, script, out, csv, dataset, backend = "scripted",
                                                                     http_config, config_path;
  bool render = false, as_json = false, no_repair = false, check_only = false;
  std::size_t limit = semantics::kDefaultStateLimit, parallel = 1;
  int max_repair = repair::kDefaultMaxRounds, port = 0;

  auto* parse = app.add_subcommand("parse", "Parse a model and report or re-render it");
  parse->add_option("file", file, "CSP# model")->required()->check(CLI::ExistingFile);
  parse->add_flag("--render", render, "Print the normalised model");

  auto* explore = app.add_subcommand("explore", "Build the transition system of a process");
  explore->add_option("file", file, "CSP# model")->required()->check(CLI::ExistingFile);
  explore->add_option("-p,--process", process, "Process to explore")->required();
  explore->add_option("--state-limit", limit, "Abort beyond this many states");
  explore->add_flag("--json", as_json, "Print the full transition system as JSON");

  auto* check = app.add_subcommand("check", "Check requirements (or the model's own assertions)");
  check->add_option("file", file, "CSP# model")->required()->check(CLI::ExistingFile);
  check->add_option("-r,--requirements", reqs, "Requirements JSON")->check(CLI::ExistingFile);
  check->add_flag("--json", as_json, "Print the verdict report as JSON");

  auto* pipe = app.add_subcommand("pipeline", "Run the full pipeline on one case directory");
  pipe->add_option("case", case_dir, "Case directory")->required()->check(CLI::ExistingDirectory);
  pipe->add_option("--max-repair", max_repair, "Repair round budget");
  pipe->add_flag("--no-repair", no_repair, "Skip the repair stage");
  pipe->add_option("-o,--out", out, "Write the pipeline result JSON here");

  auto* rep = app.add_subcommand("repair", "Run the repair loop on a model with a scripted backend");
  rep->add_option("file", file, "CSP# model")->required()->check(CLI::ExistingFile);
  rep->add_option("-r,--requirements", reqs, "Requirements JSON")->required()->check(CLI::ExistingFile);
  rep->add_option("-s,--script", script, "Scripted backend file")->required()->check(CLI::ExistingFile);
  rep->add_option("--max-repair", max_repair, "Repair round budget");
  rep->add_option("-o,--out", out, "Write the final model here");

  auto* eval = app.add_subcommand("eval", "Run a dataset and report CSR/FPR/APR");
  eval->add_option("--dataset", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--backend", backend, "scripted or http");
  eval->add_option("--http-config", http_config, "HTTP backend configuration JSON");
  eval->add_option("--max-repair", max_repair, "Repair round budget");
  eval->add_flag("--no-repair", no_repair, "Disable the repair stage");
  eval->add_flag("--check-only", check_only, "Verify each case's golden.csp instead");
  eval->add_option("--parallel", parallel, "Concurrent cases")->check(CLI::PositiveNumber);
  eval->add_option("--out", out, "Write the metrics report JSON here");
  eval->add_option("--csv", csv, "Write the metrics table CSV here");

  auto* serve = app.add_subcommand("serve", "Start the session HTTP service");
  serve->add_option("-c,--config", config_path, "Service configuration JSON")->check(CLI::ExistingFile);
  serve->add_option("--port", port, "Override the configured port");

  std::string store_dir = store::default_store_dir().string(), plan, id, query;
  std::vector<std::string> descriptors;
  std::size_t k = 3;
  auto* st = app.add_subcommand("store", "Manage the verified-model store");
  st->require_subcommand(1);
  st->add_option("--dir", store_dir, "Store directory");
  auto* st_add = st->add_subcommand("add", "Verify a case's golden model and store it");
  st_add->add_option("case", case_dir, "Case directory")->required()->check(CLI::ExistingDirectory);
  st_add->add_option("--plan", plan, "Generation plan JSON, or a pipeline result holding one")->required()->check(CLI::ExistingFile);
  st_add->add_option("--id", id, "Entry id (default: the case id)");
  st_add->add_option("--descriptor", descriptors, "Search keyword (repeatable)");
  auto* st_search = st->add_subcommand("search", "Rank stored models against a description");
  st_search->add_option("query", query, "Description")->required();
  st_search->add_option("-k", k, "Number of hits")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*parse) return run_parse(file, render);
    if (*explore) return run_explore(file, process, limit, as_json);
    if (*check) return run_check(file, reqs, as_json);
    if (*pipe) return run_pipeline_cmd(case_dir, max_repair, no_repair, out);
    if (*rep) return run_repair_cmd(file, reqs, script, max_repair, out);
    if (*eval) return run_eval(dataset, backend, http_config, max_repair, no_repair, check_only,
                               parallel, out, csv);
    if (*st_add) return run_store_add(store_dir, case_dir, plan, id, descriptors);
    if (*st_search) return run_store_search(store_dir, query, k);
    if (*serve) return run_serve(config_path, port);
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
