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

#include "cspforge/harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "cspforge/planner/planner.hpp"

namespace cspforge::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DatasetError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw DatasetError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

}  // namespace

DatasetCase load_case(const fs::path& dir) {
  DatasetCase c;
  c.dir = dir;
  c.id = dir.filename().string();
  c.description = read_text(dir / "description.txt");
  if (fs::exists(dir / "case.json")) {
    auto meta = read_json(dir / "case.json");
    c.dataset = meta.value("dataset", "custom");
  }
  static const std::vector<std::string> tags = {"PAT", "UCS", "A4F", "custom"};
  if (std::find(tags.begin(), tags.end(), c.dataset) == tags.end()) {
    throw DatasetError("case " + c.id + " has unknown dataset tag '" + c.dataset + "'");
  }
  auto reqs = read_json(dir / "requirements.json");
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto& r = reqs[i];
    c.requirements.push_back(verify::make_requirement(
        r.at("assertion").get<std::string>(),
        verify::parse_outcome(r.at("expected").get<std::string>()), r.value("text", ""),
        r.value("id", "R" + std::to_string(i + 1))));
  }
  if (c.requirements.empty()) throw DatasetError("case " + c.id + " has no requirements");
  if (fs::exists(dir / "golden.csp")) c.golden = read_text(dir / "golden.csp");
  if (fs::exists(dir / "context.json")) c.context = read_json(dir / "context.json");
  return c;
}

std::vector<DatasetCase> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError(dir.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "description.txt")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<DatasetCase> out;
  for (const auto& d : dirs) out.push_back(load_case(d));
  return out;
}

json to_json(const CaseRecord& r) {
  json history = json::array();
  for (const auto& h : r.history) history.push_back({{"compiled", h.compiled}, {"passed", h.passed}});
  return {{"id", r.id},
          {"dataset", r.dataset},
          {"compiled", r.compiled},
          {"passed", r.passed},
          {"total", r.total},
          {"full_pass", r.full_pass()},
          {"rounds", r.rounds},
          {"reached_verification", r.reached_verification},
          {"history", history},
          {"timings", r.timings},
          {"final_source", r.final_source},
          {"error", r.error}};
}

CaseRecord record_from_json(const json& j) {
  CaseRecord r;
  r.id = j.at("id").get<std::string>();
  r.dataset = j.value("dataset", "custom");
  r.compiled = j.at("compiled").get<bool>();
  r.passed = j.at("passed").get<std::size_t>();
  r.total = j.at("total").get<std::size_t>();
  r.rounds = j.value("rounds", 0);
  r.reached_verification = j.value("reached_verification", false);
  for (const auto& h : j.value("history", json::array())) {
    r.history.push_back({h.at("compiled").get<bool>(), h.at("passed").get<std::size_t>()});
  }
  r.timings = j.value("timings", std::map<std::string, double>{});
  r.final_source = j.value("final_source", "");
  r.error = j.value("error", "");
  return r;
}

MetricsRow metrics_row(const std::string& group, const std::vector<const CaseRecord*>& records) {
  MetricsRow row;
  row.group = group;
  row.n = records.size();
  for (const auto* r : records) {
    if (r->compiled) ++row.compiled;
    if (r->full_pass()) ++row.full_pass;
    row.passed += r->compiled ? r->passed : 0;
    row.assertions += r->total;
  }
  if (row.n) {
    row.csr = static_cast<double>(row.compiled) / static_cast<double>(row.n);
    row.fpr = static_cast<double>(row.full_pass) / static_cast<double>(row.n);
  }
  if (row.assertions) row.apr = static_cast<double>(row.passed) / static_cast<double>(row.assertions);
  return row;
}

std::vector<RoundRow> per_round_breakdown(const std::vector<CaseRecord>& records, int k_max) {
  std::vector<RoundRow> rows;
  for (int round = 0; round <= k_max; ++round) {
    std::vector<CaseRecord> snap;
    for (const auto& r : records) {
      CaseRecord s;
      s.id = r.id;
      s.total = r.total;
      const auto upto = std::min<std::size_t>(static_cast<std::size_t>(round) + 1, r.history.size());
      for (std::size_t k = 0; k < upto; ++k) {
        if (!r.history[k].compiled) continue;
        s.compiled = true;
        s.passed = std::max(s.passed, r.history[k].passed);
      }
      snap.push_back(s);
    }
    std::vector<const CaseRecord*> ptrs;
    for (const auto& s : snap) ptrs.push_back(&s);
    auto row = metrics_row("", ptrs);
    rows.push_back({round, row.csr, row.fpr, row.apr});
  }
  return rows;
}

MetricsReport compute_metrics(std::vector<CaseRecord> records, int k_max) {
  if (records.empty()) throw EmptyRecords("no case records to summarise");
  std::sort(records.begin(), records.end(),
            [](const CaseRecord& a, const CaseRecord& b) { return a.id < b.id; });
  MetricsReport m;
  std::vector<const CaseRecord*> all;
  std::map<std::string, std::vector<const CaseRecord*>> groups;
  for (const auto& r : records) {
    all.push_back(&r);
    groups[r.dataset].push_back(&r);
  }
  m.overall = metrics_row("Overall", all);
  for (const auto& [tag, rs] : groups) m.per_dataset.push_back(metrics_row(tag, rs));
  m.per_round = per_round_breakdown(records, k_max);

  std::size_t reached = 0;
  for (const auto& s : pipeline::all_stages()) m.mean_timings[pipeline::stage_name(s)] = 0.0;
  for (const auto& r : records) {
    if (!r.reached_verification) continue;
    ++reached;
    for (const auto& [stage, t] : r.timings) m.mean_timings[stage] += t;
  }
  for (auto& [_, t] : m.mean_timings) t = reached ? t / static_cast<double>(reached) : 0.0;
  m.records = std::move(records);
  return m;
}

json to_json(const MetricsReport& m) {
  auto row = [](const MetricsRow& r) {
    return json{{"group", r.group},         {"N", r.n},     {"compiled", r.compiled},
                {"full_pass", r.full_pass}, {"passed", r.passed}, {"assertions", r.assertions},
                {"CSR", r.csr},             {"FPR", r.fpr}, {"APR", r.apr}};
  };
  json per_dataset = json::array();
  for (const auto& r : m.per_dataset) per_dataset.push_back(row(r));
  json rounds = json::array();
  for (const auto& r : m.per_round) {
    rounds.push_back({{"round", r.round}, {"CSR", r.csr}, {"FPR", r.fpr}, {"APR", r.apr}});
  }
  json cases = json::array();
  for (const auto& r : m.records) cases.push_back(to_json(r));
  return {{"overall", row(m.overall)},
          {"per_dataset", per_dataset},
          {"per_round", rounds},
          {"mean_timings", m.mean_timings},
          {"cases", cases}};
}

std::string metrics_csv(const MetricsReport& m) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "dataset,N,compiled,full_pass,CSR,FPR,APR\n";
  auto row = [&](const MetricsRow& r) {
    out << r.group << ',' << r.n << ',' << r.compiled << ',' << r.full_pass << ',' << r.csr << ','
        << r.fpr << ',' << r.apr << '\n';
  };
  for (const auto& r : m.per_dataset) row(r);
  row(m.overall);
  out << "\nround,CSR,FPR,APR\n";
  for (const auto& r : m.per_round) {
    out << r.round << ',' << r.csr << ',' << r.fpr << ',' << r.apr << '\n';
  }
  return out.str();
}

std::unique_ptr<llm::ChatBackend> case_backend(const DatasetCase& c, const HarnessConfig& config) {
  if (config.backend == BackendKind::Scripted) {
    auto script = c.dir / "script.json";
    if (!fs::exists(script)) throw DatasetError("case " + c.id + " has no script.json");
    return llm::ScriptedBackend::from_file(script.string());
  }
  return std::make_unique<llm::HttpBackend>(llm::HttpConfig::from_json(config.http));
}

pipeline::PipelineInput case_input(const DatasetCase& c) {
  pipeline::PipelineInput input;
  input.context = c.context ? nlohmann::ordered_json::parse(c.context->dump())
                            : planner::build_context(c.id, c.description, "",
                                                     {{c.id, c.description}});
  input.descriptions = c.description;
  input.requirements = c.requirements;
  return input;
}

CaseRecord run_case(const DatasetCase& c, const HarnessConfig& config) {
  CaseRecord rec;
  rec.id = c.id;
  rec.dataset = c.dataset;
  rec.total = c.requirements.size();
  try {
    if (config.check_only) {
      if (!c.golden) throw DatasetError("case " + c.id + " has no golden.csp");
      auto t = std::chrono::steady_clock::now();
      auto report = verify::check_all(*c.golden, c.requirements,
                                      config.pipeline.repair.check);
      rec.timings[pipeline::stage_name(pipeline::Stage::Verification)] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
      rec.reached_verification = true;
      rec.compiled = report.compiled;
      rec.passed = report.compiled ? report.matches() : 0;
      rec.history.push_back({rec.compiled, rec.passed});
      rec.final_source = *c.golden;
      if (!report.compiled) rec.error = report.error_kind + ": " + report.error;
      return rec;
    }
    auto backend = case_backend(c, config);
    auto result = pipeline::run_pipeline(*backend, case_input(c), config.pipeline);
    rec.timings = result.timings;
    if (result.outcome) {
      const auto& o = *result.outcome;
      rec.reached_verification = true;
      rec.rounds = o.rounds_used;
      for (const auto& h : o.history) rec.history.push_back({h.compiled, h.compiled ? h.matches() : 0});
      rec.compiled = o.final_report.compiled;
      rec.passed = rec.compiled ? o.final_report.matches() : 0;
      rec.final_source = o.final_source;
      if (!rec.compiled) rec.error = o.final_report.error_kind + ": " + o.final_report.error;
    } else {
      rec.error = pipeline::stage_name(*result.failed_stage) + ": " + result.error_kind + ": " +
                  result.error;
      if (result.generated) rec.final_source = result.generated->source;
    }
  } catch (const std::exception& e) {
    rec.compiled = false;
    rec.passed = 0;
    rec.error = e.what();
  }
  return rec;
}

std::vector<CaseRecord> run_dataset(const std::vector<DatasetCase>& cases, const HarnessConfig& config) {
  std::vector<CaseRecord> out(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) out[i] = run_case(cases[i], config);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(config.parallel, cases.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  std::sort(out.begin(), out.end(), [](const CaseRecord& a, const CaseRecord& b) { return a.id < b.id; });
  return out;
}

}  // namespace cspforge::harness
