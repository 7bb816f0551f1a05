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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspforge/common/error.hpp"
#include "cspforge/pipeline/pipeline.hpp"
#include "cspforge/verify/checks.hpp"

namespace cspforge::harness {

CSPFORGE_DEFINE_ERROR(EmptyRecords);
CSPFORGE_DEFINE_ERROR(DatasetError);

/// One directory: description.txt, requirements.json ([{text, assertion,
/// expected}]), and optionally golden.csp, context.json, script.json and
/// case.json ({"dataset": tag}).
struct DatasetCase {
  std::string id;
  std::string dataset = "custom";  // PAT, UCS, A4F or custom
  std::string description;
  std::vector<verify::Requirement> requirements;
  std::optional<std::string> golden;
  std::optional<nlohmann::json> context;
  std::filesystem::path dir;
};

DatasetCase load_case(const std::filesystem::path& dir);
/// Every case directory below `dir`, ordered by id.
std::vector<DatasetCase> load_dataset(const std::filesystem::path& dir);

struct RoundSnapshot {
  bool compiled = false;
  std::size_t passed = 0;
};

struct CaseRecord {
  std::string id;
  std::string dataset = "custom";
  bool compiled = false;
  std::size_t passed = 0;  // p_i
  std::size_t total = 0;   // A_i
  int rounds = 0;
  bool reached_verification = false;
  std::vector<RoundSnapshot> history;
  std::map<std::string, double> timings;
  std::string final_source;
  std::string error;

  bool full_pass() const { return compiled && total > 0 && passed == total; }
};

nlohmann::json to_json(const CaseRecord& r);
CaseRecord record_from_json(const nlohmann::json& j);

struct MetricsRow {
  std::string group;
  std::size_t n = 0;
  std::size_t compiled = 0;    // |S_succ|
  std::size_t full_pass = 0;   // |S_full|
  std::size_t passed = 0;      // Σ p_i
  std::size_t assertions = 0;  // Σ A_i
  double csr = 0, fpr = 0, apr = 0;
};

struct RoundRow {
  int round = 0;
  double csr = 0, fpr = 0, apr = 0;
};

struct MetricsReport {
  MetricsRow overall;
  std::vector<MetricsRow> per_dataset;  // sorted by tag
  std::vector<RoundRow> per_round;
  std::map<std::string, double> mean_timings;  // over cases that reached verification
  std::vector<CaseRecord> records;             // sorted by id
};

MetricsRow metrics_row(const std::string& group, const std::vector<const CaseRecord*>& records);

/// CSR = |S_succ|/N, FPR = |S_full|/N, APR = Σp_i/ΣA_i. Throws EmptyRecords.
MetricsReport compute_metrics(std::vector<CaseRecord> records, int k_max = 5);

/// Metrics as if every case had halted after round r, r = 0..k_max; a case
/// contributes its best snapshot up to round r.
std::vector<RoundRow> per_round_breakdown(const std::vector<CaseRecord>& records, int k_max = 5);

nlohmann::json to_json(const MetricsReport& m);
/// Overall and per-dataset rows, then the per-round rows.
std::string metrics_csv(const MetricsReport& m);

enum class BackendKind { Scripted, Http };

struct HarnessConfig {
  pipeline::PipelineConfig pipeline;
  BackendKind backend = BackendKind::Scripted;
  nlohmann::json http;  // HttpConfig document for BackendKind::Http
  bool check_only = false;  // verify golden.csp without the pipeline
  std::size_t parallel = 1;
};

/// Scripted: the case's script.json; Http: the configured endpoint.
std::unique_ptr<llm::ChatBackend> case_backend(const DatasetCase& c, const HarnessConfig& config);
/// The case's context.json, or a one-subsystem context built from its description.
pipeline::PipelineInput case_input(const DatasetCase& c);

CaseRecord run_case(const DatasetCase& c, const HarnessConfig& config);
/// Runs the cases with up to `parallel` workers; records come back in id order.
std::vector<CaseRecord> run_dataset(const std::vector<DatasetCase>& cases, const HarnessConfig& config);

}  // namespace cspforge::harness
