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

#include "cspforge/harness/harness.hpp"
#include "cspforge/verify/checks.hpp"

using namespace cspforge::harness;
using cspforge::testing::data_path;
using cspforge::testing::TempDir;
using nlohmann::json;

namespace {

CaseRecord rec(const std::string& id, bool compiled, std::size_t passed, std::size_t total,
               const std::string& dataset = "custom") {
  CaseRecord r;
  r.id = id;
  r.dataset = dataset;
  r.compiled = compiled;
  r.passed = passed;
  r.total = total;
  r.history = {{compiled, passed}};
  return r;
}

struct Naive {
  double csr, fpr, apr;
};

Naive naive(const std::vector<CaseRecord>& rs) {
  double c = 0, f = 0, p = 0, a = 0;
  for (const auto& r : rs) {
    c += r.compiled;
    f += r.compiled && r.passed == r.total && r.total > 0;
    p += r.compiled ? static_cast<double>(r.passed) : 0.0;
    a += static_cast<double>(r.total);
  }
  return {c / rs.size(), f / rs.size(), a == 0 ? 0 : p / a};
}

HarnessConfig scripted(bool repair = true) {
  HarnessConfig cfg;
  cfg.pipeline = cspforge::pipeline::PipelineConfig::load_default();
  cfg.pipeline.repair_enabled = repair;
  cfg.parallel = 3;
  return cfg;
}

}  // namespace

TEST_CASE("two-case metrics") {
  // p = (3, 1), A = (4, 2): both compile, neither passes every assertion.
  auto m = compute_metrics({rec("a", true, 3, 4), rec("b", true, 1, 2)});
  CHECK(m.overall.csr == 1.0);
  CHECK(m.overall.fpr == 0.0);
  CHECK(m.overall.apr == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

  auto m2 = compute_metrics({rec("a", true, 3, 3), rec("b", true, 1, 3)});
  CHECK(m2.overall.fpr == 0.5);
  CHECK(m2.overall.apr == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

  auto m3 = compute_metrics({rec("a", true, 4, 4), rec("b", true, 0, 2)});
  CHECK(m3.overall.csr == 1.0);
  CHECK(m3.overall.fpr == 0.5);
  CHECK(m3.overall.apr == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("forty cases with nineteen full passes") {
  std::vector<CaseRecord> rs;
  for (int i = 0; i < 40; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "c%02d", i);
    rs.push_back(i < 19 ? rec(id, true, 5, 5) : rec(id, i % 2 == 0, 2, 5));
  }
  auto m = compute_metrics(rs);
  CHECK(m.overall.n == 40);
  CHECK(m.overall.full_pass == 19);
  CHECK(m.overall.fpr == doctest::Approx(0.475).epsilon(1e-12));
  auto n = naive(rs);
  CHECK(m.overall.csr == doctest::Approx(n.csr));
  CHECK(m.overall.apr == doctest::Approx(n.apr));
}

TEST_CASE("an uncompiled case contributes its assertions but no passes") {
  auto m = compute_metrics({rec("a", false, 0, 3), rec("b", true, 3, 3)});
  CHECK(m.overall.csr == 0.5);
  CHECK(m.overall.fpr == 0.5);
  CHECK(m.overall.apr == 0.5);
  CHECK_THROWS_AS(compute_metrics({}), EmptyRecords);
}

TEST_CASE("metrics agree with a naive computation and ignore record order") {
  std::mt19937 rng(5);
  const std::vector<std::string> tags = {"A4F", "PAT", "UCS", "custom"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CaseRecord> rs;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      std::size_t total = 1 + rng() % 5;
      bool compiled = rng() % 4 != 0;
      auto r = rec("c" + std::to_string(i), compiled, compiled ? rng() % (total + 1) : 0, total, tags[rng() % 4]);
      r.history.clear();
      for (int k = 0; k <= static_cast<int>(rng() % 6); ++k) r.history.push_back({rng() % 3 != 0, rng() % (total + 1)});
      rs.push_back(r);
    }
    auto m = compute_metrics(rs);
    auto want = naive(rs);
    CHECK(m.overall.csr == doctest::Approx(want.csr));
    CHECK(m.overall.fpr == doctest::Approx(want.fpr));
    CHECK(m.overall.apr == doctest::Approx(want.apr));
    for (const auto& row : m.per_dataset) {
      std::vector<CaseRecord> sub;
      for (const auto& r : rs)
        if (r.dataset == row.group) sub.push_back(r);
      auto w = naive(sub);
      CHECK(row.n == sub.size());
      CHECK(row.fpr == doctest::Approx(w.fpr));
      CHECK(row.apr == doctest::Approx(w.apr));
    }

    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto m2 = compute_metrics(shuffled);
    CHECK(to_json(m2) == to_json(m));

    // Cumulative best per round never decreases.
    for (std::size_t k = 1; k < m.per_round.size(); ++k) {
      CHECK(m.per_round[k].csr >= m.per_round[k - 1].csr);
      CHECK(m.per_round[k].fpr >= m.per_round[k - 1].fpr);
      CHECK(m.per_round[k].apr >= m.per_round[k - 1].apr);
    }
  }
}

TEST_CASE("per-round rows take the best snapshot so far") {
  CaseRecord a = rec("a", true, 2, 2);
  a.history = {{true, 1}, {false, 0}, {true, 2}};
  CaseRecord b = rec("b", false, 0, 2);
  b.history = {{false, 0}};
  auto rows = per_round_breakdown({a, b}, 3);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].csr == 0.5);
  CHECK(rows[0].fpr == 0.0);
  CHECK(rows[0].apr == 0.25);
  CHECK(rows[1].apr == 0.25);
  CHECK(rows[2].fpr == 0.5);
  CHECK(rows[2].apr == 0.5);
  CHECK(rows[3].apr == 0.5);
}

TEST_CASE("records and csv serialise") {
  auto r = rec("a", true, 2, 3, "PAT");
  r.timings = {{"planning", 0.5}};
  r.reached_verification = true;
  CHECK(to_json(record_from_json(to_json(r))) == to_json(r));
  auto csv = metrics_csv(compute_metrics({r}));
  CHECK(csv.find("Overall") != std::string::npos);
  CHECK(csv.find("PAT") != std::string::npos);
}

TEST_CASE("dataset loading") {
  auto cases = load_dataset(data_path("datasets/scripted"));
  REQUIRE(cases.size() == 6);
  CHECK(cases[0].id == "car");
  std::size_t assertions = 0;
  for (const auto& c : cases) assertions += c.requirements.size();
  CHECK(assertions == 16);
  CHECK(cases[0].requirements[2].expected == cspforge::verify::Outcome::Invalid);
  TempDir tmp;
  CHECK_THROWS_AS(load_case(tmp.path()), DatasetError);
}

TEST_CASE("golden models satisfy every requirement") {
  for (const auto& c : load_dataset(data_path("datasets/scripted"))) {
    REQUIRE(c.golden.has_value());
    auto report = cspforge::verify::check_all(*c.golden, c.requirements);
    INFO(c.id);
    CHECK(report.all_match());
  }
  HarnessConfig cfg = scripted();
  cfg.check_only = true;
  auto m = compute_metrics(run_dataset(load_dataset(data_path("datasets/scripted")), cfg));
  CHECK(m.overall.fpr == 1.0);
}

TEST_CASE("the scripted six-case evaluation") {
  // Per case, what each scripted round yields (passed / total):
  //   car            r0 2/3 (start_driving lacks the driver check), r1 3/3
  //   file_system    3/3
  //   trading        3/3
  //   missionaries   r0 2/3, r1 2/3 (return move unsafe), r2 3/3
  //   traffic_light  1/2 every round (the repair repeats the fault)
  //   vending        never parses, 0/2
  // Overall: CSR 5/6, FPR 4/6, APR 13/16.
  auto cases = load_dataset(data_path("datasets/scripted"));
  auto m = compute_metrics(run_dataset(cases, scripted()));
  CHECK(m.overall.csr == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(m.overall.fpr == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
  CHECK(m.overall.apr == doctest::Approx(13.0 / 16.0).epsilon(1e-12));
  REQUIRE(m.per_round.size() == 6);
  CHECK(m.per_round[0].fpr == doctest::Approx(2.0 / 6.0));
  CHECK(m.per_round[0].apr == doctest::Approx(11.0 / 16.0));
  CHECK(m.per_round[1].fpr == doctest::Approx(3.0 / 6.0));
  CHECK(m.per_round[1].apr == doctest::Approx(12.0 / 16.0));
  for (int k = 2; k <= 5; ++k) CHECK(m.per_round[k].apr == doctest::Approx(13.0 / 16.0));

  std::map<std::string, const CaseRecord*> by_id;
  for (const auto& r : m.records) by_id[r.id] = &r;
  CHECK(by_id["car"]->rounds == 1);
  CHECK(by_id["missionaries"]->rounds == 2);
  CHECK(by_id["traffic_light"]->rounds == 5);
  CHECK_FALSE(by_id["vending"]->compiled);
  CHECK_FALSE(by_id["vending"]->reached_verification);
  CHECK(by_id["vending"]->error.find("UnparseableAfterRetries") != std::string::npos);

  // Sequential and parallel runs agree.
  auto seq = scripted();
  seq.parallel = 1;
  auto m1 = compute_metrics(run_dataset(cases, seq));
  CHECK(m1.overall.apr == m.overall.apr);
  CHECK(m1.per_round.back().fpr == m.per_round.back().fpr);
}

TEST_CASE("without repair the fault-injected cases never fully pass") {
  auto cases = load_dataset(data_path("datasets/scripted"));
  auto m = compute_metrics(run_dataset(cases, scripted(false)));
  for (const auto& r : m.records) {
    if (r.id == "car" || r.id == "missionaries" || r.id == "traffic_light") {
      INFO(r.id);
      CHECK_FALSE(r.full_pass());
      CHECK(r.rounds == 0);
    }
  }
  CHECK(m.overall.fpr == doctest::Approx(2.0 / 6.0));
  CHECK(m.overall.apr == doctest::Approx(11.0 / 16.0));
}
