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


#include <chrono>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "ltl_corpus.hpp"
#include "ltl_oracle.hpp"
#include "random_models.hpp"

#include "cspforge/semantics/lts.hpp"
#include "cspforge/syntax/parser.hpp"
#include "cspforge/syntax/printer.hpp"
#include "cspforge/verify/checks.hpp"

#include "json.hpp"

using namespace cspforge::verify;
using cspforge::semantics::explore;
using cspforge::semantics::Lts;
using cspforge::semantics::StateId;
using cspforge::syntax::LtlBinaryOp;
using cspforge::syntax::LtlPtr;
using cspforge::syntax::LtlUnaryOp;
using cspforge::syntax::make_ltl_atom;
using cspforge::syntax::make_ltl_binary;
using cspforge::syntax::make_ltl_unary;
using cspforge::syntax::parse_ltl;
using cspforge::syntax::parse_model;
using cspforge::testing::formulas_up_to_depth;
using cspforge::testing::random_formula;
using cspforge::testing::read_fixture;
using cspforge::testing::small_system;

namespace {

Lts lts_of(const std::string& source, const std::string& entry = "P") {
  return explore(parse_model(source), entry);
}

std::vector<Requirement> car_requirements() {
  return requirements_from_json(nlohmann::json::parse(read_fixture("car_requirements.json")));
}

const std::vector<std::string> kFaultyWitness = {
    "owner_approach", "pickup_key_by_owner", "unlock_door_by_owner", "open_door",
    "owner0_enter",   "start_engine_by_owner0", "owner0_exit",       "start_driving"};

// Shortest path length to a state satisfying `goal`, by iterative deepening
// over every path (no visited set).
std::optional<std::size_t> brute_shortest(const Lts& lts,
                                          const std::function<bool(StateId)>& goal,
                                          std::size_t max_depth) {
  std::function<bool(StateId, std::size_t)> search = [&](StateId s, std::size_t budget) {
    if (goal(s)) return true;
    if (budget == 0) return false;
    for (const auto& e : lts.out[s]) {
      if (search(e.to, budget - 1)) return true;
    }
    return false;
  };
  for (std::size_t d = 0; d <= max_depth; ++d) {
    if (search(lts.initial, d)) return d;
  }
  return std::nullopt;
}

// Compares check_ltl with the oracle and validates any counterexample.
void agree(const Lts& lts, const LtlPtr& f, std::size_t& invalid) {
  bool is_invalid = false;
  auto problem = cspforge::testing::ltl_disagreement(lts, *f, nullptr, is_invalid);
  INFO(problem.value_or(""));
  REQUIRE_FALSE(problem.has_value());
  invalid += is_invalid;
}

}  // namespace

TEST_CASE("deadlock examples") {
  auto stop = check_deadlockfree(lts_of("P() = Stop;"));
  CHECK(stop.outcome == Outcome::Invalid);
  REQUIRE(stop.trace);
  CHECK(stop.trace->events.empty());
  CHECK_FALSE(stop.trace->lasso_start);

  auto loop = check_deadlockfree(lts_of("P() = a -> P();"));
  CHECK(loop.outcome == Outcome::Valid);
  CHECK_FALSE(loop.trace);

  CHECK(check_deadlockfree(lts_of("P() = a -> Skip;")).outcome == Outcome::Valid);
  auto seq = check_deadlockfree(lts_of("P() = a -> Stop; b -> Skip;"));
  CHECK(seq.outcome == Outcome::Invalid);
  CHECK(seq.trace->events == std::vector<std::string>{"a"});

  CHECK(check_deadlockfree(explore(parse_model(read_fixture("car.csp")), "car")).outcome ==
        Outcome::Valid);
}

TEST_CASE("reachability examples") {
  auto lts = lts_of("var x : {0..5} = 0;\n#define zero (x == 0);\n#define two (x == 2);\n"
                    "#define never (x > 9);\nP() = inc{x = x + 1} -> if (x < 3) { P() } else { Stop };");
  auto at_start = check_reaches(lts, "zero");
  CHECK(at_start.outcome == Outcome::Valid);
  REQUIRE(at_start.trace);
  CHECK(at_start.trace->events.empty());

  auto two = check_reaches(lts, "two");
  CHECK(two.outcome == Outcome::Valid);
  CHECK(two.trace->events == std::vector<std::string>{"inc", "inc"});

  auto never = check_reaches(lts, "never");
  CHECK(never.outcome == Outcome::Invalid);
  CHECK_FALSE(never.trace);

  CHECK_THROWS(check_reaches(lts, "inc"));
  CHECK_THROWS(check_reaches(lts, "missing"));
}

TEST_CASE("ltl examples") {
  auto loop = lts_of("#define done (1 == 0);\nP() = a -> P();\nQ() = b -> Stop;");
  CHECK(check_ltl(loop, *parse_ltl("[] true")).outcome == Outcome::Valid);
  CHECK(check_ltl(lts_of("P() = Stop;"), *parse_ltl("[] true")).outcome == Outcome::Valid);
  CHECK(check_ltl(loop, *parse_ltl("[] !b")).outcome == Outcome::Valid);
  CHECK(check_ltl(loop, *parse_ltl("[] a")).outcome == Outcome::Invalid);  // initial position

  auto fdone = check_ltl(loop, *parse_ltl("<> done"));
  CHECK(fdone.outcome == Outcome::Invalid);
  REQUIRE(fdone.trace);
  CHECK(fdone.trace->events == std::vector<std::string>{"a"});
  CHECK(fdone.trace->lasso_start == std::optional<std::size_t>{0});

  CHECK(check_ltl(loop, *parse_ltl("X [] a")).outcome == Outcome::Valid);
  CHECK(check_ltl(loop, *parse_ltl("[] <> a")).outcome == Outcome::Valid);
  CHECK_THROWS_AS(check_ltl(loop, *parse_ltl("<> nosuch")), UnknownProposition);

  // Terminated runs stutter on the final state.
  auto finite = check_ltl(lts_of("P() = a -> Skip;"), *parse_ltl("[] <> a"));
  CHECK(finite.outcome == Outcome::Invalid);
  REQUIRE(finite.trace);
  CHECK(finite.trace->events == std::vector<std::string>{"a", "✓"});
  CHECK(finite.trace->lasso_start == std::optional<std::size_t>{2});
}

TEST_CASE("car requirements on the correct model") {
  auto reqs = car_requirements();
  REQUIRE(reqs.size() == 3);
  auto report = check_all(read_fixture("car.csp"), reqs);
  REQUIRE(report.compiled);
  REQUIRE(report.verdicts.size() == 3);
  CHECK(report.verdicts[0].raw == Outcome::Valid);
  CHECK(report.verdicts[1].raw == Outcome::Invalid);
  CHECK(report.verdicts[2].raw == Outcome::Invalid);
  for (const auto& v : report.verdicts) CHECK(v.status == Status::Match);
  CHECK(report.all_match());
  CHECK(report.matches() == 3);
  CHECK_FALSE(report.first_mismatch);
  CHECK_FALSE(report.counterexample);
}

TEST_CASE("car requirements on the faulty model") {
  auto report = check_all(read_fixture("car_faulty.csp"), car_requirements());
  REQUIRE(report.compiled);
  REQUIRE(report.verdicts.size() == 3);
  CHECK(report.verdicts[0].status == Status::Match);
  CHECK(report.verdicts[1].status == Status::Match);
  CHECK(report.verdicts[2].raw == Outcome::Valid);
  CHECK(report.verdicts[2].status == Status::Mismatch);
  CHECK(report.first_mismatch == std::optional<std::size_t>{2});
  REQUIRE(report.counterexample);
  CHECK(report.counterexample->events == kFaultyWitness);
  CHECK(report.counterexample->events.back() == "start_driving");

  auto j = to_json(report);
  CHECK(j["verdicts"][2]["status"] == "MISMATCH");
  CHECK(j["verdicts"][2]["trace"].back() == "start_driving");
  CHECK(j["verdicts"][0]["trace"].is_null());
}

TEST_CASE("check_all failure modes") {
  CHECK_THROWS_AS(check_all(read_fixture("car.csp"), {}), cspforge::PreconditionError);
  auto broken = check_all("P() = a -> ;", car_requirements());
  CHECK_FALSE(broken.compiled);
  CHECK(broken.error_kind == "SyntaxError");
  CHECK(broken.verdicts.empty());

  auto runtime = check_all("var x = 1;\nP() = a{x = x / (x - 1)} -> P();",
                           {make_requirement("#assert P deadlockfree;", Outcome::Valid)});
  CHECK_FALSE(runtime.compiled);
  CHECK(runtime.error_kind == "EvaluationError");

  auto unknown = check_all("P() = a -> P();",
                           {make_requirement("#assert Q deadlockfree;", Outcome::Valid)});
  CHECK_FALSE(unknown.compiled);
}

TEST_CASE("verdict status follows expectation") {
  auto lts = lts_of("P() = a -> P();\nQ() = b -> Stop;");
  auto valid = check_requirement(lts, make_requirement("#assert P deadlockfree;", Outcome::Valid));
  CHECK(valid.status == Status::Match);
  auto wrong = check_requirement(lts, make_requirement("#assert P deadlockfree;", Outcome::Invalid));
  CHECK(wrong.status == Status::Mismatch);
  auto ltl = check_requirement(lts, make_requirement("#assert P |= [] b;", Outcome::Invalid));
  CHECK(ltl.raw == Outcome::Invalid);
  CHECK(ltl.status == Status::Match);
  CHECK(ltl.trace);  // attached even on MATCH

  auto r = make_requirement("#define big (1 > 0);\n#assert P reaches big;", Outcome::Valid, "d", "R1");
  auto back = requirement_from_json(requirement_to_json(r));
  CHECK(back.id == "R1");
  CHECK(back.description == "d");
  CHECK(back.defines.size() == 1);
  CHECK(back.expected == Outcome::Valid);
}

TEST_CASE("safety traces replay and are shortest") {
  std::size_t deadlocks = 0, witnesses = 0;
  for (std::uint32_t seed = 0; seed < 150; ++seed) {
    auto ast = cspforge::testing::random_concurrent_model(seed);
    Lts lts = explore(ast, "Sys");
    if (lts.state_count() > 3000) continue;
    INFO("seed " << seed);

    auto dl = check_deadlockfree(lts);
    auto dl_goal = [&](StateId s) { return lts.deadlocked(s); };
    auto dl_len = brute_shortest(lts, dl_goal, 8);
    if (dl.outcome == Outcome::Invalid) {
      ++deadlocks;
      REQUIRE(dl.trace);
      CHECK(cspforge::testing::trace_replays(lts, *dl.trace));
      CHECK(lts.deadlocked(dl.trace->states.back()));
      if (dl_len) CHECK(dl.trace->events.size() == *dl_len);
      if (!dl_len) CHECK(dl.trace->events.size() > 8);
    } else {
      CHECK_FALSE(dl_len);
    }

    if (!ast.find_define("high")) continue;
    auto re = check_reaches(lts, "high");
    auto hi_goal = [&](StateId s) { return lts.model().define_holds("high", lts.states[s].valuation); };
    auto hi_len = brute_shortest(lts, hi_goal, 8);
    if (re.outcome == Outcome::Valid) {
      ++witnesses;
      REQUIRE(re.trace);
      CHECK(cspforge::testing::trace_replays(lts, *re.trace));
      CHECK(hi_goal(re.trace->states.back()));
      if (hi_len) CHECK(re.trace->events.size() == *hi_len);
      if (!hi_len) CHECK(re.trace->events.size() > 8);
    } else {
      CHECK_FALSE(hi_len);
    }
  }
  CHECK(deadlocks > 10);
  CHECK(witnesses > 10);
}

TEST_CASE("ltl agrees with the atom oracle on small systems") {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Lts> systems;
  for (std::uint32_t seed = 0; systems.size() < 60; ++seed) {
    Lts lts = lts_of(small_system(seed));
    REQUIRE(lts.state_count() <= 6);
    systems.push_back(std::move(lts));
  }
  std::size_t pairs = 0, invalid = 0;

  // Every formula of depth <= 2 on every system.
  const auto shallow = formulas_up_to_depth(2);
  CHECK(shallow.size() == 2834);
  for (const auto& lts : systems) {
    for (const auto& f : shallow) {
      agree(lts, f, invalid);
      ++pairs;
    }
  }

  // Random formulas of depth exactly 3 on every system.
  std::mt19937 rng(20261015);
  for (const auto& lts : systems) {
    for (int k = 0; k < 1000; ++k) {
      LtlPtr f;
      do {
        f = random_formula(rng, 3);
      } while (cspforge::syntax::ltl_depth(*f) != 3);
      agree(lts, f, invalid);
      ++pairs;
    }
  }
  MESSAGE("ltl pairs " << pairs << ", invalid " << invalid << ", "
                       << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
                       << " s");
  CHECK(pairs >= 500);
  CHECK(invalid > pairs / 5);
  CHECK(invalid < pairs * 4 / 5);
}

TEST_CASE("complementation consistency") {
  std::mt19937 rng(7);
  for (std::uint32_t seed = 0; seed < 40; ++seed) {
    Lts lts = lts_of(small_system(seed + 1000));
    for (int k = 0; k < 25; ++k) {
      auto f = random_formula(rng, 3);
      auto neg = make_ltl_unary(LtlUnaryOp::Not, f);
      if (check_ltl(lts, *f).outcome == Outcome::Valid) {
        CHECK(check_ltl(lts, *neg).outcome == Outcome::Invalid);
      }
    }
  }
}

TEST_CASE("verdict json shape") {
  auto lts = lts_of("P() = a -> Stop;");
  auto v = check_requirement(lts, make_requirement("#assert P deadlockfree;", Outcome::Valid));
  auto j = to_json(v);
  CHECK(j["assertion"] == "#assert P deadlockfree;");
  CHECK(j["expected"] == "VALID");
  CHECK(j["raw"] == "INVALID");
  CHECK(j["status"] == "MISMATCH");
  CHECK(j["trace"] == nlohmann::json::array({"a"}));
  CHECK(j["lasso_start"].is_null());
}
