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

#include "doctest.h"
#include "fixtures.hpp"
#include "naive_lts.hpp"
#include "random_models.hpp"

#include "cspforge/semantics/lts.hpp"
#include "cspforge/syntax/parser.hpp"
#include "cspforge/syntax/printer.hpp"

using namespace cspforge::semantics;
using cspforge::syntax::parse_model;
using cspforge::testing::read_fixture;

namespace {

std::vector<std::string> step_labels(Semantics& sem, const State& s) {
  std::vector<std::string> out;
  for (const auto& step : sem.enabled_steps(s)) out.push_back(sem.labels()[step.label]);
  return out;
}

}  // namespace

TEST_CASE("initial state") {
  Semantics stop(parse_model("P() = Stop;"));
  auto s = stop.initial_state("P");
  CHECK(s.valuation.empty());
  CHECK(stop.describe_config(s.term) == "Stop");
  CHECK_THROWS_AS(stop.initial_state("nosuch"), UnknownProcess);

  auto car = parse_model(read_fixture("car.csp"));
  Semantics sem(car);
  auto init = sem.initial_state("car");
  const auto& m = sem.model();
  auto value = [&](const std::string& name) {
    for (const auto& slot : m.slots()) {
      if (slot.name == name) return init.valuation[slot.offset];
    }
    FAIL("no slot " << name);
    return std::int64_t{-1};
  };
  CHECK(value("fuel") == car.find_constant("MAX_FUEL")->value);
  CHECK(value("engineStatus") == car.find_constant("engineOff")->value);
}

TEST_CASE("enabled steps of the basic operators") {
  Semantics stop(parse_model("P() = Stop;"));
  CHECK(stop.enabled_steps(stop.initial_state("P")).empty());

  Semantics inter(parse_model("P() = (a -> Skip) ||| (b -> Skip);"));
  CHECK(step_labels(inter, inter.initial_state("P")) == std::vector<std::string>{"a", "b"});

  Semantics sync(parse_model("P() = (a -> Skip) ||{a} (a -> Skip);"));
  CHECK(step_labels(sync, sync.initial_state("P")) == std::vector<std::string>{"a"});

  Semantics blocked(parse_model("P() = (a -> Skip) ||{a} (b -> a -> Skip);"));
  CHECK(step_labels(blocked, blocked.initial_state("P")) == std::vector<std::string>{"b"});

  Semantics cond(parse_model("var x = 1; P() = if (x == 1) { a -> Stop } else { b -> Stop };"));
  CHECK(step_labels(cond, cond.initial_state("P")) == std::vector<std::string>{"a"});

  Semantics seq(parse_model("P() = a -> Skip; b -> Stop;"));
  auto after_a = seq.enabled_steps(seq.initial_state("P")).at(0).state;
  CHECK(step_labels(seq, after_a) == std::vector<std::string>{"b"});
}

TEST_CASE("explore small systems") {
  auto stop = explore(parse_model("P() = Stop;"), "P");
  CHECK(stop.state_count() == 1);
  CHECK(stop.transition_count() == 0);

  auto one = explore(parse_model("P() = a -> Stop;"), "P");
  CHECK(one.state_count() == 2);
  CHECK(one.transition_count() == 1);

  auto loop = explore(parse_model("P() = a -> P();"), "P");
  CHECK(loop.state_count() == 1);
  CHECK(loop.transition_count() == 1);

  auto diamond = explore(parse_model("P() = (a -> Skip) ||| (b -> Skip);"), "P");
  int live = 0, done = 0, a = 0, b = 0, tick = 0;
  for (StateId s = 0; s < diamond.state_count(); ++s) {
    (diamond.terminated(s) ? done : live)++;
    for (const auto& e : diamond.out[s]) {
      const auto& l = diamond.label(e.label);
      a += l == "a";
      b += l == "b";
      tick += l == "✓";
    }
  }
  CHECK(live == 4);
  CHECK(done == 1);
  CHECK(a == 2);
  CHECK(b == 2);
  CHECK(tick == 1);
}

TEST_CASE("runtime modelling errors") {
  CHECK_THROWS_AS(explore(parse_model("var x : {0..2} = 0; P() = a{x = x + 1} -> P();"), "P"),
                  EvaluationError);
  CHECK_THROWS_AS(explore(parse_model("var x = 0; P() = a{x = 1 / x} -> P();"), "P"),
                  EvaluationError);
  CHECK_THROWS_AS(explore(parse_model("var arr[2]; var i = 0; P() = a{arr[i + 2] = 1} -> P();"),
                          "P"),
                  EvaluationError);
  CHECK_THROWS_AS(explore(parse_model("P() = P();"), "P"), EvaluationError);
  CHECK_THROWS_AS(explore(parse_model("P() = a -> Stop [] P();"), "P"), EvaluationError);
  CHECK_THROWS_AS(explore(parse_model("P() = Skip; P();"), "P"), EvaluationError);
  try {
    explore(parse_model("var x : {0..1} = 0; P() = a -> b{x = x + 2} -> P();"), "P");
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& err) {
    CHECK(err.trace() == std::vector<std::string>{"a"});
  }
}

TEST_CASE("state limit") {
  auto ast = parse_model("var x : {0..9} = 0; P() = [x < 9] a{x = x + 1} -> P();");
  CHECK(explore(ast, "P", 10).state_count() == 10);
  try {
    explore(ast, "P", 5);
    FAIL("expected StateLimitExceeded");
  } catch (const StateLimitExceeded& err) {
    CHECK(err.limit() == 5);
    CHECK(err.frontier() >= 1);
  }
}

TEST_CASE("car model explores") {
  auto lts = explore(parse_model(read_fixture("car.csp")), "car");
  CHECK(lts.state_count() > 10);
  for (StateId s = 0; s < lts.state_count(); ++s) CHECK_FALSE(lts.deadlocked(s));
  auto doc = lts.to_json();
  CHECK(doc.find("\"transitions\"") != std::string::npos);
}

TEST_CASE("explore is deterministic") {
  auto ast = parse_model(read_fixture("car_faulty.csp"));
  auto x = explore(ast, "car");
  auto y = explore(ast, "car");
  REQUIRE(x.state_count() == y.state_count());
  for (StateId s = 0; s < x.state_count(); ++s) {
    CHECK(x.describe_state(s) == y.describe_state(s));
    REQUIRE(x.out[s].size() == y.out[s].size());
    for (std::size_t k = 0; k < x.out[s].size(); ++k) {
      CHECK(x.out[s][k].label == y.out[s][k].label);
      CHECK(x.out[s][k].to == y.out[s][k].to);
    }
  }
}

TEST_CASE("call unfolding adds no observable step") {
  auto direct = explore(parse_model("P() = a -> b -> P();"), "P");
  auto via = explore(parse_model("P() = a -> Q(); Q() = R(); R() = b -> P();"), "P");
  CHECK(direct.state_count() == via.state_count());
  CHECK(direct.transition_count() == via.transition_count());
}

TEST_CASE("random models agree with the naive enumerator") {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  int compared = 0;
  for (std::uint32_t seed = 1; seed <= 250; ++seed) {
    auto ast = cspforge::testing::random_concurrent_model(seed);
    CAPTURE(seed);
    CAPTURE(cspforge::syntax::render_model(ast));
    auto reparsed = parse_model(cspforge::syntax::render_model(ast));
    auto lts = explore(reparsed, "Sys");
    auto expected = cspforge::testing::naive_enumerate(reparsed, "Sys");
    auto actual = cspforge::testing::flatten(lts);
    CHECK(actual.initial == expected.initial);
    CHECK(actual.states == expected.states);
    CHECK(actual.transitions == expected.transitions);
    ++compared;
  }
  CHECK(compared == 250);
  CHECK(std::chrono::duration<double>(clock::now() - start).count() < 60.0);
}
