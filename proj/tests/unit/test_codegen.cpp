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

#include <cmath>
#include <map>
#include <random>
#include <regex>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

#include "cspforge/codegen/codegen.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/store/store.hpp"
#include "cspforge/syntax/parser.hpp"
#include "cspforge/text/tfidf.hpp"

using namespace cspforge::codegen;
using cspforge::llm::ScriptedBackend;
using cspforge::planner::GenerationPlan;
using cspforge::planner::PromptLibrary;
using cspforge::testing::data_path;
using cspforge::testing::read_fixture;
using cspforge::testing::read_text;
using nlohmann::json;

namespace {

const std::string kCodegenRole = "Translate the generation plan";
const std::string kFixRole = "Your previous model failed to parse";

GenerationPlan text_plan(std::vector<std::string> lines) { return GenerationPlan{{}, std::move(lines)}; }

/// One process with a single variable and a single action.
cspforge::planner::ExtractedElements one_action(const std::string& var, const std::string& action) {
  cspforge::planner::ProcessElements p;
  p.name = "P";
  p.variables.push_back({var, "int", {"0..1"}, "0", ""});
  p.actions.push_back({action, var + " == 0", var + " = 1"});
  return {{p}};
}

Exemplar exemplar(const std::string& id, std::vector<std::string> lines,
                  const std::string& code = "P() = a -> P();\n") {
  return {id, text_plan(std::move(lines)), code};
}

/// Straightforward TF-IDF cosine: raw counts, idf = ln((1+N)/(1+df)) + 1.
std::vector<double> naive_cosines(const std::vector<std::string>& docs, const std::string& query) {
  auto counts = [](const std::string& s) {
    std::map<std::string, double> m;
    static const std::regex word("[A-Za-z0-9]+");
    for (std::sregex_iterator it(s.begin(), s.end(), word), end; it != end; ++it) {
      std::string w = it->str();
      for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      m[w] += 1;
    }
    return m;
  };
  std::vector<std::map<std::string, double>> tf;
  std::map<std::string, double> df;
  for (const auto& d : docs) {
    tf.push_back(counts(d));
    for (const auto& [w, c] : tf.back()) df[w] += 1;
  }
  const double n = static_cast<double>(docs.size());
  auto weigh = [&](std::map<std::string, double> m) {
    for (auto& [w, c] : m) c *= std::log((1 + n) / (1 + (df.count(w) ? df[w] : 0))) + 1;
    return m;
  };
  auto q = weigh(counts(query));
  double qn = 0;
  for (const auto& [w, c] : q) qn += c * c;
  std::vector<double> out;
  for (const auto& t : tf) {
    auto d = weigh(t);
    double dot = 0, dn = 0;
    for (const auto& [w, c] : d) {
      dn += c * c;
      if (q.count(w)) dot += c * q.at(w);
    }
    out.push_back(qn == 0 || dn == 0 ? 0.0 : dot / std::sqrt(qn * dn));
  }
  return out;
}

}  // namespace

TEST_CASE("the shipped syntax cue names the common error classes") {
  auto cue = SyntaxCue::load_default();
  CHECK_NOTHROW(cue.validate());
  auto errors = cue.render_errors();
  for (const auto* cls : {"missing semicolons", "incorrect process synchronization", "malformed assertions"}) {
    CHECK(errors.find(cls) != std::string::npos);
  }
  CHECK(cue.documentation.find("#assert") != std::string::npos);
  CHECK_THROWS_AS(SyntaxCue{}.validate(), cspforge::PreconditionError);
}

TEST_CASE("retrieval of an identical plan has similarity 1") {
  std::vector<Exemplar> store = {exemplar("a", {"the lamp turns on", "the lamp turns off"}),
                                 exemplar("b", {"a queue of jobs"})};
  auto r = retrieve_exemplar(store[0].plan, store);
  CHECK(r.exemplar.id == "a");
  CHECK(r.similarity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("retrieval with no shared tokens still returns the only exemplar") {
  std::vector<Exemplar> store = {exemplar("only", {"lamp switch"})};
  auto r = retrieve_exemplar(text_plan({"river boat crossing"}), store);
  CHECK(r.exemplar.id == "only");
  CHECK(r.similarity == 0.0);
  CHECK_THROWS_AS(retrieve_exemplar(text_plan({"x"}), {}), EmptyStore);
}

TEST_CASE("retrieval matches hand-computed cosines") {
  // N = 3; df(engine) = 2, every other term df = 1.
  //   w  = ln(4/2) + 1,  e = ln(4/3) + 1
  //   q  = {car: w, engine: e}
  //   cos(q, car)  = sqrt(w² + e²) / sqrt(2w² + e²)           = 0.782408141...
  //   cos(q, file) = e² / (sqrt(w² + e²) · sqrt(2w² + e²))    = 0.286710972...
  std::vector<Exemplar> store = {exemplar("car", {"car engine door"}),
                                 exemplar("file", {"file lock engine"}),
                                 exemplar("market", {"market order"})};
  cspforge::text::TfIdf model({"car engine door\n", "file lock engine\n", "market order\n"});
  auto sims = model.similarities("car engine\n");
  CHECK(sims[0] == doctest::Approx(0.782408141245646).epsilon(1e-12));
  CHECK(sims[1] == doctest::Approx(0.2867109723804671).epsilon(1e-12));
  CHECK(sims[2] == 0.0);
  auto r = retrieve_exemplar(text_plan({"car engine"}), store);
  CHECK(r.exemplar.id == "car");
  CHECK(r.similarity == doctest::Approx(0.782408141245646).epsilon(1e-12));
}

TEST_CASE("the car plan retrieves the car exemplar from the shipped store") {
  auto exemplars = cspforge::store::Store(cspforge::store::default_store_dir()).load_exemplars();
  REQUIRE(exemplars.size() == 3);
  auto car = std::find_if(exemplars.begin(), exemplars.end(), [](const Exemplar& e) { return e.id == "car"; });
  REQUIRE(car != exemplars.end());
  std::vector<std::string> docs;
  for (const auto& e : exemplars) docs.push_back(cspforge::planner::plan_text(e.plan));
  auto expected = naive_cosines(docs, cspforge::planner::plan_text(car->plan));

  auto r = retrieve_exemplar(car->plan, exemplars);
  CHECK(r.exemplar.id == "car");
  CHECK(r.similarity == doctest::Approx(1.0).epsilon(1e-12));

  // A reworded car plan: the car exemplar still ranks first, and every
  // cosine agrees with the naive computation.
  GenerationPlan query = car->plan;
  query.annotations.resize(query.annotations.size() / 2);
  query.annotations.push_back("The driver honks the horn while the engine is on");
  auto got = cspforge::text::TfIdf(docs).similarities(cspforge::planner::plan_text(query));
  auto want = naive_cosines(docs, cspforge::planner::plan_text(query));
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  auto best = retrieve_exemplar(query, exemplars);
  CHECK(best.exemplar.id == "car");
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (exemplars[i].id != "car") CHECK(want[i] < best.similarity);
  }
  CHECK(expected.size() == 3);
}

TEST_CASE("retrieval ties go to the smallest id and similarity stays in [0, 1]") {
  std::vector<Exemplar> store = {exemplar("zeta", {"shared words"}), exemplar("alpha", {"shared words"})};
  auto r = retrieve_exemplar(text_plan({"shared words"}), store);
  CHECK(r.exemplar.id == "alpha");

  std::mt19937 rng(3);
  const std::vector<std::string> vocab = {"lamp", "door", "engine", "key", "boat", "queue", "lock", "fuel"};
  auto random_lines = [&] {
    std::vector<std::string> lines;
    for (int i = 1 + static_cast<int>(rng() % 3); i > 0; --i) {
      std::string l;
      for (int k = 1 + static_cast<int>(rng() % 4); k > 0; --k) l += vocab[rng() % vocab.size()] + " ";
      lines.push_back(l);
    }
    return lines;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Exemplar> ex;
    for (int i = 0; i < 4; ++i) ex.push_back(exemplar("e" + std::to_string(i), random_lines()));
    auto q = text_plan(random_lines());
    auto before = retrieve_exemplar(q, ex);
    CHECK(before.similarity >= 0.0);
    CHECK(before.similarity <= 1.0 + 1e-12);

    // Symmetry over a fixed vocabulary weighting.
    cspforge::text::TfIdf model({"lamp door", "engine key"});
    auto a = model.vectorize(cspforge::planner::plan_text(q));
    auto b = model.vectorize(cspforge::planner::plan_text(ex[0].plan));
    CHECK(cspforge::text::cosine(a, b) == doctest::Approx(cspforge::text::cosine(b, a)));
  }
}

TEST_CASE("interleave_plan puts each annotation above the line it names") {
  GenerationPlan plan{one_action("x", "inc"), {"Variable \"x\" starts at 0",
                                                "If x is 0, the action \"inc\" makes x 1",
                                                "Overall the system counts"}};
  auto out = interleave_plan(plan, "var x = 0;\nP() = [x == 0] inc{x = 1;} -> P();\n");
  CHECK(out ==
        "// Overall the system counts\n"
        "// Variable \"x\" starts at 0\n"
        "var x = 0;\n"
        "// If x is 0, the action \"inc\" makes x 1\n"
        "P() = [x == 0] inc{x = 1;} -> P();\n");
}

TEST_CASE("extract_code prefers a csp fence") {
  CHECK(extract_code("P() = a -> Stop;") == "P() = a -> Stop;");
  CHECK(extract_code("Here:\n```\nA\n```\nand\n```csp\nB\n```\n") == "B\n");
  CHECK(extract_code("```pat\nC\n```") == "C\n");
  CHECK(extract_code("```\nD\n```") == "D\n");
}

TEST_CASE("car plan generation yields the guarded start_driving prefix") {
  auto backend = ScriptedBackend::from_file(data_path("datasets/scripted/car/script.json"));
  auto result = json::parse(read_text(data_path("store/entries/car.json")));
  auto plan = cspforge::planner::plan_from_json(result["plan"]);
  auto g = generate_code(*backend, plan, SyntaxCue::load_default(), nullptr, PromptLibrary());
  CHECK(g.fixups == 0);
  CHECK(g.source.find("start_driving") != std::string::npos);
  const auto* motor = g.ast.find_process("motor");
  REQUIRE(motor != nullptr);
  CHECK(g.source == read_text(data_path("datasets/scripted/car/replies/code_generated.csp")));
  CHECK(g.source.find("[engineStatus == engineOn && carMotion == stop && (fuel > 0)] start_driving") !=
        std::string::npos);
}

TEST_CASE("a missing semicolon is fixed on the first fix-up round") {
  const std::string broken = "var x = 0\nP() = inc{x = 1;} -> Stop;\n";
  const std::string fixed = "var x = 0;\nP() = inc{x = 1;} -> Stop;\n";
  ScriptedBackend b({{{kCodegenRole}, {"```csp\n" + broken + "```"}, false},
                     {{kFixRole}, {"```csp\n" + fixed + "```"}, false}});
  b.set_recording(true);
  auto g = generate_code(b, text_plan({"Variable x starts at 0"}), SyntaxCue::load_default(), nullptr,
                         PromptLibrary());
  CHECK(g.fixups == 1);
  CHECK(g.source == fixed);
  auto t = b.transcript();
  REQUIRE(t.size() == 2);
  CHECK(t[1].request.user.find("SyntaxError") != std::string::npos);
  CHECK(t[1].request.user.find(broken) != std::string::npos);
}

TEST_CASE("garbage four times fails with UnparseableAfterRetries") {
  ScriptedBackend b({{{kCodegenRole}, {"no model, sorry"}, false}, {{kFixRole}, {"still nothing {"}, true}});
  b.set_recording(true);
  try {
    generate_code(b, text_plan({"x"}), SyntaxCue::load_default(), nullptr, PromptLibrary());
    FAIL("expected UnparseableAfterRetries");
  } catch (const UnparseableAfterRetries& e) {
    CHECK(e.diagnostics().find("SyntaxError") != std::string::npos);
  }
  CHECK(b.transcript().size() == 4);  // one generation call plus three fix-ups

  ScriptedBackend again({{{kCodegenRole}, {"no model"}, false}, {{kFixRole}, {"nope"}, true}});
  CHECK_THROWS_AS(generate_code(again, text_plan({"x"}), SyntaxCue::load_default(), nullptr, PromptLibrary(), 0),
                  UnparseableAfterRetries);
}

TEST_CASE("the generation prompt carries annotations, cue and interleaved exemplar") {
  auto cue = SyntaxCue::load_default();
  Exemplar ex{"lamp", GenerationPlan{one_action("on", "toggle"), {"If on is 0, the action \"toggle\" makes on 1"}},
              "var on = 0;\nL() = [on == 0] toggle{on = 1;} -> L();\n"};
  auto req = generation_request(text_plan({"Counter starts at zero"}), cue, &ex, PromptLibrary());
  CHECK(req.user.find("// Counter starts at zero") != std::string::npos);
  CHECK(req.user.find("// If on is 0, the action \"toggle\" makes on 1\nL() = [on == 0]") != std::string::npos);
  CHECK(req.user.find("missing semicolons") != std::string::npos);
  CHECK(req.system.find(kCodegenRole) != std::string::npos);
  auto bare = generation_request(text_plan({"x"}), cue, nullptr, PromptLibrary());
  CHECK(bare.user.find("(no stored example)") != std::string::npos);
  CHECK_THROWS_AS(generation_request(text_plan({}), cue, nullptr, PromptLibrary()), cspforge::PreconditionError);
}

TEST_CASE("every shipped exemplar parses") {
  for (const auto& e : cspforge::store::Store(cspforge::store::default_store_dir()).load_exemplars()) {
    CHECK_NOTHROW(cspforge::syntax::parse_model(e.code));
  }
}
