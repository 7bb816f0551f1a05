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
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

#include "cspforge/store/store.hpp"

using namespace cspforge::store;
using cspforge::testing::copy_store;
using cspforge::testing::read_fixture;
using cspforge::testing::TempDir;
using cspforge::verify::Outcome;
using nlohmann::json;

namespace {

VerifiedEntry tiny_entry(const std::string& id, const std::string& description) {
  VerifiedEntry e;
  e.id = id;
  e.description = description;
  e.requirements = {{"never stuck", "#assert P deadlockfree;", Outcome::Valid}};
  e.plan = {{}, {"The process repeats a forever"}};
  e.code = "P() = a -> P();\n";
  return e;
}

VerifiedEntry car_entry() { return *Store(default_store_dir()).get("car"); }

}  // namespace

TEST_CASE("a new store is empty and an added entry reads back") {
  TempDir tmp;
  Store s(tmp.path() / "s");
  CHECK(s.size() == 0);
  CHECK(s.version() == 0);
  CHECK(s.search_similar("anything", 3).empty());
  CHECK(s.load_exemplars().empty());

  auto id = s.add_verified(tiny_entry("lamp", "lamp switch"));
  CHECK(id == "lamp");
  CHECK(s.ids() == std::vector<std::string>{"lamp"});
  CHECK(s.version() == 1);
  auto got = s.get("lamp");
  REQUIRE(got.has_value());
  CHECK(got->code == "P() = a -> P();\n");
  REQUIRE(got->verdicts.size() == 1);
  CHECK(got->verdicts[0]["status"] == "MATCH");
  CHECK_FALSE(s.get("missing").has_value());
  CHECK_FALSE(s.get("../escape").has_value());
}

TEST_CASE("ids are derived from the description when absent") {
  TempDir tmp;
  Store s(tmp.path());
  CHECK(s.add_verified(tiny_entry("", "Lamp switch in the hall, with dimmer")) == "lamp-switch-in-the");
  CHECK(s.add_verified(tiny_entry("", "Lamp switch in the hall")) == "lamp-switch-in-the-2");
  CHECK(s.add_verified(tiny_entry("", "!!!")) == "model");
}

TEST_CASE("duplicate ids and unverified entries are rejected") {
  TempDir tmp;
  Store s(tmp.path());
  s.add_verified(tiny_entry("lamp", "lamp"));
  CHECK_THROWS_AS(s.add_verified(tiny_entry("lamp", "other")), DuplicateId);

  auto car = car_entry();
  car.id = "car-faulty";
  car.code = read_fixture("car_faulty.csp");
  car.verdicts = json::array();
  CHECK_THROWS_AS(s.add_verified(car), NotFullyVerified);

  auto claimed = tiny_entry("claimed", "x");
  claimed.verdicts = json::array({{{"assertion", "P deadlockfree"}, {"status", "MISMATCH"}}});
  CHECK_THROWS_AS(s.add_verified(claimed), NotFullyVerified);

  auto none = tiny_entry("none", "x");
  none.requirements.clear();
  CHECK_THROWS_AS(s.add_verified(none), NotFullyVerified);

  auto broken = tiny_entry("broken", "x");
  broken.code = "P() = a -> ";
  CHECK_THROWS_AS(s.add_verified(broken), NotFullyVerified);

  auto bad_id = tiny_entry("has space", "x");
  CHECK_THROWS_AS(s.add_verified(bad_id), StoreError);
  CHECK(s.ids() == std::vector<std::string>{"lamp"});
}

TEST_CASE("entries survive reopening the store") {
  TempDir tmp;
  {
    Store s(tmp.path());
    s.add_verified(car_entry());
    s.add_verified(tiny_entry("lamp", "lamp switch"));
    s.save_session("sess1", json{{"phase", "Planned"}});
  }
  Store again(tmp.path());
  CHECK(again.ids() == std::vector<std::string>{"car", "lamp"});
  CHECK(again.version() == 2);
  auto car = again.get("car");
  REQUIRE(car.has_value());
  CHECK(to_json(*car) == to_json(car_entry()));
  CHECK(again.load_session("sess1").value()["phase"] == "Planned");
  CHECK_FALSE(again.load_session("nope").has_value());
}

TEST_CASE("entry json round trips") {
  auto car = car_entry();
  CHECK(to_json(entry_from_json(to_json(car))) == to_json(car));
  auto reqs = car.checked_requirements();
  REQUIRE(reqs.size() == 3);
  CHECK(reqs[1].expected == Outcome::Invalid);
  CHECK(reqs[1].source.find("keyInsideDoorLocked") != std::string::npos);
}

TEST_CASE("search scores match hand-computed cosines") {
  // N = 2, idf(lamp) = ln(3/2) + 1 = idf(switch); the query "lamp" is
  // parallel to one of the two equal components, so the cosine is 1/sqrt(2).
  TempDir tmp;
  Store s(tmp.path());
  s.add_verified(tiny_entry("lamp", "lamp switch"));
  s.add_verified(tiny_entry("boat", "river boat"));
  auto hits = s.search_similar("lamp", 5);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].id == "lamp");
  CHECK(hits[0].score == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(hits[1].id == "boat");
  CHECK(hits[1].score == 0.0);
  CHECK(s.search_similar("lamp", 1).size() == 1);
  CHECK_THROWS_AS(s.search_similar("lamp", 0), cspforge::PreconditionError);

  // Descriptors count as description text.
  auto e = tiny_entry("ferry", "crossing");
  e.descriptors = {"lamp"};
  s.add_verified(e);
  auto again = s.search_similar("lamp", 5);
  CHECK(again[0].id == "ferry");  // shorter document, same term
}

TEST_CASE("the shipped store routes a car description to the car entry") {
  Store s(default_store_dir());
  CHECK(s.ids().size() == 3);
  auto hits = s.search_similar("car with engine and doors", 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].id == "car");
  CHECK(hits[0].score >= kDefaultReuseThreshold);
  CHECK(hits[1].score < kDefaultReuseThreshold);
}

TEST_CASE("every shipped entry re-verifies") {
  TempDir tmp;
  Store s(tmp.path());
  for (const auto& id : Store(default_store_dir()).ids()) {
    auto e = *Store(default_store_dir()).get(id);
    CHECK(s.add_verified(e) == id);
  }
  CHECK(s.load_exemplars().size() == 3);
}

TEST_CASE("concurrent adds keep the index consistent") {
  TempDir tmp;
  Store(tmp.path());
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      Store s(tmp.path());
      s.add_verified(tiny_entry("e" + std::to_string(i), "entry " + std::to_string(i)));
    });
  }
  for (auto& t : threads) t.join();
  Store s(tmp.path());
  CHECK(s.size() == 8);
  CHECK(s.version() == 8);
}

TEST_CASE("a copied store is independent of the shipped one") {
  TempDir tmp;
  auto dir = copy_store(tmp.path());
  Store s(dir);
  s.add_verified(tiny_entry("lamp", "lamp switch"));
  CHECK(s.size() == 4);
  CHECK(Store(default_store_dir()).size() == 3);
}
