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

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspforge/common/error.hpp"
#include "cspforge/llm/backend.hpp"
#include "cspforge/pipeline/pipeline.hpp"
#include "cspforge/planner/planner.hpp"
#include "cspforge/repair/repair.hpp"
#include "cspforge/store/store.hpp"
#include "cspforge/verify/checks.hpp"

namespace httplib {
class Server;
}

namespace cspforge::service {

CSPFORGE_DEFINE_ERROR(PhaseViolation);
CSPFORGE_DEFINE_ERROR(NotFound);
CSPFORGE_DEFINE_ERROR(Conflict);
CSPFORGE_DEFINE_ERROR(BadRequest);
CSPFORGE_DEFINE_ERROR(IncompleteParts);
CSPFORGE_DEFINE_ERROR(UnknownVariable);

/// A pipeline error raised while serving a request, tagged with the stage
/// that produced it.
class StageError : public Error {
 public:
  StageError(pipeline::Stage stage, const Error& cause);
  pipeline::Stage stage() const noexcept { return stage_; }
  const std::string& cause_kind() const noexcept { return cause_kind_; }

 private:
  pipeline::Stage stage_;
  std::string cause_kind_;
};

enum class Phase {
  Describing,
  Reusing,
  ReviewingElements,
  SpecifyingRequirements,
  Planned,
  Generated,
  Verified,
  Repairing,
  Done
};

std::string phase_name(Phase p);
Phase phase_from_name(const std::string& name);

// ---- chatbot routing --------------------------------------------------------

/// Descriptions with fewer tokens than this are treated as ambiguous.
inline constexpr std::size_t kMinDescriptionTokens = 8;

struct Route {
  enum class Kind { Reuse, Fresh, Clarify };
  Kind kind = Kind::Fresh;
  std::vector<store::SearchHit> candidates;  // Reuse only
  std::string question;                      // Clarify only
};

std::string route_kind_name(Route::Kind k);
nlohmann::json to_json(const Route& r);

/// Reuse when the best stored match scores at least `threshold`; otherwise
/// Clarify when the description is shorter than `min_tokens`; otherwise Fresh.
Route route_description(const store::Store& store, const std::string& text,
                        double threshold = store::kDefaultReuseThreshold,
                        std::size_t min_tokens = kMinDescriptionTokens);

// ---- requirement builder ----------------------------------------------------

/// One `variable op value` selection; op is one of == != < <= > >=.
struct Condition {
  std::string variable;
  std::string op = "==";
  std::string value;
};

/// Structured selections behind one requirement.
///  deadlockfree: process.
///  reaches: process, name, conditions (conjoined into `#define name`).
///  ltl: process, pattern (always, never, eventually, infinitely_often,
///       leads_to), name and conditions for the predicate; leads_to also
///       takes response_name and response.
struct RequirementParts {
  std::string kind;
  std::string process;
  std::string name;
  std::vector<Condition> conditions;
  std::string pattern;
  std::string response_name;
  std::vector<Condition> response;
  std::optional<verify::Outcome> expected;
  std::string text;
  std::string id;
};

RequirementParts parts_from_json(const nlohmann::json& j);

/// Emits the #define lines and the #assert. Variables and symbolic values
/// are checked against `elements`. Throws IncompleteParts, UnknownVariable.
verify::Requirement build_requirement(const RequirementParts& parts,
                                      const planner::ExtractedElements& elements);

// ---- sessions ---------------------------------------------------------------

struct Session {
  std::string id;
  Phase phase = Phase::Describing;
  std::uint64_t token = 0;  // bumped by every state change
  std::string description;
  nlohmann::ordered_json context;
  std::optional<Route> route;
  std::optional<std::string> reused_from;
  std::optional<planner::ExtractedElements> elements;
  std::optional<planner::GenerationPlan> plan;
  std::string code;
  std::vector<verify::Requirement> requirements;
  std::vector<nlohmann::json> verdict_history;  // verify::to_json(CheckReport) per check
  std::vector<nlohmann::json> repairs;  // {directive, summary} per repair round
};

nlohmann::json to_json(const Session& s);
Session session_from_json(const nlohmann::json& j);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_dir;  // empty: the shipped store
  nlohmann::json backend = {{"backend", "scripted"}};
  std::string base_dir = ".";  // resolves a scripted backend's relative path
  double similarity_threshold = store::kDefaultReuseThreshold;
  std::size_t min_description_tokens = kMinDescriptionTokens;

  /// {"host", "port", "store", "backend": {...}, "similarity_threshold",
  ///  "min_description_tokens"}; relative paths resolve against the file.
  static ServiceConfig from_file(const std::string& path);
  static ServiceConfig from_json(const nlohmann::json& j, const std::string& base_dir);
};

/// Session phase machine over one store and one backend. Each method takes
/// the request body and returns the response body; state-changing methods
/// accept an optional "token" and reject stale ones.
class SessionManager {
 public:
  SessionManager(store::Store store, std::shared_ptr<llm::ChatBackend> backend,
                 pipeline::PipelineConfig pipeline, ServiceConfig config = {});

  nlohmann::json create(const nlohmann::json& body);
  nlohmann::json describe(const std::string& id, const nlohmann::json& body);
  nlohmann::json get_elements(const std::string& id);
  nlohmann::json put_elements(const std::string& id, const nlohmann::json& body);
  nlohmann::json put_requirements(const std::string& id, const nlohmann::json& body);
  nlohmann::json plan(const std::string& id, const nlohmann::json& body);
  nlohmann::json code(const std::string& id, const nlohmann::json& body);
  nlohmann::json verify(const std::string& id, const nlohmann::json& body);
  nlohmann::json repair(const std::string& id, const nlohmann::json& body);
  nlohmann::json get(const std::string& id);
  nlohmann::json search(const std::string& query, std::size_t k);

  const store::Store& store() const { return store_; }

 private:
  struct Slot {
    std::mutex write;
    std::mutex data;
    Session session;
  };

  store::Store store_;
  std::shared_ptr<llm::ChatBackend> backend_;
  pipeline::PipelineConfig pipeline_;
  ServiceConfig config_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_id_ = 0;

  std::shared_ptr<Slot> slot(const std::string& id);
  template <class Fn>
  nlohmann::json mutate(const std::string& id, const nlohmann::json& body, Fn&& fn);
  nlohmann::json snapshot(const Session& s) const;
  void persist(const Session& s);
  void run_verification(Session& s);
};

/// Registers every endpoint (and CORS headers) on `server`.
void mount(httplib::Server& server, SessionManager& manager);

/// Builds the store, backend and manager from `config` and serves until killed.
void serve(const ServiceConfig& config);

}  // namespace cspforge::service
