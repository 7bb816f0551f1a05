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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cspforge/codegen/codegen.hpp"
#include "cspforge/common/error.hpp"
#include "cspforge/planner/planner.hpp"
#include "cspforge/verify/checks.hpp"

namespace cspforge::store {

CSPFORGE_DEFINE_ERROR(NotFullyVerified);
CSPFORGE_DEFINE_ERROR(DuplicateId);
CSPFORGE_DEFINE_ERROR(StoreError);

/// Requirement as kept in entry files: natural-language text, the assertion
/// source (#define lines plus one #assert) and the expected outcome.
struct StoredRequirement {
  std::string text;
  std::string assertion;
  verify::Outcome expected = verify::Outcome::Valid;
};

struct VerifiedEntry {
  std::string id;
  std::string description;
  std::vector<std::string> descriptors;
  std::vector<StoredRequirement> requirements;
  planner::GenerationPlan plan;
  std::string code;
  nlohmann::json verdicts = nlohmann::json::array();

  std::vector<verify::Requirement> checked_requirements() const;
};

nlohmann::json to_json(const VerifiedEntry& e);
VerifiedEntry entry_from_json(const nlohmann::json& j);
StoredRequirement stored_requirement(const verify::Requirement& r);

struct SearchHit {
  std::string id;
  double score = 0.0;
};

inline constexpr double kDefaultReuseThreshold = 0.35;

/// Directory of JSON documents: `entries/<id>.json`, `index.json`
/// ({"ids": [...], "version": n}) and free-form `sessions/<id>.json`.
/// Writers hold an exclusive lock on `.lock`; readers a shared one; files
/// are replaced by rename so readers never see a partial document.
class Store {
 public:
  explicit Store(std::filesystem::path dir);

  /// Re-verifies the entry; stores it with the fresh verdicts. An empty id
  /// is derived from the description. Throws NotFullyVerified, DuplicateId.
  std::string add_verified(VerifiedEntry entry,
                           const verify::CheckOptions& options = verify::CheckOptions{});

  /// TF-IDF cosine of `description` against description plus descriptors,
  /// descending, ties by id.
  std::vector<SearchHit> search_similar(const std::string& description, std::size_t k) const;

  std::vector<codegen::Exemplar> load_exemplars() const;
  std::optional<VerifiedEntry> get(const std::string& id) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return ids().size(); }
  std::uint64_t version() const;

  void save_session(const std::string& id, const nlohmann::json& doc);
  std::optional<nlohmann::json> load_session(const std::string& id) const;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;

  nlohmann::json read_index() const;
  std::vector<VerifiedEntry> read_all() const;
};

/// Store shipped with the repository.
std::filesystem::path default_store_dir();

}  // namespace cspforge::store
