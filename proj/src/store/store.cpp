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

#include "cspforge/store/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "cspforge/text/tfidf.hpp"

namespace cspforge::store {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class FileLock {
 public:
  FileLock(const fs::path& path, bool exclusive) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw StoreError("cannot open lock file " + path.string());
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw StoreError("cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw StoreError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw StoreError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

void write_atomic(const fs::path& p, const std::string& text) {
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = p;
  tmp += ".tmp" + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw StoreError("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

bool valid_id(const std::string& id) {
  static const std::regex re(R"([A-Za-z0-9][A-Za-z0-9_-]*)");
  return std::regex_match(id, re);
}

std::string slug(const std::string& description) {
  auto tokens = text::tokenize(description);
  std::string s;
  for (std::size_t i = 0; i < tokens.size() && i < 4; ++i) s += (i ? "-" : "") + tokens[i];
  return s.empty() ? "model" : s;
}

}  // namespace

std::vector<verify::Requirement> VerifiedEntry::checked_requirements() const {
  std::vector<verify::Requirement> out;
  for (std::size_t i = 0; i < requirements.size(); ++i) {
    const auto& r = requirements[i];
    out.push_back(verify::make_requirement(r.assertion, r.expected, r.text,
                                           "R" + std::to_string(i + 1)));
  }
  return out;
}

json to_json(const VerifiedEntry& e) {
  json reqs = json::array();
  for (const auto& r : e.requirements) {
    reqs.push_back(
        {{"text", r.text}, {"assertion", r.assertion}, {"expected", verify::to_string(r.expected)}});
  }
  return {{"id", e.id},
          {"description", e.description},
          {"descriptors", e.descriptors},
          {"requirements", reqs},
          {"plan", json::parse(planner::to_json(e.plan).dump())},
          {"code", e.code},
          {"verdicts", e.verdicts}};
}

VerifiedEntry entry_from_json(const json& j) {
  VerifiedEntry e;
  e.id = j.value("id", "");
  e.description = j.at("description").get<std::string>();
  e.descriptors = j.value("descriptors", std::vector<std::string>{});
  for (const auto& r : j.at("requirements")) {
    e.requirements.push_back({r.value("text", ""), r.at("assertion").get<std::string>(),
                              verify::parse_outcome(r.at("expected").get<std::string>())});
  }
  e.plan = planner::plan_from_json(j.at("plan"));
  e.code = j.at("code").get<std::string>();
  e.verdicts = j.value("verdicts", json::array());
  return e;
}

StoredRequirement stored_requirement(const verify::Requirement& r) {
  return {r.description, r.source, r.expected};
}

Store::Store(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_ / "entries");
  fs::create_directories(dir_ / "sessions");
  FileLock lock(dir_ / ".lock", true);
  if (!fs::exists(dir_ / "index.json")) {
    write_atomic(dir_ / "index.json", json{{"ids", json::array()}, {"version", 0}}.dump(2));
  }
}

json Store::read_index() const { return read_json(dir_ / "index.json"); }

std::vector<std::string> Store::ids() const {
  FileLock lock(dir_ / ".lock", false);
  return read_index().at("ids").get<std::vector<std::string>>();
}

std::uint64_t Store::version() const {
  FileLock lock(dir_ / ".lock", false);
  return read_index().value("version", std::uint64_t{0});
}

std::vector<VerifiedEntry> Store::read_all() const {
  FileLock lock(dir_ / ".lock", false);
  std::vector<VerifiedEntry> out;
  const auto index = read_index();
  for (const auto& id : index.at("ids")) {
    out.push_back(entry_from_json(read_json(dir_ / "entries" / (id.get<std::string>() + ".json"))));
  }
  return out;
}

std::optional<VerifiedEntry> Store::get(const std::string& id) const {
  if (!valid_id(id)) return std::nullopt;
  FileLock lock(dir_ / ".lock", false);
  auto path = dir_ / "entries" / (id + ".json");
  if (!fs::exists(path)) return std::nullopt;
  return entry_from_json(read_json(path));
}

std::string Store::add_verified(VerifiedEntry entry, const verify::CheckOptions& options) {
  if (entry.requirements.empty()) throw NotFullyVerified("entry has no requirements");
  for (const auto& v : entry.verdicts) {
    if (v.value("status", "") != "MATCH") {
      throw NotFullyVerified("entry verdict '" + v.value("assertion", "?") + "' is not MATCH");
    }
  }
  auto report = verify::check_all(entry.code, entry.checked_requirements(), options);
  if (!report.compiled) {
    throw NotFullyVerified("entry model fails to compile: " + report.error_kind + ": " +
                           report.error);
  }
  if (!report.all_match()) {
    throw NotFullyVerified("entry model does not meet requirement " +
                           report.verdicts[*report.first_mismatch].assertion);
  }
  entry.verdicts = verify::to_json(report)["verdicts"];

  FileLock lock(dir_ / ".lock", true);
  auto index = read_index();
  auto ids = index.at("ids").get<std::vector<std::string>>();
  if (entry.id.empty()) {
    auto base = slug(entry.description);
    entry.id = base;
    for (int n = 2; std::find(ids.begin(), ids.end(), entry.id) != ids.end(); ++n) {
      entry.id = base + "-" + std::to_string(n);
    }
  }
  if (!valid_id(entry.id)) throw StoreError("invalid entry id '" + entry.id + "'");
  if (std::find(ids.begin(), ids.end(), entry.id) != ids.end()) {
    throw DuplicateId("an entry with id '" + entry.id + "' already exists");
  }
  write_atomic(dir_ / "entries" / (entry.id + ".json"), to_json(entry).dump(2));
  ids.push_back(entry.id);
  index["ids"] = ids;
  index["version"] = index.value("version", std::uint64_t{0}) + 1;
  write_atomic(dir_ / "index.json", index.dump(2));
  return entry.id;
}

std::vector<SearchHit> Store::search_similar(const std::string& description, std::size_t k) const {
  if (k == 0) throw PreconditionError("k must be at least 1");
  auto entries = read_all();
  if (entries.empty()) return {};
  std::vector<std::string> docs;
  for (const auto& e : entries) {
    std::string d = e.description;
    for (const auto& t : e.descriptors) d += " " + t;
    docs.push_back(d);
  }
  text::TfIdf model(docs);
  auto sims = model.similarities(description);
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < entries.size(); ++i) hits.push_back({entries[i].id, sims[i]});
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<codegen::Exemplar> Store::load_exemplars() const {
  std::vector<codegen::Exemplar> out;
  for (auto& e : read_all()) out.push_back({e.id, std::move(e.plan), std::move(e.code)});
  std::sort(out.begin(), out.end(),
            [](const codegen::Exemplar& a, const codegen::Exemplar& b) { return a.id < b.id; });
  return out;
}

void Store::save_session(const std::string& id, const json& doc) {
  if (!valid_id(id)) throw StoreError("invalid session id '" + id + "'");
  FileLock lock(dir_ / ".lock", true);
  write_atomic(dir_ / "sessions" / (id + ".json"), doc.dump(2));
}

std::optional<json> Store::load_session(const std::string& id) const {
  if (!valid_id(id)) return std::nullopt;
  FileLock lock(dir_ / ".lock", false);
  auto path = dir_ / "sessions" / (id + ".json");
  if (!fs::exists(path)) return std::nullopt;
  return read_json(path);
}

fs::path default_store_dir() { return fs::path(CSPFORGE_DATA_DIR) / "store"; }

}  // namespace cspforge::store
