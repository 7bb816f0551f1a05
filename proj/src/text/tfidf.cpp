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

#include "cspforge/text/tfidf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace cspforge::text {

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u < 128 && std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TfIdf::TfIdf(const std::vector<std::string>& documents) : n_(documents.size()) {
  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : documents) {
    tokens.push_back(tokenize(d));
    std::set<std::string> seen(tokens.back().begin(), tokens.back().end());
    for (const auto& t : seen) ++df_[t];
  }
  for (const auto& doc : tokens) {
    SparseVector v;
    for (const auto& t : doc) v[t] += 1.0;
    for (auto& [t, w] : v) w *= idf(t);
    docs_.push_back(std::move(v));
  }
}

double TfIdf::idf(const std::string& term) const {
  auto it = df_.find(term);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(n_)) / (1.0 + df)) + 1.0;
}

SparseVector TfIdf::vectorize(std::string_view text) const {
  SparseVector v;
  for (const auto& t : tokenize(text)) v[t] += 1.0;
  for (auto& [t, w] : v) w *= idf(t);
  return v;
}

std::vector<double> TfIdf::similarities(std::string_view query) const {
  auto q = vectorize(query);
  std::vector<double> out;
  for (const auto& d : docs_) out.push_back(cosine(q, d));
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, w] : a) {
    na += w * w;
    auto it = b.find(t);
    if (it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace cspforge::text
