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

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cspforge::text {

/// Lowercased runs of ASCII letters and digits; everything else separates.
std::vector<std::string> tokenize(std::string_view s);

using SparseVector = std::map<std::string, double>;

/// TF-IDF weighting fitted on a document collection. Term frequency is the
/// raw count; idf(t) = ln((1 + N) / (1 + df(t))) + 1, so terms unseen in the
/// collection still weigh in a query's norm.
class TfIdf {
 public:
  explicit TfIdf(const std::vector<std::string>& documents);

  SparseVector vectorize(std::string_view text) const;
  double idf(const std::string& term) const;
  std::size_t size() const noexcept { return docs_.size(); }
  const SparseVector& document(std::size_t i) const { return docs_[i]; }

  /// Cosine similarity of `query` against every fitted document.
  std::vector<double> similarities(std::string_view query) const;

 private:
  std::size_t n_ = 0;
  std::map<std::string, std::size_t> df_;
  std::vector<SparseVector> docs_;
};

/// Cosine in [0, 1] for non-negative vectors; 0 when either is zero.
double cosine(const SparseVector& a, const SparseVector& b);

}  // namespace cspforge::text
