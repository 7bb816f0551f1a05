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
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cspforge/semantics/model.hpp"
#include "cspforge/semantics/terms.hpp"

namespace cspforge::semantics {

using StateId = std::uint32_t;
using LabelId = std::uint32_t;

inline constexpr LabelId kTau = 0;
inline constexpr LabelId kTick = 1;
inline constexpr std::size_t kDefaultStateLimit = 1'000'000;

class StateLimitExceeded : public Error {
 public:
  StateLimitExceeded(std::size_t limit, std::size_t frontier);
  std::size_t limit() const noexcept { return limit_; }
  std::size_t frontier() const noexcept { return frontier_; }

 private:
  std::size_t limit_;
  std::size_t frontier_;
};

struct State {
  Valuation valuation;
  TermId term = 0;

  bool operator==(const State& o) const { return term == o.term && valuation == o.valuation; }
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

struct Successor {
  LabelId label;
  State state;
};

/// Operational semantics of one model: initial state and enabled steps.
/// Not thread-safe (the term store grows while stepping); use one instance
/// per exploration.
class Semantics {
 public:
  explicit Semantics(syntax::ModelAst ast);
  explicit Semantics(std::shared_ptr<const CompiledModel> model);

  const CompiledModel& model() const noexcept { return *model_; }
  std::shared_ptr<const CompiledModel> model_ptr() const noexcept { return model_; }
  const TermStore& terms() const noexcept { return terms_; }

  /// Labels: 0 is τ, 1 is ✓, then the model's events in sorted order.
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  LabelId label_id(const std::string& name) const;

  State initial_state(const std::string& entry);
  std::vector<Successor> enabled_steps(const State& s);

  bool terminated(const State& s) const { return s.term == kOmega; }
  std::string describe_config(TermId t) const { return terms_.describe(t); }

 private:
  struct RawStep {
    LabelId label;
    std::vector<const std::vector<syntax::Assignment>*> programs;
    TermId next;
  };

  std::shared_ptr<const CompiledModel> model_;
  TermStore terms_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> label_index_;
  std::unordered_map<AlphabetId, std::vector<LabelId>> alphabet_labels_;
  std::vector<TermId> step_stack_;

  TermId convert(const syntax::ProcessExpr* p, const Valuation& v,
                 std::vector<const std::string*>& calls);
  TermId normalize(TermId t, const Valuation& v);
  void steps_term(TermId t, const Valuation& v, std::vector<RawStep>& out);
  void steps_leaf(const syntax::ProcessExpr* p, const Valuation& v, std::vector<RawStep>& out);
  void steps_composite(TermId t, const Valuation& v, std::vector<RawStep>& out);
  const std::vector<LabelId>& alphabet(AlphabetId a);
};

struct Edge {
  LabelId label;
  StateId to;
};

/// Explicit labelled transition system. Immutable once built by explore().
class Lts {
 public:
  std::shared_ptr<const Semantics> semantics;
  std::vector<State> states;
  std::vector<std::vector<Edge>> out;
  /// BFS tree: parent state and the label taken from it; the initial state
  /// points at itself.
  std::vector<std::pair<StateId, LabelId>> parent;
  StateId initial = 0;

  std::size_t state_count() const { return states.size(); }
  std::size_t transition_count() const;
  const std::vector<std::string>& labels() const { return semantics->labels(); }
  const std::string& label(LabelId l) const { return semantics->labels()[l]; }
  const CompiledModel& model() const { return semantics->model(); }

  bool terminated(StateId s) const { return states[s].term == kOmega; }
  bool deadlocked(StateId s) const { return out[s].empty() && !terminated(s); }

  /// Labels on the BFS-tree path from the initial state to `s`.
  std::vector<std::string> path_to(StateId s) const;

  std::string describe_config(StateId s) const;
  std::string describe_state(StateId s) const;
  std::string to_json() const;
};

Lts explore(const syntax::ModelAst& ast, const std::string& entry,
            std::size_t state_limit = kDefaultStateLimit);
Lts explore(std::shared_ptr<const CompiledModel> model, const std::string& entry,
            std::size_t state_limit = kDefaultStateLimit);

}  // namespace cspforge::semantics
