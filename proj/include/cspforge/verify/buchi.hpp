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
#include <set>
#include <string>
#include <vector>

#include "cspforge/syntax/ast.hpp"

namespace cspforge::verify {

/// Negation normal form over ¬-free connectives; literals carry polarity.
struct NnfNode {
  enum Op { True, False, Prop, NotProp, And, Or, Next, Until, Release };
  Op op = True;
  int lhs = -1;
  int rhs = -1;
  std::string prop;
};

/// Hash-consed NNF formula pool; equal subformulas share an index.
class NnfPool {
 public:
  int add(NnfNode n);
  const NnfNode& operator[](int i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

  /// NNF of `f` (negated first when `negate` is set).
  int from_ltl(const syntax::LtlFormula& f, bool negate);
  std::string render(int i) const;

 private:
  std::vector<NnfNode> nodes_;
};

/// Generalised Büchi automaton with state-based labels: a run reads the
/// letter of each position in the state it enters.
struct Buchi {
  struct State {
    std::vector<std::string> pos;  // propositions that must hold
    std::vector<std::string> neg;  // propositions that must not hold
    std::vector<int> succ;
    bool initial = false;
  };
  std::vector<State> states;
  /// accepting[i] lists, per acceptance set i, membership of each state.
  std::vector<std::vector<bool>> accepting;
};

/// Tableau construction (expand/split over New/Old/Next sets).
Buchi build_buchi(const NnfPool& pool, int root);
Buchi build_buchi_for_negation(const syntax::LtlFormula& f);

}  // namespace cspforge::verify
