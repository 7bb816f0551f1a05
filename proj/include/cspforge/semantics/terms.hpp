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
#include <string>
#include <unordered_map>
#include <vector>

#include "cspforge/syntax/ast.hpp"

namespace cspforge::semantics {

using TermId = std::uint32_t;
using ProcId = std::uint32_t;
using AlphabetId = std::uint32_t;

/// The successfully terminated configuration.
inline constexpr TermId kOmega = 0;

enum class TermKind : std::uint8_t { Omega, Leaf, Par, Inter, Seq };

/// Hash-consed process configuration.
///   Leaf:  a = process node (Stop, Skip, prefix or choice once normalised)
///   Par:   a, b = operand terms, c = alphabet
///   Inter: a, b = operand terms
///   Seq:   a = running left term, b = process node still to run
struct Term {
  TermKind kind = TermKind::Omega;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t c = 0;
  /// No call, conditional or composite operator is waiting to be unfolded.
  bool normal = true;
};

class TermStore {
 public:
  TermStore();

  /// Structurally equal process nodes share one id.
  ProcId proc_id(const syntax::ProcessExpr* p);
  const syntax::ProcessExpr& proc(ProcId id) const { return *procs_[id]; }

  AlphabetId alphabet_id(const std::vector<std::string>& events);
  const std::vector<std::string>& alphabet(AlphabetId id) const { return alphabets_[id]; }

  TermId leaf(ProcId p);
  TermId par(TermId l, TermId r, AlphabetId a);
  TermId inter(TermId l, TermId r);
  TermId seq(TermId l, ProcId rest);

  const Term& get(TermId t) const { return terms_[t]; }
  std::size_t size() const { return terms_.size(); }

  /// Canonical text of a configuration; equal iff the terms are equal.
  std::string describe(TermId t) const;

 private:
  struct KeyHash {
    std::size_t operator()(const Term& t) const noexcept;
  };
  struct KeyEq {
    bool operator()(const Term& x, const Term& y) const noexcept {
      return x.kind == y.kind && x.a == y.a && x.b == y.b && x.c == y.c;
    }
  };

  std::vector<Term> terms_;
  std::unordered_map<Term, TermId, KeyHash, KeyEq> index_;
  std::vector<const syntax::ProcessExpr*> procs_;
  std::vector<std::string> proc_text_;
  std::unordered_map<const syntax::ProcessExpr*, ProcId> by_pointer_;
  std::unordered_map<std::string, ProcId> by_text_;
  std::vector<std::vector<std::string>> alphabets_;
  std::map<std::vector<std::string>, AlphabetId> alphabet_index_;

  TermId intern(Term t);
};

}  // namespace cspforge::semantics
