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

#include "cspforge/semantics/terms.hpp"

#include "cspforge/syntax/printer.hpp"

namespace cspforge::semantics {

using namespace syntax;

namespace {

bool leaf_is_normal(const ProcessExpr& p) {
  return std::holds_alternative<Stop>(p.node) || std::holds_alternative<Skip>(p.node) ||
         std::holds_alternative<EventPrefix>(p.node) ||
         std::holds_alternative<ExternalChoice>(p.node);
}

}  // namespace

std::size_t TermStore::KeyHash::operator()(const Term& t) const noexcept {
  std::size_t h = static_cast<std::size_t>(t.kind);
  for (std::uint32_t x : {t.a, t.b, t.c}) h = h * 0x9E3779B97F4A7C15ULL + x;
  return h ^ (h >> 29);
}

TermStore::TermStore() {
  terms_.push_back(Term{});
  index_.emplace(terms_[0], kOmega);
}

ProcId TermStore::proc_id(const ProcessExpr* p) {
  if (auto it = by_pointer_.find(p); it != by_pointer_.end()) return it->second;
  std::string text = render_process(*p);
  auto [it, fresh] = by_text_.emplace(text, static_cast<ProcId>(procs_.size()));
  if (fresh) {
    procs_.push_back(p);
    proc_text_.push_back(std::move(text));
  }
  by_pointer_.emplace(p, it->second);
  return it->second;
}

AlphabetId TermStore::alphabet_id(const std::vector<std::string>& events) {
  auto [it, fresh] = alphabet_index_.emplace(events, static_cast<AlphabetId>(alphabets_.size()));
  if (fresh) alphabets_.push_back(events);
  return it->second;
}

TermId TermStore::intern(Term t) {
  auto [it, fresh] = index_.emplace(t, static_cast<TermId>(terms_.size()));
  if (fresh) terms_.push_back(t);
  return it->second;
}

TermId TermStore::leaf(ProcId p) {
  return intern(Term{TermKind::Leaf, p, 0, 0, leaf_is_normal(*procs_[p])});
}

TermId TermStore::par(TermId l, TermId r, AlphabetId a) {
  return intern(Term{TermKind::Par, l, r, a, terms_[l].normal && terms_[r].normal});
}

TermId TermStore::inter(TermId l, TermId r) {
  return intern(Term{TermKind::Inter, l, r, 0, terms_[l].normal && terms_[r].normal});
}

TermId TermStore::seq(TermId l, ProcId rest) {
  return intern(Term{TermKind::Seq, l, rest, 0, terms_[l].normal});
}

std::string TermStore::describe(TermId id) const {
  const Term& t = terms_[id];
  switch (t.kind) {
    case TermKind::Omega:
      return "<terminated>";
    case TermKind::Leaf:
      return proc_text_[t.a];
    case TermKind::Par: {
      std::string alpha;
      for (const auto& e : alphabets_[t.c]) alpha += (alpha.empty() ? "" : ", ") + e;
      return "(" + describe(t.a) + " ||{" + alpha + "} " + describe(t.b) + ")";
    }
    case TermKind::Inter:
      return "(" + describe(t.a) + " ||| " + describe(t.b) + ")";
    case TermKind::Seq:
      return "(" + describe(t.a) + "; " + proc_text_[t.b] + ")";
  }
  return {};
}

}  // namespace cspforge::semantics
