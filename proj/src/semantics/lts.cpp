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

#include "cspforge/semantics/lts.hpp"

#include <algorithm>

#include "json.hpp"

namespace cspforge::semantics {

using namespace syntax;

StateLimitExceeded::StateLimitExceeded(std::size_t limit, std::size_t frontier)
    : Error("StateLimitExceeded", "state space exceeds the limit of " + std::to_string(limit) +
                                      " states (" + std::to_string(frontier) +
                                      " states still unexplored)"),
      limit_(limit),
      frontier_(frontier) {}

std::size_t StateHash::operator()(const State& s) const noexcept {
  std::size_t h = s.term * 0x9E3779B97F4A7C15ULL;
  for (auto x : s.valuation) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001B3ULL;
  return h ^ (h >> 31);
}

Semantics::Semantics(ModelAst ast)
    : Semantics(std::make_shared<const CompiledModel>(std::move(ast))) {}

Semantics::Semantics(std::shared_ptr<const CompiledModel> model) : model_(std::move(model)) {
  labels_ = {"τ", "✓"};
  for (auto& e : model_->ast().events()) labels_.push_back(e);
  for (LabelId i = 0; i < labels_.size(); ++i) label_index_.emplace(labels_[i], i);
}

LabelId Semantics::label_id(const std::string& name) const {
  auto it = label_index_.find(name);
  if (it == label_index_.end()) throw EvaluationError("unknown event '" + name + "'");
  return it->second;
}

const std::vector<LabelId>& Semantics::alphabet(AlphabetId a) {
  auto it = alphabet_labels_.find(a);
  if (it != alphabet_labels_.end()) return it->second;
  std::vector<LabelId> ids;
  for (const auto& e : terms_.alphabet(a)) ids.push_back(label_id(e));
  std::sort(ids.begin(), ids.end());
  return alphabet_labels_.emplace(a, std::move(ids)).first->second;
}

State Semantics::initial_state(const std::string& entry) {
  const auto* def = model_->ast().find_process(entry);
  if (!def) throw UnknownProcess("no process named '" + entry + "'");
  Valuation v = model_->initial_valuation();
  std::vector<const std::string*> calls{&def->name};
  return State{v, convert(def->body.get(), v, calls)};
}

TermId Semantics::convert(const ProcessExpr* p, const Valuation& v,
                          std::vector<const std::string*>& calls) {
  if (const auto* call = std::get_if<ProcessCall>(&p->node)) {
    for (const auto* name : calls) {
      if (*name == call->name) {
        throw EvaluationError("unguarded recursion through '" + call->name + "()'");
      }
    }
    const auto* def = model_->ast().find_process(call->name);
    if (!def) throw UnknownProcess("no process named '" + call->name + "'");
    calls.push_back(&def->name);
    TermId t = convert(def->body.get(), v, calls);
    calls.pop_back();
    return t;
  }
  if (const auto* c = std::get_if<IfElse>(&p->node)) {
    return convert(model_->truthy(*c->condition, v) ? c->then_branch.get()
                                                    : c->else_branch.get(),
                   v, calls);
  }
  if (const auto* c = std::get_if<ParallelSync>(&p->node)) {
    TermId l = convert(c->left.get(), v, calls);
    TermId r = convert(c->right.get(), v, calls);
    return terms_.par(l, r, terms_.alphabet_id(c->alphabet));
  }
  if (const auto* c = std::get_if<Interleave>(&p->node)) {
    TermId l = convert(c->left.get(), v, calls);
    TermId r = convert(c->right.get(), v, calls);
    return terms_.inter(l, r);
  }
  if (const auto* c = std::get_if<Sequential>(&p->node)) {
    TermId l = convert(c->left.get(), v, calls);
    return terms_.seq(l, terms_.proc_id(c->right.get()));
  }
  return terms_.leaf(terms_.proc_id(p));
}

TermId Semantics::normalize(TermId id, const Valuation& v) {
  const Term t = terms_.get(id);
  if (t.normal) return id;
  switch (t.kind) {
    case TermKind::Leaf: {
      std::vector<const std::string*> calls;
      return convert(&terms_.proc(t.a), v, calls);
    }
    case TermKind::Par: {
      TermId l = normalize(t.a, v);
      return terms_.par(l, normalize(t.b, v), t.c);
    }
    case TermKind::Inter: {
      TermId l = normalize(t.a, v);
      return terms_.inter(l, normalize(t.b, v));
    }
    case TermKind::Seq:
      return terms_.seq(normalize(t.a, v), t.b);
    case TermKind::Omega:
      break;
  }
  return id;
}

void Semantics::steps_term(TermId t, const Valuation& v, std::vector<RawStep>& out) {
  if (std::find(step_stack_.begin(), step_stack_.end(), t) != step_stack_.end()) {
    step_stack_.clear();
    throw EvaluationError("unguarded recursion in '" + terms_.describe(t) + "'");
  }
  step_stack_.push_back(t);
  const Term& term = terms_.get(t);
  if (term.kind == TermKind::Leaf) {
    steps_leaf(&terms_.proc(term.a), v, out);
  } else if (term.kind != TermKind::Omega) {
    steps_composite(t, v, out);
  }
  step_stack_.pop_back();
}

void Semantics::steps_leaf(const ProcessExpr* p, const Valuation& v, std::vector<RawStep>& out) {
  if (std::holds_alternative<Stop>(p->node)) return;
  if (std::holds_alternative<Skip>(p->node)) {
    out.push_back(RawStep{kTick, {}, kOmega});
    return;
  }
  if (const auto* e = std::get_if<EventPrefix>(&p->node)) {
    if (e->guard && !model_->truthy(*e->guard, v)) return;
    RawStep step{label_id(e->event), {}, terms_.leaf(terms_.proc_id(e->continuation.get()))};
    if (!e->program.empty()) step.programs.push_back(&e->program);
    out.push_back(std::move(step));
    return;
  }
  if (const auto* c = std::get_if<ExternalChoice>(&p->node)) {
    for (const auto* side : {c->left.get(), c->right.get()}) {
      std::vector<const std::string*> calls;
      steps_term(convert(side, v, calls), v, out);
    }
    return;
  }
  std::vector<const std::string*> calls;
  steps_term(convert(p, v, calls), v, out);
}

void Semantics::steps_composite(TermId id, const Valuation& v, std::vector<RawStep>& out) {
  const Term t = terms_.get(id);
  if (t.kind == TermKind::Seq) {
    std::vector<RawStep> left;
    steps_term(t.a, v, left);
    for (auto& s : left) {
      if (s.label == kTick) {
        std::vector<const std::string*> calls;
        steps_term(convert(&terms_.proc(t.b), v, calls), v, out);
      } else {
        s.next = terms_.seq(s.next, t.b);
        out.push_back(std::move(s));
      }
    }
    return;
  }

  static const std::vector<LabelId> kNoSync;
  const auto& sync = t.kind == TermKind::Par ? alphabet(t.c) : kNoSync;
  auto synchronised = [&](LabelId l) {
    return l == kTick || std::binary_search(sync.begin(), sync.end(), l);
  };
  auto combine = [&](TermId l, TermId r) {
    return t.kind == TermKind::Par ? terms_.par(l, r, t.c) : terms_.inter(l, r);
  };

  std::vector<RawStep> left, right;
  steps_term(t.a, v, left);
  steps_term(t.b, v, right);
  for (const auto& s : left) {
    if (!synchronised(s.label)) out.push_back(RawStep{s.label, s.programs, combine(s.next, t.b)});
  }
  for (const auto& s : right) {
    if (!synchronised(s.label)) out.push_back(RawStep{s.label, s.programs, combine(t.a, s.next)});
  }
  for (const auto& l : left) {
    if (!synchronised(l.label)) continue;
    for (const auto& r : right) {
      if (r.label != l.label) continue;
      RawStep joint{l.label, l.programs, kOmega};
      joint.programs.insert(joint.programs.end(), r.programs.begin(), r.programs.end());
      if (l.label != kTick) joint.next = combine(l.next, r.next);
      out.push_back(std::move(joint));
    }
  }
}

std::vector<Successor> Semantics::enabled_steps(const State& s) {
  std::vector<RawStep> raw;
  step_stack_.clear();
  steps_term(s.term, s.valuation, raw);
  std::vector<Successor> out;
  out.reserve(raw.size());
  for (const auto& step : raw) {
    Valuation v = s.valuation;
    for (const auto* program : step.programs) model_->execute(*program, v);
    Successor succ{step.label, State{std::move(v), 0}};
    succ.state.term = normalize(step.next, succ.state.valuation);
    bool seen = std::any_of(out.begin(), out.end(), [&](const Successor& o) {
      return o.label == succ.label && o.state == succ.state;
    });
    if (!seen) out.push_back(std::move(succ));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t Lts::transition_count() const {
  std::size_t n = 0;
  for (const auto& edges : out) n += edges.size();
  return n;
}

std::vector<std::string> Lts::path_to(StateId s) const {
  std::vector<std::string> trace;
  while (s != initial) {
    trace.push_back(label(parent[s].second));
    s = parent[s].first;
  }
  std::reverse(trace.begin(), trace.end());
  return trace;
}

std::string Lts::describe_config(StateId s) const {
  return semantics->describe_config(states[s].term);
}

std::string Lts::describe_state(StateId s) const {
  return model().describe_valuation(states[s].valuation) + " " + describe_config(s);
}

std::string Lts::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["states"] = ordered_json::array();
  for (StateId s = 0; s < states.size(); ++s) {
    ordered_json val = ordered_json::object();
    for (const auto& slot : model().slots()) {
      if (slot.array) {
        ordered_json arr = ordered_json::array();
        for (std::size_t k = 0; k < slot.size; ++k) arr.push_back(states[s].valuation[slot.offset + k]);
        val[slot.name] = arr;
      } else {
        val[slot.name] = states[s].valuation[slot.offset];
      }
    }
    doc["states"].push_back(ordered_json{{"id", s},
                                         {"valuation", val},
                                         {"config", describe_config(s)},
                                         {"terminated", terminated(s)}});
  }
  doc["transitions"] = ordered_json::array();
  for (StateId s = 0; s < states.size(); ++s) {
    for (const auto& e : out[s]) doc["transitions"].push_back({s, label(e.label), e.to});
  }
  doc["initial"] = initial;
  return doc.dump(2);
}

Lts explore(const ModelAst& ast, const std::string& entry, std::size_t state_limit) {
  return explore(std::make_shared<const CompiledModel>(ast), entry, state_limit);
}

Lts explore(std::shared_ptr<const CompiledModel> model, const std::string& entry,
            std::size_t state_limit) {
  if (state_limit < 1) throw PreconditionError("state_limit must be at least 1");
  auto sem = std::make_shared<Semantics>(std::move(model));
  Lts lts;
  lts.semantics = sem;

  std::unordered_map<State, StateId, StateHash> index;
  State s0 = sem->initial_state(entry);
  index.emplace(s0, 0);
  lts.states.push_back(std::move(s0));
  lts.parent.emplace_back(0, kTau);

  for (StateId i = 0; i < lts.states.size(); ++i) {
    std::vector<Successor> succ;
    try {
      succ = sem->enabled_steps(lts.states[i]);
    } catch (const EvaluationError& err) {
      std::string reason = err.reason().empty() ? err.what() : err.reason();
      throw EvaluationError(reason + " in state " + lts.describe_state(i), lts.path_to(i));
    }
    std::vector<Edge> edges;
    edges.reserve(succ.size());
    for (auto& s : succ) {
      auto [it, fresh] = index.emplace(s.state, static_cast<StateId>(lts.states.size()));
      if (fresh) {
        if (lts.states.size() >= state_limit) {
          throw StateLimitExceeded(state_limit, lts.states.size() - i);
        }
        lts.states.push_back(std::move(s.state));
        lts.parent.emplace_back(i, s.label);
      }
      edges.push_back(Edge{s.label, it->second});
    }
    lts.out.push_back(std::move(edges));
  }
  return lts;
}

}  // namespace cspforge::semantics
