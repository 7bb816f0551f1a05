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

#include "cspforge/verify/checks.hpp"

#include <algorithm>
#include <unordered_map>

#include "cspforge/syntax/parser.hpp"
#include "cspforge/syntax/printer.hpp"
#include "cspforge/verify/buchi.hpp"

namespace cspforge::verify {

using namespace syntax;
using semantics::Lts;
using semantics::StateId;

std::string to_string(Outcome o) { return o == Outcome::Valid ? "VALID" : "INVALID"; }
std::string to_string(Status s) { return s == Status::Match ? "MATCH" : "MISMATCH"; }

Outcome parse_outcome(const std::string& text) {
  std::string t;
  for (char c : text) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "VALID" || t == "TRUE") return Outcome::Valid;
  if (t == "INVALID" || t == "FALSE") return Outcome::Invalid;
  throw PreconditionError("expected outcome must be VALID or INVALID, got '" + text + "'");
}

std::string Trace::render() const {
  std::string s = "<init";
  std::size_t loop = lasso_start.value_or(events.size() + 1);
  for (std::size_t i = 0; i < events.size(); ++i) {
    s += i == loop ? " -> (" : " -> ";
    s += events[i];
  }
  if (loop < events.size()) s += ")*";
  if (lasso_start && *lasso_start == events.size()) s += " -> (" + kStutterLabel + ")*";
  return s + ">";
}

namespace {

Trace trace_to(const Lts& lts, StateId target) {
  Trace t;
  for (StateId s = target;; s = lts.parent[s].first) {
    t.states.push_back(s);
    if (s == lts.initial) break;
    t.events.push_back(lts.label(lts.parent[s].second));
  }
  std::reverse(t.states.begin(), t.states.end());
  std::reverse(t.events.begin(), t.events.end());
  return t;
}

}  // namespace

// State ids are assigned in breadth-first order, so the first hit has a
// shortest path in the BFS tree.
CheckResult check_deadlockfree(const Lts& lts) {
  for (StateId s = 0; s < lts.state_count(); ++s) {
    if (lts.deadlocked(s)) return {Outcome::Invalid, trace_to(lts, s)};
  }
  return {Outcome::Valid, std::nullopt};
}

CheckResult check_reaches(const Lts& lts, const std::string& predicate) {
  const auto& model = lts.model();
  if (!model.ast().find_define(predicate)) throw UnknownPredicate({}, predicate);
  for (StateId s = 0; s < lts.state_count(); ++s) {
    if (model.define_holds(predicate, lts.states[s].valuation)) {
      return {Outcome::Valid, trace_to(lts, s)};
    }
  }
  return {Outcome::Invalid, std::nullopt};
}

// ---------------------------------------------------------------------------
// LTL: product of the stutter-closed system with the automaton of the
// negated formula, searched for an accepting cycle by nested DFS.

namespace {

constexpr std::uint32_t kInitIn = UINT32_MAX;
constexpr std::uint32_t kStutterIn = UINT32_MAX - 1;

struct ProductKey {
  StateId s;
  std::uint32_t in;
  std::uint32_t q;
  std::uint32_t c;
  bool operator==(const ProductKey& o) const {
    return s == o.s && in == o.in && q == o.q && c == o.c;
  }
};

struct ProductKeyHash {
  std::size_t operator()(const ProductKey& k) const noexcept {
    std::size_t h = k.s;
    h = h * 0x9E3779B97F4A7C15ULL + k.in;
    h = h * 0x9E3779B97F4A7C15ULL + k.q;
    h = h * 0x9E3779B97F4A7C15ULL + k.c;
    return h ^ (h >> 32);
  }
};

struct Prop {
  bool is_define = false;
  std::string name;
  semantics::LabelId label = 0;
};

class LtlSearch {
 public:
  LtlSearch(const Lts& lts, const Buchi& negated, std::size_t limit)
      : lts_(lts), limit_(limit), gba_(negated) {
    sets_ = gba_.accepting.size();
    for (const auto& st : gba_.states) {
      std::vector<std::pair<int, bool>> lits;
      for (const auto& p : st.pos) lits.emplace_back(prop_index(p), true);
      for (const auto& p : st.neg) lits.emplace_back(prop_index(p), false);
      literals_.push_back(std::move(lits));
    }
    define_cache_.assign(props_.size(), std::vector<std::int8_t>());
  }

  CheckResult run() {
    for (std::uint32_t q = 0; q < gba_.states.size(); ++q) {
      if (!gba_.states[q].initial || !matches(lts_.initial, kInitIn, q)) continue;
      ProductKey k{lts_.initial, kInitIn, q, 0};
      auto [id, fresh] = intern(k);
      if (!fresh && visited1_[id]) continue;
      if (auto trace = outer(id)) return {Outcome::Invalid, std::move(trace)};
    }
    return {Outcome::Valid, std::nullopt};
  }

 private:
  const Lts& lts_;
  std::size_t limit_;
  const Buchi& gba_;  // owned by the caller for the duration of run()
  std::size_t sets_;
  std::vector<Prop> props_;
  std::vector<std::vector<std::pair<int, bool>>> literals_;
  std::vector<std::vector<std::int8_t>> define_cache_;

  std::vector<ProductKey> keys_;
  std::unordered_map<ProductKey, std::uint32_t, ProductKeyHash> index_;
  std::vector<bool> visited1_, visited2_, on_stack_;

  int prop_index(const std::string& name) {
    for (std::size_t i = 0; i < props_.size(); ++i) {
      if (props_[i].name == name) return static_cast<int>(i);
    }
    Prop p;
    p.name = name;
    if (lts_.model().ast().find_define(name)) {
      p.is_define = true;
    } else {
      const auto& labels = lts_.labels();
      auto it = std::find(labels.begin() + 2, labels.end(), name);
      if (it == labels.end()) {
        throw UnknownProposition("'" + name + "' is neither a #define nor an event of the model");
      }
      p.label = static_cast<semantics::LabelId>(it - labels.begin());
    }
    props_.push_back(p);
    return static_cast<int>(props_.size() - 1);
  }

  bool holds(int prop, StateId s, std::uint32_t in) {
    const Prop& p = props_[prop];
    if (!p.is_define) return in == p.label;
    auto& cache = define_cache_[prop];
    if (cache.empty()) cache.assign(lts_.state_count(), -1);
    if (cache[s] < 0) {
      cache[s] = lts_.model().define_holds(p.name, lts_.states[s].valuation) ? 1 : 0;
    }
    return cache[s] == 1;
  }

  bool matches(StateId s, std::uint32_t in, std::uint32_t q) {
    for (const auto& [prop, positive] : literals_[q]) {
      if (holds(prop, s, in) != positive) return false;
    }
    return true;
  }

  bool accepting(std::uint32_t id) const {
    const auto& k = keys_[id];
    return k.c == 0 && gba_.accepting[0][k.q];
  }

  std::pair<std::uint32_t, bool> intern(const ProductKey& k) {
    auto [it, fresh] = index_.emplace(k, static_cast<std::uint32_t>(keys_.size()));
    if (fresh) {
      if (keys_.size() >= limit_) throw semantics::StateLimitExceeded(limit_, 0);
      keys_.push_back(k);
      visited1_.push_back(false);
      visited2_.push_back(false);
      on_stack_.push_back(false);
    }
    return {it->second, fresh};
  }

  std::vector<std::uint32_t> successors(std::uint32_t id) {
    const ProductKey k = keys_[id];
    std::uint32_t c = gba_.accepting[k.c][k.q] ? static_cast<std::uint32_t>((k.c + 1) % sets_)
                                                : k.c;
    std::vector<std::pair<StateId, std::uint32_t>> moves;
    if (lts_.out[k.s].empty()) {
      moves.emplace_back(k.s, kStutterIn);
    } else {
      for (const auto& e : lts_.out[k.s]) moves.emplace_back(e.to, e.label);
    }
    std::vector<std::uint32_t> out;
    for (const auto& [s, in] : moves) {
      for (int q : gba_.states[k.q].succ) {
        if (!matches(s, in, static_cast<std::uint32_t>(q))) continue;
        out.push_back(intern(ProductKey{s, in, static_cast<std::uint32_t>(q), c}).first);
      }
    }
    return out;
  }

  struct Frame {
    std::uint32_t id;
    std::vector<std::uint32_t> succ;
    std::size_t next = 0;
  };

  std::optional<Trace> outer(std::uint32_t root) {
    std::vector<Frame> stack;
    visited1_[root] = true;
    on_stack_[root] = true;
    stack.push_back(Frame{root, successors(root)});
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < top.succ.size()) {
        std::uint32_t n = top.succ[top.next++];
        if (!visited1_[n]) {
          visited1_[n] = true;
          on_stack_[n] = true;
          stack.push_back(Frame{n, successors(n)});
        }
        continue;
      }
      if (accepting(top.id)) {
        if (auto cycle = inner(top.id)) return lasso(stack, *cycle);
      }
      on_stack_[top.id] = false;
      stack.pop_back();
    }
    return std::nullopt;
  }

  // Searches from `seed` for a state on the outer stack. Returns the inner
  // path seed..x followed by the stack state it reaches.
  std::optional<std::vector<std::uint32_t>> inner(std::uint32_t seed) {
    std::vector<Frame> stack;
    visited2_[seed] = true;
    stack.push_back(Frame{seed, successors(seed)});
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < top.succ.size()) {
        std::uint32_t n = top.succ[top.next++];
        if (on_stack_[n]) {
          std::vector<std::uint32_t> path;
          for (const auto& f : stack) path.push_back(f.id);
          path.push_back(n);
          return path;
        }
        if (!visited2_[n]) {
          visited2_[n] = true;
          stack.push_back(Frame{n, successors(n)});
        }
        continue;
      }
      stack.pop_back();
    }
    return std::nullopt;
  }

  Trace lasso(const std::vector<Frame>& outer_stack, const std::vector<std::uint32_t>& cycle) {
    // Run: outer stack up to the seed, inner path, closing at `target`.
    std::vector<std::uint32_t> run;
    for (const auto& f : outer_stack) run.push_back(f.id);
    run.insert(run.end(), cycle.begin() + 1, cycle.end() - 1);
    std::uint32_t target = cycle.back();
    std::size_t j = static_cast<std::size_t>(
        std::find(run.begin(), run.end(), target) - run.begin());
    run.push_back(target);

    Trace t;
    std::vector<std::uint32_t> ins;
    for (std::size_t i = 0; i < run.size(); ++i) {
      t.states.push_back(keys_[run[i]].s);
      if (i > 0) ins.push_back(keys_[run[i]].in);
    }
    // A stutter step only loops on a state without successors, so
    // everything from the first one on is stuttering.
    auto first_stutter = std::find(ins.begin(), ins.end(), kStutterIn);
    if (first_stutter != ins.end()) {
      std::size_t keep = static_cast<std::size_t>(first_stutter - ins.begin());
      ins.resize(keep);
      t.states.resize(keep + 1);
      j = keep;
    } else {
      while (j > 0 && ins[j - 1] == ins.back() && t.states[j - 1] == t.states[ins.size() - 1]) {
        ins.pop_back();
        t.states.pop_back();
        --j;
      }
    }
    for (auto in : ins) t.events.push_back(lts_.label(in));
    t.lasso_start = j;
    return t;
  }
};

}  // namespace

CheckResult check_ltl(const Lts& lts, const LtlFormula& formula, std::size_t product_limit) {
  return LtlSearch(lts, build_buchi_for_negation(formula), product_limit).run();
}

CheckResult check_ltl(const Lts& lts, const Buchi& negated, std::size_t product_limit) {
  return LtlSearch(lts, negated, product_limit).run();
}

CheckResult check_assertion(const Lts& lts, const AssertDecl& assertion) {
  if (const auto* r = std::get_if<Reaches>(&assertion.kind)) {
    return check_reaches(lts, r->predicate);
  }
  if (const auto* l = std::get_if<Ltl>(&assertion.kind)) return check_ltl(lts, *l->formula);
  return check_deadlockfree(lts);
}

// ---------------------------------------------------------------------------

Requirement make_requirement(const std::string& source, Outcome expected, std::string description,
                             std::string id) {
  auto snippet = parse_assertion_snippet(source);
  Requirement r;
  r.id = std::move(id);
  r.description = std::move(description);
  r.source = source;
  r.assertion = snippet.assertion;
  r.constants = std::move(snippet.constants);
  r.defines = std::move(snippet.defines);
  r.expected = expected;
  return r;
}

Requirement requirement_from_json(const nlohmann::json& j) {
  return make_requirement(j.at("assertion").get<std::string>(),
                          parse_outcome(j.at("expected").get<std::string>()),
                          j.value("description", std::string()), j.value("id", std::string()));
}

std::vector<Requirement> requirements_from_json(const nlohmann::json& j) {
  std::vector<Requirement> out;
  for (const auto& item : j) out.push_back(requirement_from_json(item));
  return out;
}

nlohmann::json requirement_to_json(const Requirement& r) {
  return {{"id", r.id},
          {"description", r.description},
          {"assertion", r.source},
          {"expected", to_string(r.expected)}};
}

Verdict check_requirement(const Lts& lts, const Requirement& req) {
  auto result = check_assertion(lts, req.assertion);
  Verdict v;
  v.assertion = render_assert(req.assertion);
  v.expected = req.expected;
  v.raw = result.outcome;
  v.status = v.raw == v.expected ? Status::Match : Status::Mismatch;
  v.trace = std::move(result.trace);
  return v;
}

bool CheckReport::all_match() const {
  return compiled && std::all_of(verdicts.begin(), verdicts.end(),
                                 [](const Verdict& v) { return v.status == Status::Match; });
}

std::size_t CheckReport::matches() const {
  return static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == Status::Match; }));
}

ModelAst merge_requirements(const ModelAst& ast, const std::vector<Requirement>& reqs) {
  ModelAst merged = ast;
  merged.asserts.clear();
  for (const auto& r : reqs) {
    for (const auto& c : r.constants) {
      if (const auto* existing = merged.find_constant(c.name)) {
        if (existing->value != c.value) {
          throw NameError(c.loc, "constant '" + c.name + "' conflicts with the model");
        }
      } else {
        merged.constants.push_back(c);
      }
    }
    for (const auto& d : r.defines) {
      if (const auto* existing = merged.find_define(d.name)) {
        if (!(*existing == d)) {
          throw NameError(d.loc, "#define '" + d.name + "' conflicts with the model");
        }
      } else {
        merged.defines.push_back(d);
      }
    }
  }
  validate_model(merged);
  for (const auto& r : reqs) {
    ModelAst probe = merged;
    probe.asserts = {r.assertion};
    validate_model(probe);
  }
  return merged;
}

CheckReport check_all(const ModelAst& ast, const std::vector<Requirement>& reqs,
                      const CheckOptions& options) {
  if (reqs.empty()) throw PreconditionError("check_all needs at least one requirement");
  CheckReport report;
  try {
    auto model = std::make_shared<const semantics::CompiledModel>(merge_requirements(ast, reqs));
    std::map<std::string, Lts> systems;
    for (const auto& r : reqs) {
      auto it = systems.find(r.assertion.process);
      if (it == systems.end()) {
        it = systems.emplace(r.assertion.process,
                             semantics::explore(model, r.assertion.process, options.state_limit))
                 .first;
        report.state_counts[r.assertion.process] = it->second.state_count();
      }
      report.verdicts.push_back(check_requirement(it->second, r));
    }
  } catch (const Error& e) {
    report.compiled = false;
    report.error_kind = e.kind();
    report.error = e.what();
    report.verdicts.clear();
    return report;
  }
  report.compiled = true;
  for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
    if (report.verdicts[i].status == Status::Mismatch) {
      report.first_mismatch = i;
      report.counterexample = report.verdicts[i].trace;
      break;
    }
  }
  return report;
}

CheckReport check_all(const std::string& model_source, const std::vector<Requirement>& reqs,
                      const CheckOptions& options) {
  if (reqs.empty()) throw PreconditionError("check_all needs at least one requirement");
  ModelAst ast;
  try {
    ast = parse_model(model_source);
  } catch (const Error& e) {
    CheckReport report;
    report.error_kind = e.kind();
    report.error = e.what();
    return report;
  }
  return check_all(ast, reqs, options);
}

nlohmann::json to_json(const Trace& t) {
  nlohmann::json j{{"events", t.events}, {"text", t.render()}};
  j["lasso_start"] = t.lasso_start ? nlohmann::json(*t.lasso_start) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"assertion", v.assertion},
                   {"expected", to_string(v.expected)},
                   {"raw", to_string(v.raw)},
                   {"status", to_string(v.status)}};
  j["trace"] = v.trace ? nlohmann::json(v.trace->events) : nlohmann::json(nullptr);
  j["lasso_start"] = v.trace && v.trace->lasso_start ? nlohmann::json(*v.trace->lasso_start)
                                                     : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j{{"compiled", r.compiled}, {"all_match", r.all_match()}};
  if (!r.compiled) j["error"] = {{"kind", r.error_kind}, {"message", r.error}};
  j["verdicts"] = nlohmann::json::array();
  for (const auto& v : r.verdicts) j["verdicts"].push_back(to_json(v));
  j["counterexample"] = r.counterexample ? to_json(*r.counterexample) : nlohmann::json(nullptr);
  j["state_counts"] = r.state_counts;
  return j;
}

}  // namespace cspforge::verify
