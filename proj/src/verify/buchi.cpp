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

#include "cspforge/verify/buchi.hpp"


#include "cspforge/common/overloaded.hpp"

namespace cspforge::verify {

using namespace syntax;

int NnfPool::add(NnfNode n) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& m = nodes_[i];
    if (m.op == n.op && m.lhs == n.lhs && m.rhs == n.rhs && m.prop == n.prop) {
      return static_cast<int>(i);
    }
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

int NnfPool::from_ltl(const LtlFormula& f, bool negate) {
  auto binary = [&](NnfNode::Op op, int a, int b) { return add({op, a, b, {}}); };
  return std::visit(
      overloaded{
          [&](const LtlConst& c) {
            return add({c.value != negate ? NnfNode::True : NnfNode::False, -1, -1, {}});
          },
          [&](const LtlAtom& a) {
            return add({negate ? NnfNode::NotProp : NnfNode::Prop, -1, -1, a.name});
          },
          [&](const LtlUnary& u) {
            switch (u.op) {
              case LtlUnaryOp::Not:
                return from_ltl(*u.operand, !negate);
              case LtlUnaryOp::Next:
                return add({NnfNode::Next, from_ltl(*u.operand, negate), -1, {}});
              case LtlUnaryOp::Finally: {
                int body = from_ltl(*u.operand, negate);
                return negate ? binary(NnfNode::Release, add({NnfNode::False}), body)
                              : binary(NnfNode::Until, add({NnfNode::True}), body);
              }
              case LtlUnaryOp::Globally: {
                int body = from_ltl(*u.operand, negate);
                return negate ? binary(NnfNode::Until, add({NnfNode::True}), body)
                              : binary(NnfNode::Release, add({NnfNode::False}), body);
              }
            }
            return -1;
          },
          [&](const LtlBinary& b) {
            switch (b.op) {
              case LtlBinaryOp::And: {
                int l = from_ltl(*b.lhs, negate), r = from_ltl(*b.rhs, negate);
                return binary(negate ? NnfNode::Or : NnfNode::And, l, r);
              }
              case LtlBinaryOp::Or: {
                int l = from_ltl(*b.lhs, negate), r = from_ltl(*b.rhs, negate);
                return binary(negate ? NnfNode::And : NnfNode::Or, l, r);
              }
              case LtlBinaryOp::Implies: {
                int l = from_ltl(*b.lhs, !negate), r = from_ltl(*b.rhs, negate);
                return binary(negate ? NnfNode::And : NnfNode::Or, l, r);
              }
              case LtlBinaryOp::Until: {
                int l = from_ltl(*b.lhs, negate), r = from_ltl(*b.rhs, negate);
                return binary(negate ? NnfNode::Release : NnfNode::Until, l, r);
              }
            }
            return -1;
          },
      },
      f.node);
}

std::string NnfPool::render(int i) const {
  const auto& n = nodes_[i];
  switch (n.op) {
    case NnfNode::True: return "true";
    case NnfNode::False: return "false";
    case NnfNode::Prop: return n.prop;
    case NnfNode::NotProp: return "!" + n.prop;
    case NnfNode::And: return "(" + render(n.lhs) + " && " + render(n.rhs) + ")";
    case NnfNode::Or: return "(" + render(n.lhs) + " || " + render(n.rhs) + ")";
    case NnfNode::Next: return "X " + render(n.lhs);
    case NnfNode::Until: return "(" + render(n.lhs) + " U " + render(n.rhs) + ")";
    case NnfNode::Release: return "(" + render(n.lhs) + " R " + render(n.rhs) + ")";
  }
  return {};
}

namespace {

constexpr int kInit = -1;

struct TableauNode {
  std::set<int> incoming;
  std::set<int> fresh;  // still to be processed
  std::set<int> old;
  std::set<int> next;
};

class Tableau {
 public:
  explicit Tableau(const NnfPool& pool) : pool_(pool) {}

  std::vector<TableauNode> run(int root) {
    TableauNode start;
    start.incoming.insert(kInit);
    start.fresh.insert(root);
    expand(std::move(start));
    return std::move(done_);
  }

 private:
  const NnfPool& pool_;
  std::vector<TableauNode> done_;

  bool contradicts(const TableauNode& q, const NnfNode& lit) const {
    auto opposite = lit.op == NnfNode::Prop ? NnfNode::NotProp : NnfNode::Prop;
    for (int i : q.old) {
      if (pool_[i].op == opposite && pool_[i].prop == lit.prop) return true;
    }
    return false;
  }

  void add_fresh(TableauNode& q, int f) {
    if (!q.old.count(f)) q.fresh.insert(f);
  }

  void expand(TableauNode q) {
    if (q.fresh.empty()) {
      for (auto& r : done_) {
        if (r.old == q.old && r.next == q.next) {
          r.incoming.insert(q.incoming.begin(), q.incoming.end());
          return;
        }
      }
      int id = static_cast<int>(done_.size());
      TableauNode succ;
      succ.incoming.insert(id);
      succ.fresh = q.next;
      done_.push_back(std::move(q));
      expand(std::move(succ));
      return;
    }
    int eta = *q.fresh.begin();
    q.fresh.erase(q.fresh.begin());
    const NnfNode& f = pool_[eta];
    switch (f.op) {
      case NnfNode::False:
        return;
      case NnfNode::True:
        q.old.insert(eta);
        expand(std::move(q));
        return;
      case NnfNode::Prop:
      case NnfNode::NotProp:
        if (contradicts(q, f)) return;
        q.old.insert(eta);
        expand(std::move(q));
        return;
      case NnfNode::And:
        q.old.insert(eta);
        add_fresh(q, f.lhs);
        add_fresh(q, f.rhs);
        expand(std::move(q));
        return;
      case NnfNode::Next:
        q.old.insert(eta);
        q.next.insert(f.lhs);
        expand(std::move(q));
        return;
      case NnfNode::Or:
      case NnfNode::Until:
      case NnfNode::Release: {
        q.old.insert(eta);
        TableauNode q1 = q, q2 = std::move(q);
        if (f.op == NnfNode::Or) {
          add_fresh(q1, f.lhs);
          add_fresh(q2, f.rhs);
        } else if (f.op == NnfNode::Until) {
          add_fresh(q1, f.lhs);
          q1.next.insert(eta);
          add_fresh(q2, f.rhs);
        } else {
          add_fresh(q1, f.rhs);
          q1.next.insert(eta);
          add_fresh(q2, f.lhs);
          add_fresh(q2, f.rhs);
        }
        expand(std::move(q1));
        expand(std::move(q2));
        return;
      }
    }
  }
};

void collect_untils(const NnfPool& pool, int i, std::set<int>& out) {
  const auto& n = pool[i];
  if (n.op == NnfNode::Until) out.insert(i);
  if (n.lhs >= 0) collect_untils(pool, n.lhs, out);
  if (n.rhs >= 0) collect_untils(pool, n.rhs, out);
}

}  // namespace

Buchi build_buchi(const NnfPool& pool, int root) {
  auto nodes = Tableau(pool).run(root);
  Buchi gba;
  gba.states.resize(nodes.size());
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    auto& st = gba.states[m];
    for (int i : nodes[m].old) {
      if (pool[i].op == NnfNode::Prop) st.pos.push_back(pool[i].prop);
      if (pool[i].op == NnfNode::NotProp) st.neg.push_back(pool[i].prop);
    }
    for (int from : nodes[m].incoming) {
      if (from == kInit) {
        st.initial = true;
      } else {
        gba.states[from].succ.push_back(static_cast<int>(m));
      }
    }
  }
  std::set<int> untils;
  collect_untils(pool, root, untils);
  for (int u : untils) {
    std::vector<bool> set(nodes.size());
    for (std::size_t m = 0; m < nodes.size(); ++m) {
      set[m] = !nodes[m].old.count(u) || nodes[m].old.count(pool[u].rhs);
    }
    gba.accepting.push_back(std::move(set));
  }
  if (gba.accepting.empty()) gba.accepting.emplace_back(nodes.size(), true);
  return gba;
}

Buchi build_buchi_for_negation(const LtlFormula& f) {
  NnfPool pool;
  int root = pool.from_ltl(f, true);
  return build_buchi(pool, root);
}

}  // namespace cspforge::verify
