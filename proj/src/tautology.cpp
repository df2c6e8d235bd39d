#include "epsilon/proof.hpp"

#include <cstdint>
#include <cstdlib>

namespace eps {

namespace {

struct PropNode {
  enum K { Atom, Bot, Top, Not, And, Or, Imp, Iff } k;
  int atom = -1;
  int a = -1, b = -1;
};

struct Abstraction {
  std::vector<PropNode> nodes;
  std::map<std::string, int> atoms;
  int root = -1;

  int add(PropNode n) {
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(const FormulaPtr& f) {
    switch (f->kind()) {
      case Formula::Kind::Bottom: return add({PropNode::Bot});
      case Formula::Kind::Top: return add({PropNode::Top});
      case Formula::Kind::Not: {
        int a = build(f->lhs());
        return add({PropNode::Not, -1, a, -1});
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
      case Formula::Kind::Iff: {
        int a = build(f->lhs());
        int b = build(f->rhs());
        PropNode::K k = f->kind() == Formula::Kind::And  ? PropNode::And
                        : f->kind() == Formula::Kind::Or ? PropNode::Or
                        : f->kind() == Formula::Kind::Imp ? PropNode::Imp
                                                          : PropNode::Iff;
        return add({k, -1, a, b});
      }
      default: {
        // Atom, identity, or quantified formula: opaque.
        auto key = alpha_key(f);
        auto [it, fresh] = atoms.try_emplace(key, static_cast<int>(atoms.size()));
        return add({PropNode::Atom, it->second, -1, -1});
      }
    }
  }

  bool eval(int idx, uint32_t mask) const {
    const PropNode& n = nodes[static_cast<size_t>(idx)];
    switch (n.k) {
      case PropNode::Atom: return (mask >> n.atom) & 1u;
      case PropNode::Bot: return false;
      case PropNode::Top: return true;
      case PropNode::Not: return !eval(n.a, mask);
      case PropNode::And: return eval(n.a, mask) && eval(n.b, mask);
      case PropNode::Or: return eval(n.a, mask) || eval(n.b, mask);
      case PropNode::Imp: return !eval(n.a, mask) || eval(n.b, mask);
      case PropNode::Iff: return eval(n.a, mask) == eval(n.b, mask);
    }
    return false;
  }
};

int atom_limit() {
  static int limit = [] {
    if (const char* env = std::getenv("EPSILON_MAX_ATOMS")) {
      int v = std::atoi(env);
      if (v > 0 && v <= 30) return v;
    }
    return 20;
  }();
  return limit;
}

} // namespace

int count_abstracted_atoms(const FormulaPtr& f) {
  Abstraction abs;
  abs.build(f);
  return static_cast<int>(abs.atoms.size());
}

bool is_tautology(const FormulaPtr& f) {
  Abstraction abs;
  abs.root = abs.build(f);
  int k = static_cast<int>(abs.atoms.size());
  if (k > atom_limit())
    throw LimitError("AtomLimitExceeded: " + std::to_string(k) +
                     " distinct atoms (limit " + std::to_string(atom_limit()) + ")");
  uint64_t total = 1ull << k;
  for (uint64_t mask = 0; mask < total; ++mask)
    if (!abs.eval(abs.root, static_cast<uint32_t>(mask))) return false;
  return true;
}

} // namespace eps
