#include "epsilon/proof.hpp"
#include "epsilon/printer.hpp"

#include <algorithm>
#include <functional>

namespace eps {

std::string calculus_name(Calculus c) {
  switch (c) {
    case Calculus::EC: return "EC";
    case Calculus::ECeps: return "ECeps";
    case Calculus::ECepsExt: return "ECepsExt";
    case Calculus::ECforall: return "ECforall";
    case Calculus::ECepsForall: return "ECepsForall";
  }
  return "?";
}

std::optional<Calculus> calculus_from_name(const std::string& s) {
  if (s == "EC") return Calculus::EC;
  if (s == "ECeps") return Calculus::ECeps;
  if (s == "ECepsExt") return Calculus::ECepsExt;
  if (s == "ECforall") return Calculus::ECforall;
  if (s == "ECepsForall") return Calculus::ECepsForall;
  return std::nullopt;
}

bool calculus_has_epsilon(Calculus c) {
  return c == Calculus::ECeps || c == Calculus::ECepsExt || c == Calculus::ECepsForall;
}

bool calculus_has_quantifiers(Calculus c) {
  return c == Calculus::ECforall || c == Calculus::ECepsForall;
}

std::string justification_name(Justification::Kind k) {
  using K = Justification::Kind;
  switch (k) {
    case K::Hyp: return "Hyp";
    case K::Taut: return "Taut";
    case K::Eq1: return "Eq1";
    case K::Eq2: return "Eq2";
    case K::Eq2Pred: return "Eq2Pred";
    case K::Eq2Fn: return "Eq2Fn";
    case K::EqEps: return "EqEps";
    case K::Crit: return "Crit";
    case K::Ext: return "Ext";
    case K::ExtMinus: return "ExtMinus";
    case K::AxExists: return "AxExists";
    case K::AxForall: return "AxForall";
    case K::MP: return "MP";
    case K::RExists: return "RExists";
    case K::RForall: return "RForall";
  }
  return "?";
}

std::optional<Justification::Kind> justification_from_name(const std::string& s) {
  using K = Justification::Kind;
  static const std::map<std::string, K> table = {
      {"Hyp", K::Hyp},           {"Taut", K::Taut},       {"Eq1", K::Eq1},
      {"Eq2", K::Eq2},           {"Eq2Pred", K::Eq2Pred}, {"Eq2Fn", K::Eq2Fn},
      {"EqEps", K::EqEps},       {"Crit", K::Crit},       {"Ext", K::Ext},
      {"ExtMinus", K::ExtMinus}, {"AxExists", K::AxExists}, {"AxForall", K::AxForall},
      {"MP", K::MP},             {"RExists", K::RExists}, {"RForall", K::RForall}};
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// --- find_instantiation ---

namespace {

bool find_free_path(const TermPtr& t, const Variable& x, std::vector<Variable>& bound,
                    Path& path, Path& out);
bool find_free_path(const FormulaPtr& f, const Variable& x, std::vector<Variable>& bound,
                    Path& path, Path& out);

bool find_free_path(const TermPtr& t, const Variable& x, std::vector<Variable>& bound,
                    Path& path, Path& out) {
  switch (t->kind()) {
    case Term::Kind::Var:
      if (t->var() == x &&
          std::find(bound.begin(), bound.end(), x) == bound.end()) {
        out = path;
        return true;
      }
      return false;
    case Term::Kind::App:
      for (size_t i = 0; i < t->args().size(); ++i) {
        path.push_back(static_cast<int>(i));
        if (find_free_path(t->args()[i], x, bound, path, out)) return true;
        path.pop_back();
      }
      return false;
    case Term::Kind::Eps: {
      bound.push_back(t->var());
      path.push_back(0);
      bool r = find_free_path(t->body(), x, bound, path, out);
      if (!r) path.pop_back();
      bound.pop_back();
      return r;
    }
  }
  return false;
}

bool find_free_path(const FormulaPtr& f, const Variable& x, std::vector<Variable>& bound,
                    Path& path, Path& out) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      for (size_t i = 0; i < f->args().size(); ++i) {
        path.push_back(static_cast<int>(i));
        if (find_free_path(f->args()[i], x, bound, path, out)) return true;
        path.pop_back();
      }
      return false;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return false;
    case Formula::Kind::Not: {
      path.push_back(0);
      bool r = find_free_path(f->lhs(), x, bound, path, out);
      if (!r) path.pop_back();
      return r;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff: {
      path.push_back(0);
      if (find_free_path(f->lhs(), x, bound, path, out)) return true;
      path.pop_back();
      path.push_back(1);
      if (find_free_path(f->rhs(), x, bound, path, out)) return true;
      path.pop_back();
      return false;
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      bound.push_back(f->var());
      path.push_back(0);
      bool r = find_free_path(f->lhs(), x, bound, path, out);
      if (!r) path.pop_back();
      bound.pop_back();
      return r;
    }
  }
  return false;
}

} // namespace

std::optional<TermPtr> find_instantiation(const FormulaPtr& pattern, const Variable& x,
                                          const FormulaPtr& instance) {
  Path path, hit;
  std::vector<Variable> bound;
  if (!find_free_path(pattern, x, bound, path, hit)) {
    // x not free: the instance must equal the pattern; the witness is
    // arbitrary, conventionally x itself.
    if (alpha_equiv(pattern, instance)) return Term::mk_var(x);
    return std::nullopt;
  }
  auto candidate = term_at_path(instance, hit);
  if (!candidate) return std::nullopt;
  if (alpha_equiv(substitute(pattern, x, *candidate), instance)) return candidate;
  return std::nullopt;
}

// --- structural diff up to bound renaming ---

namespace {

// Minimal structural mismatch positions, with binder pairs matched by
// position (bound names may differ).
struct Differ {
  std::vector<std::pair<Variable, Variable>> env;
  std::vector<Path> out;

  bool var_eq(const Variable& a, const Variable& b) const {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      if (it->first == a || it->second == b) return it->first == a && it->second == b;
    }
    return a == b;
  }

  void term(const TermPtr& a, const TermPtr& b, Path& path) {
    if (a->kind() != b->kind()) {
      out.push_back(path);
      return;
    }
    switch (a->kind()) {
      case Term::Kind::Var:
        if (!var_eq(a->var(), b->var())) out.push_back(path);
        return;
      case Term::Kind::App:
        if (a->fn() != b->fn() || a->args().size() != b->args().size()) {
          out.push_back(path);
          return;
        }
        for (size_t i = 0; i < a->args().size(); ++i) {
          path.push_back(static_cast<int>(i));
          term(a->args()[i], b->args()[i], path);
          path.pop_back();
        }
        return;
      case Term::Kind::Eps:
        env.emplace_back(a->var(), b->var());
        path.push_back(0);
        formula(a->body(), b->body(), path);
        path.pop_back();
        env.pop_back();
        return;
    }
  }

  void formula(const FormulaPtr& a, const FormulaPtr& b, Path& path) {
    if (a->kind() != b->kind()) {
      out.push_back(path);
      return;
    }
    switch (a->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Eq:
        if (a->kind() == Formula::Kind::Atom &&
            (a->pred() != b->pred() || a->args().size() != b->args().size())) {
          out.push_back(path);
          return;
        }
        for (size_t i = 0; i < a->args().size(); ++i) {
          path.push_back(static_cast<int>(i));
          term(a->args()[i], b->args()[i], path);
          path.pop_back();
        }
        return;
      case Formula::Kind::Bottom:
      case Formula::Kind::Top: return;
      case Formula::Kind::Not: {
        path.push_back(0);
        formula(a->lhs(), b->lhs(), path);
        path.pop_back();
        return;
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
      case Formula::Kind::Iff: {
        path.push_back(0);
        formula(a->lhs(), b->lhs(), path);
        path.pop_back();
        path.push_back(1);
        formula(a->rhs(), b->rhs(), path);
        path.pop_back();
        return;
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        env.emplace_back(a->var(), b->var());
        path.push_back(0);
        formula(a->lhs(), b->lhs(), path);
        path.pop_back();
        env.pop_back();
        return;
      }
    }
  }
};

// Is the subtree at `prefix` a subterm occurrence (no free variable of it
// bound above)?
bool qualifying_at(const FormulaPtr& root, const Path& prefix) {
  auto sub = term_at_path(root, prefix);
  if (!sub) return false;
  auto fv = free_vars(*sub);
  if (fv.empty()) return true;
  // walk the path, collecting binder variables above the position
  FormulaPtr f = root;
  TermPtr t;
  bool in_term = false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    int c = prefix[i];
    if (!in_term) {
      switch (f->kind()) {
        case Formula::Kind::Atom:
        case Formula::Kind::Eq:
          t = f->args()[static_cast<size_t>(c)];
          in_term = true;
          break;
        case Formula::Kind::Forall:
        case Formula::Kind::Exists:
          if (fv.count(f->var())) return false;
          f = f->lhs();
          break;
        case Formula::Kind::Not: f = f->lhs(); break;
        default: f = c == 0 ? f->lhs() : f->rhs(); break;
      }
    } else {
      switch (t->kind()) {
        case Term::Kind::App: t = t->args()[static_cast<size_t>(c)]; break;
        case Term::Kind::Eps:
          if (fv.count(t->var())) return false;
          f = t->body();
          in_term = false;
          break;
        default: return false;
      }
    }
  }
  return true;
}

// Lifts a mismatch position to the deepest enclosing term position that is
// a subterm occurrence on both sides and whose subtrees the schema
// accepts; empty optional if none exists.
using DiffAccept = std::function<bool(const TermPtr&, const TermPtr&)>;

std::optional<Path> lift_diff(const FormulaPtr& a, const FormulaPtr& b, const Path& p,
                              const DiffAccept& accept) {
  for (size_t len = p.size() + 1; len-- > 0;) {
    Path prefix(p.begin(), p.begin() + static_cast<long>(len));
    auto ta = term_at_path(a, prefix);
    if (!ta) continue;
    auto tb = term_at_path(b, prefix);
    if (!tb) continue;
    if (!qualifying_at(a, prefix) || !qualifying_at(b, prefix)) continue;
    if (accept(*ta, *tb)) return prefix;
  }
  return std::nullopt;
}

// Differing term positions between two formulas, each lifted to the
// deepest abstractable level the schema accepts; empty optional if some
// difference cannot be covered.
std::optional<std::vector<Path>> alpha_diff_terms(const FormulaPtr& a, const FormulaPtr& b,
                                                  const DiffAccept& accept) {
  Differ d;
  Path p;
  d.formula(a, b, p);
  std::set<Path> lifted;
  for (auto& raw : d.out) {
    auto q = lift_diff(a, b, raw, accept);
    if (!q) return std::nullopt;
    lifted.insert(*q);
  }
  // drop positions nested inside other lifted positions
  std::vector<Path> out;
  for (auto& q : lifted) {
    bool inside = false;
    for (auto& other : lifted) {
      if (other.size() < q.size() &&
          std::equal(other.begin(), other.end(), q.begin())) {
        inside = true;
        break;
      }
    }
    if (!inside) out.push_back(q);
  }
  return out;
}

// --- individual schema matchers ---

const FormulaPtr* as_imp(const FormulaPtr& f) {
  return f->kind() == Formula::Kind::Imp ? &f : nullptr;
}

std::optional<AxiomBindings> match_eq1(const FormulaPtr& f) {
  if (f->kind() != Formula::Kind::Eq) return std::nullopt;
  if (!alpha_equiv(f->args()[0], f->args()[1])) return std::nullopt;
  AxiomBindings b;
  b.t = f->args()[0];
  b.u = f->args()[1];
  return b;
}

// t = u -> (A[x/t] <-> A[x/u])
std::optional<AxiomBindings> match_eq2(const FormulaPtr& f) {
  if (!as_imp(f) || f->lhs()->kind() != Formula::Kind::Eq ||
      f->rhs()->kind() != Formula::Kind::Iff)
    return std::nullopt;
  TermPtr t = f->lhs()->args()[0];
  TermPtr u = f->lhs()->args()[1];
  FormulaPtr L = f->rhs()->lhs();
  FormulaPtr R = f->rhs()->rhs();

  auto diffs = alpha_diff_terms(L, R, [&](const TermPtr& lt, const TermPtr& rt) {
    return alpha_equiv(lt, t) && alpha_equiv(rt, u);
  });
  if (!diffs) return std::nullopt;
  auto used = all_var_names(L);
  for (auto& n : all_var_names(t)) used.insert(n);
  for (auto& n : all_var_names(u)) used.insert(n);
  Variable x = fresh_var(used, "_x");

  FormulaPtr context;
  if (diffs->empty()) {
    context = L;  // x not free in A
  } else {
    std::map<Path, TermPtr> repl;
    auto xvar = Term::mk_var(x);
    for (auto& d : *diffs) {
      auto lt = term_at_path(L, d);
      auto rt = term_at_path(R, d);
      if (!lt || !rt) return std::nullopt;
      if (!alpha_equiv(*lt, t) || !alpha_equiv(*rt, u)) return std::nullopt;
      repl[d] = xvar;
    }
    context = replace_at_paths(L, repl);
  }
  if (!alpha_equiv(substitute(context, x, t), L)) return std::nullopt;
  if (!alpha_equiv(substitute(context, x, u), R)) return std::nullopt;
  AxiomBindings b;
  b.context = context;
  b.var = x;
  b.t = t;
  b.u = u;
  return b;
}

struct AtomView {
  std::string pred;
  const std::vector<TermPtr>* args;
};

std::optional<AtomView> as_atom(const FormulaPtr& f) {
  if (f->kind() == Formula::Kind::Atom) return AtomView{f->pred(), &f->args()};
  if (f->kind() == Formula::Kind::Eq) return AtomView{"=", &f->args()};
  return std::nullopt;
}

// t = u -> (P(..t..) -> P(..u..)), identity counting as a predicate
std::optional<AxiomBindings> match_eq2_pred(const FormulaPtr& f) {
  if (!as_imp(f) || f->lhs()->kind() != Formula::Kind::Eq) return std::nullopt;
  if (f->rhs()->kind() != Formula::Kind::Imp) return std::nullopt;
  auto a1 = as_atom(f->rhs()->lhs());
  auto a2 = as_atom(f->rhs()->rhs());
  if (!a1 || !a2 || a1->pred != a2->pred || a1->args->size() != a2->args->size())
    return std::nullopt;
  TermPtr t = f->lhs()->args()[0];
  TermPtr u = f->lhs()->args()[1];
  for (size_t i = 0; i < a1->args->size(); ++i) {
    if (!alpha_equiv((*a1->args)[i], t) || !alpha_equiv((*a2->args)[i], u)) continue;
    bool rest = true;
    for (size_t j = 0; j < a1->args->size(); ++j) {
      if (j == i) continue;
      if (!alpha_equiv((*a1->args)[j], (*a2->args)[j])) {
        rest = false;
        break;
      }
    }
    if (rest) {
      AxiomBindings b;
      b.t = t;
      b.u = u;
      b.slot = static_cast<int>(i);
      return b;
    }
  }
  return std::nullopt;
}

// t = u -> f(..t..) = f(..u..)
std::optional<AxiomBindings> match_eq2_fn(const FormulaPtr& f) {
  if (!as_imp(f) || f->lhs()->kind() != Formula::Kind::Eq ||
      f->rhs()->kind() != Formula::Kind::Eq)
    return std::nullopt;
  TermPtr a = f->rhs()->args()[0];
  TermPtr bb = f->rhs()->args()[1];
  if (a->kind() != Term::Kind::App || bb->kind() != Term::Kind::App) return std::nullopt;
  if (a->fn() != bb->fn() || a->args().size() != bb->args().size()) return std::nullopt;
  TermPtr t = f->lhs()->args()[0];
  TermPtr u = f->lhs()->args()[1];
  for (size_t i = 0; i < a->args().size(); ++i) {
    if (!alpha_equiv(a->args()[i], t) || !alpha_equiv(bb->args()[i], u)) continue;
    bool rest = true;
    for (size_t j = 0; j < a->args().size(); ++j) {
      if (j == i) continue;
      if (!alpha_equiv(a->args()[j], bb->args()[j])) {
        rest = false;
        break;
      }
    }
    if (rest) {
      AxiomBindings b;
      b.t = t;
      b.u = u;
      b.slot = static_cast<int>(i);
      return b;
    }
  }
  return std::nullopt;
}

// t = u -> eps x A(x;..t..) = eps x A(x;..u..), both sides of one type
std::optional<AxiomBindings> match_eq_eps(const FormulaPtr& f) {
  if (!as_imp(f) || f->lhs()->kind() != Formula::Kind::Eq ||
      f->rhs()->kind() != Formula::Kind::Eq)
    return std::nullopt;
  TermPtr e1 = f->rhs()->args()[0];
  TermPtr e2 = f->rhs()->args()[1];
  if (e1->kind() != Term::Kind::Eps || e2->kind() != Term::Kind::Eps) return std::nullopt;
  TypedTerm tt1 = epsilon_type(e1);
  TypedTerm tt2 = epsilon_type(e2);
  if (tt1.type.key() != tt2.type.key()) return std::nullopt;
  if (tt1.args.size() != tt2.args.size()) return std::nullopt;
  TermPtr t = f->lhs()->args()[0];
  TermPtr u = f->lhs()->args()[1];
  for (size_t i = 0; i < tt1.args.size(); ++i) {
    if (!alpha_equiv(tt1.args[i], t) || !alpha_equiv(tt2.args[i], u)) continue;
    bool rest = true;
    for (size_t j = 0; j < tt1.args.size(); ++j) {
      if (j == i) continue;
      if (!alpha_equiv(tt1.args[j], tt2.args[j])) {
        rest = false;
        break;
      }
    }
    if (rest) {
      AxiomBindings b;
      b.t = t;
      b.u = u;
      b.eps1 = e1;
      b.eps2 = e2;
      b.slot = static_cast<int>(i);
      return b;
    }
  }
  return std::nullopt;
}

// A(t) -> A(eps x A(x))
std::optional<AxiomBindings> match_crit(const FormulaPtr& f) {
  if (!as_imp(f)) return std::nullopt;
  FormulaPtr L = f->lhs();
  FormulaPtr R = f->rhs();
  std::set<std::string> seen;
  for (auto& occ : subterm_occurrences(R)) {
    if (occ.term->kind() != Term::Kind::Eps) continue;
    if (!seen.insert(alpha_key(occ.term)).second) continue;
    const TermPtr& e = occ.term;
    const FormulaPtr& body = e->body();
    const Variable& x = e->var();
    if (!alpha_equiv(substitute(body, x, e), R)) continue;
    auto t = find_instantiation(body, x, L);
    if (!t) continue;
    AxiomBindings b;
    b.context = body;
    b.var = x;
    b.t = *t;
    b.eps1 = e;
    return b;
  }
  return std::nullopt;
}

// A(t) -> ex x A(x)
std::optional<AxiomBindings> match_ax_exists(const FormulaPtr& f) {
  if (!as_imp(f) || f->rhs()->kind() != Formula::Kind::Exists) return std::nullopt;
  auto t = find_instantiation(f->rhs()->lhs(), f->rhs()->var(), f->lhs());
  if (!t) return std::nullopt;
  AxiomBindings b;
  b.context = f->rhs()->lhs();
  b.var = f->rhs()->var();
  b.t = *t;
  return b;
}

// all x A(x) -> A(t)
std::optional<AxiomBindings> match_ax_forall(const FormulaPtr& f) {
  if (!as_imp(f) || f->lhs()->kind() != Formula::Kind::Forall) return std::nullopt;
  auto t = find_instantiation(f->lhs()->lhs(), f->lhs()->var(), f->rhs());
  if (!t) return std::nullopt;
  AxiomBindings b;
  b.context = f->lhs()->lhs();
  b.var = f->lhs()->var();
  b.t = *t;
  return b;
}

// Premise of (ext)/(ext-): A(d) <-> B(d) with d = eps z ~(A(z) <-> B(z)).
bool check_ext_premise(const FormulaPtr& L, const TermPtr& e1, const TermPtr& e2) {
  if (L->kind() != Formula::Kind::Iff) return false;
  auto used = all_var_names(e1);
  for (auto& n : all_var_names(e2)) used.insert(n);
  Variable z = fresh_var(used, "_z");
  auto zt = Term::mk_var(z);
  FormulaPtr A = substitute(e1->body(), e1->var(), zt);
  FormulaPtr B = substitute(e2->body(), e2->var(), zt);
  TermPtr d;
  try {
    d = Term::mk_eps(z, Formula::mk_not(Formula::mk_iff(A, B)));
  } catch (const VacuousBinderError&) {
    return false;
  }
  return alpha_equiv(L->lhs(), substitute(A, z, d)) &&
         alpha_equiv(L->rhs(), substitute(B, z, d));
}

// (all x (A(x) <-> B(x)))^eps -> eps x A(x) = eps x B(x)
std::optional<AxiomBindings> match_ext(const FormulaPtr& f) {
  if (!as_imp(f) || f->rhs()->kind() != Formula::Kind::Eq) return std::nullopt;
  TermPtr e1 = f->rhs()->args()[0];
  TermPtr e2 = f->rhs()->args()[1];
  if (e1->kind() != Term::Kind::Eps || e2->kind() != Term::Kind::Eps) return std::nullopt;
  if (!check_ext_premise(f->lhs(), e1, e2)) return std::nullopt;
  AxiomBindings b;
  b.eps1 = e1;
  b.eps2 = e2;
  return b;
}

// (all x (A(x) <-> B(x)))^eps -> (C(eps x A(x)) <-> C(eps x B(x)))
std::optional<AxiomBindings> match_ext_minus(const FormulaPtr& f) {
  if (!as_imp(f) || f->rhs()->kind() != Formula::Kind::Iff) return std::nullopt;
  FormulaPtr R1 = f->rhs()->lhs();
  FormulaPtr R2 = f->rhs()->rhs();
  auto diffsOpt = alpha_diff_terms(R1, R2, [](const TermPtr& lt, const TermPtr& rt) {
    return lt->kind() == Term::Kind::Eps && rt->kind() == Term::Kind::Eps;
  });
  if (!diffsOpt) return std::nullopt;
  auto& diffs = *diffsOpt;
  if (diffs.empty()) {
    // C(e) <-> C(e): recover the epsilon terms from the premise shape.
    if (f->lhs()->kind() != Formula::Kind::Iff) return std::nullopt;
    std::set<std::string> seen;
    for (auto& occ : subterm_occurrences(f->lhs())) {
      if (occ.term->kind() != Term::Kind::Eps) continue;
      if (!seen.insert(alpha_key(occ.term)).second) continue;
      const FormulaPtr& body = occ.term->body();
      if (body->kind() != Formula::Kind::Not ||
          body->lhs()->kind() != Formula::Kind::Iff)
        continue;
      const Variable& z = occ.term->var();
      FormulaPtr A = body->lhs()->lhs();
      FormulaPtr B = body->lhs()->rhs();
      if (!free_vars(A).count(z) || !free_vars(B).count(z)) continue;
      TermPtr e1, e2;
      try {
        e1 = Term::mk_eps(z, A);
        e2 = Term::mk_eps(z, B);
      } catch (const VacuousBinderError&) {
        continue;
      }
      if (!check_ext_premise(f->lhs(), e1, e2)) continue;
      AxiomBindings b;
      b.context = R1;
      b.eps1 = e1;
      b.eps2 = e2;
      return b;
    }
    return std::nullopt;
  }
  TermPtr e1, e2;
  std::map<Path, TermPtr> repl;
  auto used = all_var_names(R1);
  Variable w = fresh_var(used, "_w");
  auto wt = Term::mk_var(w);
  for (auto& d : diffs) {
    auto lt = term_at_path(R1, d);
    auto rt = term_at_path(R2, d);
    if (!lt || !rt) return std::nullopt;
    if ((*lt)->kind() != Term::Kind::Eps || (*rt)->kind() != Term::Kind::Eps)
      return std::nullopt;
    if (!e1) {
      e1 = *lt;
      e2 = *rt;
    } else if (!alpha_equiv(*lt, e1) || !alpha_equiv(*rt, e2)) {
      return std::nullopt;
    }
    repl[d] = wt;
  }
  FormulaPtr C = replace_at_paths(R1, repl);
  if (!alpha_equiv(substitute(C, w, e1), R1)) return std::nullopt;
  if (!alpha_equiv(substitute(C, w, e2), R2)) return std::nullopt;
  if (!check_ext_premise(f->lhs(), e1, e2)) return std::nullopt;
  AxiomBindings b;
  b.context = C;
  b.var = w;
  b.eps1 = e1;
  b.eps2 = e2;
  return b;
}

} // namespace

std::optional<AxiomBindings> match_axiom(const FormulaPtr& f, Justification::Kind schema,
                                         const Signature& sig) {
  (void)sig;
  using K = Justification::Kind;
  switch (schema) {
    case K::Taut: {
      try {
        if (is_tautology(f)) return AxiomBindings{};
      } catch (const LimitError&) {
        throw;
      }
      return std::nullopt;
    }
    case K::Eq1: return match_eq1(f);
    case K::Eq2: return match_eq2(f);
    case K::Eq2Pred: return match_eq2_pred(f);
    case K::Eq2Fn: return match_eq2_fn(f);
    case K::EqEps: return match_eq_eps(f);
    case K::Crit: return match_crit(f);
    case K::Ext: return match_ext(f);
    case K::ExtMinus: return match_ext_minus(f);
    case K::AxExists: return match_ax_exists(f);
    case K::AxForall: return match_ax_forall(f);
    default: return std::nullopt;
  }
}

bool schema_allowed(Justification::Kind k, Calculus c, const Signature& sig) {
  using K = Justification::Kind;
  switch (k) {
    case K::Taut: return true;
    case K::Eq1:
    case K::Eq2:
    case K::Eq2Pred:
    case K::Eq2Fn: return sig.has_identity;
    case K::EqEps: return sig.has_identity && calculus_has_epsilon(c);
    case K::Crit: return calculus_has_epsilon(c);
    case K::Ext:
    case K::ExtMinus: return c == Calculus::ECepsExt;
    case K::AxExists:
    case K::AxForall: return calculus_has_quantifiers(c);
    default: return false;
  }
}

// --- language / signature validation ---

namespace {

void check_language_term(const TermPtr& t, const Signature& sig, std::string& err);
void check_language_formula(const FormulaPtr& f, const Signature& sig, std::string& err);

void check_language_term(const TermPtr& t, const Signature& sig, std::string& err) {
  if (!err.empty()) return;
  switch (t->kind()) {
    case Term::Kind::Var: return;
    case Term::Kind::App: {
      auto it = sig.functions.find(t->fn());
      if (it == sig.functions.end()) {
        err = "undeclared function symbol '" + t->fn() + "'";
        return;
      }
      if (it->second != static_cast<int>(t->args().size())) {
        err = "arity mismatch for '" + t->fn() + "'";
        return;
      }
      for (auto& a : t->args()) check_language_term(a, sig, err);
      return;
    }
    case Term::Kind::Eps:
      if (!sig.has_epsilon) {
        err = "epsilon term outside the epsilon language";
        return;
      }
      check_language_formula(t->body(), sig, err);
      return;
  }
}

void check_language_formula(const FormulaPtr& f, const Signature& sig, std::string& err) {
  if (!err.empty()) return;
  switch (f->kind()) {
    case Formula::Kind::Atom: {
      auto it = sig.predicates.find(f->pred());
      if (it == sig.predicates.end()) {
        err = "undeclared predicate symbol '" + f->pred() + "'";
        return;
      }
      if (it->second != static_cast<int>(f->args().size())) {
        err = "arity mismatch for '" + f->pred() + "'";
        return;
      }
      for (auto& a : f->args()) check_language_term(a, sig, err);
      return;
    }
    case Formula::Kind::Eq:
      if (!sig.has_identity) {
        err = "identity outside the language";
        return;
      }
      check_language_term(f->args()[0], sig, err);
      check_language_term(f->args()[1], sig, err);
      return;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return;
    case Formula::Kind::Not: check_language_formula(f->lhs(), sig, err); return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      check_language_formula(f->lhs(), sig, err);
      check_language_formula(f->rhs(), sig, err);
      return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      if (!sig.has_quantifiers) {
        err = "quantifier outside the language";
        return;
      }
      check_language_formula(f->lhs(), sig, err);
      return;
  }
}

} // namespace

CheckReport check_proof(const Proof& p) {
  CheckReport report;
  auto fail = [&](int line, std::string reason) {
    report.failures.push_back(CheckFailure{line, std::move(reason)});
  };

  if (p.lines.empty()) {
    report.ok = false;
    fail(-1, "proof has no lines");
    return report;
  }

  std::map<std::string, int> critical_index;  // key -> slot in critical_terms

  int n = static_cast<int>(p.lines.size());
  for (int i = 0; i < n; ++i) {
    const ProofLine& line = p.lines[static_cast<size_t>(i)];
    const FormulaPtr& f = line.formula;

    std::string lang_err;
    check_language_formula(f, p.sig, lang_err);
    if (lang_err.empty()) {
      if (has_epsilon_term(f) && !calculus_has_epsilon(p.calculus))
        lang_err = "epsilon term not allowed in " + calculus_name(p.calculus);
      else if (has_quantifier(f) && !calculus_has_quantifiers(p.calculus))
        lang_err = "quantifier not allowed in " + calculus_name(p.calculus);
    }
    if (!lang_err.empty()) {
      fail(i, lang_err);
      continue;
    }

    using K = Justification::Kind;
    const Justification& j = line.just;
    switch (j.kind) {
      case K::Hyp: {
        bool found = false;
        for (auto& h : p.hypotheses)
          if (alpha_equiv(h, f)) {
            found = true;
            break;
          }
        if (!found) fail(i, "formula is not among the hypotheses");
        break;
      }
      case K::MP: {
        if (j.ref1 < 0 || j.ref1 >= i || j.ref2 < 0 || j.ref2 >= i) {
          fail(i, "MP references out of range");
          break;
        }
        const FormulaPtr& prem = p.lines[static_cast<size_t>(j.ref1)].formula;
        const FormulaPtr& impl = p.lines[static_cast<size_t>(j.ref2)].formula;
        if (!alpha_equiv(impl, Formula::mk_imp(prem, f)))
          fail(i, "MP: line " + std::to_string(j.ref2 + 1) +
                      " is not (premise -> this line)");
        break;
      }
      case K::RExists:
      case K::RForall: {
        bool ex = j.kind == K::RExists;
        if (!calculus_has_quantifiers(p.calculus)) {
          fail(i, "quantifier rule not allowed in " + calculus_name(p.calculus));
          break;
        }
        if (j.ref1 < 0 || j.ref1 >= i) {
          fail(i, "rule reference out of range");
          break;
        }
        if (f->kind() != Formula::Kind::Imp) {
          fail(i, "rule conclusion must be an implication");
          break;
        }
        FormulaPtr quant = ex ? f->lhs() : f->rhs();
        FormulaPtr side = ex ? f->rhs() : f->lhs();
        if (quant->kind() != (ex ? Formula::Kind::Exists : Formula::Kind::Forall)) {
          fail(i, ex ? "RExists conclusion must start with an existential antecedent"
                     : "RForall conclusion must end with a universal consequent");
          break;
        }
        const FormulaPtr& prem = p.lines[static_cast<size_t>(j.ref1)].formula;
        if (prem->kind() != Formula::Kind::Imp) {
          fail(i, "rule premise must be an implication");
          break;
        }
        FormulaPtr prem_quant_side = ex ? prem->lhs() : prem->rhs();
        FormulaPtr prem_side = ex ? prem->rhs() : prem->lhs();
        if (!alpha_equiv(prem_side, side)) {
          fail(i, "rule premise side formula differs from conclusion");
          break;
        }
        auto inst = find_instantiation(quant->lhs(), quant->var(), prem_quant_side);
        if (!inst || (*inst)->kind() != Term::Kind::Var) {
          fail(i, "rule premise is not an instance of the quantified formula at a variable");
          break;
        }
        Variable eigen = (*inst)->var();
        // Eigenvariable condition: not free in this or any later line, nor
        // in the hypotheses.
        for (int k = i; k < n; ++k) {
          if (free_vars(p.lines[static_cast<size_t>(k)].formula).count(eigen)) {
            fail(i, "eigenvariable '" + eigen.name + "' occurs free in line " +
                        std::to_string(k + 1));
            break;
          }
        }
        for (auto& h : p.hypotheses) {
          if (free_vars(h).count(eigen)) {
            fail(i, "eigenvariable '" + eigen.name + "' occurs free in a hypothesis");
            break;
          }
        }
        report.eigenvariables.push_back(eigen);
        break;
      }
      default: {
        // axiom schema
        if (!schema_allowed(j.kind, p.calculus, p.sig)) {
          fail(i, justification_name(j.kind) + " not allowed in " +
                      calculus_name(p.calculus) +
                      (p.sig.has_identity ? "" : " without identity"));
          break;
        }
        std::optional<AxiomBindings> m;
        try {
          m = match_axiom(f, j.kind, p.sig);
        } catch (const LimitError& e) {
          fail(i, e.what());
          break;
        }
        if (!m) {
          fail(i, "not an instance of " + justification_name(j.kind));
          break;
        }
        if (j.kind == K::Crit) {
          auto key = alpha_key(m->eps1);
          auto [it, fresh] = critical_index.try_emplace(
              key, static_cast<int>(report.critical_terms.size()));
          if (fresh) report.critical_terms.push_back(CriticalEntry{m->eps1, {}});
          report.critical_terms[static_cast<size_t>(it->second)].lines.push_back(i);
        }
        break;
      }
    }
  }

  report.ok = report.failures.empty();
  return report;
}

} // namespace eps
