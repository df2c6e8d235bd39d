#include "epsilon/syntax.hpp"
#include "epsilon/printer.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace eps {

// --- constructors ---

TermPtr Term::mk_var(Variable v) {
  if (v.name.empty()) throw Error("variable with empty name");
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = Kind::Var;
  t->var_ = std::move(v);
  return t;
}

TermPtr Term::mk_app(std::string fn, std::vector<TermPtr> args) {
  if (fn.empty()) throw Error("function symbol with empty name");
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = Kind::App;
  t->fn_ = std::move(fn);
  t->args_ = std::move(args);
  return t;
}

namespace {

void collect_vars(const TermPtr& t, bool free_only, std::vector<Variable>& bound,
                  std::set<Variable>& out);
void collect_vars(const FormulaPtr& f, bool free_only, std::vector<Variable>& bound,
                  std::set<Variable>& out);

void collect_vars(const TermPtr& t, bool free_only, std::vector<Variable>& bound,
                  std::set<Variable>& out) {
  switch (t->kind()) {
    case Term::Kind::Var:
      if (!free_only || std::find(bound.begin(), bound.end(), t->var()) == bound.end())
        out.insert(t->var());
      break;
    case Term::Kind::App:
      for (auto& a : t->args()) collect_vars(a, free_only, bound, out);
      break;
    case Term::Kind::Eps:
      bound.push_back(t->var());
      if (!free_only) out.insert(t->var());
      collect_vars(t->body(), free_only, bound, out);
      bound.pop_back();
      break;
  }
}

void collect_vars(const FormulaPtr& f, bool free_only, std::vector<Variable>& bound,
                  std::set<Variable>& out) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      for (auto& a : f->args()) collect_vars(a, free_only, bound, out);
      break;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top:
      break;
    case Formula::Kind::Not:
      collect_vars(f->lhs(), free_only, bound, out);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      collect_vars(f->lhs(), free_only, bound, out);
      collect_vars(f->rhs(), free_only, bound, out);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      bound.push_back(f->var());
      if (!free_only) out.insert(f->var());
      collect_vars(f->lhs(), free_only, bound, out);
      bound.pop_back();
      break;
  }
}

} // namespace

bool occurs_bound(const TermPtr& t, const Variable& x) {
  switch (t->kind()) {
    case Term::Kind::Var: return false;
    case Term::Kind::App:
      for (auto& a : t->args())
        if (occurs_bound(a, x)) return true;
      return false;
    case Term::Kind::Eps:
      return t->var() == x || occurs_bound(t->body(), x);
  }
  return false;
}

bool occurs_bound(const FormulaPtr& f, const Variable& x) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      for (auto& a : f->args())
        if (occurs_bound(a, x)) return true;
      return false;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return false;
    case Formula::Kind::Not: return occurs_bound(f->lhs(), x);
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      return occurs_bound(f->lhs(), x) || occurs_bound(f->rhs(), x);
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return f->var() == x || occurs_bound(f->lhs(), x);
  }
  return false;
}

namespace {

bool occurs_free(const FormulaPtr& f, const Variable& x) {
  auto fv = free_vars(f);
  return fv.count(x) > 0;
}

// Shared binder-formation logic: x must be free in the body; if x also
// occurs bound in the body, the binder itself is renamed to a fresh
// variable (the result is alpha-equal to the intended expression).
std::pair<Variable, FormulaPtr> prepare_binder(Variable x, FormulaPtr body,
                                               const char* what) {
  if (!occurs_free(body, x))
    throw VacuousBinderError(std::string(what) + " binder: variable '" + x.name +
                             "' has no free occurrence in the body");
  if (occurs_bound(body, x)) {
    auto used = all_var_names(body);
    used.insert(x.name);
    Variable x2 = fresh_var(used);
    FormulaPtr body2 = substitute(body, x, Term::mk_var(x2));
    return {x2, body2};
  }
  return {std::move(x), std::move(body)};
}

} // namespace

TermPtr Term::mk_eps(Variable x, FormulaPtr body) {
  auto [v, b] = prepare_binder(std::move(x), std::move(body), "eps");
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = Kind::Eps;
  t->var_ = std::move(v);
  t->body_ = std::move(b);
  return t;
}

FormulaPtr Formula::mk_atom(std::string pred, std::vector<TermPtr> args) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Atom;
  f->pred_ = std::move(pred);
  f->args_ = std::move(args);
  return f;
}

FormulaPtr Formula::mk_eq(TermPtr l, TermPtr r) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Eq;
  f->args_ = {std::move(l), std::move(r)};
  return f;
}

FormulaPtr Formula::mk_bottom() {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Bottom;
  return f;
}

FormulaPtr Formula::mk_top() {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Top;
  return f;
}

FormulaPtr Formula::mk_not(FormulaPtr a) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Not;
  f->lhs_ = std::move(a);
  return f;
}

#define EPS_BIN_CTOR(NAME, KIND)                       \
  FormulaPtr Formula::NAME(FormulaPtr a, FormulaPtr b) { \
    auto f = std::shared_ptr<Formula>(new Formula());  \
    f->kind_ = Kind::KIND;                             \
    f->lhs_ = std::move(a);                            \
    f->rhs_ = std::move(b);                            \
    return f;                                          \
  }

EPS_BIN_CTOR(mk_and, And)
EPS_BIN_CTOR(mk_or, Or)
EPS_BIN_CTOR(mk_imp, Imp)
EPS_BIN_CTOR(mk_iff, Iff)
#undef EPS_BIN_CTOR

FormulaPtr Formula::mk_forall(Variable x, FormulaPtr body) {
  auto [v, b] = prepare_binder(std::move(x), std::move(body), "all");
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Forall;
  f->var_ = std::move(v);
  f->lhs_ = std::move(b);
  return f;
}

FormulaPtr Formula::mk_exists(Variable x, FormulaPtr body) {
  auto [v, b] = prepare_binder(std::move(x), std::move(body), "ex");
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind_ = Kind::Exists;
  f->var_ = std::move(v);
  f->lhs_ = std::move(b);
  return f;
}

// --- free variables and names ---

std::set<Variable> free_vars(const TermPtr& t) {
  std::set<Variable> out;
  std::vector<Variable> bound;
  collect_vars(t, true, bound, out);
  return out;
}

std::set<Variable> free_vars(const FormulaPtr& f) {
  std::set<Variable> out;
  std::vector<Variable> bound;
  collect_vars(f, true, bound, out);
  return out;
}

bool is_closed(const TermPtr& t) { return free_vars(t).empty(); }
bool is_closed(const FormulaPtr& f) { return free_vars(f).empty(); }

std::set<std::string> all_var_names(const TermPtr& t) {
  std::set<Variable> out;
  std::vector<Variable> bound;
  collect_vars(t, false, bound, out);
  std::set<std::string> names;
  for (auto& v : out) names.insert(v.name);
  return names;
}

std::set<std::string> all_var_names(const FormulaPtr& f) {
  std::set<Variable> out;
  std::vector<Variable> bound;
  collect_vars(f, false, bound, out);
  std::set<std::string> names;
  for (auto& v : out) names.insert(v.name);
  return names;
}

bool has_epsilon_term(const TermPtr& t) {
  switch (t->kind()) {
    case Term::Kind::Var: return false;
    case Term::Kind::App:
      return std::any_of(t->args().begin(), t->args().end(),
                         [](const TermPtr& a) { return has_epsilon_term(a); });
    case Term::Kind::Eps: return true;
  }
  return false;
}

bool has_epsilon_term(const FormulaPtr& f) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      return std::any_of(f->args().begin(), f->args().end(),
                         [](const TermPtr& a) { return has_epsilon_term(a); });
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return false;
    case Formula::Kind::Not: return has_epsilon_term(f->lhs());
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      return has_epsilon_term(f->lhs()) || has_epsilon_term(f->rhs());
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: return has_epsilon_term(f->lhs());
  }
  return false;
}

namespace {
bool term_has_quantifier(const TermPtr& t) {
  switch (t->kind()) {
    case Term::Kind::Var: return false;
    case Term::Kind::App:
      return std::any_of(t->args().begin(), t->args().end(), term_has_quantifier);
    case Term::Kind::Eps: return has_quantifier(t->body());
  }
  return false;
}
} // namespace

bool has_quantifier(const FormulaPtr& f) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      return std::any_of(f->args().begin(), f->args().end(), term_has_quantifier);
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return false;
    case Formula::Kind::Not: return has_quantifier(f->lhs());
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      return has_quantifier(f->lhs()) || has_quantifier(f->rhs());
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: return true;
  }
  return false;
}

Variable fresh_var(const std::set<std::string>& used, const std::string& prefix) {
  for (int k = 1;; ++k) {
    std::string cand = prefix + std::to_string(k);
    if (!used.count(cand)) return Variable(cand);
  }
}

// --- alpha keys ---

namespace {

// Bound variables are rendered as their binder's index in traversal
// (binding) order, so alpha-equivalent expressions share one key.
struct KeyEnv {
  std::vector<Variable> binders;

  std::optional<int> lookup(const Variable& v) const {
    for (int i = static_cast<int>(binders.size()) - 1; i >= 0; --i)
      if (binders[static_cast<size_t>(i)] == v) return i;
    return std::nullopt;
  }
};

void key_term(const TermPtr& t, KeyEnv& env, std::string& out);
void key_formula(const FormulaPtr& f, KeyEnv& env, std::string& out);

void key_term(const TermPtr& t, KeyEnv& env, std::string& out) {
  switch (t->kind()) {
    case Term::Kind::Var: {
      auto idx = env.lookup(t->var());
      if (idx) {
        out += 'b';
        out += std::to_string(*idx);
      } else {
        out += 'v';
        out += t->var().name;
      }
      out += ';';
      break;
    }
    case Term::Kind::App:
      out += 'f';
      out += t->fn();
      out += '(';
      for (auto& a : t->args()) key_term(a, env, out);
      out += ')';
      break;
    case Term::Kind::Eps:
      out += "e[";
      env.binders.push_back(t->var());
      key_formula(t->body(), env, out);
      env.binders.pop_back();
      out += ']';
      break;
  }
}

void key_formula(const FormulaPtr& f, KeyEnv& env, std::string& out) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
      out += 'P';
      out += f->pred();
      out += '(';
      for (auto& a : f->args()) key_term(a, env, out);
      out += ')';
      break;
    case Formula::Kind::Eq:
      out += "=(";
      key_term(f->args()[0], env, out);
      key_term(f->args()[1], env, out);
      out += ')';
      break;
    case Formula::Kind::Bottom: out += "F;"; break;
    case Formula::Kind::Top: out += "T;"; break;
    case Formula::Kind::Not:
      out += "~(";
      key_formula(f->lhs(), env, out);
      out += ')';
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff: {
      const char* op = f->kind() == Formula::Kind::And   ? "&"
                       : f->kind() == Formula::Kind::Or  ? "|"
                       : f->kind() == Formula::Kind::Imp ? ">"
                                                         : "<>";
      out += op;
      out += '(';
      key_formula(f->lhs(), env, out);
      out += ',';
      key_formula(f->rhs(), env, out);
      out += ')';
      break;
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      out += f->kind() == Formula::Kind::Forall ? "A[" : "E[";
      env.binders.push_back(f->var());
      key_formula(f->lhs(), env, out);
      env.binders.pop_back();
      out += ']';
      break;
  }
}

} // namespace

std::string alpha_key(const TermPtr& t) {
  std::string out;
  KeyEnv env;
  key_term(t, env, out);
  return out;
}

std::string alpha_key(const FormulaPtr& f) {
  std::string out;
  KeyEnv env;
  key_formula(f, env, out);
  return out;
}

bool alpha_equiv(const TermPtr& a, const TermPtr& b) {
  return a == b || alpha_key(a) == alpha_key(b);
}

bool alpha_equiv(const FormulaPtr& a, const FormulaPtr& b) {
  return a == b || alpha_key(a) == alpha_key(b);
}

// --- substitution ---

namespace {

using Subst = std::map<Variable, TermPtr>;

std::set<std::string> subst_range_names(const Subst& sub) {
  std::set<std::string> names;
  for (auto& [v, t] : sub)
    for (auto& n : all_var_names(t)) names.insert(n);
  return names;
}

TermPtr subst_term(const TermPtr& t, const Subst& sub);
FormulaPtr subst_formula(const FormulaPtr& f, const Subst& sub);

// Handles one binder: drops shadowed entries, renames the binder when it
// would capture a free variable of a substituted term.
template <typename Body>
std::pair<Variable, Body> subst_binder(const Variable& x, const Body& body,
                                       const Subst& sub, Subst& inner) {
  inner.clear();
  std::set<Variable> body_fv;  // computed lazily
  bool fv_done = false;
  for (auto& [v, t] : sub) {
    if (v == x) continue;
    if (!fv_done) {
      body_fv = free_vars(body);
      fv_done = true;
    }
    if (body_fv.count(v)) inner[v] = t;
  }
  if (inner.empty()) return {x, body};
  auto range = subst_range_names(inner);
  if (!range.count(x.name)) return {x, body};
  auto used = all_var_names(body);
  used.insert(range.begin(), range.end());
  used.insert(x.name);
  Variable x2 = fresh_var(used);
  Subst rename{{x, Term::mk_var(x2)}};
  if constexpr (std::is_same_v<Body, FormulaPtr>) {
    return {x2, subst_formula(body, rename)};
  } else {
    return {x2, subst_term(body, rename)};
  }
}

TermPtr subst_term(const TermPtr& t, const Subst& sub) {
  if (sub.empty()) return t;
  switch (t->kind()) {
    case Term::Kind::Var: {
      auto it = sub.find(t->var());
      return it == sub.end() ? t : it->second;
    }
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args().size());
      bool changed = false;
      for (auto& a : t->args()) {
        args.push_back(subst_term(a, sub));
        changed = changed || args.back() != a;
      }
      return changed ? Term::mk_app(t->fn(), std::move(args)) : t;
    }
    case Term::Kind::Eps: {
      Subst inner;
      auto [x, body] = subst_binder(t->var(), t->body(), sub, inner);
      if (inner.empty()) return x == t->var() ? t : Term::mk_eps(x, body);
      return Term::mk_eps(x, subst_formula(body, inner));
    }
  }
  return t;
}

FormulaPtr subst_formula(const FormulaPtr& f, const Subst& sub) {
  if (sub.empty()) return f;
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq: {
      std::vector<TermPtr> args;
      args.reserve(f->args().size());
      bool changed = false;
      for (auto& a : f->args()) {
        args.push_back(subst_term(a, sub));
        changed = changed || args.back() != a;
      }
      if (!changed) return f;
      if (f->kind() == Formula::Kind::Eq) return Formula::mk_eq(args[0], args[1]);
      return Formula::mk_atom(f->pred(), std::move(args));
    }
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return f;
    case Formula::Kind::Not: {
      auto a = subst_formula(f->lhs(), sub);
      return a == f->lhs() ? f : Formula::mk_not(a);
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff: {
      auto a = subst_formula(f->lhs(), sub);
      auto b = subst_formula(f->rhs(), sub);
      if (a == f->lhs() && b == f->rhs()) return f;
      switch (f->kind()) {
        case Formula::Kind::And: return Formula::mk_and(a, b);
        case Formula::Kind::Or: return Formula::mk_or(a, b);
        case Formula::Kind::Imp: return Formula::mk_imp(a, b);
        default: return Formula::mk_iff(a, b);
      }
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      Subst inner;
      auto [x, body] = subst_binder(f->var(), f->lhs(), sub, inner);
      FormulaPtr nb = inner.empty() ? body : subst_formula(body, inner);
      if (x == f->var() && nb == f->lhs()) return f;
      return f->kind() == Formula::Kind::Forall ? Formula::mk_forall(x, nb)
                                                : Formula::mk_exists(x, nb);
    }
  }
  return f;
}

} // namespace

TermPtr substitute(const TermPtr& e, const Variable& x, const TermPtr& t) {
  return subst_term(e, Subst{{x, t}});
}

FormulaPtr substitute(const FormulaPtr& e, const Variable& x, const TermPtr& t) {
  return subst_formula(e, Subst{{x, t}});
}

TermPtr substitute_parallel(const TermPtr& e, const Subst& sub) {
  return subst_term(e, sub);
}

FormulaPtr substitute_parallel(const FormulaPtr& e, const Subst& sub) {
  return subst_formula(e, sub);
}

// --- canonical bound renaming ---

namespace {

struct Renamer {
  std::string prefix;
  int counter = 0;

  Variable next() { return Variable(prefix + std::to_string(++counter)); }

  TermPtr go(const TermPtr& t, const Subst& env) {
    switch (t->kind()) {
      case Term::Kind::Var: {
        auto it = env.find(t->var());
        return it == env.end() ? t : it->second;
      }
      case Term::Kind::App: {
        std::vector<TermPtr> args;
        for (auto& a : t->args()) args.push_back(go(a, env));
        return Term::mk_app(t->fn(), std::move(args));
      }
      case Term::Kind::Eps: {
        Variable x2 = next();
        Subst env2 = env;
        env2[t->var()] = Term::mk_var(x2);
        return Term::mk_eps(x2, go(t->body(), env2));
      }
    }
    return t;
  }

  FormulaPtr go(const FormulaPtr& f, const Subst& env) {
    switch (f->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Eq: {
        std::vector<TermPtr> args;
        for (auto& a : f->args()) args.push_back(go(a, env));
        if (f->kind() == Formula::Kind::Eq) return Formula::mk_eq(args[0], args[1]);
        return Formula::mk_atom(f->pred(), std::move(args));
      }
      case Formula::Kind::Bottom:
      case Formula::Kind::Top: return f;
      case Formula::Kind::Not: return Formula::mk_not(go(f->lhs(), env));
      case Formula::Kind::And: return Formula::mk_and(go(f->lhs(), env), go(f->rhs(), env));
      case Formula::Kind::Or: return Formula::mk_or(go(f->lhs(), env), go(f->rhs(), env));
      case Formula::Kind::Imp: return Formula::mk_imp(go(f->lhs(), env), go(f->rhs(), env));
      case Formula::Kind::Iff: return Formula::mk_iff(go(f->lhs(), env), go(f->rhs(), env));
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        Variable x2 = next();
        Subst env2 = env;
        env2[f->var()] = Term::mk_var(x2);
        auto body = go(f->lhs(), env2);
        return f->kind() == Formula::Kind::Forall ? Formula::mk_forall(x2, body)
                                                  : Formula::mk_exists(x2, body);
      }
    }
    return f;
  }
};

} // namespace

TermPtr canonicalize_bound(const TermPtr& t, const std::string& prefix) {
  Renamer r{prefix};
  return r.go(t, Subst{});
}

FormulaPtr canonicalize_bound(const FormulaPtr& f, const std::string& prefix) {
  Renamer r{prefix};
  return r.go(f, Subst{});
}

// --- subterm occurrences ---

namespace {

struct OccState {
  std::vector<Occurrence> out;

  void visit_term(const TermPtr& t, std::vector<Variable>& bound, Path& path,
                  bool inside, bool is_root) {
    if (!is_root) {
      bool qualifies = true;
      for (auto& v : free_vars(t)) {
        if (std::find(bound.begin(), bound.end(), v) != bound.end()) {
          qualifies = false;
          break;
        }
      }
      if (qualifies) {
        out.push_back(Occurrence{t, path, !inside});
        inside = true;
      }
    }
    switch (t->kind()) {
      case Term::Kind::Var: break;
      case Term::Kind::App:
        for (size_t i = 0; i < t->args().size(); ++i) {
          path.push_back(static_cast<int>(i));
          visit_term(t->args()[i], bound, path, inside, false);
          path.pop_back();
        }
        break;
      case Term::Kind::Eps:
        bound.push_back(t->var());
        path.push_back(0);
        visit_formula(t->body(), bound, path, inside);
        path.pop_back();
        bound.pop_back();
        break;
    }
  }

  void visit_formula(const FormulaPtr& f, std::vector<Variable>& bound, Path& path,
                     bool inside) {
    switch (f->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Eq:
        for (size_t i = 0; i < f->args().size(); ++i) {
          path.push_back(static_cast<int>(i));
          visit_term(f->args()[i], bound, path, inside, false);
          path.pop_back();
        }
        break;
      case Formula::Kind::Bottom:
      case Formula::Kind::Top: break;
      case Formula::Kind::Not: {
        path.push_back(0);
        visit_formula(f->lhs(), bound, path, inside);
        path.pop_back();
        break;
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
      case Formula::Kind::Iff: {
        path.push_back(0);
        visit_formula(f->lhs(), bound, path, inside);
        path.pop_back();
        path.push_back(1);
        visit_formula(f->rhs(), bound, path, inside);
        path.pop_back();
        break;
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists:
        bound.push_back(f->var());
        path.push_back(0);
        visit_formula(f->lhs(), bound, path, inside);
        path.pop_back();
        bound.pop_back();
        break;
    }
  }
};

} // namespace

std::vector<Occurrence> subterm_occurrences(const TermPtr& e) {
  OccState st;
  std::vector<Variable> bound;
  Path path;
  st.visit_term(e, bound, path, false, true);
  return st.out;
}

std::vector<Occurrence> subterm_occurrences(const FormulaPtr& e) {
  OccState st;
  std::vector<Variable> bound;
  Path path;
  st.visit_formula(e, bound, path, false);
  return st.out;
}

bool contains_subterm(const TermPtr& e, const TermPtr& t) {
  auto key = alpha_key(t);
  for (auto& occ : subterm_occurrences(e))
    if (alpha_key(occ.term) == key) return true;
  return false;
}

bool contains_subterm(const FormulaPtr& e, const TermPtr& t) {
  auto key = alpha_key(t);
  for (auto& occ : subterm_occurrences(e))
    if (alpha_key(occ.term) == key) return true;
  return false;
}

// --- replacement ---

namespace {

// Renames every binder whose variable is in `avoid` to a fresh name.
struct BinderAvoider {
  const std::set<std::string>& avoid;
  std::set<std::string> used;

  TermPtr go(const TermPtr& t) {
    switch (t->kind()) {
      case Term::Kind::Var: return t;
      case Term::Kind::App: {
        std::vector<TermPtr> args;
        bool changed = false;
        for (auto& a : t->args()) {
          args.push_back(go(a));
          changed = changed || args.back() != a;
        }
        return changed ? Term::mk_app(t->fn(), std::move(args)) : t;
      }
      case Term::Kind::Eps: {
        auto body = go(t->body());
        if (avoid.count(t->var().name)) {
          Variable x2 = fresh_var(used);
          used.insert(x2.name);
          return Term::mk_eps(x2, substitute(body, t->var(), Term::mk_var(x2)));
        }
        return body == t->body() ? t : Term::mk_eps(t->var(), body);
      }
    }
    return t;
  }

  FormulaPtr go(const FormulaPtr& f) {
    switch (f->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Eq: {
        std::vector<TermPtr> args;
        bool changed = false;
        for (auto& a : f->args()) {
          args.push_back(go(a));
          changed = changed || args.back() != a;
        }
        if (!changed) return f;
        if (f->kind() == Formula::Kind::Eq) return Formula::mk_eq(args[0], args[1]);
        return Formula::mk_atom(f->pred(), std::move(args));
      }
      case Formula::Kind::Bottom:
      case Formula::Kind::Top: return f;
      case Formula::Kind::Not: {
        auto a = go(f->lhs());
        return a == f->lhs() ? f : Formula::mk_not(a);
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
      case Formula::Kind::Iff: {
        auto a = go(f->lhs());
        auto b = go(f->rhs());
        if (a == f->lhs() && b == f->rhs()) return f;
        switch (f->kind()) {
          case Formula::Kind::And: return Formula::mk_and(a, b);
          case Formula::Kind::Or: return Formula::mk_or(a, b);
          case Formula::Kind::Imp: return Formula::mk_imp(a, b);
          default: return Formula::mk_iff(a, b);
        }
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        auto body = go(f->lhs());
        bool forall = f->kind() == Formula::Kind::Forall;
        if (avoid.count(f->var().name)) {
          Variable x2 = fresh_var(used);
          used.insert(x2.name);
          auto nb = substitute(body, f->var(), Term::mk_var(x2));
          return forall ? Formula::mk_forall(x2, nb) : Formula::mk_exists(x2, nb);
        }
        if (body == f->lhs()) return f;
        return forall ? Formula::mk_forall(f->var(), body) : Formula::mk_exists(f->var(), body);
      }
    }
    return f;
  }
};

struct Replacer {
  std::string target_key;
  std::set<Variable> target_fv;
  TermPtr replacement;

  bool matches(const TermPtr& t, const std::vector<Variable>& bound) const {
    for (auto& v : target_fv)
      if (std::find(bound.begin(), bound.end(), v) != bound.end()) return false;
    return alpha_key(t) == target_key;
  }

  TermPtr go(const TermPtr& t, std::vector<Variable>& bound) {
    if (matches(t, bound)) return replacement;
    switch (t->kind()) {
      case Term::Kind::Var: return t;
      case Term::Kind::App: {
        std::vector<TermPtr> args;
        bool changed = false;
        for (auto& a : t->args()) {
          args.push_back(go(a, bound));
          changed = changed || args.back() != a;
        }
        return changed ? Term::mk_app(t->fn(), std::move(args)) : t;
      }
      case Term::Kind::Eps: {
        bound.push_back(t->var());
        auto body = go(t->body(), bound);
        bound.pop_back();
        return body == t->body() ? t : Term::mk_eps(t->var(), body);
      }
    }
    return t;
  }

  FormulaPtr go(const FormulaPtr& f, std::vector<Variable>& bound) {
    switch (f->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Eq: {
        std::vector<TermPtr> args;
        bool changed = false;
        for (auto& a : f->args()) {
          args.push_back(go(a, bound));
          changed = changed || args.back() != a;
        }
        if (!changed) return f;
        if (f->kind() == Formula::Kind::Eq) return Formula::mk_eq(args[0], args[1]);
        return Formula::mk_atom(f->pred(), std::move(args));
      }
      case Formula::Kind::Bottom:
      case Formula::Kind::Top: return f;
      case Formula::Kind::Not: {
        auto a = go(f->lhs(), bound);
        return a == f->lhs() ? f : Formula::mk_not(a);
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
      case Formula::Kind::Iff: {
        auto a = go(f->lhs(), bound);
        auto b = go(f->rhs(), bound);
        if (a == f->lhs() && b == f->rhs()) return f;
        switch (f->kind()) {
          case Formula::Kind::And: return Formula::mk_and(a, b);
          case Formula::Kind::Or: return Formula::mk_or(a, b);
          case Formula::Kind::Imp: return Formula::mk_imp(a, b);
          default: return Formula::mk_iff(a, b);
        }
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        bound.push_back(f->var());
        auto body = go(f->lhs(), bound);
        bound.pop_back();
        if (body == f->lhs()) return f;
        return f->kind() == Formula::Kind::Forall ? Formula::mk_forall(f->var(), body)
                                                  : Formula::mk_exists(f->var(), body);
      }
    }
    return f;
  }
};

std::set<std::string> fv_names(const TermPtr& t) {
  std::set<std::string> out;
  for (auto& v : free_vars(t)) out.insert(v.name);
  return out;
}

} // namespace

TermPtr replace_subterm(const TermPtr& e, const TermPtr& t, const TermPtr& u) {
  auto avoid = fv_names(u);
  BinderAvoider ba{avoid, all_var_names(e)};
  auto e2 = ba.go(e);
  Replacer r{alpha_key(t), free_vars(t), u};
  std::vector<Variable> bound;
  return r.go(e2, bound);
}

FormulaPtr replace_subterm(const FormulaPtr& e, const TermPtr& t, const TermPtr& u) {
  auto avoid = fv_names(u);
  BinderAvoider ba{avoid, all_var_names(e)};
  auto e2 = ba.go(e);
  Replacer r{alpha_key(t), free_vars(t), u};
  std::vector<Variable> bound;
  return r.go(e2, bound);
}

// --- positional replacement ---

namespace {

struct PathReplacer {
  const std::map<Path, TermPtr>& repl;

  TermPtr go_t(const TermPtr& node, Path& path) {
    auto it = repl.find(path);
    if (it != repl.end()) return it->second;
    switch (node->kind()) {
      case Term::Kind::Var: return node;
      case Term::Kind::App: {
        std::vector<TermPtr> args;
        for (size_t i = 0; i < node->args().size(); ++i) {
          path.push_back(static_cast<int>(i));
          args.push_back(go_t(node->args()[i], path));
          path.pop_back();
        }
        return Term::mk_app(node->fn(), std::move(args));
      }
      case Term::Kind::Eps: {
        path.push_back(0);
        auto body = go_f(node->body(), path);
        path.pop_back();
        return Term::mk_eps(node->var(), body);
      }
    }
    return node;
  }

  FormulaPtr go_f(const FormulaPtr& node, Path& path) {
    switch (node->kind()) {
      case Formula::Kind::Atom:
      case Formula::Kind::Eq: {
        std::vector<TermPtr> args;
        for (size_t i = 0; i < node->args().size(); ++i) {
          path.push_back(static_cast<int>(i));
          args.push_back(go_t(node->args()[i], path));
          path.pop_back();
        }
        if (node->kind() == Formula::Kind::Eq) return Formula::mk_eq(args[0], args[1]);
        return Formula::mk_atom(node->pred(), std::move(args));
      }
      case Formula::Kind::Bottom:
      case Formula::Kind::Top: return node;
      case Formula::Kind::Not: {
        path.push_back(0);
        auto a = go_f(node->lhs(), path);
        path.pop_back();
        return Formula::mk_not(a);
      }
      case Formula::Kind::And:
      case Formula::Kind::Or:
      case Formula::Kind::Imp:
      case Formula::Kind::Iff: {
        path.push_back(0);
        auto a = go_f(node->lhs(), path);
        path.pop_back();
        path.push_back(1);
        auto b = go_f(node->rhs(), path);
        path.pop_back();
        switch (node->kind()) {
          case Formula::Kind::And: return Formula::mk_and(a, b);
          case Formula::Kind::Or: return Formula::mk_or(a, b);
          case Formula::Kind::Imp: return Formula::mk_imp(a, b);
          default: return Formula::mk_iff(a, b);
        }
      }
      case Formula::Kind::Forall:
      case Formula::Kind::Exists: {
        path.push_back(0);
        auto body = go_f(node->lhs(), path);
        path.pop_back();
        return node->kind() == Formula::Kind::Forall ? Formula::mk_forall(node->var(), body)
                                                     : Formula::mk_exists(node->var(), body);
      }
    }
    return node;
  }
};

} // namespace

TermPtr replace_at_paths(const TermPtr& e, const std::map<Path, TermPtr>& repl) {
  PathReplacer r{repl};
  Path p;
  return r.go_t(e, p);
}

FormulaPtr replace_at_paths(const FormulaPtr& e, const std::map<Path, TermPtr>& repl) {
  PathReplacer r{repl};
  Path p;
  return r.go_f(e, p);
}

namespace {

std::optional<TermPtr> descend_term(const TermPtr& node, const Path& p, size_t i);
std::optional<TermPtr> descend_formula(const FormulaPtr& node, const Path& p, size_t i);

std::optional<TermPtr> descend_term(const TermPtr& node, const Path& p, size_t i) {
  if (i == p.size()) return node;
  int c = p[i];
  switch (node->kind()) {
    case Term::Kind::Var: return std::nullopt;
    case Term::Kind::App:
      if (c < 0 || static_cast<size_t>(c) >= node->args().size()) return std::nullopt;
      return descend_term(node->args()[static_cast<size_t>(c)], p, i + 1);
    case Term::Kind::Eps:
      if (c != 0) return std::nullopt;
      return descend_formula(node->body(), p, i + 1);
  }
  return std::nullopt;
}

std::optional<TermPtr> descend_formula(const FormulaPtr& node, const Path& p, size_t i) {
  if (i == p.size()) return std::nullopt;  // a formula, not a term
  int c = p[i];
  switch (node->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      if (c < 0 || static_cast<size_t>(c) >= node->args().size()) return std::nullopt;
      return descend_term(node->args()[static_cast<size_t>(c)], p, i + 1);
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return std::nullopt;
    case Formula::Kind::Not:
      if (c != 0) return std::nullopt;
      return descend_formula(node->lhs(), p, i + 1);
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      if (c == 0) return descend_formula(node->lhs(), p, i + 1);
      if (c == 1) return descend_formula(node->rhs(), p, i + 1);
      return std::nullopt;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      if (c != 0) return std::nullopt;
      return descend_formula(node->lhs(), p, i + 1);
  }
  return std::nullopt;
}

} // namespace

std::optional<TermPtr> term_at_path(const TermPtr& e, const Path& p) {
  return descend_term(e, p, 0);
}

std::optional<TermPtr> term_at_path(const FormulaPtr& e, const Path& p) {
  return descend_formula(e, p, 0);
}

// --- epsilon types ---

std::string EpsilonType::key() const { return print(pattern); }

TypedTerm epsilon_type(const TermPtr& t) {
  if (t->kind() != Term::Kind::Eps)
    throw PreconditionError("epsilon_type: not an epsilon term: " + print(t));

  // Maximal proper subterm occurrences, in left-to-right order; one slot
  // per occurrence, repeats included.
  std::vector<Occurrence> slots;
  for (auto& occ : subterm_occurrences(t))
    if (occ.immediate) slots.push_back(occ);

  TypedTerm out;
  int n = static_cast<int>(slots.size());
  std::vector<Variable> argvars;
  for (int i = 0; i < n; ++i) {
    argvars.push_back(Variable("x" + std::to_string(i + 1)));
    out.args.push_back(slots[static_cast<size_t>(i)].term);
    out.arg_paths.push_back(slots[static_cast<size_t>(i)].path);
  }

  // Rebuild the term with each slot position replaced by its argvar.
  std::map<Path, TermPtr> at;
  for (int i = 0; i < n; ++i)
    at[out.arg_paths[static_cast<size_t>(i)]] = Term::mk_var(argvars[static_cast<size_t>(i)]);

  TermPtr pattern = replace_at_paths(t, at);
  out.type.pattern = canonicalize_bound(pattern, "_e");
  out.type.argvars = std::move(argvars);
  return out;
}

TermPtr instantiate_type(const EpsilonType& type, const std::vector<TermPtr>& args) {
  if (args.size() != type.argvars.size())
    throw PreconditionError("instantiate_type: arity mismatch");
  std::map<Variable, TermPtr> sub;
  for (size_t i = 0; i < args.size(); ++i) sub[type.argvars[i]] = args[i];
  return substitute_parallel(type.pattern, sub);
}

// --- degree and rank ---

namespace {

// Maximal proper epsilon-subterm occurrences (the nested epsilon terms).
void nested_eps(const TermPtr& root, std::vector<TermPtr>& out) {
  for (auto& occ : subterm_occurrences(root)) {
    if (occ.term->kind() != Term::Kind::Eps) continue;
    // keep only occurrences not inside another qualifying eps occurrence
    out.push_back(occ.term);
  }
}

// All epsilon-term subtrees (any position) of a formula/term with x free.
void eps_with_free(const TermPtr& t, const Variable& x, std::vector<TermPtr>& out);
void eps_with_free(const FormulaPtr& f, const Variable& x, std::vector<TermPtr>& out);

void eps_with_free(const TermPtr& t, const Variable& x, std::vector<TermPtr>& out) {
  switch (t->kind()) {
    case Term::Kind::Var: break;
    case Term::Kind::App:
      for (auto& a : t->args()) eps_with_free(a, x, out);
      break;
    case Term::Kind::Eps:
      if (free_vars(t).count(x)) out.push_back(t);
      eps_with_free(t->body(), x, out);
      break;
  }
}

void eps_with_free(const FormulaPtr& f, const Variable& x, std::vector<TermPtr>& out) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      for (auto& a : f->args()) eps_with_free(a, x, out);
      break;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: break;
    case Formula::Kind::Not:
      eps_with_free(f->lhs(), x, out);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      eps_with_free(f->lhs(), x, out);
      eps_with_free(f->rhs(), x, out);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      eps_with_free(f->lhs(), x, out);
      break;
  }
}

} // namespace

int degree(const TermPtr& t) {
  if (t->kind() != Term::Kind::Eps) return 0;
  int best = 0;
  std::vector<TermPtr> nested;
  nested_eps(t, nested);
  for (auto& d : nested) best = std::max(best, degree(d));
  return best + 1;
}

int rank(const TermPtr& t) {
  if (t->kind() != Term::Kind::Eps)
    throw PreconditionError("rank: not an epsilon term: " + print(t));
  std::vector<TermPtr> subs;
  eps_with_free(t->body(), t->var(), subs);
  int best = 0;
  for (auto& d : subs) best = std::max(best, rank(d));
  return best + 1;
}

} // namespace eps
