#include "epsilon/translate.hpp"

namespace eps {

TermPtr epsilon_translate(const TermPtr& t, TranslationTrace* trace) {
  switch (t->kind()) {
    case Term::Kind::Var: return t;
    case Term::Kind::App: {
      std::vector<TermPtr> args;
      bool changed = false;
      for (auto& a : t->args()) {
        args.push_back(epsilon_translate(a, trace));
        changed = changed || args.back() != a;
      }
      return changed ? Term::mk_app(t->fn(), std::move(args)) : t;
    }
    case Term::Kind::Eps: {
      auto body = epsilon_translate(t->body(), trace);
      return body == t->body() ? t : Term::mk_eps(t->var(), body);
    }
  }
  return t;
}

FormulaPtr epsilon_translate(const FormulaPtr& f, TranslationTrace* trace) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq: {
      std::vector<TermPtr> args;
      bool changed = false;
      for (auto& a : f->args()) {
        args.push_back(epsilon_translate(a, trace));
        changed = changed || args.back() != a;
      }
      if (!changed) return f;
      if (f->kind() == Formula::Kind::Eq) return Formula::mk_eq(args[0], args[1]);
      return Formula::mk_atom(f->pred(), std::move(args));
    }
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return f;
    case Formula::Kind::Not: {
      auto a = epsilon_translate(f->lhs(), trace);
      return a == f->lhs() ? f : Formula::mk_not(a);
    }
    case Formula::Kind::And:
      return Formula::mk_and(epsilon_translate(f->lhs(), trace),
                             epsilon_translate(f->rhs(), trace));
    case Formula::Kind::Or:
      return Formula::mk_or(epsilon_translate(f->lhs(), trace),
                            epsilon_translate(f->rhs(), trace));
    case Formula::Kind::Imp:
      return Formula::mk_imp(epsilon_translate(f->lhs(), trace),
                             epsilon_translate(f->rhs(), trace));
    case Formula::Kind::Iff:
      return Formula::mk_iff(epsilon_translate(f->lhs(), trace),
                             epsilon_translate(f->rhs(), trace));
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      // Innermost first: translate the body, then build the witness term.
      FormulaPtr body = epsilon_translate(f->lhs(), trace);
      const Variable& x = f->var();
      TermPtr witness;
      FormulaPtr source;
      if (f->kind() == Formula::Kind::Exists) {
        witness = Term::mk_eps(x, body);
        source = Formula::mk_exists(x, body);
      } else {
        witness = Term::mk_eps(x, Formula::mk_not(body));
        source = Formula::mk_forall(x, body);
      }
      FormulaPtr result = substitute(body, x, witness);
      if (trace)
        trace->steps.push_back(TranslationStep{
            source, f->kind() == Formula::Kind::Exists ? "exists" : "forall", result});
      return result;
    }
  }
  return f;
}

} // namespace eps
