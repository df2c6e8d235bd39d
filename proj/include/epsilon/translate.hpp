#pragma once

#include "epsilon/syntax.hpp"

namespace eps {

struct TranslationStep {
  FormulaPtr source;       // the quantified subformula (already inner-translated)
  std::string clause;      // "exists" or "forall"
  FormulaPtr result;
};

struct TranslationTrace {
  std::vector<TranslationStep> steps;
};

// The quantifier-eliminating translation: exists x A becomes A(eps x A)
// and forall x A becomes A(eps x ~A), applied innermost first; all other
// constructors are mapped homomorphically.
FormulaPtr epsilon_translate(const FormulaPtr& f, TranslationTrace* trace = nullptr);
TermPtr epsilon_translate(const TermPtr& t, TranslationTrace* trace = nullptr);

} // namespace eps
