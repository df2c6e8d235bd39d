#pragma once

#include "epsilon/syntax.hpp"

#include <optional>

namespace eps {

enum class Calculus { EC, ECeps, ECepsExt, ECforall, ECepsForall };

std::string calculus_name(Calculus c);
std::optional<Calculus> calculus_from_name(const std::string& s);
bool calculus_has_epsilon(Calculus c);
bool calculus_has_quantifiers(Calculus c);

struct Justification {
  enum class Kind {
    Hyp, Taut, Eq1, Eq2, Eq2Pred, Eq2Fn, EqEps,
    Crit, Ext, ExtMinus, AxExists, AxForall,
    MP, RExists, RForall
  };
  Kind kind = Kind::Taut;
  int ref1 = -1;  // 0-based line references (MP: premise, rule premise)
  int ref2 = -1;  // MP: the implication line

  static Justification hyp() { return {Kind::Hyp, -1, -1}; }
  static Justification taut() { return {Kind::Taut, -1, -1}; }
  static Justification axiom(Kind k) { return {k, -1, -1}; }
  static Justification mp(int premise, int implication) {
    return {Kind::MP, premise, implication};
  }
  static Justification r_exists(int premise) { return {Kind::RExists, premise, -1}; }
  static Justification r_forall(int premise) { return {Kind::RForall, premise, -1}; }
};

std::string justification_name(Justification::Kind k);
std::optional<Justification::Kind> justification_from_name(const std::string& s);

struct ProofLine {
  FormulaPtr formula;
  Justification just;
};

struct Proof {
  Signature sig;
  Calculus calculus = Calculus::ECeps;
  std::vector<FormulaPtr> hypotheses;
  std::vector<ProofLine> lines;

  const FormulaPtr& conclusion() const {
    if (lines.empty()) throw PreconditionError("empty proof has no conclusion");
    return lines.back().formula;
  }
};

struct CheckFailure {
  int line;  // 0-based
  std::string reason;
};

struct CriticalEntry {
  TermPtr term;
  std::vector<int> lines;
};

struct CheckReport {
  bool ok = true;
  std::vector<CheckFailure> failures;
  std::vector<Variable> eigenvariables;
  std::vector<CriticalEntry> critical_terms;
};

// Propositional tautology test over the maximal non-propositional
// subformulas (atoms, identities, quantified formulas, counted up to
// alpha-equivalence).  Throws LimitError("AtomLimitExceeded...") past the
// atom limit (default 20, EPSILON_MAX_ATOMS overrides).
bool is_tautology(const FormulaPtr& f);
int count_abstracted_atoms(const FormulaPtr& f);

struct AxiomBindings {
  FormulaPtr context;  // A(x): crit / Ax-schemas / (=2); C for (ext-)
  Variable var;        // the abstracted variable of `context`
  TermPtr t;           // witness term / left identity side
  TermPtr u;           // right identity side
  TermPtr eps1;        // principal epsilon term (crit: eps x A; eq_eps: lhs)
  TermPtr eps2;        // second epsilon term (ext / eq_eps rhs)
  int slot = -1;       // differing argument slot for the restricted schemas
};

// Matches `f` against one axiom schema, up to renaming of bound variables
// throughout.  Returns the instantiation on success.
std::optional<AxiomBindings> match_axiom(const FormulaPtr& f, Justification::Kind schema,
                                         const Signature& sig);

bool schema_allowed(Justification::Kind k, Calculus c, const Signature& sig);

// Finds t with pattern[x/t] alpha-equivalent to instance.
std::optional<TermPtr> find_instantiation(const FormulaPtr& pattern, const Variable& x,
                                          const FormulaPtr& instance);

CheckReport check_proof(const Proof& p);

} // namespace eps
