#pragma once

#include "epsilon/proof.hpp"

namespace eps {

// Incremental proof assembly with reference management.  add_mp computes
// the conclusion from the implication line and validates the premise.
class ProofBuilder {
public:
  ProofBuilder(Signature sig, Calculus calc, std::vector<FormulaPtr> hyps);

  int add(FormulaPtr f, Justification j);
  int add_hyp(FormulaPtr f);
  int add_taut(FormulaPtr f);
  int add_axiom(FormulaPtr f, Justification::Kind k);
  int add_mp(int premise, int implication);

  // Appends every line of `sub` with references shifted; returns the index
  // of its conclusion.  The sub-proof's hypotheses must be justified in
  // this proof's hypothesis set.
  int append(const Proof& sub);

  int size() const { return static_cast<int>(proof_.lines.size()); }
  const FormulaPtr& formula(int i) const { return proof_.lines[static_cast<size_t>(i)].formula; }
  const Proof& peek() const { return proof_; }
  Proof take() { return std::move(proof_); }

private:
  Proof proof_;
};

// Minimal sub-proof proving lines[line], with references remapped.
Proof extract_subproof(const Proof& p, int line);

// Re-checks and throws InternalError with the first failure when a
// transformation result does not check; returns the proof unchanged.
Proof expect_checks(Proof p, const char* where);

// pi[x/t]: every line instantiated; x must not be free in a hypothesis
// nor an eigenvariable.  Eigenvariables clashing with FV(t) are renamed
// first.
Proof substitute_proof(const Proof& p, const Variable& x, const TermPtr& t);

// Discharge: from a proof of B from Gamma ∪ {A}, a proof of A -> B from
// Gamma \ {A}.  A must not contain an eigenvariable of p free.
Proof deduction_transform(const Proof& p, const FormulaPtr& a);

// Inverse direction: from a proof of A -> B, appends [A Hyp; B MP].
Proof deduction_inverse(const Proof& p, const FormulaPtr& a);

// From a proof of A from Sigma, a proof of bottom from Sigma ∪ {~A}.
Proof to_inconsistency(const Proof& p);

// Epsilon embedding: a checking proof in ECforall / ECepsForall with
// sentence hypotheses becomes a checking ECeps proof of the translated
// conclusion from the translated hypotheses.
Proof embed_proof(const Proof& p);

// Derives t = u -> (A[x/t] <-> A[x/u]) using only (=1), (=2'), (=2'') and
// the epsilon identity schema; A must be quantifier-free.
Proof derive_eq2(const TermPtr& t, const TermPtr& u, const FormulaPtr& a,
                 const Variable& x, const Signature& sig, Calculus calc);

// Equality derivation helpers; each returns the index of the derived line.
int derive_refl(ProofBuilder& b, const TermPtr& t);
int derive_sym(ProofBuilder& b, int eq_line);
int derive_trans(ProofBuilder& b, int ab_line, int bc_line);

// s[x/t] = s[x/u] from the line t = u; recurses through function and
// epsilon slots.
int derive_term_eq(ProofBuilder& b, const TermPtr& s, const Variable& x,
                   const TermPtr& t, const TermPtr& u, int tu_line);

// A[x/t] <-> A[x/u] from the line t = u; A quantifier-free.
int derive_formula_iff(ProofBuilder& b, const FormulaPtr& a, const Variable& x,
                       const TermPtr& t, const TermPtr& u, int tu_line);

// (X <-> Y) line to (X -> Y) or (Y -> X).
int iff_to_imp(ProofBuilder& b, int iff_line, bool forward);

// Chains i: (A -> B) and j: (B -> C) into A -> C.
int chain_imp(ProofBuilder& b, int i, int j);

} // namespace eps
