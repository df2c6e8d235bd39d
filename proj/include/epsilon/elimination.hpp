#pragma once

#include "epsilon/proof.hpp"
#include "epsilon/transform.hpp"

namespace eps {

struct CriticalInfo {
  TermPtr term;
  std::vector<TermPtr> witnesses;  // deduplicated up to renaming
  std::vector<int> lines;
};

struct SpecialInfo {
  TermPtr term;  // right-hand epsilon term of the identity instance
  std::vector<int> lines;
};

struct ProofMetrics {
  int rank = 0;                  // max rank of critical epsilon terms
  std::map<int, int> r_degree;   // rank -> max degree of criticals of that rank
  std::map<int, int> r_order;    // rank -> number of distinct criticals
  std::vector<CriticalInfo> critical;
  std::vector<SpecialInfo> special;

  int order_at(int r) const {
    auto it = r_order.find(r);
    return it == r_order.end() ? 0 : it->second;
  }
  int max_special_rank() const;
};

ProofMetrics proof_metrics(const Proof& p);

struct ElimStep {
  TermPtr term;
  enum class Strategy { Critical, Special } strategy;
  ProofMetrics before;
  ProofMetrics after;
};

struct ElimTrace {
  std::vector<ElimStep> steps;
};

// Strict order on the instances of one epsilon type, extended
// lexicographically from a degree-respecting base order on slot terms
// (degree first, canonical form as the tie-break).
class InstanceOrder {
public:
  explicit InstanceOrder(const std::vector<TermPtr>& instances);

  bool less(const TermPtr& a, const TermPtr& b) const;        // on instances
  static bool less_base(const TermPtr& t, const TermPtr& u);  // on slot terms

  const std::vector<TermPtr>& base_terms() const { return base_; }       // T
  const std::vector<TermPtr>& type_instances() const { return star_; }   // T*

private:
  std::string type_key_;
  std::vector<TermPtr> base_;
  std::vector<TermPtr> star_;
};

// One application of the elimination lemma: removes the critical formulas
// of one maximal-rank critical term by case distinction over its
// witnesses.  The conclusion must not contain the selected term.
Proof eliminate_one(const Proof& p, const FormulaPtr& conclusion);

// Iterates eliminate_one (and the identity-case steps when epsilon
// identity instances are present) until no critical formulas remain, then
// replaces leftover inert epsilon terms by fresh variables.  The result
// checks in EC (plus restricted identity axioms).
std::pair<Proof, ElimTrace> eliminate_all(const Proof& p, const FormulaPtr& conclusion);

struct HerbrandResult {
  std::vector<TermPtr> witnesses;
  std::vector<FormulaPtr> disjuncts;  // instances of the original conclusion
  Proof proof;                        // EC proof of the disjunction
  ElimTrace trace;
  bool validated = false;             // finite-model check performed and passed
};

// Epsilon elimination with conclusion tracking: from an ECeps proof of
// E(e1,...,ek), an EC proof of a disjunction of instances of E.
HerbrandResult herbrand_disjunction(const Proof& p, const FormulaPtr& conclusion);

// Rewrites every general (=2) line into a derivation from the restricted
// identity schemas.
Proof normalize_identity(const Proof& p);

// Removes every epsilon-identity instance by the replacement lemma,
// highest rank first; the remaining identity axioms are (=1), (=2'),
// (=2'').  The conclusion must be free of the eliminated terms.
Proof eliminate_special(const Proof& p, const FormulaPtr& conclusion);

// Replaces every maximal inert epsilon term by a fresh variable; valid
// only on proofs without critical formulas or epsilon identity instances.
// Terms and formulas in the accompany lists are rewritten through the
// same substitution.
Proof ground_epsilon_terms(const Proof& p, std::vector<TermPtr>* accompany = nullptr,
                           std::vector<FormulaPtr>* accompany_formulas = nullptr);

} // namespace eps
