#include "epsilon/elimination.hpp"
#include "epsilon/printer.hpp"
#include "epsilon/semantics.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace eps {

// --- metrics ---

int ProofMetrics::max_special_rank() const {
  int r = 0;
  for (auto& s : special) r = std::max(r, eps::rank(s.term));
  return r;
}

ProofMetrics proof_metrics(const Proof& p) {
  CheckReport rep = check_proof(p);
  if (!rep.ok) throw PreconditionError("proof_metrics: proof does not check");

  ProofMetrics m;
  std::map<std::string, size_t> crit_index, special_index;
  for (size_t i = 0; i < p.lines.size(); ++i) {
    const auto& line = p.lines[i];
    using K = Justification::Kind;
    if (line.just.kind == K::Crit) {
      auto bind = match_axiom(line.formula, K::Crit, p.sig);
      if (!bind) throw InternalError("proof_metrics: critical line does not re-match");
      auto key = alpha_key(bind->eps1);
      auto [it, fresh] = crit_index.try_emplace(key, m.critical.size());
      if (fresh) m.critical.push_back(CriticalInfo{bind->eps1, {}, {}});
      auto& info = m.critical[it->second];
      info.lines.push_back(static_cast<int>(i));
      bool seen = false;
      for (auto& w : info.witnesses) seen = seen || alpha_equiv(w, bind->t);
      if (!seen) info.witnesses.push_back(bind->t);
    } else if (line.just.kind == K::EqEps) {
      auto bind = match_axiom(line.formula, K::EqEps, p.sig);
      if (!bind) throw InternalError("proof_metrics: identity line does not re-match");
      auto key = alpha_key(bind->eps2);
      auto [it, fresh] = special_index.try_emplace(key, m.special.size());
      if (fresh) m.special.push_back(SpecialInfo{bind->eps2, {}});
      m.special[it->second].lines.push_back(static_cast<int>(i));
    }
  }
  for (auto& c : m.critical) {
    int r = rank(c.term);
    int d = degree(c.term);
    m.rank = std::max(m.rank, r);
    m.r_order[r] += 1;
    auto [it, fresh] = m.r_degree.try_emplace(r, d);
    if (!fresh) it->second = std::max(it->second, d);
  }
  return m;
}

// --- instance order ---

bool InstanceOrder::less_base(const TermPtr& t, const TermPtr& u) {
  int dt = degree(t), du = degree(u);
  if (dt != du) return dt < du;
  return alpha_key(t) < alpha_key(u);
}

namespace {

int max_slot_degree(const std::vector<TermPtr>& slots) {
  int best = 0;
  for (auto& s : slots) best = std::max(best, degree(s));
  return best;
}

} // namespace

InstanceOrder::InstanceOrder(const std::vector<TermPtr>& instances) {
  if (instances.empty()) throw PreconditionError("InstanceOrder: no instances");
  std::optional<EpsilonType> type;
  std::set<std::string> base_seen;
  for (auto& inst : instances) {
    auto tt = epsilon_type(inst);
    if (!type) {
      type = tt.type;
      type_key_ = tt.type.key();
    } else if (tt.type.key() != type_key_) {
      throw PreconditionError("InstanceOrder: instances of different types");
    }
    for (auto& slot : tt.args)
      if (base_seen.insert(alpha_key(slot)).second) base_.push_back(slot);
  }
  std::sort(base_.begin(), base_.end(), less_base);

  // the full instance set, capped so the record stays small
  size_t arity = type->argvars.size();
  double count = 1;
  for (size_t i = 0; i < arity; ++i) count *= static_cast<double>(base_.size());
  if (count <= 512 && arity > 0) {
    std::vector<size_t> odo(arity, 0);
    for (;;) {
      std::vector<TermPtr> slots;
      for (size_t i = 0; i < arity; ++i) slots.push_back(base_[odo[i]]);
      star_.push_back(instantiate_type(*type, slots));
      size_t i = 0;
      for (; i < arity; ++i) {
        if (++odo[i] < base_.size()) break;
        odo[i] = 0;
      }
      if (i == arity) break;
    }
  } else if (arity == 0) {
    star_.push_back(instances.front());
  }
  std::sort(star_.begin(), star_.end(),
            [this](const TermPtr& a, const TermPtr& b) { return less(a, b); });
}

bool InstanceOrder::less(const TermPtr& a, const TermPtr& b) const {
  auto ta = epsilon_type(a);
  auto tb = epsilon_type(b);
  if (ta.type.key() != type_key_ || tb.type.key() != type_key_)
    throw PreconditionError("InstanceOrder::less: term of a different type");
  int da = max_slot_degree(ta.args);
  int db = max_slot_degree(tb.args);
  if (da != db) return da < db;
  for (size_t i = 0; i < ta.args.size(); ++i) {
    if (alpha_equiv(ta.args[i], tb.args[i])) continue;
    return less_base(ta.args[i], tb.args[i]);
  }
  return false;
}

// --- shared helpers ---

namespace {

using K = Justification::Kind;

void require_eliminable(const Proof& p, const FormulaPtr& conclusion, const char* who) {
  CheckReport rep = check_proof(p);
  if (!rep.ok) throw PreconditionError(std::string(who) + ": input proof does not check");
  if (!alpha_equiv(p.conclusion(), conclusion))
    throw PreconditionError(std::string(who) + ": stated conclusion differs from the proof's");
  if (calculus_has_quantifiers(p.calculus))
    throw PreconditionError(std::string(who) + ": embed the proof into ECeps first");
  for (auto& h : p.hypotheses) {
    if (!is_closed(h) || has_epsilon_term(h))
      throw PreconditionError(std::string(who) +
                              ": hypotheses must be epsilon-free sentences");
  }
  for (auto& line : p.lines) {
    if (line.just.kind == K::Eq2)
      throw PreconditionError(std::string(who) +
                              ": general identity lines present; run normalize_identity");
    if (line.just.kind == K::Ext || line.just.kind == K::ExtMinus)
      throw PreconditionError(std::string(who) +
                              ": extensionality axioms cannot be eliminated");
  }
}

struct Selection {
  TermPtr term;             // the critical epsilon term being eliminated
  FormulaPtr body;          // its matrix A(x)
  Variable var;
  std::vector<int> lines;   // its critical lines
  std::vector<TermPtr> witnesses;
};

Selection select_critical(const Proof& p, const ProofMetrics& m) {
  const CriticalInfo* best = nullptr;
  int best_rank = -1, best_deg = -1;
  std::string best_key;
  for (auto& c : m.critical) {
    int r = rank(c.term);
    int d = degree(c.term);
    auto key = alpha_key(c.term);
    bool better;
    if (!best)
      better = true;
    else if (r != best_rank)
      better = r > best_rank;
    else if (d != best_deg)
      better = d > best_deg;
    else
      better = key < best_key;
    if (better) {
      best = &c;
      best_rank = r;
      best_deg = d;
      best_key = key;
    }
  }
  Selection sel;
  sel.term = best->term;
  sel.body = best->term->body();
  sel.var = best->term->var();
  sel.lines = best->lines;
  sel.witnesses = best->witnesses;
  (void)p;
  return sel;
}

// The two structural facts the elimination step relies on.
void structural_lemma_check(const Proof& p, const Selection& sel) {
  for (size_t i = 0; i < p.lines.size(); ++i) {
    if (p.lines[i].just.kind != K::Crit) continue;
    if (std::find(sel.lines.begin(), sel.lines.end(), static_cast<int>(i)) !=
        sel.lines.end())
      continue;
    const FormulaPtr& f = p.lines[i].formula;
    if (!contains_subterm(f, sel.term)) continue;
    auto bind = match_axiom(f, K::Crit, p.sig);
    if (!bind) throw InternalError("structural check: critical line does not re-match");
    bool in_body = contains_subterm(bind->context, sel.term);
    bool in_witness = alpha_equiv(bind->t, sel.term) ||
                      contains_subterm(bind->t, sel.term);
    if (!in_body && !in_witness)
      throw InternalError("structural lemma violated for critical term " +
                          print(sel.term) + " in line " + std::to_string(i + 1));
  }
}

FormulaPtr or_chain(const std::vector<FormulaPtr>& parts) {
  FormulaPtr out = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) out = Formula::mk_or(out, parts[i]);
  return out;
}

struct BranchOutputs {
  std::vector<Proof> branches;       // proofs of A(t_i) -> D_i
  std::vector<FormulaPtr> branch_concls;  // the D_i
  Proof neg_branch;                  // proof of ~(disjunction) -> D
  FormulaPtr neg_disj;
};

// Builds the witness branches (proof with e replaced by t_i, critical
// lines of e re-justified from the hypothesis A(t_i), then discharged)
// and the negative branch.
BranchOutputs build_branches(const Proof& p, const Selection& sel) {
  BranchOutputs out;
  std::vector<FormulaPtr> a_terms;
  for (auto& w : sel.witnesses)
    a_terms.push_back(substitute(sel.body, sel.var, w));

  for (size_t wi = 0; wi < sel.witnesses.size(); ++wi) {
    const TermPtr& witness = sel.witnesses[wi];
    const FormulaPtr& hyp = a_terms[wi];
    std::vector<FormulaPtr> hyps = p.hypotheses;
    hyps.push_back(hyp);
    ProofBuilder b(p.sig, p.calculus, hyps);
    int hyp_line = b.add_hyp(hyp);
    std::map<int, int> taut_of;
    for (int c : sel.lines) {
      FormulaPtr replaced =
          replace_subterm(p.lines[static_cast<size_t>(c)].formula, sel.term, witness);
      taut_of[c] = b.add_taut(Formula::mk_imp(hyp, replaced));
    }
    int offset = b.size();
    for (size_t i = 0; i < p.lines.size(); ++i) {
      FormulaPtr replaced = replace_subterm(p.lines[i].formula, sel.term, witness);
      Justification j = p.lines[i].just;
      if (taut_of.count(static_cast<int>(i))) {
        j = Justification::mp(hyp_line, taut_of[static_cast<int>(i)]);
      } else {
        if (j.ref1 >= 0) j.ref1 += offset;
        if (j.ref2 >= 0) j.ref2 += offset;
      }
      b.add(replaced, j);
    }
    Proof branch = expect_checks(b.take(), "eliminate: witness branch");
    out.branch_concls.push_back(branch.conclusion());
    out.branches.push_back(deduction_transform(branch, hyp));
  }

  out.neg_disj = Formula::mk_not(or_chain(a_terms));
  {
    std::vector<FormulaPtr> hyps = p.hypotheses;
    hyps.push_back(out.neg_disj);
    ProofBuilder b(p.sig, p.calculus, hyps);
    int hyp_line = b.add_hyp(out.neg_disj);
    std::map<int, int> taut_of;
    for (int c : sel.lines) {
      taut_of[c] =
          b.add_taut(Formula::mk_imp(out.neg_disj, p.lines[static_cast<size_t>(c)].formula));
    }
    int offset = b.size();
    for (size_t i = 0; i < p.lines.size(); ++i) {
      Justification j = p.lines[i].just;
      if (taut_of.count(static_cast<int>(i))) {
        j = Justification::mp(hyp_line, taut_of[static_cast<int>(i)]);
      } else {
        if (j.ref1 >= 0) j.ref1 += offset;
        if (j.ref2 >= 0) j.ref2 += offset;
      }
      b.add(p.lines[i].formula, j);
    }
    Proof nb = expect_checks(b.take(), "eliminate: negative branch");
    out.neg_branch = deduction_transform(nb, out.neg_disj);
  }
  return out;
}

Proof assemble_case_split(const Proof& p, const BranchOutputs& br,
                          const FormulaPtr& final_concl) {
  ProofBuilder b(p.sig, p.calculus, p.hypotheses);
  std::vector<int> concls;
  for (auto& branch : br.branches) concls.push_back(b.append(branch));
  int neg = b.append(br.neg_branch);

  FormulaPtr chain = final_concl;
  for (size_t i = br.branches.size(); i-- > 0;)
    chain = Formula::mk_imp(b.formula(concls[i]), chain);
  chain = Formula::mk_imp(b.formula(neg), chain);
  int taut = b.add_taut(chain);
  int cur = b.add_mp(neg, taut);
  for (size_t i = 0; i < br.branches.size(); ++i) cur = b.add_mp(concls[i], cur);
  return expect_checks(b.take(), "eliminate: case split");
}

Proof eliminate_one_impl(const Proof& p, const FormulaPtr& conclusion, TermPtr* picked) {
  require_eliminable(p, conclusion, "eliminate_one");
  ProofMetrics m = proof_metrics(p);
  if (m.critical.empty())
    throw PreconditionError("eliminate_one: no critical formulas present");
  Selection sel = select_critical(p, m);
  if (picked) *picked = sel.term;

  for (auto& s : m.special) {
    if (rank(s.term) >= rank(sel.term) &&
        (alpha_equiv(s.term, sel.term) || contains_subterm(s.term, sel.term)))
      throw PreconditionError(
          "eliminate_one: epsilon identity instance involves the selected term; run "
          "eliminate_special first");
  }
  if (contains_subterm(conclusion, sel.term))
    throw PreconditionError(
        "eliminate_one: the conclusion contains the selected term; use "
        "herbrand_disjunction");

  structural_lemma_check(p, sel);

  BranchOutputs br = build_branches(p, sel);
  for (auto& d : br.branch_concls)
    if (!alpha_equiv(d, conclusion))
      throw InternalError("eliminate_one: branch conclusion changed: " + print(d));

  Proof out = assemble_case_split(p, br, p.conclusion());

  ProofMetrics after = proof_metrics(out);
  int r = rank(sel.term);
  if (after.rank > m.rank)
    throw InternalError("eliminate_one: rank increased");
  if (after.order_at(r) >= m.order_at(r))
    throw InternalError("eliminate_one: order did not decrease at rank " +
                        std::to_string(r));
  return out;
}

} // namespace

Proof eliminate_one(const Proof& p, const FormulaPtr& conclusion) {
  return eliminate_one_impl(p, conclusion, nullptr);
}

// --- identity: normalize (=2) lines ---

Proof normalize_identity(const Proof& p) {
  CheckReport rep = check_proof(p);
  if (!rep.ok) throw PreconditionError("normalize_identity: input proof does not check");

  ProofBuilder b(p.sig, p.calculus, p.hypotheses);
  std::vector<int> map(p.lines.size(), -1);
  for (size_t i = 0; i < p.lines.size(); ++i) {
    const auto& line = p.lines[i];
    if (line.just.kind == K::Eq2) {
      auto bind = match_axiom(line.formula, K::Eq2, p.sig);
      if (!bind) throw InternalError("normalize_identity: (=2) line does not re-match");
      Proof sub = derive_eq2(bind->t, bind->u, bind->context, bind->var, p.sig, p.calculus);
      map[i] = b.append(sub);
    } else {
      Justification j = line.just;
      if (j.ref1 >= 0) j.ref1 = map[static_cast<size_t>(j.ref1)];
      if (j.ref2 >= 0) j.ref2 = map[static_cast<size_t>(j.ref2)];
      map[i] = b.add(line.formula, j);
    }
  }
  return expect_checks(b.take(), "normalize_identity");
}

// --- identity: eliminate epsilon identity instances ---

namespace {

// Proves x = y from the given equality lines (closed under symmetry and
// transitivity); returns the line index.
int prove_eq_from(ProofBuilder& b, const TermPtr& x, const TermPtr& y,
                  const std::vector<int>& eq_lines) {
  if (alpha_equiv(x, y)) return derive_refl(b, x);
  // BFS over the little equality graph
  struct Edge {
    std::string to;
    int line;
    bool flipped;
  };
  std::map<std::string, std::vector<Edge>> adj;
  std::map<std::string, TermPtr> reps;
  for (int ln : eq_lines) {
    FormulaPtr f = b.formula(ln);
    if (f->kind() != Formula::Kind::Eq) continue;
    auto ka = alpha_key(f->args()[0]);
    auto kb = alpha_key(f->args()[1]);
    reps.emplace(ka, f->args()[0]);
    reps.emplace(kb, f->args()[1]);
    adj[ka].push_back(Edge{kb, ln, false});
    adj[kb].push_back(Edge{ka, ln, true});
  }
  auto kx = alpha_key(x);
  auto ky = alpha_key(y);
  std::map<std::string, std::pair<std::string, Edge>> parent;
  std::vector<std::string> queue{kx};
  parent[kx] = {"", Edge{}};
  bool found = kx == ky;
  for (size_t qi = 0; qi < queue.size() && !found; ++qi) {
    for (auto& edge : adj[queue[qi]]) {
      if (parent.count(edge.to)) continue;
      parent[edge.to] = {queue[qi], edge};
      if (edge.to == ky) {
        found = true;
        break;
      }
      queue.push_back(edge.to);
    }
  }
  if (!found)
    throw InternalError("prove_eq_from: no equality chain from " + print(x) + " to " +
                        print(y));
  // reconstruct the chain
  std::vector<Edge> path;
  for (std::string cur = ky; cur != kx;) {
    auto& [prev, edge] = parent[cur];
    path.push_back(edge);
    cur = prev;
  }
  std::reverse(path.begin(), path.end());
  int acc = -1;
  for (auto& edge : path) {
    int oriented = edge.flipped ? derive_sym(b, edge.line) : edge.line;
    acc = acc < 0 ? oriented : derive_trans(b, acc, oriented);
  }
  return acc;
}

// q1 = q2 for two instances of one epsilon type, chaining one slot at a
// time through the epsilon identity schema.
int derive_instance_eq(ProofBuilder& b, const TermPtr& q1, const TermPtr& q2,
                       const std::vector<int>& eq_lines) {
  auto t1 = epsilon_type(q1);
  auto t2 = epsilon_type(q2);
  if (t1.type.key() != t2.type.key())
    throw InternalError("derive_instance_eq: type mismatch");
  if (alpha_equiv(q1, q2)) return derive_refl(b, q1);

  size_t n = t1.args.size();
  auto mixed = [&](size_t k) {
    std::vector<TermPtr> slots;
    for (size_t i = 0; i < n; ++i) slots.push_back(i < k ? t2.args[i] : t1.args[i]);
    return instantiate_type(t1.type, slots);
  };

  int chain = -1;
  TermPtr prev = mixed(0);
  for (size_t k = 0; k < n; ++k) {
    if (alpha_equiv(t1.args[k], t2.args[k])) continue;
    TermPtr next = mixed(k + 1);
    int slot_eq = prove_eq_from(b, t1.args[k], t2.args[k], eq_lines);
    FormulaPtr step = Formula::mk_imp(b.formula(slot_eq), Formula::mk_eq(prev, next));
    int ax = b.add_axiom(step, K::EqEps);
    int m = b.add_mp(slot_eq, ax);
    chain = chain < 0 ? m : derive_trans(b, chain, m);
    prev = next;
  }
  if (chain < 0) throw InternalError("derive_instance_eq: no differing slot");
  return chain;
}

struct SpecialSelection {
  TermPtr term;        // e
  int line;            // the chosen epsilon identity line
  AxiomBindings bind;  // t, u, eps1 = e', eps2 = e, slot
};

SpecialSelection select_special(const Proof& p, const ProofMetrics& m, int target_rank) {
  // candidates: specials at the target rank, maximal degree, then order-
  // maximal within their type, then smallest type key
  std::vector<const SpecialInfo*> cands;
  int maxdeg = -1;
  for (auto& s : m.special) {
    if (rank(s.term) != target_rank) continue;
    maxdeg = std::max(maxdeg, degree(s.term));
  }
  for (auto& s : m.special)
    if (rank(s.term) == target_rank && degree(s.term) == maxdeg) cands.push_back(&s);
  if (cands.empty()) throw InternalError("select_special: no candidate");

  // group by type; order-maximal element of each group
  std::map<std::string, std::vector<const SpecialInfo*>> groups;
  for (auto* s : cands) groups[epsilon_type(s->term).type.key()].push_back(s);

  const SpecialInfo* chosen = nullptr;
  std::string chosen_type;
  for (auto& [type_key, group] : groups) {
    // universe: all instances of the type appearing in identity lines
    std::vector<TermPtr> universe;
    for (auto& line : p.lines) {
      if (line.just.kind != K::EqEps) continue;
      auto bind = match_axiom(line.formula, K::EqEps, p.sig);
      if (!bind) continue;
      for (auto& inst : {bind->eps1, bind->eps2})
        if (epsilon_type(inst).type.key() == type_key) universe.push_back(inst);
    }
    InstanceOrder order(universe);
    const SpecialInfo* best = group.front();
    for (auto* s : group)
      if (order.less(best->term, s->term)) best = s;
    if (!chosen || type_key < chosen_type) {
      chosen = best;
      chosen_type = type_key;
    }
  }

  SpecialSelection sel;
  sel.term = chosen->term;
  sel.line = chosen->lines.front();
  auto bind = match_axiom(p.lines[static_cast<size_t>(sel.line)].formula, K::EqEps, p.sig);
  if (!bind) throw InternalError("select_special: line does not re-match");
  sel.bind = *bind;
  return sel;
}

// Derivation block replacing a broken critical formula of the eliminated
// term: from t = u (ambient hypothesis), proves L' -> R' where L', R' are
// the replaced antecedent and consequent.  Returns the appended line.
int repair_critical(ProofBuilder& outer, const Proof& p, const SpecialSelection& sel,
                    const FormulaPtr& replaced_line, const TermPtr& e_prime,
                    int max_rank) {
  const TermPtr& e = sel.term;
  const TermPtr& t = sel.bind.t;
  const TermPtr& u = sel.bind.u;

  FormulaPtr Lp = replaced_line->lhs();
  FormulaPtr Rp = replaced_line->rhs();

  // fresh binder and slot variables
  std::set<std::string> used = all_var_names(e);
  for (auto& n : all_var_names(e_prime)) used.insert(n);
  for (auto& n : all_var_names(Lp)) used.insert(n);
  for (auto& n : all_var_names(Rp)) used.insert(n);
  for (auto& n : all_var_names(t)) used.insert(n);
  for (auto& n : all_var_names(u)) used.insert(n);
  Variable xh = fresh_var(used, "_v");
  used.insert(xh.name);
  Variable z = fresh_var(used, "_v");

  FormulaPtr body_hat = substitute(e->body(), e->var(), Term::mk_var(xh));
  TermPtr e_hat = Term::mk_eps(xh, body_hat);
  if (!alpha_equiv(e_hat, e)) throw InternalError("repair_critical: renaming failed");

  // slot position of u inside the body
  auto tt = epsilon_type(e_hat);
  Path slot_path = tt.arg_paths[static_cast<size_t>(sel.bind.slot)];
  if (slot_path.empty() || slot_path.front() != 0)
    throw InternalError("repair_critical: unexpected slot path");
  Path body_path(slot_path.begin() + 1, slot_path.end());
  FormulaPtr D = replace_at_paths(body_hat, {{body_path, Term::mk_var(z)}});

  FormulaPtr a_star = substitute(D, z, t);  // body of e'
  if (!alpha_equiv(Term::mk_eps(xh, a_star), e_prime))
    throw InternalError("repair_critical: reconstructed replacement term differs");

  // witness of the replaced critical formula
  FormulaPtr body_u = substitute(D, z, u);  // alpha-equal to the body of e
  auto wprime = find_instantiation(body_u, xh, Lp);
  if (!wprime) throw InternalError("repair_critical: cannot extract the witness");

  FormulaPtr tu = Formula::mk_eq(t, u);
  ProofBuilder b(p.sig, p.calculus, {tu, Lp});
  int h_tu = b.add_hyp(tu);
  int h_l = b.add_hyp(Lp);

  // L' -> A*(w') via u = t on the slot position
  int sym = derive_sym(b, h_tu);
  FormulaPtr c1 = substitute(D, xh, *wprime);
  int iff1 = derive_formula_iff(b, c1, z, u, t, sym);
  int imp1 = iff_to_imp(b, iff1, true);
  int m1 = b.add_mp(h_l, imp1);

  // critical formula of e'
  FormulaPtr crit = Formula::mk_imp(b.formula(m1), substitute(a_star, xh, e_prime));
  int c = b.add_axiom(crit, K::Crit);
  int m2 = b.add_mp(m1, c);

  // A*(e') -> A(e') via t = u on the slot position
  FormulaPtr c2 = substitute(D, xh, e_prime);
  int iff2 = derive_formula_iff(b, c2, z, t, u, h_tu);
  int imp2 = iff_to_imp(b, iff2, true);
  int m3 = b.add_mp(m2, imp2);
  if (!alpha_equiv(b.formula(m3), Rp))
    throw InternalError("repair_critical: derived consequent differs from the line");

  Proof sub = expect_checks(b.take(), "repair_critical");
  Proof discharged = deduction_transform(sub, Lp);

  // the identity detours must stay below the eliminated rank
  for (auto& line : discharged.lines) {
    if (line.just.kind != K::EqEps) continue;
    auto bind = match_axiom(line.formula, K::EqEps, p.sig);
    if (bind && rank(bind->eps2) >= max_rank)
      throw InternalError("repair_critical: identity detour at eliminated rank");
  }
  return outer.append(discharged);
}

struct SpecialStepResult {
  Proof proof;
  TermPtr term;
};

SpecialStepResult eliminate_special_step(const Proof& p, const FormulaPtr& conclusion,
                                         int target_rank) {
  ProofMetrics m = proof_metrics(p);
  SpecialSelection sel = select_special(p, m, target_rank);
  const TermPtr& e = sel.term;
  const TermPtr& e_prime = sel.bind.eps1;
  const TermPtr& t = sel.bind.t;
  const TermPtr& u = sel.bind.u;
  int elim_rank = rank(e);

  if (contains_subterm(conclusion, e))
    throw PreconditionError("eliminate_special: conclusion contains the special term");

  // trivial instance: t = u -> e = e is provable from (=1)
  if (alpha_equiv(e_prime, e)) {
    ProofBuilder b(p.sig, p.calculus, p.hypotheses);
    std::vector<int> map(p.lines.size(), -1);
    for (size_t i = 0; i < p.lines.size(); ++i) {
      Justification j = p.lines[i].just;
      if (static_cast<int>(i) == sel.line) {
        int refl = derive_refl(b, e_prime);
        int taut = b.add_taut(Formula::mk_imp(b.formula(refl), p.lines[i].formula));
        map[i] = b.add_mp(refl, taut);
        continue;
      }
      if (j.ref1 >= 0) j.ref1 = map[static_cast<size_t>(j.ref1)];
      if (j.ref2 >= 0) j.ref2 = map[static_cast<size_t>(j.ref2)];
      map[i] = b.add(p.lines[i].formula, j);
    }
    return {expect_checks(b.take(), "eliminate_special: trivial instance"), e};
  }

  if (contains_subterm(e_prime, e))
    throw InternalError(
        "eliminate_special: special term occurs inside its replacement (unsupported)");

  FormulaPtr tu = Formula::mk_eq(t, u);

  // branch under t = u: replace e by e' everywhere and repair
  Proof eq_branch;
  {
    std::vector<FormulaPtr> hyps = p.hypotheses;
    hyps.push_back(tu);
    ProofBuilder b(p.sig, p.calculus, hyps);
    int h_tu = b.add_hyp(tu);
    std::vector<int> map(p.lines.size(), -1);
    for (size_t i = 0; i < p.lines.size(); ++i) {
      const auto& line = p.lines[i];
      FormulaPtr replaced = replace_subterm(line.formula, e, e_prime);
      Justification j = line.just;

      if (static_cast<int>(i) == sel.line) {
        // now t = u -> e' = e'; prove from reflexivity
        int refl = derive_refl(b, e_prime);
        int taut = b.add_taut(Formula::mk_imp(b.formula(refl), replaced));
        map[i] = b.add_mp(refl, taut);
        continue;
      }

      bool needs_repair = false;
      if (j.kind == K::EqEps || j.kind == K::Crit)
        needs_repair = !match_axiom(replaced, j.kind, p.sig).has_value();

      if (!needs_repair) {
        if (j.ref1 >= 0) j.ref1 = map[static_cast<size_t>(j.ref1)];
        if (j.ref2 >= 0) j.ref2 = map[static_cast<size_t>(j.ref2)];
        map[i] = b.add(replaced, j);
        continue;
      }

      if (j.kind == K::EqEps) {
        // same-type instance knocked out of shape; re-derive it
        if (replaced->kind() != Formula::Kind::Imp ||
            replaced->lhs()->kind() != Formula::Kind::Eq ||
            replaced->rhs()->kind() != Formula::Kind::Eq)
          throw InternalError("eliminate_special: malformed identity line");
        FormulaPtr ante = replaced->lhs();
        TermPtr q1 = replaced->rhs()->args()[0];
        TermPtr q2 = replaced->rhs()->args()[1];
        ProofBuilder inner(p.sig, p.calculus, {tu, ante});
        int i_tu = inner.add_hyp(tu);
        int i_an = inner.add_hyp(ante);
        derive_instance_eq(inner, q1, q2, {i_tu, i_an});
        Proof sub = expect_checks(inner.take(), "eliminate_special: identity repair");
        Proof discharged = deduction_transform(sub, ante);
        map[i] = b.append(discharged);
      } else {
        // critical formula of e itself
        auto orig = match_axiom(line.formula, K::Crit, p.sig);
        if (!orig || !alpha_equiv(orig->eps1, e))
          throw InternalError("eliminate_special: unexpected broken critical line");
        map[i] = repair_critical(b, p, sel, replaced, e_prime, elim_rank);
      }
    }
    (void)h_tu;
    eq_branch = deduction_transform(
        expect_checks(b.take(), "eliminate_special: equality branch"), tu);
  }

  // branch under ~(t = u): the identity line follows vacuously
  Proof neq_branch;
  {
    FormulaPtr ntu = Formula::mk_not(tu);
    std::vector<FormulaPtr> hyps = p.hypotheses;
    hyps.push_back(ntu);
    ProofBuilder b(p.sig, p.calculus, hyps);
    int h = b.add_hyp(ntu);
    std::vector<int> map(p.lines.size(), -1);
    for (size_t i = 0; i < p.lines.size(); ++i) {
      Justification j = p.lines[i].just;
      if (static_cast<int>(i) == sel.line) {
        int taut = b.add_taut(Formula::mk_imp(ntu, p.lines[i].formula));
        map[i] = b.add_mp(h, taut);
        continue;
      }
      if (j.ref1 >= 0) j.ref1 = map[static_cast<size_t>(j.ref1)];
      if (j.ref2 >= 0) j.ref2 = map[static_cast<size_t>(j.ref2)];
      map[i] = b.add(p.lines[i].formula, j);
    }
    neq_branch = deduction_transform(
        expect_checks(b.take(), "eliminate_special: inequality branch"), ntu);
  }

  ProofBuilder b(p.sig, p.calculus, p.hypotheses);
  int c1 = b.append(eq_branch);
  int c2 = b.append(neq_branch);
  int taut = b.add_taut(Formula::mk_imp(
      b.formula(c1), Formula::mk_imp(b.formula(c2), p.conclusion())));
  int m1 = b.add_mp(c1, taut);
  b.add_mp(c2, m1);
  Proof out = expect_checks(b.take(), "eliminate_special: case split");

  // Termination guard: the multiset of same-type special instances,
  // counted per line, must strictly decrease (one copy of e removed, any
  // additions strictly below e in the order).
  {
    std::string type_key = epsilon_type(e).type.key();
    auto instance_counts = [&](const Proof& proof) {
      std::map<std::string, std::pair<TermPtr, int>> counts;
      ProofMetrics pm = proof_metrics(proof);
      for (auto& s : pm.special) {
        if (epsilon_type(s.term).type.key() != type_key) continue;
        auto [it, fresh] =
            counts.try_emplace(alpha_key(s.term), std::make_pair(s.term, 0));
        it->second.second += static_cast<int>(s.lines.size());
      }
      return counts;
    };
    auto before_counts = instance_counts(p);
    auto after_counts = instance_counts(out);
    std::vector<TermPtr> universe{e};
    for (auto& [k, v] : before_counts) universe.push_back(v.first);
    for (auto& [k, v] : after_counts) universe.push_back(v.first);
    InstanceOrder order(universe);

    auto e_key = alpha_key(e);
    int e_before = before_counts.count(e_key) ? before_counts[e_key].second : 0;
    int e_after = after_counts.count(e_key) ? after_counts[e_key].second : 0;
    if (e_after >= e_before)
      throw InternalError("eliminate_special: no copy of " + print(e) + " was removed");
    for (auto& [k, v] : after_counts) {
      if (k == e_key) continue;
      int before_n = before_counts.count(k) ? before_counts[k].second : 0;
      if (v.second > before_n && !order.less(v.first, e))
        throw InternalError("eliminate_special: new special instance not below " +
                            print(e));
    }
  }

  return {std::move(out), e};
}

} // namespace

Proof eliminate_special(const Proof& p, const FormulaPtr& conclusion) {
  require_eliminable(p, conclusion, "eliminate_special");
  Proof cur = p;
  for (;;) {
    ProofMetrics m = proof_metrics(cur);
    if (std::getenv("EPSILON_DEBUG_SPECIAL")) {
      int nlines = 0;
      for (auto& s : m.special) nlines += static_cast<int>(s.lines.size());
      std::fprintf(stderr, "[special] proof lines=%zu terms=%zu special lines=%d\n",
                   cur.lines.size(), m.special.size(), nlines);
    }
    if (m.special.empty()) return cur;
    cur = eliminate_special_step(cur, conclusion, m.max_special_rank()).proof;
  }
}

// --- grounding ---

Proof ground_epsilon_terms(const Proof& p, std::vector<TermPtr>* accompany,
                           std::vector<FormulaPtr>* accompany_formulas) {
  ProofMetrics m = proof_metrics(p);
  if (!m.critical.empty() || !m.special.empty())
    throw PreconditionError("ground_epsilon_terms: critical or identity instances remain");

  // maximal epsilon occurrences across all lines, largest first
  std::map<std::string, TermPtr> classes;
  std::set<std::string> used_names;
  for (auto& line : p.lines) {
    for (auto& n : all_var_names(line.formula)) used_names.insert(n);
    for (auto& occ : subterm_occurrences(line.formula)) {
      if (occ.term->kind() != Term::Kind::Eps || !occ.immediate) continue;
      classes.emplace(alpha_key(occ.term), occ.term);
    }
  }
  if (accompany) {
    for (auto& w : *accompany) {
      for (auto& n : all_var_names(w)) used_names.insert(n);
      if (w->kind() == Term::Kind::Eps) classes.emplace(alpha_key(w), w);
      for (auto& occ : subterm_occurrences(w))
        if (occ.term->kind() == Term::Kind::Eps && occ.immediate)
          classes.emplace(alpha_key(occ.term), occ.term);
    }
  }
  if (accompany_formulas) {
    for (auto& f : *accompany_formulas) {
      for (auto& n : all_var_names(f)) used_names.insert(n);
      for (auto& occ : subterm_occurrences(f))
        if (occ.term->kind() == Term::Kind::Eps && occ.immediate)
          classes.emplace(alpha_key(occ.term), occ.term);
    }
  }
  if (classes.empty()) return p;

  std::vector<TermPtr> order;
  for (auto& [k, term] : classes) order.push_back(term);
  std::sort(order.begin(), order.end(), [](const TermPtr& a, const TermPtr& b) {
    return alpha_key(a).size() > alpha_key(b).size();
  });

  Proof out = p;
  for (auto& term : order) {
    Variable fresh = fresh_var(used_names);
    used_names.insert(fresh.name);
    auto repl = Term::mk_var(fresh);
    for (auto& line : out.lines)
      line.formula = replace_subterm(line.formula, term, repl);
    if (accompany)
      for (auto& w : *accompany) w = replace_subterm(w, term, repl);
    if (accompany_formulas)
      for (auto& f : *accompany_formulas) f = replace_subterm(f, term, repl);
  }
  for (auto& line : out.lines)
    if (has_epsilon_term(line.formula))
      throw InternalError("ground_epsilon_terms: epsilon term survived grounding");
  return expect_checks(std::move(out), "ground_epsilon_terms");
}

// --- full elimination ---

namespace {

std::pair<Proof, ElimTrace> eliminate_loop(const Proof& p, const FormulaPtr& conclusion,
                                           bool track_conclusion,
                                           std::vector<FormulaPtr>* disjuncts,
                                           std::vector<TermPtr>* witnesses);

} // namespace

std::pair<Proof, ElimTrace> eliminate_all(const Proof& p, const FormulaPtr& conclusion) {
  if (has_epsilon_term(conclusion) || has_quantifier(conclusion))
    throw PreconditionError(
        "eliminate_all: conclusion must be epsilon- and quantifier-free");
  return eliminate_loop(p, conclusion, false, nullptr, nullptr);
}

namespace {

std::pair<Proof, ElimTrace> eliminate_loop(const Proof& p, const FormulaPtr& conclusion,
                                           bool track_conclusion,
                                           std::vector<FormulaPtr>* disjuncts,
                                           std::vector<TermPtr>* witnesses) {
  require_eliminable(p, conclusion, "eliminate_all");
  // drop lines the conclusion does not depend on
  Proof cur = extract_subproof(p, static_cast<int>(p.lines.size()) - 1);
  FormulaPtr current_concl = cur.conclusion();
  // the conclusion as a disjunction of instances of the original formula
  std::vector<FormulaPtr> parts{current_concl};
  ElimTrace trace;

  for (;;) {
    ProofMetrics m = proof_metrics(cur);
    bool have_crit = !m.critical.empty();
    bool have_special = !m.special.empty();
    if (!have_crit && !have_special) break;

    int crit_rank = m.rank;
    int special_rank = m.max_special_rank();

    if (have_special && (!have_crit || special_rank >= crit_rank)) {
      if (track_conclusion)
        throw PreconditionError(
            "herbrand_disjunction: identity instances are not supported here");
      ElimStep step;
      step.strategy = ElimStep::Strategy::Special;
      step.before = m;
      auto res = eliminate_special_step(cur, current_concl, special_rank);
      cur = std::move(res.proof);
      step.term = res.term;
      step.after = proof_metrics(cur);
      trace.steps.push_back(std::move(step));
      continue;
    }

    // critical step
    ElimStep step;
    step.strategy = ElimStep::Strategy::Critical;
    step.before = m;
    if (!track_conclusion) {
      TermPtr picked;
      cur = eliminate_one_impl(cur, current_concl, &picked);
      step.term = picked;
    } else {
      // conclusion-tracking variant for the Herbrand extraction
      Selection sel = select_critical(cur, m);
      step.term = sel.term;
      structural_lemma_check(cur, sel);
      BranchOutputs br = build_branches(cur, sel);

      bool affects = contains_subterm(current_concl, sel.term);
      if (affects && witnesses) {
        for (auto& w : sel.witnesses) {
          bool seen = false;
          for (auto& have : *witnesses) seen = seen || alpha_equiv(have, w);
          if (!seen) witnesses->push_back(w);
        }
      }
      // the new conclusion: instances of every current part under each
      // witness, then the untouched parts
      std::vector<FormulaPtr> new_parts;
      auto push_unique = [&](const FormulaPtr& f) {
        for (auto& have : new_parts)
          if (alpha_equiv(have, f)) return;
        new_parts.push_back(f);
      };
      for (auto& w : sel.witnesses)
        for (auto& part : parts) push_unique(replace_subterm(part, sel.term, w));
      for (auto& part : parts) push_unique(part);
      FormulaPtr new_concl = or_chain(new_parts);
      cur = assemble_case_split(cur, br, new_concl);
      parts = std::move(new_parts);
      current_concl = cur.conclusion();
    }
    step.after = proof_metrics(cur);
    // lexicographic descent on (rank, order at rank)
    int r = step.before.rank;
    bool descent = step.after.rank < r ||
                   (step.after.rank == r &&
                    step.after.order_at(r) < step.before.order_at(r));
    if (!descent) throw InternalError("eliminate_all: no lexicographic descent");
    trace.steps.push_back(std::move(step));
  }

  cur = ground_epsilon_terms(cur, witnesses, &parts);
  cur.calculus = Calculus::EC;
  cur = expect_checks(std::move(cur), "eliminate_all: final");
  if (!alpha_equiv(or_chain(parts), cur.conclusion()))
    throw InternalError("eliminate_all: tracked disjunction differs from the conclusion");
  if (disjuncts) *disjuncts = std::move(parts);
  return {std::move(cur), std::move(trace)};
}

} // namespace

HerbrandResult herbrand_disjunction(const Proof& p, const FormulaPtr& conclusion) {
  for (auto& line : p.lines)
    if (line.just.kind == K::EqEps || line.just.kind == K::Eq2)
      throw PreconditionError(
          "herbrand_disjunction: identity instances are not supported; eliminate them "
          "first");

  HerbrandResult result;
  auto [proof, trace] =
      eliminate_loop(p, conclusion, true, &result.disjuncts, &result.witnesses);
  result.proof = std::move(proof);
  result.trace = std::move(trace);

  // desk-scale validity of the disjunction, when the signature is small
  // enough to enumerate
  try {
    Signature small = restrict_signature(result.proof.sig, {result.proof.conclusion()});
    auto verdict = check_consequence(small, {}, result.proof.conclusion(),
                                     ConsequenceMode::Validity, 3, false, 200000);
    result.validated = verdict.holds;
    if (!verdict.holds)
      throw InternalError("herbrand_disjunction: extracted disjunction is not valid");
  } catch (const LimitError&) {
    result.validated = false;
  }
  return result;
}

} // namespace eps
