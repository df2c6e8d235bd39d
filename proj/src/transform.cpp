#include "epsilon/transform.hpp"
#include "epsilon/printer.hpp"
#include "epsilon/translate.hpp"

#include <algorithm>

namespace eps {

// --- ProofBuilder ---

ProofBuilder::ProofBuilder(Signature sig, Calculus calc, std::vector<FormulaPtr> hyps) {
  proof_.sig = std::move(sig);
  proof_.calculus = calc;
  proof_.hypotheses = std::move(hyps);
}

int ProofBuilder::add(FormulaPtr f, Justification j) {
  proof_.lines.push_back(ProofLine{std::move(f), j});
  return size() - 1;
}

int ProofBuilder::add_hyp(FormulaPtr f) { return add(std::move(f), Justification::hyp()); }
int ProofBuilder::add_taut(FormulaPtr f) { return add(std::move(f), Justification::taut()); }

int ProofBuilder::add_axiom(FormulaPtr f, Justification::Kind k) {
  return add(std::move(f), Justification::axiom(k));
}

int ProofBuilder::add_mp(int premise, int implication) {
  const FormulaPtr& impl = formula(implication);
  if (impl->kind() != Formula::Kind::Imp)
    throw InternalError("add_mp: line " + std::to_string(implication + 1) +
                        " is not an implication: " + print(impl));
  if (!alpha_equiv(formula(premise), impl->lhs()))
    throw InternalError("add_mp: premise mismatch: " + print(formula(premise)) +
                        " vs " + print(impl->lhs()));
  return add(impl->rhs(), Justification::mp(premise, implication));
}

int ProofBuilder::append(const Proof& sub) {
  int offset = size();
  for (auto& line : sub.lines) {
    Justification j = line.just;
    if (j.ref1 >= 0) j.ref1 += offset;
    if (j.ref2 >= 0) j.ref2 += offset;
    proof_.lines.push_back(ProofLine{line.formula, j});
  }
  return size() - 1;
}

// --- subproof extraction ---

Proof extract_subproof(const Proof& p, int line) {
  if (line < 0 || line >= static_cast<int>(p.lines.size()))
    throw PreconditionError("extract_subproof: line out of range");
  std::vector<char> needed(p.lines.size(), 0);
  std::vector<int> stack{line};
  needed[static_cast<size_t>(line)] = 1;
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    const Justification& j = p.lines[static_cast<size_t>(i)].just;
    for (int r : {j.ref1, j.ref2}) {
      if (r >= 0 && !needed[static_cast<size_t>(r)]) {
        needed[static_cast<size_t>(r)] = 1;
        stack.push_back(r);
      }
    }
  }
  Proof out;
  out.sig = p.sig;
  out.calculus = p.calculus;
  out.hypotheses = p.hypotheses;
  std::vector<int> remap(p.lines.size(), -1);
  for (size_t i = 0; i < p.lines.size(); ++i) {
    if (!needed[i]) continue;
    Justification j = p.lines[i].just;
    if (j.ref1 >= 0) j.ref1 = remap[static_cast<size_t>(j.ref1)];
    if (j.ref2 >= 0) j.ref2 = remap[static_cast<size_t>(j.ref2)];
    out.lines.push_back(ProofLine{p.lines[i].formula, j});
    remap[i] = static_cast<int>(out.lines.size()) - 1;
  }
  return out;
}

Proof expect_checks(Proof p, const char* where) {
  CheckReport rep = check_proof(p);
  if (!rep.ok) {
    const auto& f = rep.failures.front();
    std::string line_text =
        f.line >= 0 ? print(p.lines[static_cast<size_t>(f.line)].formula) : "";
    throw InternalError(std::string(where) + ": constructed proof fails at line " +
                        std::to_string(f.line + 1) + ": " + f.reason +
                        (line_text.empty() ? "" : " [" + line_text + "]"));
  }
  return p;
}

// --- substitute_proof ---

namespace {

Proof map_lines(const Proof& p, const Variable& x, const TermPtr& t) {
  Proof out = p;
  for (auto& line : out.lines) line.formula = substitute(line.formula, x, t);
  return out;
}

} // namespace

Proof substitute_proof(const Proof& p, const Variable& x, const TermPtr& t) {
  CheckReport rep = check_proof(p);
  if (!rep.ok)
    throw PreconditionError("substitute_proof: input proof does not check");
  for (auto& h : p.hypotheses)
    if (free_vars(h).count(x))
      throw PreconditionError("substitute_proof: '" + x.name +
                              "' occurs free in a hypothesis");
  for (auto& e : rep.eigenvariables)
    if (e == x)
      throw PreconditionError("substitute_proof: '" + x.name +
                              "' is an eigenvariable of the proof");

  // Rename eigenvariables that would collide with the substituted term.
  Proof cur = p;
  auto fv = free_vars(t);
  std::set<std::string> used;
  for (auto& line : cur.lines)
    for (auto& n : all_var_names(line.formula)) used.insert(n);
  for (auto& n : all_var_names(t)) used.insert(n);
  for (auto& e : rep.eigenvariables) {
    if (!fv.count(e)) continue;
    Variable e2 = fresh_var(used);
    used.insert(e2.name);
    cur = map_lines(cur, e, Term::mk_var(e2));
  }

  return expect_checks(map_lines(cur, x, t), "substitute_proof");
}

// --- deduction transform ---

Proof deduction_transform(const Proof& p, const FormulaPtr& a) {
  CheckReport rep = check_proof(p);
  if (!rep.ok) throw PreconditionError("deduction_transform: input proof does not check");
  auto a_fv = free_vars(a);
  for (auto& e : rep.eigenvariables)
    if (a_fv.count(e))
      throw PreconditionError("deduction_transform: discharged formula contains eigenvariable '" +
                              e.name + "'");

  std::vector<FormulaPtr> hyps;
  for (auto& h : p.hypotheses)
    if (!alpha_equiv(h, a)) hyps.push_back(h);

  ProofBuilder b(p.sig, p.calculus, hyps);
  std::vector<int> map(p.lines.size(), -1);

  auto imp_a = [&](const FormulaPtr& f) { return Formula::mk_imp(a, f); };

  for (size_t i = 0; i < p.lines.size(); ++i) {
    const ProofLine& line = p.lines[i];
    const FormulaPtr& f = line.formula;
    using K = Justification::Kind;
    switch (line.just.kind) {
      case K::Hyp: {
        if (alpha_equiv(f, a)) {
          map[i] = b.add_taut(imp_a(f));
        } else {
          int h = b.add_hyp(f);
          int t = b.add_taut(Formula::mk_imp(f, imp_a(f)));
          map[i] = b.add_mp(h, t);
        }
        break;
      }
      case K::Taut:
        map[i] = b.add_taut(imp_a(f));
        break;
      case K::MP: {
        // have A -> B and A -> (B -> C); tautology plus two MPs
        const FormulaPtr& bf = p.lines[static_cast<size_t>(line.just.ref1)].formula;
        FormulaPtr ab = b.formula(map[static_cast<size_t>(line.just.ref1)]);
        FormulaPtr abc = b.formula(map[static_cast<size_t>(line.just.ref2)]);
        (void)bf;
        FormulaPtr target = imp_a(f);
        int t = b.add_taut(Formula::mk_imp(ab, Formula::mk_imp(abc, target)));
        int m1 = b.add_mp(map[static_cast<size_t>(line.just.ref1)], t);
        map[i] = b.add_mp(map[static_cast<size_t>(line.just.ref2)], m1);
        break;
      }
      case K::RExists: {
        // f = (ex x B) -> C from B(x) -> C; six-line block
        FormulaPtr ex = f->lhs();
        FormulaPtr c = f->rhs();
        const FormulaPtr& prem = p.lines[static_cast<size_t>(line.just.ref1)].formula;
        FormulaPtr bx = prem->lhs();
        int j = map[static_cast<size_t>(line.just.ref1)];
        FormulaPtr step = Formula::mk_imp(bx, imp_a(c));
        int t1 = b.add_taut(Formula::mk_imp(b.formula(j), step));
        int m1 = b.add_mp(j, t1);
        int r = b.add(Formula::mk_imp(ex, imp_a(c)), Justification::r_exists(m1));
        int t2 = b.add_taut(Formula::mk_imp(b.formula(r), imp_a(f)));
        map[i] = b.add_mp(r, t2);
        break;
      }
      case K::RForall: {
        // f = C -> all x B from C -> B(x); conjoin A with C
        FormulaPtr c = f->lhs();
        FormulaPtr al = f->rhs();
        const FormulaPtr& prem = p.lines[static_cast<size_t>(line.just.ref1)].formula;
        FormulaPtr bx = prem->rhs();
        int j = map[static_cast<size_t>(line.just.ref1)];
        FormulaPtr ac = Formula::mk_and(a, c);
        int t1 = b.add_taut(Formula::mk_imp(b.formula(j), Formula::mk_imp(ac, bx)));
        int m1 = b.add_mp(j, t1);
        int r = b.add(Formula::mk_imp(ac, al), Justification::r_forall(m1));
        int t2 = b.add_taut(Formula::mk_imp(b.formula(r), imp_a(f)));
        map[i] = b.add_mp(r, t2);
        break;
      }
      default: {
        // axiom: keep it, then weaken
        int ax = b.add(f, line.just);
        int t = b.add_taut(Formula::mk_imp(f, imp_a(f)));
        map[i] = b.add_mp(ax, t);
        break;
      }
    }
  }
  return expect_checks(b.take(), "deduction_transform");
}

Proof deduction_inverse(const Proof& p, const FormulaPtr& a) {
  if (p.conclusion()->kind() != Formula::Kind::Imp ||
      !alpha_equiv(p.conclusion()->lhs(), a))
    throw PreconditionError("deduction_inverse: conclusion is not A -> B for the given A");
  Proof out = p;
  bool present = false;
  for (auto& h : out.hypotheses) present = present || alpha_equiv(h, a);
  if (!present) out.hypotheses.push_back(a);
  int impl = static_cast<int>(out.lines.size()) - 1;
  out.lines.push_back(ProofLine{a, Justification::hyp()});
  out.lines.push_back(
      ProofLine{p.conclusion()->rhs(), Justification::mp(impl + 1, impl)});
  return expect_checks(std::move(out), "deduction_inverse");
}

Proof to_inconsistency(const Proof& p) {
  FormulaPtr a = p.conclusion();
  FormulaPtr na = Formula::mk_not(a);
  Proof out = p;
  out.hypotheses.push_back(na);
  int a_line = static_cast<int>(out.lines.size()) - 1;
  out.lines.push_back(ProofLine{na, Justification::hyp()});
  int na_line = a_line + 1;
  FormulaPtr bot = Formula::mk_bottom();
  out.lines.push_back(ProofLine{
      Formula::mk_imp(a, Formula::mk_imp(na, bot)), Justification::taut()});
  int taut_line = na_line + 1;
  out.lines.push_back(ProofLine{Formula::mk_imp(na, bot),
                                Justification::mp(a_line, taut_line)});
  out.lines.push_back(ProofLine{bot, Justification::mp(na_line, taut_line + 1)});
  return expect_checks(std::move(out), "to_inconsistency");
}

// --- epsilon embedding ---

Proof embed_proof(const Proof& p) {
  CheckReport rep = check_proof(p);
  if (!rep.ok) throw PreconditionError("embed_proof: input proof does not check");
  if (!calculus_has_quantifiers(p.calculus))
    throw PreconditionError("embed_proof: proof is not in a quantifier calculus");
  for (auto& h : p.hypotheses)
    if (!is_closed(h))
      throw PreconditionError("embed_proof: hypotheses must be sentences");

  Signature sig = p.sig;
  sig.has_epsilon = true;

  std::vector<FormulaPtr> hyps;
  for (auto& h : p.hypotheses) hyps.push_back(epsilon_translate(h));

  ProofBuilder b(sig, Calculus::ECeps, hyps);
  std::vector<int> map(p.lines.size(), -1);

  for (size_t i = 0; i < p.lines.size(); ++i) {
    const ProofLine& line = p.lines[i];
    FormulaPtr tf = epsilon_translate(line.formula);
    using K = Justification::Kind;
    switch (line.just.kind) {
      case K::Hyp:
        map[i] = b.add_hyp(tf);
        break;
      case K::Taut:
        map[i] = b.add_taut(tf);
        break;
      case K::Eq1:
      case K::Eq2:
      case K::Eq2Pred:
      case K::Eq2Fn:
      case K::EqEps:
      case K::Crit:
      case K::Ext:
      case K::ExtMinus:
        // the translation of an instance is again an instance
        map[i] = b.add(tf, line.just);
        break;
      case K::AxExists:
        // A(t) -> ex x A(x) translates to a critical formula
        map[i] = b.add_axiom(tf, K::Crit);
        break;
      case K::AxForall: {
        // (all x A) -> A(t) becomes: Crit on ~A, contraposed.
        // tf = A*(e') -> A*(t*) with e' = eps x ~A*(x)
        auto m = match_axiom(line.formula, K::AxForall, p.sig);
        if (!m) throw InternalError("embed_proof: AxForall line does not re-match");
        FormulaPtr body = epsilon_translate(m->context);  // A*(x)
        const Variable& x = m->var;
        TermPtr witness = epsilon_translate(m->t);
        TermPtr eprime = Term::mk_eps(x, Formula::mk_not(body));
        FormulaPtr not_at = Formula::mk_not(substitute(body, x, witness));
        FormulaPtr not_ae = Formula::mk_not(substitute(body, x, eprime));
        int crit = b.add_axiom(Formula::mk_imp(not_at, not_ae), K::Crit);
        int contra = b.add_taut(Formula::mk_imp(b.formula(crit), tf));
        map[i] = b.add_mp(crit, contra);
        break;
      }
      case K::MP:
        map[i] = b.add(tf, Justification::mp(map[static_cast<size_t>(line.just.ref1)],
                                             map[static_cast<size_t>(line.just.ref2)]));
        break;
      case K::RExists:
      case K::RForall: {
        // substitute the premise subproof at the embedding witness
        bool ex = line.just.kind == K::RExists;
        FormulaPtr quant = ex ? line.formula->lhs() : line.formula->rhs();
        FormulaPtr prem = p.lines[static_cast<size_t>(line.just.ref1)].formula;
        FormulaPtr prem_side = ex ? prem->lhs() : prem->rhs();
        auto inst = find_instantiation(quant->lhs(), quant->var(), prem_side);
        if (!inst || (*inst)->kind() != Term::Kind::Var)
          throw InternalError("embed_proof: rule line does not re-match");
        Variable eigen = (*inst)->var();
        FormulaPtr body = epsilon_translate(substitute(quant->lhs(), quant->var(),
                                                       Term::mk_var(eigen)));
        TermPtr witness = ex ? Term::mk_eps(eigen, body)
                             : Term::mk_eps(eigen, Formula::mk_not(body));
        Proof cone = extract_subproof(b.peek(), map[static_cast<size_t>(line.just.ref1)]);
        Proof inst_proof = substitute_proof(cone, eigen, witness);
        map[i] = b.append(inst_proof);
        if (!alpha_equiv(b.formula(map[i]), tf))
          throw InternalError("embed_proof: rule instance conclusion mismatch: " +
                              print(b.formula(map[i])) + " vs " + print(tf));
        break;
      }
    }
  }
  return expect_checks(b.take(), "embed_proof");
}

// --- equality toolkit ---

int derive_refl(ProofBuilder& b, const TermPtr& t) {
  return b.add_axiom(Formula::mk_eq(t, t), Justification::Kind::Eq1);
}

int derive_sym(ProofBuilder& b, int eq_line) {
  FormulaPtr eq = b.formula(eq_line);
  const TermPtr& a = eq->args()[0];
  const TermPtr& c = eq->args()[1];
  if (alpha_equiv(a, c)) return eq_line;
  // a = c -> (a = a -> c = a), replacing the first slot of the identity
  FormulaPtr step = Formula::mk_imp(
      eq, Formula::mk_imp(Formula::mk_eq(a, a), Formula::mk_eq(c, a)));
  int ax = b.add_axiom(step, Justification::Kind::Eq2Pred);
  int m = b.add_mp(eq_line, ax);
  int refl = derive_refl(b, a);
  return b.add_mp(refl, m);
}

int derive_trans(ProofBuilder& b, int ab_line, int bc_line) {
  FormulaPtr ab = b.formula(ab_line);
  FormulaPtr bc = b.formula(bc_line);
  const TermPtr& a = ab->args()[0];
  const TermPtr& mid = ab->args()[1];
  const TermPtr& c = bc->args()[1];
  if (!alpha_equiv(mid, bc->args()[0]))
    throw InternalError("derive_trans: middle terms differ");
  if (alpha_equiv(a, mid)) return bc_line;
  if (alpha_equiv(mid, c)) return ab_line;
  int ba = derive_sym(b, ab_line);
  // b = a -> (b = c -> a = c)
  FormulaPtr step = Formula::mk_imp(
      b.formula(ba), Formula::mk_imp(Formula::mk_eq(mid, c), Formula::mk_eq(a, c)));
  int ax = b.add_axiom(step, Justification::Kind::Eq2Pred);
  int m = b.add_mp(ba, ax);
  return b.add_mp(bc_line, m);
}

namespace {

// Slot decomposition for the congruence recursion: function arguments, or
// the type slots of an epsilon term.
struct Slots {
  std::vector<TermPtr> parts;                       // slot terms of s
  std::function<TermPtr(const std::vector<TermPtr>&)> rebuild;
  Justification::Kind step_axiom;
};

Slots decompose(const TermPtr& s, const std::set<std::string>& avoid) {
  Slots out;
  if (s->kind() == Term::Kind::App) {
    out.parts = s->args();
    std::string fn = s->fn();
    out.rebuild = [fn](const std::vector<TermPtr>& parts) {
      return Term::mk_app(fn, parts);
    };
    out.step_axiom = Justification::Kind::Eq2Fn;
    return out;
  }
  if (s->kind() == Term::Kind::Eps) {
    // Rename binders clashing with the avoid set so raw slot substitution
    // stays capture-free.
    TermPtr clean = s;
    auto tt = epsilon_type(clean);
    out.parts = tt.args;
    EpsilonType type = tt.type;
    (void)avoid;
    out.rebuild = [type](const std::vector<TermPtr>& parts) {
      return instantiate_type(type, parts);
    };
    out.step_axiom = Justification::Kind::EqEps;
    return out;
  }
  throw InternalError("decompose: variable has no slots");
}

} // namespace

int derive_term_eq(ProofBuilder& b, const TermPtr& s, const Variable& x,
                   const TermPtr& t, const TermPtr& u, int tu_line) {
  TermPtr st = substitute(s, x, t);
  TermPtr su = substitute(s, x, u);
  if (!free_vars(s).count(x) || alpha_equiv(st, su)) {
    // both instances coincide
    int refl = derive_refl(b, st);
    return refl;
  }
  if (s->kind() == Term::Kind::Var) {
    // s == x
    return tu_line;
  }
  std::set<std::string> avoid = all_var_names(t);
  for (auto& n : all_var_names(u)) avoid.insert(n);
  Slots slots = decompose(s, avoid);

  int n = static_cast<int>(slots.parts.size());
  // mixed instance: slots 1..k at u, the rest at t
  auto mixed = [&](int k) {
    std::vector<TermPtr> parts;
    for (int i = 0; i < n; ++i) {
      const TermPtr& part = slots.parts[static_cast<size_t>(i)];
      parts.push_back(substitute(part, x, i < k ? u : t));
    }
    return slots.rebuild(parts);
  };

  int chain = -1;
  TermPtr prev = mixed(0);
  for (int k = 0; k < n; ++k) {
    const TermPtr& part = slots.parts[static_cast<size_t>(k)];
    if (!free_vars(part).count(x)) continue;
    TermPtr next = mixed(k + 1);
    if (alpha_equiv(prev, next)) continue;
    int part_eq = derive_term_eq(b, part, x, t, u, tu_line);
    FormulaPtr step = Formula::mk_imp(b.formula(part_eq), Formula::mk_eq(prev, next));
    int ax = b.add_axiom(step, slots.step_axiom);
    int m = b.add_mp(part_eq, ax);
    chain = chain < 0 ? m : derive_trans(b, chain, m);
    prev = next;
  }
  if (chain < 0) throw InternalError("derive_term_eq: no differing slot found");
  return chain;
}

namespace {

// One-directional atom congruence: P(args[x/from]) -> P(args[x/to]).
int derive_atom_imp(ProofBuilder& b, const FormulaPtr& atom, const Variable& x,
                    const TermPtr& from, const TermPtr& to,
                    const std::map<std::string, int>& part_eqs) {
  bool is_eq = atom->kind() == Formula::Kind::Eq;
  auto inst = [&](int k) {
    // args 1..k at `to`, rest at `from`
    std::vector<TermPtr> args;
    int n = static_cast<int>(atom->args().size());
    for (int i = 0; i < n; ++i)
      args.push_back(substitute(atom->args()[static_cast<size_t>(i)], x,
                                i < k ? to : from));
    return is_eq ? Formula::mk_eq(args[0], args[1])
                 : Formula::mk_atom(atom->pred(), args);
  };
  int n = static_cast<int>(atom->args().size());
  int chain = -1;  // line proving inst(0) -> inst(k)
  FormulaPtr prev = inst(0);
  for (int k = 0; k < n; ++k) {
    const TermPtr& part = atom->args()[static_cast<size_t>(k)];
    if (!free_vars(part).count(x)) continue;
    FormulaPtr next = inst(k + 1);
    if (alpha_equiv(prev, next)) continue;
    auto it = part_eqs.find(alpha_key(part));
    if (it == part_eqs.end()) throw InternalError("derive_atom_imp: missing slot equality");
    int eq_line = it->second;  // part[x/t] = part[x/u] oriented t -> u
    // orient the equality in the direction we substitute
    FormulaPtr have = b.formula(eq_line);
    TermPtr want_l = substitute(part, x, from);
    int oriented = eq_line;
    if (!alpha_equiv(have->args()[0], want_l)) oriented = derive_sym(b, eq_line);
    FormulaPtr step = Formula::mk_imp(b.formula(oriented), Formula::mk_imp(prev, next));
    int ax = b.add_axiom(step, Justification::Kind::Eq2Pred);
    int m = b.add_mp(oriented, ax);
    chain = chain < 0 ? m : chain_imp(b, chain, m);
    prev = next;
  }
  if (chain < 0) throw InternalError("derive_atom_imp: no differing argument");
  return chain;
}

} // namespace

int chain_imp(ProofBuilder& b, int i, int j) {
  FormulaPtr ab = b.formula(i);
  FormulaPtr bc = b.formula(j);
  FormulaPtr target = Formula::mk_imp(ab->lhs(), bc->rhs());
  int t = b.add_taut(Formula::mk_imp(ab, Formula::mk_imp(bc, target)));
  int m = b.add_mp(i, t);
  return b.add_mp(j, m);
}

int iff_to_imp(ProofBuilder& b, int iff_line, bool forward) {
  FormulaPtr iff = b.formula(iff_line);
  FormulaPtr target = forward ? Formula::mk_imp(iff->lhs(), iff->rhs())
                              : Formula::mk_imp(iff->rhs(), iff->lhs());
  int t = b.add_taut(Formula::mk_imp(iff, target));
  return b.add_mp(iff_line, t);
}

int derive_formula_iff(ProofBuilder& b, const FormulaPtr& a, const Variable& x,
                       const TermPtr& t, const TermPtr& u, int tu_line) {
  FormulaPtr at = substitute(a, x, t);
  FormulaPtr au = substitute(a, x, u);
  if (!free_vars(a).count(x) || alpha_equiv(at, au))
    return b.add_taut(Formula::mk_iff(at, au));

  switch (a->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq: {
      std::map<std::string, int> part_eqs;
      for (auto& part : a->args()) {
        if (!free_vars(part).count(x)) continue;
        auto key = alpha_key(part);
        if (part_eqs.count(key)) continue;
        part_eqs[key] = derive_term_eq(b, part, x, t, u, tu_line);
      }
      int fwd = derive_atom_imp(b, a, x, t, u, part_eqs);
      int bwd = derive_atom_imp(b, a, x, u, t, part_eqs);
      FormulaPtr target = Formula::mk_iff(at, au);
      int tt = b.add_taut(Formula::mk_imp(
          b.formula(fwd), Formula::mk_imp(b.formula(bwd), target)));
      int m = b.add_mp(fwd, tt);
      return b.add_mp(bwd, m);
    }
    case Formula::Kind::Not: {
      int sub = derive_formula_iff(b, a->lhs(), x, t, u, tu_line);
      FormulaPtr target = Formula::mk_iff(at, au);
      int tt = b.add_taut(Formula::mk_imp(b.formula(sub), target));
      return b.add_mp(sub, tt);
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff: {
      int l = derive_formula_iff(b, a->lhs(), x, t, u, tu_line);
      int r = derive_formula_iff(b, a->rhs(), x, t, u, tu_line);
      FormulaPtr target = Formula::mk_iff(at, au);
      int tt = b.add_taut(Formula::mk_imp(
          b.formula(l), Formula::mk_imp(b.formula(r), target)));
      int m = b.add_mp(l, tt);
      return b.add_mp(r, m);
    }
    default:
      throw PreconditionError("derive_formula_iff: quantified formulas unsupported");
  }
}

Proof derive_eq2(const TermPtr& t, const TermPtr& u, const FormulaPtr& a,
                 const Variable& x, const Signature& sig, Calculus calc) {
  if (has_quantifier(a))
    throw PreconditionError("derive_eq2: context formula must be quantifier-free");
  FormulaPtr tu = Formula::mk_eq(t, u);
  ProofBuilder b(sig, calc, {tu});
  int hyp = b.add_hyp(tu);
  derive_formula_iff(b, a, x, t, u, hyp);
  Proof from_hyp = expect_checks(b.take(), "derive_eq2");
  return deduction_transform(from_hyp, tu);
}

} // namespace eps
