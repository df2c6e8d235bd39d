#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epsilon/parser.hpp"
#include "epsilon/printer.hpp"
#include "epsilon/proof.hpp"
#include "epsilon/transform.hpp"
#include "epsilon/translate.hpp"

using namespace eps;

namespace {

Signature test_sig() {
  Signature s;
  s.functions = {{"c", 0}, {"d", 0}, {"f", 1}, {"g", 2}};
  s.predicates = {{"P", 1}, {"Q", 1}, {"R", 2}, {"S", 0}};
  s.has_identity = true;
  return s;
}

TermPtr t(const std::string& s) { return parse_term(s, test_sig()); }
FormulaPtr fm(const std::string& s) { return parse_formula(s, test_sig()); }

Proof make_proof(Calculus calc, std::vector<FormulaPtr> hyps,
                 std::vector<std::pair<std::string, Justification>> lines) {
  Proof p;
  p.sig = test_sig();
  p.calculus = calc;
  p.hypotheses = std::move(hyps);
  for (auto& [text, just] : lines)
    p.lines.push_back(ProofLine{fm(text), just});
  return p;
}

} // namespace

TEST_CASE("tautology checking") {
  CHECK(is_tautology(fm("P(c) -> P(c)")));
  CHECK(is_tautology(fm("P(eps x. P(x)) | ~P(eps x. P(x))")));
  // alpha-variants count as one atom
  CHECK(is_tautology(fm("P(eps x. P(x)) | ~P(eps y. P(y))")));
  CHECK_FALSE(is_tautology(fm("P(c) -> P(d)")));
  CHECK(is_tautology(fm("_|_ -> S")));
  CHECK(is_tautology(fm("T")));
  CHECK_FALSE(is_tautology(fm("c = d | c = c")));
  CHECK(is_tautology(fm("c = d | ~(c = d)")));
  CHECK(count_abstracted_atoms(fm("P(c) & Q(d) -> P(c)")) == 2);
}

TEST_CASE("axiom matching: crit") {
  auto sig = test_sig();
  auto m = match_axiom(fm("P(c) -> P(eps x. P(x))"), Justification::Kind::Crit, sig);
  REQUIRE(m);
  CHECK(alpha_equiv(m->t, t("c")));
  CHECK(alpha_equiv(m->eps1, t("eps x. P(x)")));

  CHECK_FALSE(match_axiom(fm("P(c) -> P(eps x. Q(x))"), Justification::Kind::Crit, sig));

  // nested witness: A(t) with t containing the epsilon term itself
  auto e = t("eps x. P(x)");
  auto crit2 = Formula::mk_imp(fm("P(f(eps x. P(x)))"), fm("P(eps x. P(x))"));
  CHECK(match_axiom(crit2, Justification::Kind::Crit, sig));

  // binary: A(x) = R(x, c)
  auto m3 =
      match_axiom(fm("R(d, c) -> R(eps x. R(x, c), c)"), Justification::Kind::Crit, sig);
  REQUIRE(m3);
  CHECK(alpha_equiv(m3->t, t("d")));
  (void)e;
}

TEST_CASE("axiom matching: identity schemas") {
  auto sig = test_sig();
  using K = Justification::Kind;

  CHECK(match_axiom(fm("c = c"), K::Eq1, sig));
  CHECK(match_axiom(fm("f(c) = f(c)"), K::Eq1, sig));
  CHECK_FALSE(match_axiom(fm("c = d"), K::Eq1, sig));

  // general (=2)
  auto m = match_axiom(fm("c = d -> (P(c) <-> P(d))"), K::Eq2, sig);
  REQUIRE(m);
  // multiple replaced occurrences
  CHECK(match_axiom(fm("c = d -> (R(c, c) <-> R(d, d))"), K::Eq2, sig));
  // partial replacement is a legal instance as well
  CHECK(match_axiom(fm("c = d -> (R(c, c) <-> R(d, c))"), K::Eq2, sig));
  // x not free
  CHECK(match_axiom(fm("c = d -> (S <-> S)"), K::Eq2, sig));
  CHECK_FALSE(match_axiom(fm("c = d -> (P(c) <-> Q(d))"), K::Eq2, sig));
  // replacement under an epsilon binder lifts to the whole term
  CHECK(match_axiom(
      fm("(eps x. R(x, c)) = (eps x. R(x, d)) -> (P(eps x. R(x, c)) <-> P(eps x. R(x, d)))"),
      K::Eq2, sig));

  // (=2')
  auto mp = match_axiom(fm("c = d -> (R(c, f(c)) -> R(d, f(c)))"), K::Eq2Pred, sig);
  REQUIRE(mp);
  CHECK(mp->slot == 0);
  // identity as the predicate
  CHECK(match_axiom(fm("c = d -> (c = f(c) -> d = f(c))"), K::Eq2Pred, sig));
  CHECK_FALSE(match_axiom(fm("c = d -> (R(c, c) -> R(d, d))"), K::Eq2Pred, sig));

  // (=2'')
  auto mf = match_axiom(fm("c = d -> g(c, f(d)) = g(d, f(d))"), K::Eq2Fn, sig);
  REQUIRE(mf);
  CHECK(mf->slot == 0);

  // epsilon identity schema
  auto me = match_axiom(fm("c = d -> (eps x. R(x, c)) = eps x. R(x, d)"), K::EqEps, sig);
  REQUIRE(me);
  CHECK(me->slot == 0);
  // different types do not match
  CHECK_FALSE(
      match_axiom(fm("c = d -> (eps x. R(x, c)) = eps x. Q(x)"), K::EqEps, sig));
}

TEST_CASE("axiom matching: quantifier axioms and ext") {
  auto sig = test_sig();
  using K = Justification::Kind;

  auto m1 = match_axiom(fm("P(c) -> ex x. P(x)"), K::AxExists, sig);
  REQUIRE(m1);
  CHECK(alpha_equiv(m1->t, t("c")));
  auto m2 = match_axiom(fm("(all x. P(x)) -> P(f(c))"), K::AxForall, sig);
  REQUIRE(m2);
  CHECK(alpha_equiv(m2->t, t("f(c)")));
  CHECK_FALSE(match_axiom(fm("P(c) -> ex x. Q(x)"), K::AxExists, sig));

  // (ext): premise is A(d) <-> B(d) with d = eps z ~(A(z) <-> B(z))
  FormulaPtr A = fm("P(x)");
  FormulaPtr B = fm("Q(x)");
  Variable x("x");
  TermPtr d = Term::mk_eps(x, Formula::mk_not(Formula::mk_iff(A, B)));
  FormulaPtr prem = Formula::mk_iff(substitute(A, x, d), substitute(B, x, d));
  FormulaPtr ext = Formula::mk_imp(
      prem, Formula::mk_eq(Term::mk_eps(x, A), Term::mk_eps(x, B)));
  CHECK(match_axiom(ext, K::Ext, sig));

  // (ext-): conclusion C(eps x A) <-> C(eps x B)
  TermPtr ea = Term::mk_eps(x, A);
  TermPtr eb = Term::mk_eps(x, B);
  FormulaPtr extm = Formula::mk_imp(
      prem, Formula::mk_iff(Formula::mk_atom("Q", {Term::mk_app("f", {ea})}),
                            Formula::mk_atom("Q", {Term::mk_app("f", {eb})})));
  CHECK(match_axiom(extm, K::ExtMinus, sig));
  // wrong witness term in the premise
  FormulaPtr bad = Formula::mk_imp(
      Formula::mk_iff(fm("P(c)"), fm("Q(c)")),
      Formula::mk_eq(ea, eb));
  CHECK_FALSE(match_axiom(bad, K::Ext, sig));
}

TEST_CASE("check_proof accepts and rejects") {
  using K = Justification::Kind;

  // [P(c)->P(e) Crit; (P(c)->P(e))->(~P(e)->~P(c)) Taut; ~P(e)->~P(c) MP]
  auto p = make_proof(
      Calculus::ECeps, {},
      {{"P(c) -> P(eps x. P(x))", Justification::axiom(K::Crit)},
       {"(P(c) -> P(eps x. P(x))) -> (~P(eps x. P(x)) -> ~P(c))", Justification::taut()},
       {"~P(eps x. P(x)) -> ~P(c)", Justification::mp(0, 1)}});
  auto rep = check_proof(p);
  CHECK(rep.ok);
  REQUIRE(rep.critical_terms.size() == 1);
  CHECK(alpha_equiv(rep.critical_terms[0].term, t("eps x. P(x)")));

  // one-line hypothesis proof
  auto p2 = make_proof(Calculus::EC, {fm("S")}, {{"S", Justification::hyp()}});
  CHECK(check_proof(p2).ok);

  // crit not allowed in EC
  auto p3 = make_proof(Calculus::EC, {},
                       {{"P(c) -> P(eps x. P(x))", Justification::axiom(K::Crit)}});
  CHECK_FALSE(check_proof(p3).ok);

  // quantifier rule with eigenvariable free in the conclusion
  auto p4 = make_proof(Calculus::ECforall, {},
                       {{"R(x, c) -> R(x, c)", Justification::taut()},
                        {"(ex y. R(x, y)) -> R(x, c)", Justification::r_exists(0)}});
  auto rep4 = check_proof(p4);
  CHECK_FALSE(rep4.ok);  // premise shape mismatch: R(x,c) vs R(x,y)

  auto p5 = make_proof(Calculus::ECforall, {},
                       {{"R(y, x) -> R(y, x)", Justification::taut()},
                        {"(ex y. R(y, x)) -> R(y, x)", Justification::r_exists(0)}});
  CHECK_FALSE(check_proof(p5).ok);  // eigenvariable y free in the conclusion

  // good R-exists
  auto p6 = make_proof(Calculus::ECforall, {},
                       {{"R(y, c) -> (S -> R(y, c))", Justification::taut()},
                        {"R(y, c) -> ex x. R(x, c)", Justification::axiom(K::AxExists)}});
  CHECK(check_proof(p6).ok);

  auto p7 = make_proof(
      Calculus::ECforall, {},
      {{"P(y) -> (P(y) | S)", Justification::taut()},
       {"(ex y. P(y)) -> (P(y) | S)", Justification::r_exists(0)}});
  CHECK_FALSE(check_proof(p7).ok);  // y still free below (in the same line)

  auto p8 = make_proof(
      Calculus::ECforall, {},
      {{"P(y) -> (P(c) | ~P(c))", Justification::taut()},
       {"(ex y. P(y)) -> (P(c) | ~P(c))", Justification::r_exists(0)}});
  auto rep8 = check_proof(p8);
  CHECK(rep8.ok);
  REQUIRE(rep8.eigenvariables.size() == 1);
  CHECK(rep8.eigenvariables[0].name == "y");

  // language gating: quantifier in ECeps
  auto p9 = make_proof(Calculus::ECeps, {},
                       {{"(all x. P(x)) -> all x. P(x)", Justification::taut()}});
  CHECK_FALSE(check_proof(p9).ok);

  // hypothesis not in Gamma
  auto p10 = make_proof(Calculus::EC, {fm("S")}, {{"P(c)", Justification::hyp()}});
  CHECK_FALSE(check_proof(p10).ok);

  // MP order is premise-then-implication
  auto p11 = make_proof(Calculus::EC, {fm("S"), fm("S -> P(c)")},
                        {{"S", Justification::hyp()},
                         {"S -> P(c)", Justification::hyp()},
                         {"P(c)", Justification::mp(0, 1)}});
  CHECK(check_proof(p11).ok);
  auto p12 = make_proof(Calculus::EC, {fm("S"), fm("S -> P(c)")},
                        {{"S", Justification::hyp()},
                         {"S -> P(c)", Justification::hyp()},
                         {"P(c)", Justification::mp(1, 0)}});
  CHECK_FALSE(check_proof(p12).ok);
}

TEST_CASE("substitute_proof") {
  using K = Justification::Kind;
  auto p = make_proof(Calculus::ECeps, {},
                      {{"P(x) -> P(x)", Justification::taut()}});
  auto q = substitute_proof(p, Variable("x"), t("c"));
  CHECK(alpha_equiv(q.conclusion(), fm("P(c) -> P(c)")));

  // crit line stays crit after substitution
  auto p2 = make_proof(Calculus::ECeps, {},
                       {{"P(y) -> P(eps x. P(x))", Justification::axiom(K::Crit)}});
  auto q2 = substitute_proof(p2, Variable("y"), t("f(c)"));
  CHECK(check_proof(q2).ok);
  CHECK(alpha_equiv(q2.conclusion(), fm("P(f(c)) -> P(eps x. P(x))")));

  // substituting an eigenvariable is rejected
  auto p3 = make_proof(
      Calculus::ECforall, {},
      {{"P(y) -> (P(c) | ~P(c))", Justification::taut()},
       {"(ex y. P(y)) -> (P(c) | ~P(c))", Justification::r_exists(0)}});
  CHECK_THROWS_AS(substitute_proof(p3, Variable("y"), t("c")), PreconditionError);

  // conclusion substitution commutes
  auto p4 = make_proof(Calculus::ECeps, {},
                       {{"R(x, c) -> R(x, c)", Justification::taut()}});
  auto q4 = substitute_proof(p4, Variable("x"), t("g(c, d)"));
  CHECK(alpha_equiv(q4.conclusion(),
                    substitute(p4.conclusion(), Variable("x"), t("g(c, d)"))));
}

TEST_CASE("deduction_transform") {
  using K = Justification::Kind;

  // discharge a hypothesis: [A Hyp] becomes A -> A
  auto p1 = make_proof(Calculus::EC, {fm("S")}, {{"S", Justification::hyp()}});
  auto d1 = deduction_transform(p1, fm("S"));
  CHECK(check_proof(d1).ok);
  CHECK(alpha_equiv(d1.conclusion(), fm("S -> S")));
  CHECK(d1.hypotheses.empty());

  // MP case
  auto p2 = make_proof(Calculus::EC, {fm("S"), fm("S -> P(c)")},
                       {{"S", Justification::hyp()},
                        {"S -> P(c)", Justification::hyp()},
                        {"P(c)", Justification::mp(0, 1)}});
  auto d2 = deduction_transform(p2, fm("S"));
  CHECK(check_proof(d2).ok);
  CHECK(alpha_equiv(d2.conclusion(), fm("S -> P(c)")));
  CHECK(d2.hypotheses.size() == 1);

  // discharging a formula not among the hypotheses
  auto d3 = deduction_transform(p2, fm("Q(d)"));
  CHECK(check_proof(d3).ok);
  CHECK(alpha_equiv(d3.conclusion(), fm("Q(d) -> P(c)")));
  CHECK(d3.hypotheses.size() == 2);

  // R-exists case: the six-line block must satisfy the eigencondition
  auto p4 = make_proof(
      Calculus::ECforall, {fm("S")},
      {{"S", Justification::hyp()},
       {"S -> (P(y) -> (P(c) | S))", Justification::taut()},
       {"P(y) -> (P(c) | S)", Justification::mp(0, 1)},
       {"(ex y. P(y)) -> (P(c) | S)", Justification::r_exists(2)}});
  REQUIRE(check_proof(p4).ok);
  auto d4 = deduction_transform(p4, fm("S"));
  CHECK(check_proof(d4).ok);
  CHECK(alpha_equiv(d4.conclusion(), fm("S -> ((ex y. P(y)) -> (P(c) | S))")));

  // R-forall case
  auto p5 = make_proof(
      Calculus::ECforall, {fm("all w. P(w)")},
      {{"all w. P(w)", Justification::hyp()},
       {"(all w. P(w)) -> P(y)", Justification::axiom(K::AxForall)},
       {"P(y)", Justification::mp(0, 1)},
       {"P(y) -> (S -> P(y))", Justification::taut()},
       {"S -> P(y)", Justification::mp(2, 3)},
       {"S -> all y. P(y)", Justification::r_forall(4)}});
  REQUIRE(check_proof(p5).ok);
  auto d5 = deduction_transform(p5, fm("all w. P(w)"));
  CHECK(check_proof(d5).ok);
  CHECK(alpha_equiv(d5.conclusion(), fm("(all w. P(w)) -> (S -> all y. P(y))")));

  // deduction theorem round trip
  auto back = deduction_inverse(d2, fm("S"));
  CHECK(check_proof(back).ok);
  CHECK(alpha_equiv(back.conclusion(), fm("P(c)")));

  // inconsistency corollary
  auto inc = to_inconsistency(p2);
  CHECK(check_proof(inc).ok);
  CHECK(inc.conclusion()->kind() == Formula::Kind::Bottom);

  // eigenvariable freeness precondition
  auto p6 = make_proof(
      Calculus::ECforall, {fm("P(y)")},
      {{"P(y) -> (P(c) | ~P(c))", Justification::taut()},
       {"(ex y. P(y)) -> (P(c) | ~P(c))", Justification::r_exists(0)}});
  CHECK_FALSE(check_proof(p6).ok);  // y free in a hypothesis already fails
  (void)K::Taut;
}

TEST_CASE("embed_proof on axioms") {
  using K = Justification::Kind;

  // AxExists becomes a critical formula
  auto p1 = make_proof(Calculus::ECepsForall, {},
                       {{"P(c) -> ex x. P(x)", Justification::axiom(K::AxExists)}});
  auto e1 = embed_proof(p1);
  CHECK(check_proof(e1).ok);
  CHECK(alpha_equiv(e1.conclusion(), fm("P(c) -> P(eps x. P(x))")));
  CHECK(e1.lines.size() == 1);
  CHECK(e1.lines[0].just.kind == K::Crit);

  // AxForall becomes crit on the negation plus contraposition
  auto p2 = make_proof(Calculus::ECepsForall, {},
                       {{"(all x. P(x)) -> P(c)", Justification::axiom(K::AxForall)}});
  auto e2 = embed_proof(p2);
  CHECK(check_proof(e2).ok);
  CHECK(alpha_equiv(e2.conclusion(), fm("P(eps x. ~P(x)) -> P(c)")));

  // R-forall: substitute the premise subproof
  auto p3 = make_proof(Calculus::ECforall, {},
                       {{"S -> (P(y) | ~P(y))", Justification::taut()},
                        {"S -> all y. (P(y) | ~P(y))", Justification::r_forall(0)}});
  REQUIRE(check_proof(p3).ok);
  auto e3 = embed_proof(p3);
  CHECK(check_proof(e3).ok);
  CHECK(alpha_equiv(e3.conclusion(), epsilon_translate(p3.conclusion())));

  // no quantifiers and no rules survive embedding
  for (auto& line : e3.lines) {
    CHECK_FALSE(has_quantifier(line.formula));
    CHECK(line.just.kind != K::RExists);
    CHECK(line.just.kind != K::RForall);
    CHECK(line.just.kind != K::AxExists);
    CHECK(line.just.kind != K::AxForall);
  }
}

TEST_CASE("embed_proof on the drinker formula") {
  using K = Justification::Kind;
  // G = ex x. (P(x) -> all z. P(z))
  auto X = fm("all z. P(z)");
  auto G = fm("ex x. (P(x) -> all z. P(z))");

  Proof p;
  p.sig = test_sig();
  p.calculus = Calculus::ECforall;
  auto imp = [](FormulaPtr a, FormulaPtr b) { return Formula::mk_imp(a, b); };

  // branch A: all z P(z) -> G
  p.lines.push_back({imp(X, imp(fm("P(c)"), X)), Justification::taut()});              // 0
  p.lines.push_back({imp(imp(fm("P(c)"), X), G), Justification::axiom(K::AxExists)}); // 1
  p.lines.push_back({imp(p.lines[0].formula,
                         imp(p.lines[1].formula, imp(X, G))),
                     Justification::taut()});                                          // 2
  p.lines.push_back({imp(p.lines[1].formula, imp(X, G)), Justification::mp(0, 2)});    // 3
  p.lines.push_back({imp(X, G), Justification::mp(1, 3)});                             // 4
  // branch B: ~P(y) -> G, generalized
  p.lines.push_back({imp(fm("~P(y)"), imp(fm("P(y)"), X)), Justification::taut()});    // 5
  p.lines.push_back({imp(imp(fm("P(y)"), X), G), Justification::axiom(K::AxExists)});  // 6
  p.lines.push_back({imp(p.lines[5].formula,
                         imp(p.lines[6].formula, imp(fm("~P(y)"), G))),
                     Justification::taut()});                                          // 7
  p.lines.push_back({imp(p.lines[6].formula, imp(fm("~P(y)"), G)),
                     Justification::mp(5, 7)});                                        // 8
  p.lines.push_back({imp(fm("~P(y)"), G), Justification::mp(6, 8)});                   // 9
  auto notG = Formula::mk_not(G);
  p.lines.push_back({imp(p.lines[9].formula, imp(notG, fm("P(y)"))),
                     Justification::taut()});                                          // 10
  p.lines.push_back({imp(notG, fm("P(y)")), Justification::mp(9, 10)});                // 11
  p.lines.push_back({imp(notG, fm("all y. P(y)")), Justification::r_forall(11)});      // 12
  p.lines.push_back({imp(p.lines[12].formula,
                         imp(imp(X, G), imp(notG, G))),
                     Justification::taut()});                                          // 13
  p.lines.push_back({imp(imp(X, G), imp(notG, G)), Justification::mp(12, 13)});        // 14
  p.lines.push_back({imp(notG, G), Justification::mp(4, 14)});                         // 15
  p.lines.push_back({imp(p.lines[15].formula, G), Justification::taut()});             // 16
  p.lines.push_back({G, Justification::mp(15, 16)});                                   // 17

  REQUIRE(check_proof(p).ok);

  auto emb = embed_proof(p);
  CHECK(check_proof(emb).ok);
  CHECK(alpha_equiv(emb.conclusion(), epsilon_translate(G)));

  // hand-derived translation: P(e) -> P(d) with d = eps z ~P(z),
  // e = eps x (P(x) -> P(d))
  auto d = t("eps z. ~P(z)");
  auto body = Formula::mk_imp(fm("P(x)"), Formula::mk_atom("P", {d}));
  auto e = Term::mk_eps(Variable("x"), body);
  auto expected = Formula::mk_imp(Formula::mk_atom("P", {e}),
                                  Formula::mk_atom("P", {d}));
  CHECK(alpha_equiv(epsilon_translate(G), expected));
}

TEST_CASE("derive_eq2") {
  auto sig = test_sig();
  using K = Justification::Kind;

  auto check_restricted = [&](const Proof& p) {
    for (auto& line : p.lines) {
      CHECK(line.just.kind != K::Eq2);
      // only restricted identity axioms allowed
      bool identity_axiom = line.just.kind == K::Eq1 || line.just.kind == K::Eq2Pred ||
                            line.just.kind == K::Eq2Fn || line.just.kind == K::EqEps;
      bool other = line.just.kind == K::Taut || line.just.kind == K::MP ||
                   line.just.kind == K::Hyp || line.just.kind == K::Crit;
      CHECK((identity_axiom || other));
    }
  };

  // atomic
  auto p1 = derive_eq2(t("c"), t("d"), fm("P(x)"), Variable("x"), sig, Calculus::ECeps);
  CHECK(check_proof(p1).ok);
  CHECK(alpha_equiv(p1.conclusion(), fm("c = d -> (P(c) <-> P(d))")));
  check_restricted(p1);

  // identity atom
  auto p2 = derive_eq2(t("c"), t("d"), fm("x = c"), Variable("x"), sig, Calculus::ECeps);
  CHECK(check_proof(p2).ok);
  CHECK(alpha_equiv(p2.conclusion(), fm("c = d -> (c = c <-> d = c)")));
  check_restricted(p2);

  // x not free: tautology only
  auto p3 = derive_eq2(t("c"), t("d"), fm("S"), Variable("x"), sig, Calculus::ECeps);
  CHECK(check_proof(p3).ok);
  CHECK(alpha_equiv(p3.conclusion(), fm("c = d -> (S <-> S)")));

  // function and epsilon congruence
  auto a4 = fm("R(f(x), c) & P(eps y. R(y, g(x, d)))");
  auto p4 = derive_eq2(t("c"), t("f(d)"), a4, Variable("x"), sig, Calculus::ECeps);
  CHECK(check_proof(p4).ok);
  CHECK(alpha_equiv(
      p4.conclusion(),
      Formula::mk_imp(fm("c = f(d)"),
                      Formula::mk_iff(substitute(a4, Variable("x"), t("c")),
                                      substitute(a4, Variable("x"), t("f(d)"))))));
  check_restricted(p4);
  bool has_eqeps = false;
  for (auto& line : p4.lines) has_eqeps = has_eqeps || line.just.kind == K::EqEps;
  CHECK(has_eqeps);

  // connectives
  auto p5 = derive_eq2(t("c"), t("d"), fm("P(x) -> (Q(x) | x = d)"), Variable("x"), sig,
                       Calculus::ECeps);
  CHECK(check_proof(p5).ok);
  check_restricted(p5);
}
