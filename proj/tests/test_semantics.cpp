#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epsilon/parser.hpp"
#include "epsilon/proof.hpp"
#include "epsilon/semantics.hpp"
#include "epsilon/translate.hpp"
#include "generators.hpp"

using namespace eps;

namespace {

Signature small_sig() {
  Signature s;
  s.functions = {{"c", 0}, {"d", 0}};
  s.predicates = {{"P", 1}, {"Q", 1}};
  s.has_identity = true;
  return s;
}

FormulaPtr fm(const std::string& s) { return parse_formula(s, small_sig()); }
TermPtr t(const std::string& s) { return parse_term(s, small_sig()); }

Structure two_element() {
  Structure m;
  m.n = 2;
  m.functions["c"] = {0};
  m.functions["d"] = {1};
  m.predicates["P"] = {0, 1};  // P = {1}
  m.predicates["Q"] = {1, 0};  // Q = {0}
  return m;
}

ExtChoiceFunction min_choice(int n) {
  ExtChoiceFunction f;
  f.table.resize(size_t{1} << n);
  for (size_t mask = 0; mask < f.table.size(); ++mask) {
    int v = 0;
    if (mask != 0)
      while (!((mask >> v) & 1)) ++v;
    f.table[mask] = v;
  }
  return f;
}

} // namespace

TEST_CASE("evaluation basics") {
  auto m = two_element();
  auto phi = min_choice(2);
  Assignment s;
  auto ch = Chooser::ext(phi);

  CHECK(eval_term(m, ch, s, t("c")) == 0);
  CHECK(eval_term(m, ch, s, t("d")) == 1);
  // P = {1}: the epsilon term must pick 1 regardless of phi
  for (auto& cf : enumerate_choice_functions(m))
    CHECK(eval_term(m, Chooser::ext(cf), s, t("eps x. P(x)")) == 1);
  // empty satisfier set: value is phi(empty)
  Structure m2 = m;
  m2.predicates["P"] = {0, 0};
  CHECK(eval_term(m2, ch, s, t("eps x. P(x)")) == phi.choose(0));

  CHECK(eval_formula(m, ch, s, fm("P(d) & ~P(c)")));
  CHECK(eval_formula(m, ch, s, fm("ex x. P(x)")));
  CHECK_FALSE(eval_formula(m, ch, s, fm("all x. P(x)")));
  CHECK(eval_formula(m, ch, s, fm("c = c & ~(c = d)")));
}

TEST_CASE("choice function counts") {
  for (int n = 1; n <= 3; ++n) {
    Structure m;
    m.n = n;
    auto all = enumerate_choice_functions(m);
    long expected = n == 1 ? 1 : n == 2 ? 4 : 72;
    CHECK(static_cast<long>(all.size()) == expected);
    CHECK(count_choice_functions(n) == expected);
    for (auto& f : all) CHECK(f.valid(n));
    // deterministic order and no duplicates
    std::set<std::vector<int>> seen;
    for (auto& f : all) CHECK(seen.insert(f.table).second);
  }
  Structure big;
  big.n = 4;
  CHECK_THROWS_AS(enumerate_choice_functions(big), LimitError);
}

TEST_CASE("brute force oracle for choice function counts") {
  // independent enumeration of all tables P(M) -> M, filtered
  for (int n = 1; n <= 3; ++n) {
    size_t masks = size_t{1} << n;
    long count = 0;
    std::vector<int> table(masks, 0);
    for (;;) {
      bool ok = true;
      for (size_t mask = 1; mask < masks && ok; ++mask)
        ok = ((mask >> table[mask]) & 1) != 0;
      if (ok) ++count;
      size_t i = 0;
      for (; i < masks; ++i) {
        if (++table[i] < n) break;
        table[i] = 0;
      }
      if (i == masks) break;
    }
    Structure m;
    m.n = n;
    CHECK(count == static_cast<long>(enumerate_choice_functions(m).size()));
  }
}

TEST_CASE("truth modes") {
  auto m = two_element();
  auto phi = min_choice(2);
  Assignment s;

  // crit instance is generically valid
  auto crit = fm("P(c) -> P(eps x. P(x))");
  CHECK(check_truth_mode(m, crit, TruthMode::Valid, nullptr, nullptr));

  // P(eps x. P(x)) with P empty: false for every choice function
  Structure m2 = m;
  m2.predicates["P"] = {0, 0};
  CHECK_FALSE(check_truth_mode(m2, fm("P(eps x. P(x))"), TruthMode::Generic, nullptr, &s));
  CHECK(check_truth_mode(m2, fm("~P(eps x. P(x))"), TruthMode::Generic, nullptr, &s));

  // local vs truth: x free
  auto px = fm("P(x)");
  Assignment s1;
  s1.values["x"] = 1;
  CHECK(check_truth_mode(m, px, TruthMode::Local, &phi, &s1));
  CHECK_FALSE(check_truth_mode(m, px, TruthMode::Truth, &phi, nullptr));
}

TEST_CASE("substitution lemma randomized") {
  gen::Gen g(4242);
  Signature sig = g.sig;
  for (int iter = 0; iter < 60; ++iter) {
    FormulaPtr a = g.formula(5);
    TermPtr u = g.term(3);
    Variable x("x");
    Structure m;
    m.n = 2;
    m.functions["c"] = {0};
    m.functions["d"] = {1};
    m.functions["f"] = {1, 0};
    m.functions["g"] = {0, 1, 1, 0};
    m.predicates["P"] = {0, 1};
    m.predicates["Q"] = {1, 1};
    m.predicates["R"] = {0, 1, 1, 0};
    for (auto& cf : enumerate_choice_functions(m)) {
      auto ch = Chooser::ext(cf);
      Assignment s;
      s.values["x"] = 1;
      s.values["y"] = 0;
      s.values["z"] = 1;
      int mv = eval_term(m, ch, s, u);
      bool lhs = eval_formula(m, ch, s, substitute(a, x, u));
      bool rhs = eval_formula(m, ch, s.with(x, mv), a);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("locality of evaluation") {
  gen::Gen g(99);
  Structure m;
  m.n = 2;
  m.functions["c"] = {0};
  m.functions["d"] = {1};
  m.functions["f"] = {1, 0};
  m.functions["g"] = {0, 1, 1, 0};
  m.predicates["P"] = {0, 1};
  m.predicates["Q"] = {1, 0};
  m.predicates["R"] = {1, 0, 0, 1};
  auto phi = min_choice(2);
  for (int iter = 0; iter < 60; ++iter) {
    FormulaPtr a = g.formula(6);
    Assignment s1, s2;
    for (auto& v : free_vars(a)) {
      int val = g.pick(2);
      s1.values[v.name] = val;
      s2.values[v.name] = val;
    }
    s2.values["__junk"] = 1;  // differs only off the free variables
    CHECK(eval_formula(m, Chooser::ext(phi), s1, a) ==
          eval_formula(m, Chooser::ext(phi), s2, a));
  }
}

TEST_CASE("consequence relations") {
  auto sig = small_sig();

  // Gamma = {A} entails A in every mode
  auto a = fm("P(c)");
  for (auto mode : {ConsequenceMode::Local, ConsequenceMode::Truth,
                    ConsequenceMode::Generic, ConsequenceMode::Validity})
    CHECK(check_consequence(sig, {a}, a, mode, 2).holds);

  // P(c) does not entail P(d) locally: counterexample exists
  auto verdict = check_consequence(sig, {fm("P(c)")}, fm("P(d)"), ConsequenceMode::Local, 2);
  CHECK_FALSE(verdict.holds);
  REQUIRE(verdict.cex);
  // counterexample really is one
  auto& cex = *verdict.cex;
  REQUIRE(cex.phi);
  CHECK(eval_formula(cex.m, Chooser::ext(*cex.phi), cex.s, fm("P(c)")));
  CHECK_FALSE(eval_formula(cex.m, Chooser::ext(*cex.phi), cex.s, fm("P(d)")));

  // local consequence implies truth consequence on sentences
  std::vector<std::pair<std::vector<FormulaPtr>, FormulaPtr>> corpus = {
      {{fm("P(c)")}, fm("P(c) | Q(d)")},
      {{fm("P(c) -> Q(c)"), fm("P(c)")}, fm("Q(c)")},
      {{fm("all x. P(x)")}, fm("P(d)")},
      {{fm("P(c)")}, fm("P(d)")},
      {{fm("ex x. P(x)")}, fm("P(eps x. P(x))")},
  };
  for (auto& [gamma, concl] : corpus) {
    bool local = check_consequence(sig, gamma, concl, ConsequenceMode::Local, 2).holds;
    bool truth = check_consequence(sig, gamma, concl, ConsequenceMode::Truth, 2).holds;
    if (local) CHECK(truth);
  }

  // semantic deduction theorem on sentences
  for (auto& [gamma, concl] : corpus) {
    if (gamma.size() != 1) continue;
    bool with_hyp =
        check_consequence(sig, gamma, concl, ConsequenceMode::Truth, 2).holds;
    bool as_imp = check_consequence(sig, {}, Formula::mk_imp(gamma[0], concl),
                                    ConsequenceMode::Truth, 2)
                      .holds;
    CHECK(with_hyp == as_imp);
  }
}

TEST_CASE("intensional operators") {
  auto m = two_element();
  auto types1 = collect_epsilon_types(fm("P(eps x. P(x))"));
  REQUIRE(types1.size() == 1);

  // one 0-ary type over n=2: four operators
  IntOperatorStream ops(m, types1);
  CHECK(ops.total() == 4);
  int count = 0;
  while (auto op = ops.next()) ++count;
  CHECK(count == 4);

  // two 0-ary types: sixteen
  auto types2 = collect_epsilon_types(fm("P(eps x. P(x)) & Q(eps y. Q(y))"));
  REQUIRE(types2.size() == 2);
  IntOperatorStream ops2(m, types2);
  CHECK(ops2.total() == 16);

  // empty type list: a single trivial operator
  IntOperatorStream ops3(m, {});
  CHECK(ops3.total() == 1);
  int count3 = 0;
  while (auto op = ops3.next()) ++count3;
  CHECK(count3 == 1);

  // a constant intensional operator coincides with the extensional reading
  gen::Gen g(31337);
  Structure mg;
  mg.n = 2;
  mg.functions["c"] = {0};
  mg.functions["d"] = {1};
  mg.functions["f"] = {1, 0};
  mg.functions["g"] = {0, 1, 1, 0};
  mg.predicates["P"] = {0, 1};
  mg.predicates["Q"] = {1, 0};
  mg.predicates["R"] = {1, 0, 0, 1};
  for (int iter = 0; iter < 40; ++iter) {
    FormulaPtr a = g.formula(6, false);
    auto phi = min_choice(2);
    IntChoiceOperator psi;
    for (auto& type : collect_epsilon_types(a)) {
      size_t tuples = Structure::table_size(mg.n, type.arity());
      for (size_t i = 0; i < tuples; ++i) {
        std::vector<int> tuple(static_cast<size_t>(type.arity()));
        size_t rest = i;
        for (int k = type.arity() - 1; k >= 0; --k) {
          tuple[static_cast<size_t>(k)] = static_cast<int>(rest % 2);
          rest /= 2;
        }
        psi.table[{type.key(), tuple}] = phi;
      }
    }
    Assignment s;
    s.values["x"] = 0;
    s.values["y"] = 1;
    s.values["z"] = 0;
    CHECK(eval_formula(mg, Chooser::ext(phi), s, a) ==
          eval_formula(mg, Chooser::intens(psi), s, a));
  }
}

TEST_CASE("intensional counterexample to ext exists on two elements") {
  // (ext) instance for A = P, B = Q
  auto sig = small_sig();
  Variable x("x");
  FormulaPtr A = fm("P(x)");
  FormulaPtr B = fm("Q(x)");
  TermPtr d = Term::mk_eps(x, Formula::mk_not(Formula::mk_iff(A, B)));
  FormulaPtr prem = Formula::mk_iff(substitute(A, x, d), substitute(B, x, d));
  FormulaPtr ext = Formula::mk_imp(
      prem, Formula::mk_eq(Term::mk_eps(x, A), Term::mk_eps(x, B)));
  REQUIRE(match_axiom(ext, Justification::Kind::Ext, sig));

  // extensionally valid everywhere up to n = 2
  CHECK(check_consequence(sig, {}, ext, ConsequenceMode::Local, 2).holds);

  // intensionally refutable
  auto verdict = check_consequence(sig, {}, ext, ConsequenceMode::Local, 2, true);
  CHECK_FALSE(verdict.holds);
  REQUIRE(verdict.cex);
  REQUIRE(verdict.cex->psi);
  CHECK_FALSE(
      eval_formula(verdict.cex->m, Chooser::intens(*verdict.cex->psi), verdict.cex->s, ext));
}

TEST_CASE("translation preserves meaning at desk scale") {
  auto sig = small_sig();
  std::vector<FormulaPtr> sentences = {
      fm("ex x. P(x)"),
      fm("all x. P(x)"),
      fm("all x. (P(x) -> Q(x))"),
      fm("(ex x. P(x)) & (ex y. Q(y))"),
      fm("ex x. (P(x) -> all y. P(y))"),
      fm("all x. ex y. (P(x) -> Q(y))"),
  };
  for (auto& e : sentences) {
    auto te = epsilon_translate(e);
    CHECK_FALSE(has_quantifier(te));
    CHECK(free_vars(te) == free_vars(e));
    for (int n = 1; n <= 2; ++n) {
      StructureStream structures(sig, n);
      while (auto m = structures.next()) {
        for (auto& cf : enumerate_choice_functions(*m)) {
          Assignment s;
          CHECK(eval_formula(*m, Chooser::ext(cf), s, e) ==
                eval_formula(*m, Chooser::ext(cf), s, te));
        }
      }
    }
  }

  // idempotence and FV preservation on random formulas
  gen::Gen g(2024);
  for (int iter = 0; iter < 100; ++iter) {
    FormulaPtr a = g.formula(8);
    auto ta = epsilon_translate(a);
    CHECK(alpha_equiv(epsilon_translate(ta), ta));
    CHECK(free_vars(ta) == free_vars(a));
  }
}
