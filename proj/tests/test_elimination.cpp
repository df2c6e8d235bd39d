#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epsilon/elimination.hpp"
#include "epsilon/printer.hpp"
#include "epsilon/semantics.hpp"
#include "epsilon/translate.hpp"
#include "corpus.hpp"

using namespace eps;
using corpus::fm;
using corpus::tm;
using JK = Justification::Kind;

namespace {

bool uses_only(const Proof& p, std::initializer_list<JK> allowed) {
  for (auto& line : p.lines) {
    bool ok = false;
    for (auto k : allowed) ok = ok || line.just.kind == k;
    if (!ok) return false;
  }
  return true;
}

bool epsilon_free(const Proof& p) {
  for (auto& line : p.lines)
    if (has_epsilon_term(line.formula)) return false;
  return true;
}

} // namespace

TEST_CASE("proof metrics") {
  auto p = corpus::crit_one_witness();
  auto m = proof_metrics(p);
  CHECK(m.rank == 1);
  CHECK(m.order_at(1) == 1);
  CHECK(m.r_degree.at(1) == 1);
  REQUIRE(m.critical.size() == 1);
  CHECK(m.critical[0].witnesses.size() == 1);

  // no criticals: rank 0, empty maps
  Proof taut_only = corpus::make(Calculus::EC, {}, {{fm("P(c) -> P(c)"), Justification::taut()}});
  auto m0 = proof_metrics(taut_only);
  CHECK(m0.rank == 0);
  CHECK(m0.r_order.empty());

  // rank-2 proof: orders at both levels
  auto p2 = corpus::crit_rank2();
  auto m2 = proof_metrics(p2);
  CHECK(m2.rank == 2);
  CHECK(m2.order_at(2) == 1);
  CHECK(m2.order_at(1) == 1);

  // special terms
  auto ps = corpus::special_with_critical();
  auto ms = proof_metrics(ps);
  REQUIRE(ms.special.size() == 1);
  CHECK(alpha_equiv(ms.special[0].term, tm("eps x. R(x, d)")));
}

TEST_CASE("instance order") {
  // base order: degree first, then canonical form
  CHECK(InstanceOrder::less_base(tm("c"), tm("f(c)")));
  CHECK_FALSE(InstanceOrder::less_base(tm("f(c)"), tm("c")));
  CHECK(InstanceOrder::less_base(tm("c"), tm("eps x. P(x)")));  // degree 0 < 1

  auto i1 = tm("eps x. R(x, c)");
  auto i2 = Term::mk_eps(Variable("x"),
                         Formula::mk_atom("R", {Term::mk_var("x"), tm("eps y. Q(y)")}));
  InstanceOrder ord({i1, i2});
  CHECK(ord.less(i1, i2));  // max slot degree 0 < 1
  CHECK_FALSE(ord.less(i2, i1));
  CHECK(ord.base_terms().size() == 2);

  // lexicographic on equal slot degrees
  auto j1 = tm("eps x. S3(x, c, d)");
  auto j2 = tm("eps x. S3(x, c, f(d))");
  InstanceOrder ord2({j1, j2});
  CHECK(ord2.less(j1, j2));
  CHECK(ord2.type_instances().size() == 9);  // 3 base terms, 2 slots
}

TEST_CASE("eliminate_one removes one critical term") {
  auto p = corpus::crit_one_witness();
  auto concl = p.conclusion();
  auto out = eliminate_one(p, concl);
  CHECK(check_proof(out).ok);
  CHECK(alpha_equiv(out.conclusion(), concl));
  auto m = proof_metrics(out);
  CHECK(m.critical.empty());
  // after grounding the inert epsilon terms it is an EC proof
  auto grounded = ground_epsilon_terms(out);
  grounded.calculus = Calculus::EC;
  CHECK(check_proof(grounded).ok);

  // two witnesses: branches for c, d and the negative branch
  auto p2 = corpus::crit_two_witnesses();
  auto out2 = eliminate_one(p2, p2.conclusion());
  CHECK(check_proof(out2).ok);
  CHECK(proof_metrics(out2).critical.empty());

  auto p3 = corpus::crit_two_terms();
  auto out3 = eliminate_one(p3, p3.conclusion());
  auto m3 = proof_metrics(out3);
  CHECK(m3.critical.size() == 1);  // one of the two terms is gone

  // precondition: no critical formulas
  Proof taut_only =
      corpus::make(Calculus::ECeps, {}, {{fm("P(c) -> P(c)"), Justification::taut()}});
  CHECK_THROWS_AS(eliminate_one(taut_only, taut_only.conclusion()), PreconditionError);
}

TEST_CASE("eliminate_all on the corpus") {
  for (auto& p : corpus::criterion7_corpus()) {
    REQUIRE(check_proof(p).ok);
    auto concl = p.conclusion();
    auto [out, trace] = eliminate_all(p, concl);
    CHECK(check_proof(out).ok);
    CHECK(out.calculus == Calculus::EC);
    CHECK(alpha_equiv(out.conclusion(), concl));
    CHECK(proof_metrics(out).critical.empty());
    CHECK(epsilon_free(out));
    CHECK_FALSE(trace.steps.empty());

    // lexicographic descent of (rank, order at that rank)
    for (auto& step : trace.steps) {
      int r = step.before.rank;
      bool desc = step.after.rank < r ||
                  (step.after.rank == r &&
                   step.after.order_at(r) < step.before.order_at(r));
      CHECK(desc);
    }
  }

  // already critical-free input passes through with an empty trace
  Proof quiet = corpus::make(Calculus::ECeps, {},
                             {{fm("P(c) -> P(c)"), Justification::taut()}});
  auto [out, trace] = eliminate_all(quiet, quiet.conclusion());
  CHECK(trace.steps.empty());
  CHECK(check_proof(out).ok);

  // rank-2 trace: rank 2 orders exhausted before rank 1
  auto [out2, trace2] = eliminate_all(corpus::crit_rank2(), corpus::crit_rank2().conclusion());
  REQUIRE(trace2.steps.size() >= 2);
  int prev_rank = 99;
  for (auto& step : trace2.steps) {
    CHECK(step.before.rank <= prev_rank);
    prev_rank = step.before.rank;
  }
  (void)out2;
}

TEST_CASE("normalize_identity") {
  auto p = corpus::general_eq2_atomic();
  REQUIRE(check_proof(p).ok);
  auto out = normalize_identity(p);
  CHECK(check_proof(out).ok);
  CHECK(alpha_equiv(out.conclusion(), p.conclusion()));
  for (auto& line : out.lines) CHECK(line.just.kind != JK::Eq2);

  // epsilon slot: the derivation must use the epsilon identity schema
  auto p2 = corpus::general_eq2_epsilon();
  REQUIRE(check_proof(p2).ok);
  auto out2 = normalize_identity(p2);
  CHECK(check_proof(out2).ok);
  bool has_eqeps = false;
  for (auto& line : out2.lines) has_eqeps = has_eqeps || line.just.kind == JK::EqEps;
  CHECK(has_eqeps);

  // no (=2) lines: unchanged
  auto p3 = corpus::crit_one_witness();
  auto out3 = normalize_identity(p3);
  CHECK(out3.lines.size() == p3.lines.size());
}

TEST_CASE("eliminate_special") {
  // basic: one identity instance, plus a critical formula to repair
  auto p = corpus::special_with_critical();
  REQUIRE(check_proof(p).ok);
  auto out = eliminate_special(p, p.conclusion());
  CHECK(check_proof(out).ok);
  CHECK(alpha_equiv(out.conclusion(), p.conclusion()));
  CHECK(proof_metrics(out).special.empty());

  // same-position pair: the repair chains through (=2') transitivity
  auto p2 = corpus::special_same_position();
  auto out2 = eliminate_special(p2, p2.conclusion());
  CHECK(check_proof(out2).ok);
  CHECK(proof_metrics(out2).special.empty());

  // different positions: the intermediate instance of the paper's lemma
  auto p3 = corpus::special_different_positions();
  auto out3 = eliminate_special(p3, p3.conclusion());
  CHECK(check_proof(out3).ok);
  CHECK(proof_metrics(out3).special.empty());

  // trivial t = u -> e = e instance: discharged via reflexivity
  auto p4 = corpus::special_trivial_instance();
  auto out4 = eliminate_special(p4, p4.conclusion());
  CHECK(check_proof(out4).ok);
  CHECK(proof_metrics(out4).special.empty());
  CHECK(out4.lines.size() >= p4.lines.size());

  // no specials: unchanged
  auto p5 = corpus::crit_one_witness();
  auto out5 = eliminate_special(p5, p5.conclusion());
  CHECK(out5.lines.size() == p5.lines.size());
}

TEST_CASE("identity pipeline end to end") {
  for (auto& p : corpus::criterion9_corpus()) {
    REQUIRE(check_proof(p).ok);
    auto concl = p.conclusion();
    auto normalized = normalize_identity(p);
    auto no_special = eliminate_special(normalized, concl);
    auto [out, trace] = eliminate_all(no_special, concl);
    CHECK(check_proof(out).ok);
    CHECK(out.calculus == Calculus::EC);
    CHECK(alpha_equiv(out.conclusion(), concl));
    CHECK(epsilon_free(out));
    CHECK(uses_only(out, {JK::Taut, JK::MP, JK::Hyp, JK::Eq1, JK::Eq2Pred, JK::Eq2Fn}));
  }
}

TEST_CASE("herbrand disjunction") {
  // degenerate: epsilon-free conclusion gives the single disjunct
  auto p = corpus::crit_one_witness();
  auto res = herbrand_disjunction(p, p.conclusion());
  CHECK(check_proof(res.proof).ok);
  REQUIRE(res.disjuncts.size() == 1);
  CHECK(alpha_equiv(res.disjuncts[0], p.conclusion()));
  CHECK(res.witnesses.empty());

  // a conclusion containing the critical term
  auto e = tm("eps x. P(x)");
  Proof p2 = corpus::make(
      Calculus::ECeps, {},
      {{fm("P(c) -> P(eps x. P(x))"), Justification::axiom(JK::Crit)}});
  corpus::finish_by_taut(
      p2, {0}, Formula::mk_or(Formula::mk_atom("P", {e}),
                              Formula::mk_not(Formula::mk_atom("P", {e}))));
  REQUIRE(check_proof(p2).ok);
  auto res2 = herbrand_disjunction(p2, p2.conclusion());
  CHECK(check_proof(res2.proof).ok);
  CHECK(res2.proof.calculus == Calculus::EC);
  CHECK(epsilon_free(res2.proof));
  CHECK_FALSE(res2.witnesses.empty());
  CHECK(res2.validated);
  // every disjunct is an instance of E = P(e) | ~P(e)
  for (auto& d : res2.disjuncts) {
    CHECK(d->kind() == Formula::Kind::Or);
  }
}

TEST_CASE("herbrand on the embedded drinker proof") {
  auto drinker = corpus::drinker_proof();
  REQUIRE(check_proof(drinker).ok);
  auto embedded = embed_proof(drinker);
  REQUIRE(check_proof(embedded).ok);

  auto res = herbrand_disjunction(embedded, embedded.conclusion());
  CHECK(check_proof(res.proof).ok);
  CHECK(res.proof.calculus == Calculus::EC);
  CHECK(epsilon_free(res.proof));
  CHECK(res.witnesses.size() <= 2);
  CHECK(res.validated);

  // generically valid on all structures with n <= 3
  auto small = restrict_signature(res.proof.sig, {res.proof.conclusion()});
  auto verdict = check_consequence(small, {}, res.proof.conclusion(),
                                   ConsequenceMode::Validity, 3, false, 100000);
  CHECK(verdict.holds);
}

TEST_CASE("first epsilon theorem via embedding") {
  // an ECforall proof of an epsilon- and quantifier-free theorem
  using corpus::make;
  Proof p = make(Calculus::ECforall, {},
                 {{fm("P(c) -> ex x. P(x)"), Justification::axiom(JK::AxExists)},
                  {fm("(ex x. P(x)) -> ex x. P(x)"), Justification::taut()}});
  corpus::finish_by_taut(p, {0}, fm("P(c) -> ~~P(c)"));
  REQUIRE(check_proof(p).ok);
  auto embedded = embed_proof(p);
  REQUIRE(check_proof(embedded).ok);
  auto [out, trace] = eliminate_all(embedded, embedded.conclusion());
  CHECK(check_proof(out).ok);
  CHECK(out.calculus == Calculus::EC);
  CHECK(alpha_equiv(out.conclusion(), fm("P(c) -> ~~P(c)")));
}
