#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "wb/kernel/formula.hpp"
#include "wb/llf/engine.hpp"
#include "wb/sell/engine.hpp"

using namespace wb;
using kernel::FormulaPtr;
using kernel::LabelRef;
using kernel::SubexpSignature;

namespace {

FormulaPtr A() { return kernel::atom("a"); }
FormulaPtr nA() { return kernel::atom("a", {}, true); }
FormulaPtr B() { return kernel::atom("b"); }
FormulaPtr nB() { return kernel::atom("b", {}, true); }

FormulaPtr bangL(const std::string& l, FormulaPtr f) {
  return kernel::bang(std::move(f), LabelRef::constant(l));
}
FormulaPtr questL(const std::string& l, FormulaPtr f) {
  return kernel::quest(std::move(f), LabelRef::constant(l));
}

// The flat signature used for world-indexed storage: every label sits below
// inf, no two others are comparable, and only c and inf are unbounded.
SubexpSignature flatSig() {
  return sell::parseSignature(
      "labels: w u v inf c\n"
      "order: w < inf\n"
      "order: u < inf\n"
      "order: v < inf\n"
      "order: c < inf\n"
      "unbounded: c inf\n");
}

sell::Result proveList(const SubexpSignature& sig,
                       std::vector<FormulaPtr> list,
                       const sell::Options& opt = {}) {
  sell::Sequent s;
  s.list = std::move(list);
  return sell::prove_sell(sig, s, opt);
}

bool replayOk(const sell::ProofPtr& p, const SubexpSignature& sig) {
  std::string err;
  bool ok = sell::replay(p, sig, kernel::Polarity::Negative, &err);
  CAPTURE(err);
  CHECK(ok);
  return ok;
}

}  // namespace

TEST_CASE("signature loader closes the order and validates the input") {
  SubexpSignature sig = sell::parseSignature(
      "labels: a b c d   # comments run to end of line\n"
      "order: a < b\n"
      "order: b < c\n"
      "unbounded: c\n");
  CHECK(sig.hasLabel("a"));
  CHECK_FALSE(sig.hasLabel("x"));
  CHECK(sig.leq("a", "b"));
  CHECK(sig.leq("a", "c"));  // transitive closure at load
  CHECK(sig.leq("d", "d"));
  CHECK_FALSE(sig.leq("b", "a"));
  CHECK(sig.unbounded("c"));
  CHECK_FALSE(sig.unbounded("d"));

  CHECK_THROWS(sell::parseSignature("labels: a\norder: a < x\n"));
  CHECK_THROWS(sell::parseSignature("labels: a\nunbounded: x\n"));
  CHECK_THROWS(sell::parseSignature("labels: a b\norder: a b\n"));
  CHECK_THROWS(sell::parseSignature("labels: a\nbounds: a\n"));
  // a is unbounded but sits below the bounded b: U must be upward closed.
  CHECK_THROWS(
      sell::parseSignature("labels: a b\norder: a < b\nunbounded: a\n"));
}

TEST_CASE("question marks store at their label and derelict back out") {
  SubexpSignature sig =
      sell::parseSignature("labels: u l\nunbounded: u\n");

  // Storing top at the unbounded label and then focusing on it.
  auto r = proveList(sig, {questL("u", kernel::top())});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  std::string out = sell::serialize(r.proof);
  CHECK(out.find("(rule quest") != std::string::npos);
  CHECK(out.find("(rule top") != std::string::npos);

  // The bounded label works the same way for a single use.
  r = proveList(sig, {questL("l", kernel::top())});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);

  // Plain identity needs no context at all.
  r = proveList(sig, {A(), nA()});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);

  // An unbounded entry supports two uses, a bounded one does not.
  auto twice = kernel::tensor(nA(), nA());
  r = proveList(sig, {questL("u", A()), twice});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  r = proveList(sig, {questL("l", A()), twice});
  CHECK(r.verdict == sell::Verdict::NotProvable);

  // Unbounded entries may be ignored, bounded ones must be consumed.
  r = proveList(sig, {questL("u", B()), A(), nA()});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  r = proveList(sig, {questL("l", B()), A(), nA()});
  CHECK(r.verdict == sell::Verdict::NotProvable);

  // Same discipline at the unit.
  r = proveList(sig, {questL("u", B()), kernel::one()});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  r = proveList(sig, {questL("l", B()), kernel::one()});
  CHECK(r.verdict == sell::Verdict::NotProvable);

  CHECK_THROWS_AS(proveList(sig, {questL("nope", A())}),
                  std::invalid_argument);
  sell::Sequent bad;
  bad.list = {A()};
  bad.focus = nA();
  CHECK_THROWS_AS(sell::prove_sell(sig, bad), std::invalid_argument);
}

TEST_CASE("promotion filters the context by the subexponential order") {
  SubexpSignature sig = flatSig();

  auto attempt = [&](const std::string& at) {
    sell::Sequent s;
    s.context = {{at, A()}};
    s.focus = bangL("w", nA());
    return sell::prove_sell(sig, s);
  };

  // The mate sits at the promoted label itself: kept by the filter.
  auto r = attempt("w");
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  CHECK(r.proof->rule == "bang");
  CHECK(r.proof->label == "w");

  // Stored at inf, which every label precedes: also kept.
  r = attempt("inf");
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);

  // Stored at the unrelated u: the promotion side condition fails.
  r = attempt("u");
  CHECK(r.verdict == sell::Verdict::NotProvable);

  // Replay must reject a promotion over a smuggled incomparable entry.
  r = attempt("w");
  REQUIRE(r.verdict == sell::Verdict::Proved);
  r.proof->context.push_back({"u", B()});
  std::string err;
  CHECK_FALSE(sell::replay(r.proof, sig, kernel::Polarity::Negative, &err));
  CHECK(err.find("bang") != std::string::npos);
}

TEST_CASE("inconsistency stays confined to incomparable labels") {
  SubexpSignature sig = flatSig();
  sell::Options opt;
  opt.depth = 8;

  // One-sided renderings of the entailments between locally inconsistent
  // zones: from !w ?w 0 neither plain 0 nor the v-located copy follows,
  // while the w-located restatement does.
  auto zeroAt = [&](const std::string& l) {
    return bangL(l, questL(l, kernel::zero()));
  };
  for (auto [w, v] : {std::pair<std::string, std::string>{"w", "v"},
                      {"v", "w"},
                      {"w", "u"}}) {
    CAPTURE(w);
    CAPTURE(v);
    FormulaPtr hyp = kernel::negate(zeroAt(w));

    auto r = proveList(sig, {hyp, zeroAt(w)}, opt);
    REQUIRE(r.verdict == sell::Verdict::Proved);
    replayOk(r.proof, sig);

    r = proveList(sig, {hyp, kernel::zero()}, opt);
    CHECK(r.verdict == sell::Verdict::NotProvable);

    r = proveList(sig, {hyp, zeroAt(v)}, opt);
    CHECK(r.verdict == sell::Verdict::NotProvable);
  }

  // Sanity: 0 at w does entail anything located at w itself.
  auto r = proveList(sig, {kernel::negate(zeroAt("w")),
                           bangL("w", questL("w", A()))},
                     opt);
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
}

TEST_CASE("existential location quantifiers pick labels in the ideal") {
  SubexpSignature sig = flatSig();

  // instantiate_loc: concrete world label, the bound itself, and a type
  // violation.
  FormulaPtr f =
      kernel::existsLoc("x", LabelRef::constant("inf"),
                        kernel::bang(A(), LabelRef::variable(0, "x")));
  CHECK(kernel::equal(sell::instantiate_loc(sig, f, "w"), bangL("w", A())));
  CHECK(kernel::equal(sell::instantiate_loc(sig, f, "inf"),
                      bangL("inf", A())));

  FormulaPtr narrow =
      kernel::existsLoc("x", LabelRef::constant("w"),
                        kernel::quest(A(), LabelRef::variable(0, "x")));
  CHECK(kernel::equal(sell::instantiate_loc(sig, narrow, "w"),
                      questL("w", A())));
  CHECK_THROWS_AS(sell::instantiate_loc(sig, narrow, "u"),
                  std::invalid_argument);
  CHECK_THROWS_AS(sell::instantiate_loc(sig, narrow, "nope"),
                  std::invalid_argument);
  CHECK_THROWS_AS(sell::instantiate_loc(sig, A(), "w"),
                  std::invalid_argument);

  // Search must find the witness label that matches the stored context.
  for (const std::string& at : {"w", "u"}) {
    sell::Sequent s;
    s.context = {{at, A()}};
    s.list = {kernel::existsLoc("x", LabelRef::constant("inf"),
                                kernel::bang(nA(), LabelRef::variable(0)))};
    auto r = sell::prove_sell(sig, s);
    REQUIRE(r.verdict == sell::Verdict::Proved);
    replayOk(r.proof, sig);
    CHECK(sell::serialize(r.proof).find("(label " + at + ")") !=
          std::string::npos);
  }
}

TEST_CASE("universal location quantifiers follow eigenvariable discipline") {
  SubexpSignature sig = flatSig();

  // Storing under a fresh label and taking it back out.
  auto r = proveList(sig, {kernel::forallLoc(
                          "x", LabelRef::constant("inf"),
                          kernel::quest(kernel::top(),
                                        LabelRef::variable(0, "x")))});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  CHECK(r.proof->rule == "forall_loc");
  CHECK_FALSE(sig.hasLabel(r.proof->eigen));  // input signature untouched

  // A fresh label of type inf is not below any concrete world, so it
  // cannot promote past w-located content.
  sell::Sequent s;
  s.context = {{"w", A()}};
  s.list = {kernel::forallLoc("x", LabelRef::constant("inf"),
                              kernel::bang(nA(), LabelRef::variable(0)))};
  CHECK(sell::prove_sell(sig, s).verdict == sell::Verdict::NotProvable);

  // The eigenlabel is only below inf, and it witnesses its own ideal:
  // forall x exists y <= x alternation.
  FormulaPtr alt = kernel::forallLoc(
      "x", LabelRef::constant("inf"),
      kernel::existsLoc("y", LabelRef::variable(0, "x"),
                        kernel::quest(kernel::top(),
                                      LabelRef::variable(0, "y"))));
  r = proveList(sig, {alt});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);

  // Replay rejects an eigenlabel that already names a signature label.
  r = proveList(sig, {kernel::forallLoc(
                     "x", LabelRef::constant("inf"),
                     kernel::quest(kernel::top(), LabelRef::variable(0)))});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  sell::ProofPtr node = r.proof;
  while (node->rule != "forall_loc") node = node->premises[0];
  node->eigen = "u";
  std::string err;
  CHECK_FALSE(sell::replay(r.proof, sig, kernel::Polarity::Negative, &err));
  CHECK(err.find("forall_loc") != std::string::npos);
}

TEST_CASE("decide budget separates exhaustion from refutation") {
  SubexpSignature sig =
      sell::parseSignature("labels: c l\nunbounded: c\n");
  auto a1 = kernel::atom("a1");
  auto a2 = kernel::atom("a2");
  auto a3 = kernel::atom("a3");
  auto step1 = kernel::tensor(kernel::negate(a1), a2);
  auto step2 = kernel::tensor(kernel::negate(a2), a3);

  std::vector<FormulaPtr> chain = {questL("c", step1), questL("c", step2),
                                   a1, kernel::negate(a3)};
  sell::Options opt;
  opt.depth = 4;
  auto r = proveList(sig, chain, opt);
  REQUIRE(r.verdict == sell::Verdict::Proved);
  replayOk(r.proof, sig);
  CHECK(sell::decideDepth(r.proof) <= 4);

  opt.depth = 2;
  CHECK(proveList(sig, chain, opt).verdict == sell::Verdict::Exhausted);

  // With the clauses at a bounded label the search terminates decisively.
  opt.depth = 8;
  std::vector<FormulaPtr> noGoal = {questL("l", step1), questL("l", step2),
                                    a1, nB()};
  CHECK(proveList(sig, noGoal, opt).verdict == sell::Verdict::NotProvable);
}

TEST_CASE("replay rejects corrupted derivations") {
  SubexpSignature sig = flatSig();

  // Initial rule pointing at the wrong label.
  sell::Sequent s;
  s.context = {{"w", A()}};
  s.focus = bangL("w", nA());
  auto r = sell::prove_sell(sig, s);
  REQUIRE(r.verdict == sell::Verdict::Proved);
  sell::ProofPtr node = r.proof;
  while (node->rule != "i") node = node->premises.back();
  node->label = "inf";
  std::string err;
  CHECK_FALSE(sell::replay(r.proof, sig, kernel::Polarity::Negative, &err));

  // Quest relabeled to a different context zone.
  r = proveList(sig, {questL("c", A()), nA()});
  REQUIRE(r.verdict == sell::Verdict::Proved);
  node = r.proof;
  while (node->rule != "quest") node = node->premises[0];
  node->label = "w";
  CHECK_FALSE(sell::replay(r.proof, sig, kernel::Polarity::Negative, &err));
  CHECK(err.find("quest") != std::string::npos);

  // Tensor premise duplicating a bounded entry.
  sell::Sequent t;
  t.context = {{"w", A()}, {"u", B()}};
  t.list = {kernel::tensor(bangL("w", nA()), bangL("u", nB()))};
  r = sell::prove_sell(sig, t);
  REQUIRE(r.verdict == sell::Verdict::Proved);
  node = r.proof;
  while (node->rule != "tensor") node = node->premises[0];
  REQUIRE(node->premises.size() == 2);
  node->premises[1]->context.push_back({"w", A()});
  CHECK_FALSE(sell::replay(r.proof, sig, kernel::Polarity::Negative, &err));
  CHECK(err.find("tensor") != std::string::npos);
}

TEST_CASE("proof output is deterministic") {
  SubexpSignature sig = flatSig();
  sell::Sequent s;
  s.context = {{"w", A()}, {"c", B()}};
  s.list = {kernel::existsLoc("x", LabelRef::constant("inf"),
                              kernel::bang(nA(), LabelRef::variable(0)))};
  auto r1 = sell::prove_sell(sig, s);
  auto r2 = sell::prove_sell(sig, s);
  REQUIRE(r1.verdict == sell::Verdict::Proved);
  REQUIRE(r2.verdict == sell::Verdict::Proved);
  CHECK(sell::serialize(r1.proof) == sell::serialize(r2.proof));
}

TEST_CASE("two-label classical signature agrees with the plain engine") {
  SubexpSignature sig =
      sell::parseSignature("labels: cl aux\nunbounded: cl\n");

  gen::Rng rng(20260814);
  int proved = 0, refuted = 0, gaveUp = 0;

  auto agree = [&](const std::vector<FormulaPtr>& goal) {
    llf::Options lo;
    auto lr = llf::prove_llf({}, {}, goal, lo);
    sell::Result sr = proveList(sig, goal);
    if (lr.verdict == llf::Verdict::Exhausted ||
        sr.verdict == sell::Verdict::Exhausted) {
      ++gaveUp;
      return true;
    }
    bool lp = lr.verdict == llf::Verdict::Proved;
    bool sp = sr.verdict == sell::Verdict::Proved;
    if (sp) {
      ++proved;
      std::string err;
      if (!sell::replay(sr.proof, sig, kernel::Polarity::Negative, &err)) {
        CAPTURE(err);
        return false;
      }
    } else {
      ++refuted;
    }
    return lp == sp;
  };

  int bad = 0;
  for (int i = 0; i < 400 && bad < 10; ++i) {
    FormulaPtr f = gen::randomQfLL(rng, 3);
    CAPTURE(kernel::toString(f));
    if (!agree({f})) {
      ++bad;
      CHECK(false);
    }
  }
  for (int i = 0; i < 200 && bad < 10; ++i) {
    FormulaPtr f = gen::randomQfLL(rng, 2);
    FormulaPtr g = gen::randomQfLL(rng, 2);
    CAPTURE(kernel::toString(f));
    CAPTURE(kernel::toString(g));
    if (!agree({kernel::negate(f), f}) || !agree({f, g})) {
      ++bad;
      CHECK(false);
    }
  }
  CAPTURE(proved);
  CAPTURE(refuted);
  CAPTURE(gaveUp);
  CHECK(bad == 0);
  CHECK(proved > 150);
  CHECK(refuted > 100);
}
