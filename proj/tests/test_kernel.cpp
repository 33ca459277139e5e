#include "doctest.h"
#include "wb/kernel/formula.hpp"
#include "wb/kernel/hyll.hpp"
#include "wb/kernel/signature.hpp"
#include "wb/kernel/term.hpp"
#include "wb/kernel/world.hpp"

using namespace wb::kernel;

TEST_CASE("term substitution and matching") {
  // f(x0, g(x1)) with x0 := c
  auto t = fun("f", {bvar(0), fun("g", {bvar(1)})});
  auto s = substBVar(t, 0, fun("c"));
  CHECK(toString(s) == "f(c, g('0))");  // deeper index shifts down

  TermPtr pat = fun("f", {bvar(0), fun("g", {bvar(1)})});
  TermPtr tgt = fun("f", {fun("c"), fun("g", {fun("d", {fun("c")})})});
  std::vector<TermPtr> out;
  CHECK(matchTerm(pat, tgt, 2, out));
  REQUIRE(out.size() == 2);
  CHECK(toString(out[0]) == "c");
  CHECK(toString(out[1]) == "d(c)");

  // mismatch under a metavariable binding
  TermPtr pat2 = fun("f", {bvar(0), bvar(0)});
  CHECK_FALSE(matchTerm(pat2, fun("f", {fun("a"), fun("b")}), 1, out));
}

TEST_CASE("world normalization, reachability, difference") {
  Domain nat{Domain::Kind::NatPlus, {}};
  CHECK(toString(normalizeWorld(wdot(wnat(2), wnat(3)), nat)) == "5");
  CHECK(toString(normalizeWorld(wdot(wiota(), wnat(4)), nat)) == "4");
  CHECK(worldReachable(wnat(2), wnat(5), nat));
  CHECK_FALSE(worldReachable(wnat(5), wnat(2), nat));
  auto d = worldDifference(wnat(2), wnat(5), nat);
  REQUIRE(d.has_value());
  CHECK(toString(*d) == "3");
  CHECK_FALSE(worldDifference(wnat(5), wnat(2), nat).has_value());

  Domain fc{Domain::Kind::FreeCommutative, {"a", "b", "c"}};
  auto w = normalizeWorld(wdot(wgen("b"), wdot(wgen("a"), wgen("b"))), fc);
  CHECK(toString(w) == "a.b.b");
  CHECK(toString(normalizeWorld(wdot(wiota(), wgen("c")), fc)) == "c");
  CHECK(worldReachable(wgen("a"), wdot(wgen("a"), wgen("b")), fc));
  CHECK_FALSE(worldReachable(wgen("c"), wdot(wgen("a"), wgen("b")), fc));
  auto d2 = worldDifference(wgen("a"), wdot(wgen("b"), wgen("a")), fc);
  REQUIRE(d2.has_value());
  CHECK(toString(*d2) == "b");
}

TEST_CASE("strict predecessors") {
  Domain nat{Domain::Kind::NatPlus, {}};
  auto p = strictPredecessors(wnat(3), nat);
  REQUIRE(p.size() == 3);
  CHECK(toString(p[0]) == "0");
  CHECK(toString(p[2]) == "2");
  CHECK(strictPredecessors(wnat(0), nat).empty());

  Domain fc{Domain::Kind::FreeCommutative, {"a", "b"}};
  auto q = strictPredecessors(wdot(wgen("a"), wgen("b")), fc);
  // proper submultisets of {a,b}: {}, {a}, {b}
  REQUIRE(q.size() == 3);
  CHECK(toString(q[0]) == "a");
  CHECK(toString(q[1]) == "b");
  CHECK(toString(q[2]) == "iota");
}

TEST_CASE("formula negation is an involution and swaps duals") {
  auto p = atom("p");
  auto q = atom("q");
  auto f = par(tensor(p, bang(q)), with(quest(negate(p)), forallQ("x", atom("r", {bvar(0)}))));
  CHECK(equal(negate(negate(f)), f));
  CHECK(negate(one())->tag == Tag::Bot);
  CHECK(negate(zero())->tag == Tag::Top);
  auto nf = negate(f);
  CHECK(nf->tag == Tag::Tensor);
  CHECK(nf->left->tag == Tag::Par);
  CHECK(nf->right->tag == Tag::Plus);
  CHECK(nf->right->right->tag == Tag::Exists);
}

TEST_CASE("polarity and bias") {
  CHECK(polarity(atom("p")) == Polarity::Negative);
  CHECK(polarity(atom("p", {}, true)) == Polarity::Positive);
  CHECK(polarity(atom("p"), Polarity::Positive) == Polarity::Positive);
  CHECK(polarity(tensor(atom("p"), atom("q"))) == Polarity::Positive);
  CHECK(polarity(par(atom("p"), atom("q"))) == Polarity::Negative);
  CHECK(polarity(mu("X", fixvar(0))) == Polarity::Positive);
  CHECK(polarity(nu("X", fixvar(0))) == Polarity::Negative);
}

TEST_CASE("monopole and bipole classification") {
  auto p = atom("p");
  auto q = atom("q");
  auto np = atom("p", {}, true);
  CHECK(classify(p) == Shape::Monopole);
  CHECK(classify(par(p, with(q, top()))) == Shape::Monopole);
  CHECK(classify(quest(p)) == Shape::Monopole);
  CHECK(classify(np) == Shape::Bipole);
  CHECK(classify(tensor(np, par(p, q))) == Shape::Bipole);
  CHECK(classify(existsQ("x", tensor(atom("r", {bvar(0)}, true), one()))) ==
        Shape::Bipole);
  CHECK(classify(bang(par(p, q))) == Shape::Bipole);
  CHECK(classify(bang(np)) == Shape::Bipole);
  // a positive connective under a negative one breaks the bipole shape
  CHECK(classify(par(tensor(np, np), p)) == Shape::Neither);
  CHECK(classify(tensor(par(tensor(np, np), p), np)) == Shape::Neither);
}

TEST_CASE("formula printing and canonical keys") {
  auto f = tensor(atom("p"), par(atom("q"), atom("r")));
  CHECK(toString(f) == "p * (q | r)");
  auto g = plus(atom("p"), plus(atom("q"), atom("r")));
  CHECK(toString(g) == "p (+) q (+) r");
  auto h = forallQ("x", existsQ("y", atom("r", {bvar(1), bvar(0)})));
  CHECK(toString(h) == "forall x. exists y. r(x, y)");
  auto h2 = forallQ("a", existsQ("b", atom("r", {bvar(1), bvar(0)})));
  CHECK(key(h) == key(h2));
  CHECK(toString(bang(atom("p"), LabelRef::constant("w"))) == "!^w p");
  CHECK(toString(quest(atom("p"))) == "? p");
  CHECK(toString(atom("p", {}, true)) == "~p");
}

TEST_CASE("formula substitutions") {
  // forall x. r(x, y0) with y0 := c, entering the binder
  auto f = forallQ("x", atom("r", {bvar(0), bvar(1)}));
  auto g = substTermBVar(f, 0, fun("c"));
  CHECK(toString(g) == "forall x. r(x, c)");

  auto m = mu("X", plus(atom("p"), fixvar(0)));
  auto un = substFix(m->left, 0, m);
  CHECK(toString(un) == "p (+) (mu X. p (+) X)");
}

TEST_CASE("plain LL and exponential-free predicates") {
  CHECK(plainLL(par(atom("p"), bang(atom("q")))));
  CHECK_FALSE(plainLL(bang(atom("q"), LabelRef::constant("w"))));
  CHECK(exponentialFree(tensor(atom("p"), atom("q"))));
  CHECK_FALSE(exponentialFree(bang(atom("p"))));
}

TEST_CASE("subexponential signature closure and eigen labels") {
  SubexpSignature sig({"cl", "w", "v", "inf"},
                      {{"w", "inf"}, {"v", "inf"}, {"cl", "inf"}},
                      {"cl", "inf"});
  CHECK(sig.leq("w", "inf"));
  CHECK(sig.leq("w", "w"));
  CHECK_FALSE(sig.leq("w", "v"));
  CHECK(sig.unbounded("cl"));
  CHECK_FALSE(sig.unbounded("w"));
  CHECK(sig.typeOf("w") == "w");

  auto e = sig.addEigenLabel("inf");
  CHECK(sig.hasLabel(e));
  CHECK(sig.leq(e, "inf"));
  CHECK_FALSE(sig.unbounded(e));
  CHECK(sig.typeOf(e) == "inf");

  // unbounded set must be upward closed
  CHECK_THROWS(SubexpSignature({"a", "b"}, {{"a", "b"}}, {"a"}));
}

TEST_CASE("hybrid formula printing") {
  Domain fc{Domain::Kind::FreeCommutative, {"a", "b"}};
  auto f = hlimp(hat(hatom("p"), wgen("a")), hat(hatom("q"), wgen("b")));
  CHECK(toString(f) == "p at a -o q at b");
  auto g = hdown("u", hforallW("w", hat(hatom("p"), wdot(wbvar(1), wbvar(0)))));
  CHECK(toString(g) == "down u. forallw w. p at u.w");
  auto h = htensor(hatom("p"), hwith(hatom("q"), hatom("r")));
  CHECK(toString(h) == "p * (q & r)");
}

TEST_CASE("bounded world quantifier expands on closed bounds") {
  Domain nat{Domain::Kind::NatPlus, {}};
  // down u. forallbelow v < 2. p at v, entered with u := anything is
  // irrelevant; directly expand a closed bound
  auto f = hforallWBelow("v", wnat(2), hat(hatom("p"), wbvar(0)));
  auto e = expandBelow(f, nat);
  CHECK(toString(e) == "p at 0 & p at 1");

  auto z = hforallWBelow("v", wnat(0), hat(hatom("p"), wbvar(0)));
  CHECK(toString(expandBelow(z, nat)) == "top");

  // substitution that closes the bound triggers the expansion
  auto g = hdown("u", hforallWBelow("v", wbvar(0), hat(hatom("p"), wbvar(0))));
  auto s = substWorld(g->left, 0, wnat(2), nat);
  CHECK(toString(s) == "p at 0 & p at 1");
}

TEST_CASE("judgment reification round trips") {
  Domain fc{Domain::Kind::FreeCommutative, {"a", "b"}};
  // interleaved binders: down u. forall x. existsw v. (r(x) at u.v) -o (p at b)
  auto body = hlimp(hat(hatom("r", {bvar(0)}), wdot(wbvar(1), wbvar(0))),
                    hat(hatom("p"), wgen("b")));
  auto f = hdown("u", hforallT("x", hexistsW("v", body)));
  HyllJudgment j{f, wdot(wgen("b"), wgen("a"))};
  auto t = reifyJudgment(j, fc);
  auto back = unreifyJudgment(t);
  REQUIRE(back.has_value());
  CHECK(equal(back->formula, f));
  CHECK(toString(back->world) == "a.b");  // normalized during reification

  // reification keys world-equal judgments identically
  HyllJudgment j2{f, wdot(wgen("a"), wgen("b"))};
  CHECK(equal(reifyJudgment(j2, fc), t));
}

TEST_CASE("hybrid world collection and hybrid-free check") {
  Domain fc{Domain::Kind::FreeCommutative, {"a", "b"}};
  auto f = htensor(hat(hatom("p"), wgen("a")),
                   hat(hatom("q"), wdot(wgen("a"), wgen("b"))));
  std::vector<WorldPtr> ws;
  collectWorlds(f, fc, ws);
  REQUIRE(ws.size() == 2);
  CHECK(toString(ws[0]) == "a");
  CHECK(toString(ws[1]) == "a.b");
  CHECK_FALSE(hybridFree(f));
  CHECK(hybridFree(htensor(hatom("p"), hbang(hatom("q")))));
}
