#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "wb/hyll/engine.hpp"
#include "wb/kernel/hyll.hpp"
#include "wb/text/parse.hpp"

using namespace wb;
using kernel::Domain;
using kernel::HTag;
using kernel::HyllJudgment;
using kernel::HyllPtr;
using kernel::WorldPtr;

namespace {

// ---------------------------------------------------------------------------
// Reference prover: two-sided intuitionistic sequents  Gamma ; Delta |- C
// over the world-free fragment. Every rule is tried at every position with
// full backtracking, so the only incompleteness is the copy budget. It
// shares nothing with the hybrid engine beyond the formula type; the
// agreement corpus below treats it as ground truth.

using ICtx = std::vector<HyllPtr>;

std::unordered_map<const kernel::HyllFormula*, std::string> g_keys;
std::vector<HyllPtr> g_pins;

const std::string& keyFor(const HyllPtr& f) {
  auto it = g_keys.find(f.get());
  if (it != g_keys.end()) return it->second;
  g_pins.push_back(f);
  return g_keys.emplace(f.get(), kernel::key(f)).first->second;
}

std::string ctxKey(const ICtx& c) {
  std::vector<std::string> ks;
  ks.reserve(c.size());
  for (const auto& f : c) ks.push_back(keyFor(f));
  std::sort(ks.begin(), ks.end());
  std::string out;
  for (const auto& k : ks) {
    out += k;
    out += ';';
  }
  return out;
}

std::unordered_map<std::string, bool> g_memo;

bool refIll(const ICtx& gamma, const ICtx& delta, const HyllPtr& goal,
            int copies);

bool refIllStep(const ICtx& gamma, const ICtx& delta, const HyllPtr& goal,
                int copies) {
  if (goal->tag == HTag::Top) return true;
  for (const auto& f : delta)
    if (f->tag == HTag::Zero) return true;
  if (goal->tag == HTag::Atom && delta.size() == 1 &&
      delta[0]->tag == HTag::Atom && kernel::equal(delta[0], goal))
    return true;
  if (goal->tag == HTag::One && delta.empty()) return true;

  auto without = [&](size_t i) {
    ICtx out;
    for (size_t k = 0; k < delta.size(); ++k)
      if (k != i) out.push_back(delta[k]);
    return out;
  };

  switch (goal->tag) {
    case HTag::Tensor: {
      size_t n = delta.size();
      for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        ICtx a, b;
        for (size_t k = 0; k < n; ++k)
          (mask >> k & 1 ? a : b).push_back(delta[k]);
        if (refIll(gamma, a, goal->left, copies) &&
            refIll(gamma, b, goal->right, copies))
          return true;
      }
      break;
    }
    case HTag::Limp: {
      ICtx d = delta;
      d.push_back(goal->left);
      if (refIll(gamma, d, goal->right, copies)) return true;
      break;
    }
    case HTag::With:
      if (refIll(gamma, delta, goal->left, copies) &&
          refIll(gamma, delta, goal->right, copies))
        return true;
      break;
    case HTag::Plus:
      if (refIll(gamma, delta, goal->left, copies) ||
          refIll(gamma, delta, goal->right, copies))
        return true;
      break;
    case HTag::Bang:
      if (delta.empty() && refIll(gamma, delta, goal->left, copies))
        return true;
      break;
    default:
      break;
  }

  for (size_t i = 0; i < delta.size(); ++i) {
    const HyllPtr& f = delta[i];
    switch (f->tag) {
      case HTag::Tensor: {
        ICtx d = without(i);
        d.push_back(f->left);
        d.push_back(f->right);
        if (refIll(gamma, d, goal, copies)) return true;
        break;
      }
      case HTag::One:
        if (refIll(gamma, without(i), goal, copies)) return true;
        break;
      case HTag::Limp: {
        ICtx rest = without(i);
        size_t n = rest.size();
        for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
          ICtx a, b;
          for (size_t k = 0; k < n; ++k)
            (mask >> k & 1 ? a : b).push_back(rest[k]);
          b.push_back(f->right);
          if (refIll(gamma, a, f->left, copies) &&
              refIll(gamma, b, goal, copies))
            return true;
        }
        break;
      }
      case HTag::With: {
        ICtx d = without(i);
        d.push_back(f->left);
        if (refIll(gamma, d, goal, copies)) return true;
        d = without(i);
        d.push_back(f->right);
        if (refIll(gamma, d, goal, copies)) return true;
        break;
      }
      case HTag::Plus: {
        ICtx dl = without(i);
        dl.push_back(f->left);
        ICtx dr = without(i);
        dr.push_back(f->right);
        if (refIll(gamma, dl, goal, copies) &&
            refIll(gamma, dr, goal, copies))
          return true;
        break;
      }
      case HTag::Bang: {
        ICtx g = gamma;
        bool dup = false;
        for (const auto& h : g)
          if (keyFor(h) == keyFor(f->left)) {
            dup = true;
            break;
          }
        if (!dup) g.push_back(f->left);
        if (refIll(g, without(i), goal, copies)) return true;
        break;
      }
      default:
        break;
    }
  }

  if (copies > 0) {
    for (const auto& h : gamma) {
      ICtx d = delta;
      d.push_back(h);
      if (refIll(gamma, d, goal, copies - 1)) return true;
    }
  }
  return false;
}

bool refIll(const ICtx& gamma, const ICtx& delta, const HyllPtr& goal,
            int copies) {
  std::string k = ctxKey(gamma) + "#" + ctxKey(delta) + "#" + keyFor(goal) +
                  "#" + std::to_string(copies);
  auto it = g_memo.find(k);
  if (it != g_memo.end()) return it->second;
  bool r = refIllStep(gamma, delta, goal, copies);
  g_memo[k] = r;
  return r;
}

// ---------------------------------------------------------------------------
// Agreement harness

Domain natDomain() { return Domain{}; }

Domain genDomain() {
  Domain d;
  d.kind = Domain::Kind::FreeCommutative;
  d.generators = {"a", "b", "v", "w"};
  return d;
}

hyll::Options defaultOpts() {
  hyll::Options opt;
  opt.domain = natDomain();
  opt.steps = 200000;
  return opt;
}

struct AgreeStats {
  int proved = 0;
  int refuted = 0;
  int gaveUp = 0;
  std::vector<std::string> failures;
};

std::string describeIll(const ICtx& delta, const HyllPtr& goal) {
  std::string s = "[";
  for (size_t i = 0; i < delta.size(); ++i) {
    if (i) s += ", ";
    s += kernel::toString(delta[i]);
  }
  s += "] |- " + kernel::toString(goal);
  return s;
}

// Runs the hybrid engine on a world-free sequent pinned at iota and compares
// against the reference. A disagreement in either direction is a failure;
// an engine give-up on a reference-unprovable sequent just counts as such.
void checkPlain(AgreeStats& st, const ICtx& delta, const HyllPtr& goal,
                int copies) {
  hyll::Sequent s;
  WorldPtr iota = kernel::wiota();
  for (const auto& f : delta) s.linear.push_back({f, iota});
  s.goal = {goal, iota};
  hyll::Options opt = defaultOpts();
  opt.steps = 60000;
  hyll::Result r = prove_hyll(s, opt);
  bool expect = refIll({}, delta, goal, copies);

  if (r.verdict == hyll::Verdict::Proved) {
    std::string err;
    if (!hyll::replay(r.proof, opt.domain, &err)) {
      st.failures.push_back("replay failed (" + err + "): " +
                            describeIll(delta, goal));
      return;
    }
    if (!expect && !refIll({}, delta, goal, copies + 4)) {
      st.failures.push_back("engine proved, reference cannot: " +
                            describeIll(delta, goal));
      return;
    }
    ++st.proved;
    return;
  }
  if (r.verdict == hyll::Verdict::NotProvable) {
    if (expect) {
      st.failures.push_back("engine missed provable: " +
                            describeIll(delta, goal));
      return;
    }
    ++st.refuted;
    return;
  }
  if (expect) {
    st.failures.push_back("engine exhausted on provable: " +
                          describeIll(delta, goal));
    return;
  }
  ++st.gaveUp;
}

void report(const AgreeStats& st) {
  for (size_t i = 0; i < st.failures.size() && i < 10; ++i)
    CAPTURE(st.failures[i]);
  CHECK(st.failures.empty());
}

// World-free formulas of nesting depth one over a small leaf alphabet.
std::vector<HyllPtr> depthOnePlain() {
  std::vector<HyllPtr> leaves = {kernel::hatom("p"), kernel::hatom("q"),
                                 kernel::hone(), kernel::hzero(),
                                 kernel::htop()};
  std::vector<HyllPtr> out = leaves;
  for (const auto& a : leaves) {
    for (const auto& b : leaves) {
      out.push_back(kernel::htensor(a, b));
      out.push_back(kernel::hlimp(a, b));
      out.push_back(kernel::hwith(a, b));
      out.push_back(kernel::hplus(a, b));
    }
  }
  for (const auto& a : leaves) out.push_back(kernel::hbang(a));
  return out;
}

HyllPtr hf(const std::string& src) { return text::parseHyllFormula(src); }
HyllJudgment hj(const std::string& src) {
  return text::parseHyllJudgment(src);
}

hyll::Result proveJ(const std::vector<std::string>& gamma,
                    const std::vector<std::string>& linear,
                    const std::string& goal, hyll::Options opt) {
  hyll::Sequent s;
  for (const auto& g : gamma) s.unbounded.push_back(hj(g));
  for (const auto& l : linear) s.linear.push_back(hj(l));
  s.goal = hj(goal);
  return prove_hyll(s, opt);
}

bool replayOk(const hyll::Result& r, const Domain& dom) {
  std::string err;
  bool ok = hyll::replay(r.proof, dom, &err);
  CAPTURE(err);
  return ok;
}

}  // namespace

TEST_CASE("reference intuitionistic prover on hand-checked sequents") {
  struct Case {
    std::vector<std::string> gamma;
    std::vector<std::string> delta;
    std::string goal;
    bool provable;
  };
  const std::vector<Case> cases = {
      {{}, {"p"}, "p", true},
      {{}, {}, "1", true},
      {{}, {"p"}, "q", false},
      {{}, {"p", "q"}, "p * q", true},
      {{}, {"p"}, "p * p", false},
      {{}, {"! p"}, "p * p", true},
      {{}, {"p -o q", "p"}, "q", true},
      {{}, {}, "p -o p", true},
      {{}, {"0"}, "q", true},
      {{}, {"p & q"}, "p", true},
      {{}, {"p"}, "p (+) q", true},
      {{"p -o q"}, {"p"}, "q", true},
      {{}, {}, "p -o (p * p)", false},
      {{}, {"! p"}, "! (p * p)", true},
      {{}, {"p (+) q"}, "p", false},
      {{}, {"top"}, "p", false},
      {{}, {"1"}, "p", false},
      {{}, {"q"}, "top", true},
  };
  for (const auto& c : cases) {
    ICtx gamma, delta;
    for (const auto& s : c.gamma) gamma.push_back(hf(s));
    for (const auto& s : c.delta) delta.push_back(hf(s));
    CAPTURE(describeIll(delta, hf(c.goal)));
    CHECK(refIll(gamma, delta, hf(c.goal), 3) == c.provable);
  }
}

TEST_CASE("hybrid search agrees with the reference on one-level sequents") {
  auto family = depthOnePlain();
  AgreeStats st;
  for (const auto& f : family) checkPlain(st, {}, f, 3);
  for (const auto& f : family)
    for (const auto& g : family) checkPlain(st, {f}, g, 3);
  report(st);
  CHECK(st.proved > 300);
  CHECK(st.refuted > 2000);
}

TEST_CASE("hybrid search agrees with the reference on random sequents") {
  gen::Rng rng(7);
  AgreeStats st;
  for (int i = 0; i < 150; ++i)
    checkPlain(st, {}, gen::randomHyll(rng, 3, false), 6);
  gen::Rng rng2(8);
  for (int i = 0; i < 300; ++i) {
    HyllPtr f = gen::randomHyll(rng2, 2, false);
    HyllPtr g = gen::randomHyll(rng2, 2, false);
    checkPlain(st, {f}, g, 6);
  }
  report(st);
  CHECK(st.proved > 40);
}

TEST_CASE("identity sequents prove across the connectives") {
  gen::Rng rng(11);
  hyll::Options opt = defaultOpts();
  int proved = 0;
  for (int i = 0; i < 150; ++i) {
    HyllPtr a = gen::randomHyll(rng, 3, true);
    WorldPtr w = gen::randomWorldNat(rng);
    hyll::Result r = prove_hyll({{}, {{a, w}}, {a, w}}, opt);
    CAPTURE(kernel::toString(a));
    REQUIRE(r.verdict == hyll::Verdict::Proved);
    REQUIRE(replayOk(r, opt.domain));
    ++proved;
  }
  CHECK(proved == 150);

  // Binder wrappers around a random core, so every hybrid rule pair gets
  // exercised on both sides of the turnstile.
  gen::Rng rng3(12);
  for (int i = 0; i < 40; ++i) {
    HyllPtr core = gen::randomHyll(rng3, 2, false);
    HyllPtr wrapped;
    switch (i % 4) {
      case 0:
        wrapped = kernel::hdown("u", kernel::hat(core, kernel::wbvar(0)));
        break;
      case 1:
        wrapped = kernel::hexistsW("v", kernel::hat(core, kernel::wbvar(0)));
        break;
      case 2:
        wrapped = kernel::hforallW("v", kernel::hat(core, kernel::wbvar(0)));
        break;
      default:
        wrapped = kernel::hforallWBelow("v", kernel::wnat(2),
                                        kernel::hat(core, kernel::wbvar(0)));
        break;
    }
    hyll::Result r =
        prove_hyll({{}, {{wrapped, kernel::wnat(1)}}, {wrapped, kernel::wnat(1)}},
                   opt);
    CAPTURE(kernel::toString(wrapped));
    REQUIRE(r.verdict == hyll::Verdict::Proved);
    REQUIRE(replayOk(r, opt.domain));
  }

  // Same story over a free commutative monoid of named worlds.
  hyll::Options gopt = defaultOpts();
  gopt.domain = genDomain();
  for (const char* src :
       {"p at a.b", "down u. (p * q) at u", "existsw v. p at v",
        "forallw v. (p at v) -o (p at v)", "(p at a) & (q at b)"}) {
    hyll::Result r = proveJ({}, {std::string(src) + " @ a"},
                            std::string(src) + " @ a", gopt);
    CAPTURE(src);
    REQUIRE(r.verdict == hyll::Verdict::Proved);
    REQUIRE(replayOk(r, gopt.domain));
  }
}

TEST_CASE("worlds are part of judgment identity") {
  hyll::Options opt = defaultOpts();
  CHECK(proveJ({}, {"p @ 2"}, "p @ 2", opt).verdict ==
        hyll::Verdict::Proved);
  CHECK(proveJ({}, {"p @ 2"}, "p @ 3", opt).verdict ==
        hyll::Verdict::NotProvable);
  // Monoid arithmetic happens before comparison: 1.2 and 3 are the same
  // world under addition.
  hyll::Result r = proveJ({}, {"p @ 1.2"}, "p @ 3", opt);
  CHECK(r.verdict == hyll::Verdict::Proved);
  CHECK(r.proof->rule == "init");

  hyll::Options gopt = defaultOpts();
  gopt.domain = genDomain();
  CHECK(proveJ({}, {"p @ a.b"}, "p @ b.a", gopt).verdict ==
        hyll::Verdict::Proved);
  CHECK(proveJ({}, {"p @ a"}, "p @ b", gopt).verdict ==
        hyll::Verdict::NotProvable);
}

TEST_CASE("inconsistency is global: zero entails anything anywhere") {
  hyll::Options opt = defaultOpts();
  hyll::Result r = proveJ({}, {"0 @ 1"}, "q @ 3", opt);
  REQUIRE(r.verdict == hyll::Verdict::Proved);
  CHECK(r.proof->rule == "zero_l");
  CHECK(replayOk(r, opt.domain));

  hyll::Options gopt = defaultOpts();
  gopt.domain = genDomain();
  CHECK(proveJ({}, {"0 @ a"}, "(p * q) @ b", gopt).verdict ==
        hyll::Verdict::Proved);

  // Without a zero on the left there is no proof of zero.
  CHECK(proveJ({}, {}, "0 @ 2", opt).verdict ==
        hyll::Verdict::NotProvable);
}

TEST_CASE("linear zone admits neither weakening nor contraction") {
  hyll::Options opt = defaultOpts();
  CHECK(proveJ({}, {"p @ 1", "p @ 1"}, "p @ 1", opt).verdict ==
        hyll::Verdict::NotProvable);
  CHECK(proveJ({}, {"p @ 1"}, "1 @ 1", opt).verdict ==
        hyll::Verdict::NotProvable);
  CHECK(proveJ({}, {}, "p @ 1", opt).verdict ==
        hyll::Verdict::NotProvable);
}

TEST_CASE("satellite judgments move freely between worlds") {
  hyll::Options opt = defaultOpts();
  hyll::Result r = proveJ({}, {"(p at 2) @ 0"}, "(p at 2) @ 3", opt);
  REQUIRE(r.verdict == hyll::Verdict::Proved);
  REQUIRE(r.proof->rule == "at_l");
  REQUIRE(r.proof->premises[0]->rule == "at_r");
  CHECK(r.proof->premises[0]->premises[0]->rule == "init");

  // Relocation works for arbitrary bodies, not just atoms.
  gen::Rng rng(13);
  for (int i = 0; i < 40; ++i) {
    HyllPtr a = gen::randomHyll(rng, 2, false);
    HyllPtr atU = kernel::hat(a, kernel::wnat(2));
    for (uint64_t w : {0, 1, 5}) {
      hyll::Result m =
          prove_hyll({{}, {{atU, kernel::wnat(3)}}, {atU, kernel::wnat(w)}},
                     opt);
      CAPTURE(kernel::toString(atU));
      REQUIRE(m.verdict == hyll::Verdict::Proved);
    }
  }
}

TEST_CASE("binder rules instantiate and generalize worlds") {
  hyll::Options opt = defaultOpts();

  hyll::Result r1 = proveJ({}, {"(down u. p at u) @ 3"}, "p @ 3", opt);
  REQUIRE(r1.verdict == hyll::Verdict::Proved);
  CHECK(r1.proof->rule == "down_l");
  CHECK(replayOk(r1, opt.domain));

  CHECK(proveJ({}, {"p @ 3"}, "(down u. p at u) @ 3", opt).verdict ==
        hyll::Verdict::Proved);

  hyll::Result r2 = proveJ({}, {"p @ 2"}, "(existsw v. p at v) @ 0", opt);
  REQUIRE(r2.verdict == hyll::Verdict::Proved);
  CHECK(hyll::serialize(r2.proof).find("(witness 2)") != std::string::npos);

  CHECK(proveJ({}, {}, "(forallw v. (p at v) -o (p at v)) @ 0", opt)
            .verdict == hyll::Verdict::Proved);

  CHECK(proveJ({}, {"(forallw v. p at v) @ 0"}, "p @ 7", opt).verdict ==
        hyll::Verdict::Proved);

  // An eigenvariable introduced on the left cannot be pinned to a concrete
  // world on the right.
  CHECK(proveJ({}, {"(existsw v. p at v) @ 0"}, "p @ 7", opt).verdict ==
        hyll::Verdict::NotProvable);

  // A bounded world quantifier is the finite conjunction of its instances.
  CHECK(proveJ({}, {"(forallbelow v < 2. p at v) @ 9"}, "(p at 1) @ 4", opt)
            .verdict == hyll::Verdict::Proved);
  CHECK(proveJ({}, {"(forallbelow v < 2. p at v) @ 9"}, "(p at 2) @ 4", opt)
            .verdict == hyll::Verdict::NotProvable);

  // First-order quantifiers live beside the world machinery.
  CHECK(proveJ({}, {"(exists x. r(x)) @ 1"}, "(exists y. r(y)) @ 1", opt)
            .verdict == hyll::Verdict::Proved);
  CHECK(proveJ({}, {"(forall x. r(x)) @ 1"}, "r(c) @ 1", opt).verdict ==
        hyll::Verdict::Proved);
  CHECK(proveJ({}, {"(exists x. r(x)) @ 1"}, "r(c) @ 1", opt).verdict ==
        hyll::Verdict::NotProvable);
}

TEST_CASE("unbounded zone supplies clauses on demand") {
  hyll::Options opt = defaultOpts();
  hyll::Result r = proveJ({"(p -o q) @ 3"}, {"p @ 3"}, "q @ 3", opt);
  REQUIRE(r.verdict == hyll::Verdict::Proved);
  CHECK(r.proof->rule == "copy");
  CHECK(replayOk(r, opt.domain));

  CHECK(proveJ({}, {"(! (p -o q)) @ 2", "p @ 2"}, "q @ 2", opt).verdict ==
        hyll::Verdict::Proved);

  // Promotion carries the unbounded zone across worlds.
  hyll::Result r2 = proveJ({}, {"(! p) @ 5"}, "(! (p at 5)) @ 0", opt);
  REQUIRE(r2.verdict == hyll::Verdict::Proved);
  CHECK(replayOk(r2, opt.domain));
}

TEST_CASE("copy budget distinguishes exhaustion from refutation") {
  hyll::Options tight = defaultOpts();
  tight.depth = 0;
  CHECK(proveJ({}, {"(! p) @ 0"}, "(p * p) @ 0", tight).verdict ==
        hyll::Verdict::Exhausted);

  hyll::Options opt = defaultOpts();
  CHECK(proveJ({}, {"(! p) @ 0"}, "(p * p) @ 0", opt).verdict ==
        hyll::Verdict::Proved);

  // A genuine refutation stays a refutation at any budget.
  CHECK(proveJ({}, {"p @ 0", "p @ 0"}, "p @ 0", opt).verdict ==
        hyll::Verdict::NotProvable);
}

TEST_CASE("proof output is deterministic") {
  hyll::Options opt = defaultOpts();
  auto run = [&] {
    hyll::Result r = proveJ({"(p -o q) @ 1"},
                            {"(p * (q -o (r(c) & p))) @ 1"}, "(r(c)) @ 1",
                            opt);
    REQUIRE(r.verdict == hyll::Verdict::Proved);
    return hyll::serialize(r.proof);
  };
  std::string a = run();
  std::string b = run();
  CHECK(a == b);
  CHECK(!a.empty());
}

TEST_CASE("replay rejects corrupted proofs") {
  hyll::Options opt = defaultOpts();
  hyll::Result r = proveJ({}, {"p @ 2"}, "p @ 2", opt);
  REQUIRE(r.verdict == hyll::Verdict::Proved);

  // Same judgment twice in the linear zone is no longer an identity axiom.
  auto fat = std::make_shared<hyll::Proof>(*r.proof);
  fat->linear.push_back(fat->linear[0]);
  std::string err;
  CHECK(!hyll::replay(fat, opt.domain, &err));

  // A goal at a different world than the axiom judgment.
  auto moved = std::make_shared<hyll::Proof>(*r.proof);
  moved->goal.world = kernel::wnat(9);
  CHECK(!hyll::replay(moved, opt.domain, &err));

  // Promotion over a nonempty linear zone.
  auto promo = std::make_shared<hyll::Proof>();
  promo->rule = "bang_r";
  promo->goal = hj("(! p) @ 1");
  promo->linear = {hj("q @ 1")};
  auto body = std::make_shared<hyll::Proof>();
  body->rule = "init";
  body->goal = hj("p @ 1");
  body->linear = {hj("p @ 1")};
  promo->premises = {body};
  CHECK(!hyll::replay(promo, opt.domain, &err));

  // An eigenvariable that already occurs in the sequent is not fresh.
  auto eig = std::make_shared<hyll::Proof>();
  eig->rule = "forall_r";
  eig->eigen = "u";
  eig->goal = {kernel::hforallT("x", kernel::hatom("r", {kernel::bvar(0)})),
               kernel::wnat(1)};
  eig->linear = {{kernel::hatom("r", {kernel::fvar("u")}), kernel::wnat(1)}};
  auto kid = std::make_shared<hyll::Proof>();
  kid->rule = "init";
  kid->goal = {kernel::hatom("r", {kernel::fvar("u")}), kernel::wnat(1)};
  kid->linear = eig->linear;
  eig->premises = {kid};
  CHECK(!hyll::replay(eig, opt.domain, &err));
}

TEST_CASE("cut instances compose into direct proofs") {
  hyll::Options opt = defaultOpts();

  // Identity cuts over the one-level family.
  auto family = depthOnePlain();
  int done = 0;
  for (const auto& f : family) {
    if (done >= 25) break;
    HyllJudgment j{f, kernel::wiota()};
    hyll::Result d1 = prove_hyll({{}, {j}, j}, opt);
    if (d1.verdict != hyll::Verdict::Proved) continue;
    hyll::Result comp = hyll::check_cut_instance(d1.proof, d1.proof, opt);
    CAPTURE(kernel::toString(f));
    REQUIRE(comp.verdict == hyll::Verdict::Proved);
    REQUIRE(replayOk(comp, opt.domain));
    ++done;
  }
  CHECK(done == 25);

  // The inconsistency-propagation detour: a zero at one world reaches a goal
  // at another by cutting on a relocated zero.
  hyll::Options gopt = defaultOpts();
  gopt.domain = genDomain();
  hyll::Result d1 = proveJ({}, {"0 @ a"}, "(0 at b) @ a", gopt);
  REQUIRE(d1.verdict == hyll::Verdict::Proved);
  CHECK(d1.proof->rule == "zero_l");
  hyll::Result d2 = proveJ({}, {"(0 at b) @ a"}, "q @ b", gopt);
  REQUIRE(d2.verdict == hyll::Verdict::Proved);
  CHECK(d2.proof->rule == "at_l");
  CHECK(d2.proof->premises[0]->rule == "zero_l");
  hyll::Result comp = hyll::check_cut_instance(d1.proof, d2.proof, gopt);
  REQUIRE(comp.verdict == hyll::Verdict::Proved);
  CHECK(comp.proof->rule == "zero_l");
  CHECK(replayOk(comp, gopt.domain));

  // Random cuts: derive a tensor from its parts, then consume it.
  gen::Rng rng(19);
  int composed = 0;
  for (int i = 0; i < 60; ++i) {
    HyllPtr a = gen::randomHyll(rng, 2, true);
    HyllPtr b = gen::randomHyll(rng, 2, true);
    WorldPtr u = gen::randomWorldNat(rng);
    HyllPtr ab = kernel::htensor(a, b);
    hyll::Result left =
        prove_hyll({{}, {{a, u}, {b, u}}, {ab, u}}, opt);
    if (left.verdict != hyll::Verdict::Proved) continue;
    hyll::Sequent rs;
    rs.linear = {{ab, u}};
    if (i % 2 == 0) {
      rs.goal = {ab, u};
    } else {
      rs.goal = {kernel::hexistsW("v", kernel::hat(ab, kernel::wbvar(0))),
                 kernel::wiota()};
    }
    hyll::Result right = prove_hyll(rs, opt);
    if (right.verdict != hyll::Verdict::Proved) continue;
    hyll::Result comp2 = hyll::check_cut_instance(left.proof, right.proof, opt);
    CAPTURE(kernel::toString(ab));
    REQUIRE(comp2.verdict == hyll::Verdict::Proved);
    REQUIRE(replayOk(comp2, opt.domain));
    ++composed;
  }
  CHECK(composed > 40);
}
