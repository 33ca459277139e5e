#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "wb/kernel/formula.hpp"
#include "wb/llf/engine.hpp"
#include "wb/text/parse.hpp"

using namespace wb;
using kernel::FormulaPtr;
using kernel::Polarity;
using kernel::Tag;

namespace {

// ---------------------------------------------------------------------------
// Reference prover: unfocused dyadic sequents  Psi : Delta  over the
// quantifier-free fragment. Every rule is applied at every position, so the
// only incompleteness is the copy budget. Apart from sharing the formula
// type this prover has nothing in common with the focused engine; the
// agreement corpus below treats it as ground truth.

using Ctx = std::vector<FormulaPtr>;

// The reference prover never builds formulas, it only rearranges subterm
// handles, so per-pointer key caching is sound. Pins keep the pointers from
// being recycled under the cache.
std::unordered_map<const kernel::Formula*, std::string> g_keys;
std::vector<FormulaPtr> g_pins;

const std::string& keyFor(const FormulaPtr& f) {
  auto it = g_keys.find(f.get());
  if (it != g_keys.end()) return it->second;
  g_pins.push_back(f);
  return g_keys.emplace(f.get(), kernel::key(f)).first->second;
}

std::string ctxKey(const Ctx& v) {
  std::vector<const std::string*> ks;
  ks.reserve(v.size());
  for (const auto& f : v) ks.push_back(&keyFor(f));
  std::sort(ks.begin(), ks.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  std::string out;
  for (const auto* k : ks) {
    out += *k;
    out += '|';
  }
  return out;
}

Ctx without(const Ctx& v, size_t i) {
  Ctx out;
  out.reserve(v.size() - 1);
  for (size_t j = 0; j < v.size(); ++j)
    if (j != i) out.push_back(v[j]);
  return out;
}

Ctx plus(Ctx v, const FormulaPtr& f) {
  v.push_back(f);
  return v;
}

std::unordered_map<std::string, bool> g_memo;

bool refSeq(const Ctx& psi, const Ctx& delta, int copies);

bool refStep(const Ctx& psi, const Ctx& delta, int copies) {
  for (const auto& f : delta)
    if (f->tag == Tag::Top) return true;
  if (delta.size() == 2 && kernel::isLiteral(delta[0]) &&
      kernel::isLiteral(delta[1]) &&
      kernel::equal(delta[0], kernel::negate(delta[1])))
    return true;
  if (delta.size() == 1 && delta[0]->tag == Tag::One) return true;

  for (size_t i = 0; i < delta.size(); ++i) {
    const auto& f = delta[i];
    switch (f->tag) {
      case Tag::Bot:
        if (refSeq(psi, without(delta, i), copies)) return true;
        break;
      case Tag::Par:
        if (refSeq(psi, plus(plus(without(delta, i), f->left), f->right),
                   copies))
          return true;
        break;
      case Tag::With:
        if (refSeq(psi, plus(without(delta, i), f->left), copies) &&
            refSeq(psi, plus(without(delta, i), f->right), copies))
          return true;
        break;
      case Tag::Plus:
        if (refSeq(psi, plus(without(delta, i), f->left), copies) ||
            refSeq(psi, plus(without(delta, i), f->right), copies))
          return true;
        break;
      case Tag::Quest:
        if (refSeq(plus(psi, f->left), without(delta, i), copies))
          return true;
        break;
      case Tag::Tensor: {
        Ctx rest = without(delta, i);
        size_t n = rest.size();
        for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
          Ctx d1, d2;
          for (size_t j = 0; j < n; ++j)
            (mask & (size_t{1} << j) ? d1 : d2).push_back(rest[j]);
          d1.push_back(f->left);
          d2.push_back(f->right);
          if (refSeq(psi, d1, copies) && refSeq(psi, d2, copies)) return true;
        }
        break;
      }
      case Tag::Bang:
        if (delta.size() == 1 && refSeq(psi, {f->left}, copies)) return true;
        break;
      default:
        break;
    }
  }

  if (copies > 0) {
    std::vector<std::string> seen;
    for (const auto& g : psi) {
      const std::string& k = keyFor(g);
      if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
      seen.push_back(k);
      if (refSeq(psi, plus(delta, g), copies - 1)) return true;
    }
  }
  return false;
}

bool refSeq(const Ctx& psi, const Ctx& delta, int copies) {
  std::string k =
      ctxKey(psi) + "#" + ctxKey(delta) + "#" + std::to_string(copies);
  auto it = g_memo.find(k);
  if (it != g_memo.end()) return it->second;
  bool r = refStep(psi, delta, copies);
  g_memo.emplace(std::move(k), r);
  return r;
}

// ---------------------------------------------------------------------------
// Agreement harness. Every committed proof is also replayed and checked for
// phase discipline: a decide never fires while the active list is nonempty
// or while anything non-storable rests in the linear context.

bool storableHere(const FormulaPtr& f) {
  return kernel::isLiteral(f) ||
         kernel::polarity(f) == Polarity::Positive;
}

bool phaseOk(const llf::Proof& p, std::string* why) {
  if (p.rule == "d1" || p.rule == "d2") {
    if (!p.list.empty()) {
      *why = "decide with a pending list";
      return false;
    }
    for (const auto& f : p.linear)
      if (!storableHere(f)) {
        *why = "negative formula resting in the linear context";
        return false;
      }
  }
  for (const auto& kid : p.premises)
    if (!phaseOk(*kid, why)) return false;
  return true;
}

std::string describe(const Ctx& goal) {
  std::string s;
  for (const auto& f : goal) {
    if (!s.empty()) s += " ; ";
    s += kernel::toString(f);
  }
  return s;
}

struct AgreeStats {
  int proved = 0;
  int refuted = 0;
  int gaveUp = 0;  // budget ran out on a sequent the reference refutes
  std::vector<std::string> failures;
};

// The focused engine's verdicts are checked against the reference prover:
// Proved needs a reference proof (retried once with a larger copy budget,
// since the reference is only complete up to copies) plus a clean replay;
// NotProvable claims a finished refutation and must match reference-false;
// Exhausted is an honest give-up, acceptable only when the reference also
// finds nothing (unprovable sequents with ?-compounds admit unbounded
// contraction, so no finite budget can close them).
void checkOne(AgreeStats& st, const Ctx& goal, int copies) {
  int budget = 8;
  for (const auto& f : goal) budget += gen::countNodes(f);
  llf::Options opt;
  opt.depth = budget;
  opt.steps = 150000;
  auto r = llf::prove_llf({}, {}, goal, opt);
  bool expect = refSeq({}, goal, copies);
  switch (r.verdict) {
    case llf::Verdict::Exhausted:
      if (expect) {
        st.failures.push_back("exhausted on provable: " + describe(goal));
      } else {
        ++st.gaveUp;
      }
      return;
    case llf::Verdict::NotProvable:
      if (expect) {
        st.failures.push_back("missed: " + describe(goal));
      } else {
        ++st.refuted;
      }
      return;
    case llf::Verdict::Proved:
      break;
  }
  if (!expect && !refSeq({}, goal, copies + 4)) {
    st.failures.push_back("unsound: " + describe(goal));
    return;
  }
  ++st.proved;
  std::string err;
  if (!llf::replay(r.proof, opt.bias, &err)) {
    st.failures.push_back("replay: " + err + " on " + describe(goal));
    return;
  }
  std::string why;
  if (!phaseOk(*r.proof, &why)) {
    st.failures.push_back("phase: " + why + " on " + describe(goal));
  }
}

void report(const AgreeStats& st) {
  std::string first;
  for (size_t i = 0; i < st.failures.size() && i < 10; ++i)
    first += st.failures[i] + "\n";
  CAPTURE(first);
  CAPTURE(st.failures.size());
  CHECK(st.failures.empty());
}

std::vector<FormulaPtr> depthOneOver(const std::vector<FormulaPtr>& base) {
  std::vector<FormulaPtr> out = base;
  for (const auto& f : base)
    for (const auto& g : base) {
      out.push_back(kernel::tensor(f, g));
      out.push_back(kernel::par(f, g));
      out.push_back(kernel::plus(f, g));
      out.push_back(kernel::with(f, g));
    }
  for (const auto& f : base) {
    out.push_back(kernel::bang(f));
    out.push_back(kernel::quest(f));
  }
  return out;
}

}  // namespace

TEST_CASE("reference prover sanity on hand-checked sequents") {
  auto chk = [](const char* src, bool expect) {
    CAPTURE(src);
    CHECK(refSeq({}, {text::parseFormula(src)}, 8) == expect);
  };
  chk("~a | a", true);
  chk("~a * a", false);
  chk("(~a | ~b) | a * b", true);
  chk("1 (+) a * 0", true);
  chk("0", false);
  chk("top", true);
  chk("? 0", false);
  chk("! top", true);
  chk("! a", false);
  chk("! (~a | a)", true);
  chk("? ~a | ! a", true);
  CHECK(refSeq({}, {text::parseFormula("! a"), text::parseFormula("? ~a")},
               8));
}

TEST_CASE("focused search agrees with the reference on one-level formulas") {
  std::vector<FormulaPtr> leaves = {
      kernel::atom("a"),          kernel::atom("a", {}, true),
      kernel::atom("b"),          kernel::atom("b", {}, true),
      kernel::one(),              kernel::bottom(),
      kernel::zero(),             kernel::top()};
  auto fam = depthOneOver(leaves);
  AgreeStats st;
  for (const auto& f : fam) checkOne(st, {f}, 3);
  CHECK(st.proved > 20);
  CHECK(st.refuted > 100);
  report(st);
}

TEST_CASE("focused search agrees with the reference on one-level pairs") {
  std::vector<FormulaPtr> leaves = {
      kernel::atom("a"), kernel::atom("a", {}, true),
      kernel::atom("b"), kernel::atom("b", {}, true),
      kernel::one(),     kernel::bottom()};
  auto fam = depthOneOver(leaves);
  AgreeStats st;
  for (size_t i = 0; i < fam.size(); ++i)
    for (size_t j = i; j < fam.size(); ++j) checkOne(st, {fam[i], fam[j]}, 4);
  CHECK(st.proved > 100);
  report(st);
}

TEST_CASE("focused search agrees with the reference on two-level formulas") {
  std::vector<FormulaPtr> leaves = {kernel::atom("a"),
                                    kernel::atom("a", {}, true)};
  std::vector<FormulaPtr> lvl1 = leaves;
  for (const auto& f : leaves)
    for (const auto& g : leaves) {
      lvl1.push_back(kernel::tensor(f, g));
      lvl1.push_back(kernel::par(f, g));
      lvl1.push_back(kernel::plus(f, g));
      lvl1.push_back(kernel::with(f, g));
    }
  std::vector<FormulaPtr> lvl2 = leaves;
  for (const auto& f : lvl1)
    for (const auto& g : lvl1) {
      lvl2.push_back(kernel::tensor(f, g));
      lvl2.push_back(kernel::par(f, g));
      lvl2.push_back(kernel::plus(f, g));
      lvl2.push_back(kernel::with(f, g));
    }
  AgreeStats st;
  for (const auto& f : lvl2) checkOne(st, {f}, 2);
  CHECK(st.proved > 100);
  report(st);
}

TEST_CASE("focused search agrees with the reference on random formulas") {
  gen::Rng rng(42);
  AgreeStats st;
  for (int i = 0; i < 500; ++i) checkOne(st, {gen::randomQfLL(rng, 3)}, 6);
  gen::Rng rng2(43);
  for (int i = 0; i < 250; ++i)
    checkOne(st, {gen::randomQfLL(rng2, 2), gen::randomQfLL(rng2, 2)}, 6);
  CHECK(st.proved > 40);
  report(st);
}

TEST_CASE("worked example: excluded middle takes one decide") {
  auto r = llf::prove_llf({}, {}, {text::parseFormula("~a | a")});
  REQUIRE(r.verdict == llf::Verdict::Proved);
  CHECK(r.proof->rule == "par");
  CHECK(llf::decideDepth(r.proof) == 1);
  CHECK(llf::serialize(r.proof).find("(rule i1") != std::string::npos);
  CHECK(llf::replay(r.proof, Polarity::Negative));
}

TEST_CASE("worked example: the unit goal stores then decides") {
  auto r = llf::prove_llf({}, {}, {kernel::one()});
  REQUIRE(r.verdict == llf::Verdict::Proved);
  CHECK(r.proof->rule == "store");
  CHECK(llf::decideDepth(r.proof) == 1);
  CHECK(llf::serialize(r.proof).find("(rule one") != std::string::npos);
}

TEST_CASE("worked example: tensor splits the linear context exactly") {
  auto r = llf::prove_llf(
      {}, {text::parseFormula("~a"), text::parseFormula("~b")},
      {text::parseFormula("a * b")});
  REQUIRE(r.verdict == llf::Verdict::Proved);
  CHECK(llf::replay(r.proof, Polarity::Negative));

  const llf::Proof* tens = nullptr;
  int tensorCount = 0;
  std::vector<const llf::Proof*> work = {r.proof.get()};
  while (!work.empty()) {
    const llf::Proof* p = work.back();
    work.pop_back();
    if (p->rule == "tensor") {
      tens = p;
      ++tensorCount;
    }
    for (const auto& kid : p->premises) work.push_back(kid.get());
  }
  REQUIRE(tensorCount == 1);
  REQUIRE(tens->premises.size() == 2);
  REQUIRE(tens->premises[0]->linear.size() == 1);
  REQUIRE(tens->premises[1]->linear.size() == 1);
  CHECK(kernel::key(tens->premises[0]->linear[0]) ==
        kernel::key(text::parseFormula("~a")));
  CHECK(kernel::key(tens->premises[1]->linear[0]) ==
        kernel::key(text::parseFormula("~b")));
}

TEST_CASE("negative compounds stored under ? stay decidable") {
  auto r = llf::prove_llf({}, {}, {text::parseFormula("? (a | ~a)")});
  CHECK(r.verdict == llf::Verdict::Proved);
  CHECK(llf::replay(r.proof, Polarity::Negative));
}

TEST_CASE("quantifiers: eigenvariables and pool witnesses") {
  auto r = llf::prove_llf({}, {},
                          {text::parseFormula("forall x. (~p(x) | p(x))")});
  REQUIRE(r.verdict == llf::Verdict::Proved);
  CHECK(llf::decideDepth(r.proof) == 1);
  CHECK(llf::replay(r.proof, Polarity::Negative));

  auto r2 = llf::prove_llf(
      {}, {},
      {text::parseFormula("exists x. p(x)"), text::parseFormula("~p(c)")});
  REQUIRE(r2.verdict == llf::Verdict::Proved);
  CHECK(llf::replay(r2.proof, Polarity::Negative));

  // no closed term anywhere: the witness pool is empty, so the search can
  // only report exhaustion, not refutation
  auto r3 = llf::prove_llf({}, {}, {text::parseFormula("exists x. p(x)")});
  CHECK(r3.verdict == llf::Verdict::Exhausted);

  auto r4 = llf::prove_llf({}, {}, {text::parseFormula("forall x. p(x)")});
  CHECK(r4.verdict == llf::Verdict::NotProvable);
}

TEST_CASE("clause-shaped foci instantiate from stored duals") {
  std::vector<FormulaPtr> psi = {
      text::parseFormula("exists c. exists w. (~lft(jdg(c, w)) * rgt(jdg(c, w)))")};
  std::vector<FormulaPtr> lin = {text::parseFormula("lft(jdg(pp, ww))"),
                                 text::parseFormula("~rgt(jdg(pp, ww))")};
  auto r = llf::prove_llf(psi, lin, {});
  REQUIRE(r.verdict == llf::Verdict::Proved);
  CHECK(llf::decideDepth(r.proof) == 2);
  std::string err;
  CHECK(llf::replay(r.proof, Polarity::Negative, &err));
  CAPTURE(err);
}

TEST_CASE("replay rejects deciding on a context-mate literal") {
  auto leaf = std::make_shared<llf::Proof>();
  leaf->rule = "one";
  leaf->focus = kernel::atom("a");
  auto root = std::make_shared<llf::Proof>();
  root->rule = "d1";
  root->linear = {kernel::atom("a")};
  root->premises = {leaf};
  std::string err;
  CHECK_FALSE(llf::replay(root, Polarity::Negative, &err));
  CHECK(!err.empty());
}

TEST_CASE("replay rejects promotion over a nonempty linear context") {
  auto kid = std::make_shared<llf::Proof>();
  kid->rule = "top";
  kid->list = {kernel::top()};
  auto root = std::make_shared<llf::Proof>();
  root->rule = "bang";
  root->focus = kernel::bang(kernel::top());
  root->linear = {kernel::atom("b")};
  root->premises = {kid};
  std::string err;
  CHECK_FALSE(llf::replay(root, Polarity::Negative, &err));
  CHECK(!err.empty());
}

TEST_CASE("search output is deterministic") {
  std::vector<FormulaPtr> goal = {
      text::parseFormula("(~a | ~b) | a * b (+) b * a")};
  auto r1 = llf::prove_llf({}, {}, goal);
  auto r2 = llf::prove_llf({}, {}, goal);
  REQUIRE(r1.verdict == llf::Verdict::Proved);
  REQUIRE(r2.verdict == llf::Verdict::Proved);
  CHECK(llf::serialize(r1.proof) == llf::serialize(r2.proof));
}

TEST_CASE("verdicts distinguish refutation from budget exhaustion") {
  llf::Options tight;
  tight.depth = 0;
  auto r = llf::prove_llf({}, {}, {text::parseFormula("~a | a")}, tight);
  CHECK(r.verdict == llf::Verdict::Exhausted);
  auto r2 = llf::prove_llf({}, {}, {kernel::zero()});
  CHECK(r2.verdict == llf::Verdict::NotProvable);
}
