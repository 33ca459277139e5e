#include "wb/llf/engine.hpp"

#include "wb/util/bigstack.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wb::llf {

using kernel::Formula;
using kernel::FormulaPtr;
using kernel::Polarity;
using kernel::Tag;
using kernel::Term;
using kernel::TermPtr;
using kernel::VarSort;

namespace {

// ---------------------------------------------------------------------------
// Sorted-id-set helpers. Slot ids are unique, so sets suffice for multiset
// reasoning during search; the replay pass re-checks everything on formula
// multisets without trusting these.

std::vector<int> unionIds(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

std::vector<int> minusIds(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

bool subsetIds(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool containsId(const std::vector<int>& a, int x) {
  return std::binary_search(a.begin(), a.end(), x);
}

// ---------------------------------------------------------------------------
// Search nodes. Linear contexts are threaded lazily: a subtree reports which
// of the slots available at its entry it consumed (`used`) plus a slack flag
// when a Top leaf inside it can absorb arbitrary leftovers. Exact per-node
// contexts are reconstructed by the finalize pass once the search commits.
// The classical context is passed down by value semantics instead: premises
// of a branching rule must not see each other's stores.

struct SNode;
using SNodePtr = std::shared_ptr<SNode>;

using Psi = std::vector<FormulaPtr>;

struct SNode {
  std::string rule;
  Psi psi;                       // Ψ at the node
  std::vector<FormulaPtr> list;  // L, up-phase only
  FormulaPtr focus;              // down-phase only
  int consumedSlot = -1;         // d1 / i1
  int storedSlot = -1;           // store
  std::vector<SNodePtr> kids;
  std::vector<std::vector<int>> kidUsed;  // tensor split bookkeeping
  std::vector<uint8_t> kidSlack;
};

struct Sub {
  std::vector<int> used;
  bool slack = false;
  SNodePtr node;
};

using K = std::function<bool(Sub)>;

struct Engine {
  Polarity bias = Polarity::Negative;
  std::vector<FormulaPtr> slots;  // linear arena, slot id = index
  std::vector<TermPtr> termPool, worldPool;
  bool exhausted = false;
  int eigenCounter = 0;
  long steps = 0;
  long maxSteps = 4000000;
  int live = 0;
  int maxLive = 1200;

  // Arena pushes survive a frame only while its alternative is live; every
  // frame that pushed rolls back before reporting failure.
  size_t mark() const { return slots.size(); }
  void undo(size_t m) { slots.resize(m); }
  int pushSlot(const FormulaPtr& f) {
    slots.push_back(f);
    return static_cast<int>(slots.size()) - 1;
  }

  static SNodePtr mkUp(const char* rule, const Psi& psi,
                       const std::vector<FormulaPtr>& list) {
    auto n = std::make_shared<SNode>();
    n->rule = rule;
    n->psi = psi;
    n->list = list;
    return n;
  }
  static SNodePtr mkDown(const char* rule, const Psi& psi,
                         const FormulaPtr& focus) {
    auto n = std::make_shared<SNode>();
    n->rule = rule;
    n->psi = psi;
    n->focus = focus;
    return n;
  }

  bool up(const Psi& psi, const std::vector<FormulaPtr>& list,
          const std::vector<int>& avail, int budget, const K& k);
  bool down(const Psi& psi, const FormulaPtr& f, const std::vector<int>& avail,
            int budget, const K& k);
  bool decide(const Psi& psi, const std::vector<int>& avail, int budget,
              const K& k);
  bool existsFocus(const Psi& psi, const FormulaPtr& f,
                   const std::vector<int>& avail, int budget, const K& k);
};

bool storable(const FormulaPtr& f, Polarity bias) {
  return kernel::polarity(f, bias) == Polarity::Positive || kernel::isLiteral(f);
}

// Decide may focus anything except the literal kind that the initial rules
// expect to find as a context mate. Negative compounds are legal foci (they
// release immediately); they reach Ψ through ?-stores.
bool decidable(const FormulaPtr& f, Polarity bias) {
  if (kernel::isLiteral(f))
    return kernel::polarity(f, bias) == Polarity::Positive;
  return true;
}

bool Engine::up(const Psi& psi, const std::vector<FormulaPtr>& list,
                const std::vector<int>& avail, int budget, const K& k) {
  if (list.empty()) return decide(psi, avail, budget, k);
  FormulaPtr f = list.back();
  std::vector<FormulaPtr> rest(list.begin(), list.end() - 1);
  switch (f->tag) {
    case Tag::Bot: {
      auto n = mkUp("bot", psi, list);
      return up(psi, rest, avail, budget, [&](Sub s) {
        n->kids = {s.node};
        return k({std::move(s.used), s.slack, n});
      });
    }
    case Tag::Par: {
      auto n = mkUp("par", psi, list);
      auto l2 = rest;
      l2.push_back(f->left);
      l2.push_back(f->right);
      return up(psi, l2, avail, budget, [&](Sub s) {
        n->kids = {s.node};
        return k({std::move(s.used), s.slack, n});
      });
    }
    case Tag::Quest: {
      auto n = mkUp("quest", psi, list);
      Psi psi2 = psi;
      psi2.push_back(f->left);
      return up(psi2, rest, avail, budget, [&](Sub s) {
        n->kids = {s.node};
        return k({std::move(s.used), s.slack, n});
      });
    }
    case Tag::Top: {
      auto n = mkUp("top", psi, list);
      return k({{}, true, n});
    }
    case Tag::With: {
      auto n = mkUp("with", psi, list);
      auto la = rest;
      la.push_back(f->left);
      auto lb = rest;
      lb.push_back(f->right);
      return up(psi, la, avail, budget, [&](Sub s1) {
        return up(psi, lb, avail, budget, [&](Sub s2) {
          // Both branches must consume the same linear resources; a Top on
          // one side absorbs what only the other side used.
          std::vector<int> used;
          bool slack = false;
          if (!s1.slack && !s2.slack) {
            if (s1.used != s2.used) return false;
            used = s1.used;
          } else if (s1.slack && !s2.slack) {
            if (!subsetIds(s1.used, s2.used)) return false;
            used = s2.used;
          } else if (!s1.slack && s2.slack) {
            if (!subsetIds(s2.used, s1.used)) return false;
            used = s1.used;
          } else {
            used = unionIds(s1.used, s2.used);
            slack = true;
          }
          n->kids = {s1.node, s2.node};
          return k({std::move(used), slack, n});
        });
      });
    }
    case Tag::Forall: {
      auto n = mkUp("forall", psi, list);
      std::string e = "_e" + std::to_string(eigenCounter++);
      auto l2 = rest;
      l2.push_back(kernel::substTermBVar(f->left, 0, kernel::fvar(e)));
      return up(psi, l2, avail, budget, [&](Sub s) {
        n->kids = {s.node};
        return k({std::move(s.used), s.slack, n});
      });
    }
    default: {
      if (!storable(f, bias))
        throw std::logic_error("up: unhandled formula " + kernel::toString(f));
      auto n = mkUp("store", psi, list);
      size_t m = mark();
      int s = pushSlot(f);
      n->storedSlot = s;
      auto a2 = avail;
      a2.push_back(s);  // fresh id is the maximum, order preserved
      bool r = up(psi, rest, a2, budget, [&](Sub sub) {
        // The stored slot must be consumed inside this subtree (or absorbed
        // by a Top); otherwise this alternative is not a proof.
        if (!containsId(sub.used, s) && !sub.slack) return false;
        n->kids = {sub.node};
        return k({minusIds(sub.used, {s}), sub.slack, n});
      });
      if (!r) undo(m);
      return r;
    }
  }
}

bool Engine::decide(const Psi& psi, const std::vector<int>& avail, int budget,
                    const K& k) {
  bool candidate = false;
  for (int id : avail)
    if (decidable(slots[id], bias)) {
      candidate = true;
      break;
    }
  if (!candidate)
    for (const auto& g : psi)
      if (decidable(g, bias)) {
        candidate = true;
        break;
      }
  if (!candidate) return false;
  if (budget <= 0 || live >= maxLive || ++steps > maxSteps) {
    exhausted = true;  // a bound blocked a decide that had candidates
    return false;
  }
  ++live;
  struct LiveGuard {
    int& n;
    ~LiveGuard() { --n; }
  } liveGuard{live};
  for (int id : avail) {
    // copy: nested stores may reallocate the arena under this frame
    FormulaPtr f = slots[id];
    if (!decidable(f, bias)) continue;
    auto n = mkUp("d1", psi, {});
    n->consumedSlot = id;
    auto rest = minusIds(avail, {id});
    bool r = down(psi, f, rest, budget - 1, [&](Sub s) {
      n->kids = {s.node};
      return k({unionIds(s.used, {id}), s.slack, n});
    });
    if (r) return true;
  }
  std::set<std::string> tried;  // contraction makes duplicate Ψ entries moot
  for (const auto& g : psi) {
    if (!decidable(g, bias)) continue;
    if (!tried.insert(kernel::key(g)).second) continue;
    auto n = mkUp("d2", psi, {});
    bool r = down(psi, g, avail, budget - 1, [&](Sub s) {
      n->kids = {s.node};
      return k({std::move(s.used), s.slack, n});
    });
    if (r) return true;
  }
  return false;
}

bool Engine::down(const Psi& psi, const FormulaPtr& f,
                  const std::vector<int>& avail, int budget, const K& k) {
  Polarity pol = kernel::polarity(f, bias);
  if (kernel::isLiteral(f) && pol == Polarity::Positive) {
    auto mate = kernel::negate(f);
    for (int id : avail) {
      if (!kernel::equal(slots[id], mate)) continue;
      auto n = mkDown("i1", psi, f);
      n->consumedSlot = id;
      if (k({{id}, false, n})) return true;
    }
    for (const auto& g : psi) {
      if (!kernel::equal(g, mate)) continue;
      auto n = mkDown("i2", psi, f);
      if (k({{}, false, n})) return true;
      break;  // duplicates in Ψ yield the same premise
    }
    return false;
  }
  if (pol == Polarity::Negative) {
    auto n = mkDown("release", psi, f);
    return up(psi, {f}, avail, budget, [&](Sub s) {
      n->kids = {s.node};
      return k({std::move(s.used), s.slack, n});
    });
  }
  switch (f->tag) {
    case Tag::One: {
      auto n = mkDown("one", psi, f);
      return k({{}, false, n});
    }
    case Tag::Zero:
      return false;  // no right rule
    case Tag::Tensor: {
      auto n = mkDown("tensor", psi, f);
      return down(psi, f->left, avail, budget, [&](Sub s1) {
        auto restAvail = minusIds(avail, s1.used);
        return down(psi, f->right, restAvail, budget, [&](Sub s2) {
          n->kids = {s1.node, s2.node};
          n->kidUsed = {s1.used, s2.used};
          n->kidSlack = {static_cast<uint8_t>(s1.slack),
                         static_cast<uint8_t>(s2.slack)};
          return k({unionIds(s1.used, s2.used), s1.slack || s2.slack, n});
        });
      });
    }
    case Tag::Plus: {
      auto nl = mkDown("plus_l", psi, f);
      bool r = down(psi, f->left, avail, budget, [&](Sub s) {
        nl->kids = {s.node};
        return k({std::move(s.used), s.slack, nl});
      });
      if (r) return true;
      auto nr = mkDown("plus_r", psi, f);
      return down(psi, f->right, avail, budget, [&](Sub s) {
        nr->kids = {s.node};
        return k({std::move(s.used), s.slack, nr});
      });
    }
    case Tag::Exists:
      return existsFocus(psi, f, avail, budget, k);
    case Tag::Bang: {
      // Promotion: the premise works in an empty linear context. Slack
      // inside the box cannot absorb outer resources, so it is dropped.
      auto n = mkDown("bang", psi, f);
      return up(psi, {f->left}, {}, budget, [&](Sub s) {
        n->kids = {s.node};
        return k({{}, false, n});
      });
    }
    default:
      throw std::logic_error("down: unhandled formula " + kernel::toString(f));
  }
}

bool Engine::existsFocus(const Psi& psi, const FormulaPtr& f,
                         const std::vector<int>& avail, int budget,
                         const K& k) {
  // Peel the full quantifier prefix; a clause-shaped matrix starts (possibly
  // under tensors and a promotion guard) with a negated atom that determines
  // every prefix variable. Matching it against a stored atom instantiates
  // the whole clause; this is both the instantiation strategy and the
  // relevance filter for theory clauses.
  int metaCount = 0;
  FormulaPtr matrix = f;
  while (matrix->tag == Tag::Exists) {
    matrix = matrix->left;
    ++metaCount;
  }
  FormulaPtr lead = matrix;
  while (lead->tag == Tag::Tensor || lead->tag == Tag::Bang) lead = lead->left;

  // Builds the chain of exists nodes, instantiating outermost-first. Values
  // are plugged verbatim: a value carrying a dangling index is a binder body
  // whose hole lands under exactly the next binder, by clause construction.
  std::function<bool(const FormulaPtr&, int, const std::vector<TermPtr>&,
                     const K&)>
      chain = [&](const FormulaPtr& g, int i, const std::vector<TermPtr>& vals,
                  const K& kk) -> bool {
    if (i < 0) return down(psi, g, avail, budget, kk);
    auto n = mkDown("exists", psi, g);
    auto g2 = kernel::substTermBVar(g->left, 0, vals[i]);
    return chain(g2, i - 1, vals, [&, n](Sub s) {
      n->kids = {s.node};
      return kk({std::move(s.used), s.slack, n});
    });
  };

  if (lead->tag == Tag::Atom && lead->negated) {
    std::set<std::string> seen;
    auto tryCandidate = [&](const FormulaPtr& cand) -> bool {
      if (cand->tag != Tag::Atom || cand->negated || cand->pred != lead->pred ||
          cand->args.size() != lead->args.size())
        return false;
      std::vector<TermPtr> out(metaCount);
      for (size_t i = 0; i < lead->args.size(); ++i)
        if (!kernel::matchTerm(lead->args[i], cand->args[i], metaCount, out))
          return false;
      for (const auto& b : out)
        if (!b) return false;  // prefix variable not determined by the lead
      std::string sig;
      for (const auto& b : out) sig += kernel::toString(b) + "|";
      if (!seen.insert(sig).second) return false;
      return chain(f, metaCount - 1, out, k);
    };
    for (int id : avail)
      if (tryCandidate(slots[id])) return true;
    for (const auto& g : psi)
      if (tryCandidate(g)) return true;
  }

  // Pool fallback: enumerate witnesses for the outermost variable only and
  // recurse; inner quantifiers get another chance at clause matching.
  const auto& pool = (f->sort == VarSort::World) ? worldPool : termPool;
  if (pool.empty()) exhausted = true;  // a witness may exist beyond our pools
  for (const auto& t : pool) {
    auto n = mkDown("exists", psi, f);
    auto inst = kernel::substTermBVar(f->left, 0, t);
    bool r = down(psi, inst, avail, budget, [&](Sub s) {
      n->kids = {s.node};
      return k({std::move(s.used), s.slack, n});
    });
    if (r) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Finalize: assign exact linear contexts top-down. Leftover slots flow
// toward a slack (Top-containing) subtree; the search-side bookkeeping
// guarantees one exists whenever leftovers do.

ProofPtr finalizeNode(const Engine& eng, const SNodePtr& n,
                      const std::vector<int>& delta) {
  auto p = std::make_shared<Proof>();
  p->rule = n->rule;
  p->classical = n->psi;
  p->linear.reserve(delta.size());
  for (int id : delta) p->linear.push_back(eng.slots[id]);
  p->list = n->list;
  p->focus = n->focus;
  if (n->rule == "tensor") {
    auto u1 = n->kidUsed[0];
    auto u2 = n->kidUsed[1];
    auto leftovers = minusIds(delta, unionIds(u1, u2));
    if (!leftovers.empty()) {
      if (n->kidSlack[0])
        u1 = unionIds(u1, leftovers);
      else
        u2 = unionIds(u2, leftovers);
    }
    p->premises.push_back(finalizeNode(eng, n->kids[0], u1));
    p->premises.push_back(finalizeNode(eng, n->kids[1], u2));
  } else if (n->rule == "with") {
    p->premises.push_back(finalizeNode(eng, n->kids[0], delta));
    p->premises.push_back(finalizeNode(eng, n->kids[1], delta));
  } else if (n->rule == "store") {
    std::vector<int> d2 = unionIds(delta, {n->storedSlot});
    p->premises.push_back(finalizeNode(eng, n->kids[0], d2));
  } else if (n->rule == "d1") {
    std::vector<int> d2 = minusIds(delta, {n->consumedSlot});
    p->premises.push_back(finalizeNode(eng, n->kids[0], d2));
  } else if (n->rule == "bang") {
    p->premises.push_back(finalizeNode(eng, n->kids[0], {}));
  } else {
    for (const auto& kid : n->kids)
      p->premises.push_back(finalizeNode(eng, kid, delta));
  }
  return p;
}

void collectPoolTerms(const FormulaPtr& f, std::vector<TermPtr>& out) {
  switch (f->tag) {
    case Tag::Atom:
      for (const auto& a : f->args) kernel::collectClosedSubterms(a, out);
      return;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      collectPoolTerms(f->left, out);
      collectPoolTerms(f->right, out);
      return;
    case Tag::Bang:
    case Tag::Quest:
    case Tag::Forall:
    case Tag::Exists:
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
    case Tag::Mu:
    case Tag::Nu:
      collectPoolTerms(f->left, out);
      return;
    default:
      return;
  }
}

bool worldHead(const TermPtr& t) {
  return t->kind == Term::Kind::Fun && t->name.rfind("w_", 0) == 0;
}

bool reservedHead(const TermPtr& t) {
  if (t->kind != Term::Kind::Fun) return false;
  return t->name.rfind("w_", 0) == 0 || t->name.rfind("h_", 0) == 0 ||
         t->name == "jdg";
}

void sortDedupe(std::vector<TermPtr>& pool, size_t cap) {
  std::sort(pool.begin(), pool.end(), [](const TermPtr& a, const TermPtr& b) {
    return kernel::toString(a) < kernel::toString(b);
  });
  pool.erase(std::unique(pool.begin(), pool.end(),
                         [](const TermPtr& a, const TermPtr& b) {
                           return kernel::equal(a, b);
                         }),
             pool.end());
  if (pool.size() > cap) pool.resize(cap);
}

}  // namespace

Result prove_llf(const std::vector<FormulaPtr>& classical,
                 const std::vector<FormulaPtr>& linear,
                 const std::vector<FormulaPtr>& goal, const Options& opt) {
  for (const auto* group : {&classical, &linear, &goal})
    for (const auto& f : *group)
      if (!kernel::plainLL(f))
        throw std::invalid_argument(
            "prove_llf: formula outside the plain fragment: " +
            kernel::toString(f));

  Engine eng;
  eng.bias = opt.bias;
  eng.maxSteps = opt.steps;
  eng.maxLive = opt.nest;
  for (const auto& f : linear) eng.slots.push_back(f);

  std::vector<TermPtr> found;
  for (const auto* group : {&classical, &linear, &goal})
    for (const auto& f : *group) collectPoolTerms(f, found);
  for (const auto& t : found) {
    if (worldHead(t) || t->kind == Term::Kind::FVar)
      eng.worldPool.push_back(t);
    if (!reservedHead(t) && t->kind == Term::Kind::Fun)
      eng.termPool.push_back(t);
  }
  sortDedupe(eng.termPool, static_cast<size_t>(opt.poolCap));
  sortDedupe(eng.worldPool, static_cast<size_t>(opt.poolCap));

  std::vector<int> all;
  all.reserve(eng.slots.size());
  for (size_t i = 0; i < eng.slots.size(); ++i)
    all.push_back(static_cast<int>(i));

  Result res;
  auto rootK = [&](Sub s) -> bool {
    if (!s.slack && s.used.size() != all.size())
      return false;  // a linear hypothesis was never consumed
    res.proof = finalizeNode(eng, s.node, all);
    return true;
  };
  bool ok = false;
  util::runWithBigStack(
      [&] { ok = eng.up(classical, goal, all, opt.depth, rootK); });
  res.verdict = ok ? Verdict::Proved
                   : (eng.exhausted ? Verdict::Exhausted : Verdict::NotProvable);
  return res;
}

// ---------------------------------------------------------------------------
// Replay: an independent checker over the finalized proof object. Contexts
// are compared as multisets of formulas; no search-side bookkeeping is
// trusted.

namespace {

std::vector<std::string> sortedKeys(const std::vector<FormulaPtr>& v) {
  std::vector<std::string> ks;
  ks.reserve(v.size());
  for (const auto& f : v) ks.push_back(kernel::key(f));
  std::sort(ks.begin(), ks.end());
  return ks;
}

bool sameMultiset(const std::vector<FormulaPtr>& a,
                  const std::vector<FormulaPtr>& b) {
  return sortedKeys(a) == sortedKeys(b);
}

// b == a + {extra}
bool plusOne(const std::vector<FormulaPtr>& a, const FormulaPtr& extra,
             const std::vector<FormulaPtr>& b) {
  auto ka = sortedKeys(a);
  auto kb = sortedKeys(b);
  auto ke = kernel::key(extra);
  auto it = std::lower_bound(ka.begin(), ka.end(), ke);
  ka.insert(it, ke);
  return ka == kb;
}

bool occursFVarTerm(const TermPtr& t, const std::string& name) {
  if (t->kind == Term::Kind::FVar) return t->name == name;
  if (t->kind == Term::Kind::Fun)
    for (const auto& a : t->args)
      if (occursFVarTerm(a, name)) return true;
  return false;
}

bool occursFVar(const FormulaPtr& f, const std::string& name) {
  switch (f->tag) {
    case Tag::Atom:
      for (const auto& a : f->args)
        if (occursFVarTerm(a, name)) return true;
      return false;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      return occursFVar(f->left, name) || occursFVar(f->right, name);
    case Tag::Bang:
    case Tag::Quest:
    case Tag::Forall:
    case Tag::Exists:
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
    case Tag::Mu:
    case Tag::Nu:
      return occursFVar(f->left, name);
    default:
      return false;
  }
}

struct ReplayError {
  std::string msg;
};

[[noreturn]] void fail(const std::string& rule, const std::string& msg) {
  throw ReplayError{"[" + rule + "] " + msg};
}

void checkNode(const Proof& p, Polarity bias);

const Proof& onlyKid(const Proof& p) {
  if (p.premises.size() != 1) fail(p.rule, "expected exactly one premise");
  return *p.premises[0];
}

FormulaPtr activeOf(const Proof& p) {
  if (p.focus || p.list.empty()) fail(p.rule, "no active formula");
  return p.list.back();
}

std::vector<FormulaPtr> dropActive(const Proof& p) {
  return {p.list.begin(), p.list.end() - 1};
}

bool sameList(const std::vector<FormulaPtr>& a,
              const std::vector<FormulaPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!kernel::equal(a[i], b[i])) return false;
  return true;
}

// kid continues the up phase with `expectList`, same Ψ and Δ
void checkUpStep(const Proof& p, const Proof& kid,
                 const std::vector<FormulaPtr>& expectList) {
  if (kid.focus) fail(p.rule, "premise must be an up-phase sequent");
  if (!sameMultiset(kid.classical, p.classical))
    fail(p.rule, "classical context changed");
  if (!sameMultiset(kid.linear, p.linear))
    fail(p.rule, "linear context changed");
  if (!sameList(kid.list, expectList)) fail(p.rule, "wrong premise list");
}

void checkNode(const Proof& p, Polarity bias) {
  const std::string& r = p.rule;
  if (r == "bot") {
    auto f = activeOf(p);
    if (f->tag != Tag::Bot) fail(r, "active formula mismatch");
    checkUpStep(p, onlyKid(p), dropActive(p));
  } else if (r == "par") {
    auto f = activeOf(p);
    if (f->tag != Tag::Par) fail(r, "active formula mismatch");
    auto l = dropActive(p);
    l.push_back(f->left);
    l.push_back(f->right);
    checkUpStep(p, onlyKid(p), l);
  } else if (r == "quest") {
    auto f = activeOf(p);
    if (f->tag != Tag::Quest || f->label.isVar() ||
        f->label.name != kernel::kClassicalLabel)
      fail(r, "active formula mismatch");
    const Proof& kid = onlyKid(p);
    if (kid.focus) fail(r, "premise must be an up-phase sequent");
    if (!plusOne(p.classical, f->left, kid.classical))
      fail(r, "premise classical context must gain the stored formula");
    if (!sameMultiset(kid.linear, p.linear)) fail(r, "linear context changed");
    if (!sameList(kid.list, dropActive(p))) fail(r, "wrong premise list");
  } else if (r == "top") {
    auto f = activeOf(p);
    if (f->tag != Tag::Top) fail(r, "active formula mismatch");
    if (!p.premises.empty()) fail(r, "leaf rule has no premises");
  } else if (r == "with") {
    auto f = activeOf(p);
    if (f->tag != Tag::With) fail(r, "active formula mismatch");
    if (p.premises.size() != 2) fail(r, "expected two premises");
    auto la = dropActive(p);
    la.push_back(f->left);
    auto lb = dropActive(p);
    lb.push_back(f->right);
    checkUpStep(p, *p.premises[0], la);
    checkUpStep(p, *p.premises[1], lb);
  } else if (r == "forall") {
    auto f = activeOf(p);
    if (f->tag != Tag::Forall) fail(r, "active formula mismatch");
    const Proof& kid = onlyKid(p);
    if (kid.focus || kid.list.empty()) fail(r, "bad premise shape");
    std::vector<TermPtr> out(1);
    if (!kernel::matchFormula(f->left, kid.list.back(), 1, out))
      fail(r, "premise is not an instance of the binder body");
    TermPtr w = out[0] ? out[0] : kernel::fvar("_unused");
    if (!kernel::equal(kernel::substTermBVar(f->left, 0, w), kid.list.back()))
      fail(r, "premise is not an instance of the binder body");
    if (out[0]) {
      if (out[0]->kind != Term::Kind::FVar)
        fail(r, "eigenvariable must be a fresh name");
      const std::string& name = out[0]->name;
      for (const auto& g : p.classical)
        if (occursFVar(g, name)) fail(r, "eigenvariable not fresh");
      for (const auto& g : p.linear)
        if (occursFVar(g, name)) fail(r, "eigenvariable not fresh");
      for (const auto& g : dropActive(p))
        if (occursFVar(g, name)) fail(r, "eigenvariable not fresh");
    }
    auto l = dropActive(p);
    l.push_back(kid.list.back());
    checkUpStep(p, kid, l);
  } else if (r == "store") {
    auto f = activeOf(p);
    if (!storable(f, bias)) fail(r, "only positives and literals are stored");
    const Proof& kid = onlyKid(p);
    if (kid.focus) fail(r, "premise must be an up-phase sequent");
    if (!sameMultiset(kid.classical, p.classical))
      fail(r, "classical context changed");
    if (!plusOne(p.linear, f, kid.linear))
      fail(r, "premise linear context must gain the stored formula");
    if (!sameList(kid.list, dropActive(p))) fail(r, "wrong premise list");
  } else if (r == "d1") {
    if (p.focus || !p.list.empty()) fail(r, "decide needs an empty list");
    const Proof& kid = onlyKid(p);
    if (!kid.focus) fail(r, "premise must be focused");
    if (!decidable(kid.focus, bias))
      fail(r, "decide may not focus a context-mate literal");
    if (!sameMultiset(kid.classical, p.classical))
      fail(r, "classical context changed");
    if (!plusOne(kid.linear, kid.focus, p.linear))
      fail(r, "focus must be taken from the linear context");
  } else if (r == "d2") {
    if (p.focus || !p.list.empty()) fail(r, "decide needs an empty list");
    const Proof& kid = onlyKid(p);
    if (!kid.focus) fail(r, "premise must be focused");
    if (!decidable(kid.focus, bias))
      fail(r, "decide may not focus a context-mate literal");
    bool inPsi = false;
    for (const auto& g : p.classical)
      if (kernel::equal(g, kid.focus)) {
        inPsi = true;
        break;
      }
    if (!inPsi) fail(r, "focus must occur in the classical context");
    if (!sameMultiset(kid.classical, p.classical))
      fail(r, "classical context changed");
    if (!sameMultiset(kid.linear, p.linear)) fail(r, "linear context changed");
  } else if (r == "i1") {
    if (!p.focus || !kernel::isLiteral(p.focus) ||
        kernel::polarity(p.focus, bias) != Polarity::Positive)
      fail(r, "focus must be a positive literal");
    if (!p.premises.empty()) fail(r, "leaf rule has no premises");
    if (p.linear.size() != 1 ||
        !kernel::equal(p.linear[0], kernel::negate(p.focus)))
      fail(r, "linear context must be exactly the dual literal");
  } else if (r == "i2") {
    if (!p.focus || !kernel::isLiteral(p.focus) ||
        kernel::polarity(p.focus, bias) != Polarity::Positive)
      fail(r, "focus must be a positive literal");
    if (!p.premises.empty()) fail(r, "leaf rule has no premises");
    if (!p.linear.empty()) fail(r, "linear context must be empty");
    bool inPsi = false;
    auto mate = kernel::negate(p.focus);
    for (const auto& g : p.classical)
      if (kernel::equal(g, mate)) {
        inPsi = true;
        break;
      }
    if (!inPsi) fail(r, "dual literal must occur in the classical context");
  } else if (r == "one") {
    if (!p.focus || p.focus->tag != Tag::One) fail(r, "focus mismatch");
    if (!p.premises.empty()) fail(r, "leaf rule has no premises");
    if (!p.linear.empty()) fail(r, "linear context must be empty");
  } else if (r == "tensor") {
    if (!p.focus || p.focus->tag != Tag::Tensor) fail(r, "focus mismatch");
    if (p.premises.size() != 2) fail(r, "expected two premises");
    const Proof& a = *p.premises[0];
    const Proof& b = *p.premises[1];
    if (!a.focus || !kernel::equal(a.focus, p.focus->left) || !b.focus ||
        !kernel::equal(b.focus, p.focus->right))
      fail(r, "premise foci mismatch");
    if (!sameMultiset(a.classical, p.classical) ||
        !sameMultiset(b.classical, p.classical))
      fail(r, "classical context changed");
    auto merged = a.linear;
    merged.insert(merged.end(), b.linear.begin(), b.linear.end());
    if (!sameMultiset(merged, p.linear))
      fail(r, "premise contexts must split the conclusion exactly");
  } else if (r == "plus_l" || r == "plus_r") {
    if (!p.focus || p.focus->tag != Tag::Plus) fail(r, "focus mismatch");
    const Proof& kid = onlyKid(p);
    auto want = (r == "plus_l") ? p.focus->left : p.focus->right;
    if (!kid.focus || !kernel::equal(kid.focus, want))
      fail(r, "premise focus mismatch");
    if (!sameMultiset(kid.classical, p.classical) ||
        !sameMultiset(kid.linear, p.linear))
      fail(r, "context changed");
  } else if (r == "exists") {
    if (!p.focus || p.focus->tag != Tag::Exists) fail(r, "focus mismatch");
    const Proof& kid = onlyKid(p);
    if (!kid.focus) fail(r, "premise must be focused");
    std::vector<TermPtr> out(1);
    TermPtr w;
    if (kernel::matchFormula(p.focus->left, kid.focus, 1, out) && out[0])
      w = out[0];
    else
      w = kernel::fvar("_unused");
    if (!kernel::equal(kernel::substTermBVar(p.focus->left, 0, w), kid.focus))
      fail(r, "premise is not an instance of the binder body");
    if (!sameMultiset(kid.classical, p.classical) ||
        !sameMultiset(kid.linear, p.linear))
      fail(r, "context changed");
  } else if (r == "bang") {
    if (!p.focus || p.focus->tag != Tag::Bang || p.focus->label.isVar() ||
        p.focus->label.name != kernel::kClassicalLabel)
      fail(r, "focus mismatch");
    if (!p.linear.empty())
      fail(r, "promotion requires an empty linear context");
    const Proof& kid = onlyKid(p);
    if (kid.focus) fail(r, "premise must be an up-phase sequent");
    if (!kid.linear.empty()) fail(r, "premise linear context must be empty");
    if (!sameMultiset(kid.classical, p.classical))
      fail(r, "classical context changed");
    if (kid.list.size() != 1 || !kernel::equal(kid.list[0], p.focus->left))
      fail(r, "premise list must be the boxed body");
  } else if (r == "release") {
    if (!p.focus || kernel::polarity(p.focus, bias) != Polarity::Negative)
      fail(r, "release needs a negative focus");
    const Proof& kid = onlyKid(p);
    if (kid.focus) fail(r, "premise must be an up-phase sequent");
    if (!sameMultiset(kid.classical, p.classical) ||
        !sameMultiset(kid.linear, p.linear))
      fail(r, "context changed");
    if (kid.list.size() != 1 || !kernel::equal(kid.list[0], p.focus))
      fail(r, "premise list must contain exactly the released formula");
  } else {
    fail(r, "unknown rule");
  }
  for (const auto& kid : p.premises) checkNode(*kid, bias);
}

}  // namespace

bool replay(const ProofPtr& p, Polarity bias, std::string* error) {
  if (!p) {
    if (error) *error = "null proof";
    return false;
  }
  try {
    checkNode(*p, bias);
    return true;
  } catch (const ReplayError& e) {
    if (error) *error = e.msg;
    return false;
  }
}

namespace {

void writeProof(std::ostringstream& os, const Proof& p) {
  os << "(rule " << p.rule << " (seq (psi";
  for (const auto& f : p.classical) os << " " << kernel::toString(f) << " ;";
  os << ") (delta";
  for (const auto& f : p.linear) os << " " << kernel::toString(f) << " ;";
  os << ") ";
  if (p.focus) {
    os << "(down " << kernel::toString(p.focus) << ")";
  } else {
    os << "(up";
    for (const auto& f : p.list) os << " " << kernel::toString(f) << " ;";
    os << ")";
  }
  os << ")";
  for (const auto& kid : p.premises) {
    os << " ";
    writeProof(os, *kid);
  }
  os << ")";
}

}  // namespace

std::string serialize(const ProofPtr& p) {
  if (!p) return "()";
  std::ostringstream os;
  writeProof(os, *p);
  return os.str();
}

int decideDepth(const ProofPtr& p) {
  if (!p) return 0;
  int best = 0;
  for (const auto& kid : p->premises) best = std::max(best, decideDepth(kid));
  return best + ((p->rule == "d1" || p->rule == "d2") ? 1 : 0);
}

}  // namespace wb::llf
