#include "wb/hyll/engine.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "wb/kernel/term.hpp"
#include "wb/util/bigstack.hpp"

namespace wb::hyll {
namespace {

using kernel::Domain;
using kernel::HTag;
using kernel::HyllJudgment;
using kernel::HyllPtr;
using kernel::TermPtr;
using kernel::WorldPtr;

// ---------------------------------------------------------------------------
// Judgment normalization and keys
// ---------------------------------------------------------------------------

// Every judgment the search touches goes through here: the world is put in
// canonical form and a bounded world quantifier whose bound became closed is
// expanded into the finite conjunction it abbreviates.
HyllJudgment normJudgment(const HyllJudgment& j, const Domain& dom) {
  HyllPtr f = j.formula;
  while (f && f->tag == HTag::ForallWBelow) {
    HyllPtr e = kernel::expandBelow(f, dom);
    if (e.get() == f.get()) break;  // bound still open, nothing to expand
    f = e;
  }
  return {f, kernel::normalizeWorld(j.world, dom)};
}

std::string jkey(const HyllJudgment& j) {
  return kernel::key(j.formula) + " @ " + kernel::toString(j.world);
}

std::vector<std::string> sortedKeys(const std::vector<HyllJudgment>& js) {
  std::vector<std::string> ks;
  ks.reserve(js.size());
  for (const auto& j : js) ks.push_back(jkey(j));
  std::sort(ks.begin(), ks.end());
  return ks;
}

// ---------------------------------------------------------------------------
// Occurrence scans (eigenvariable freshness)
// ---------------------------------------------------------------------------

bool termHasFVar(const TermPtr& t, const std::string& name) {
  if (!t) return false;
  if (t->kind == kernel::Term::Kind::FVar) return t->name == name;
  for (const auto& a : t->args)
    if (termHasFVar(a, name)) return true;
  return false;
}

bool worldHasFVar(const WorldPtr& w, const std::string& name) {
  if (!w) return false;
  if (w->kind == kernel::WorldExpr::Kind::FVar) return w->name == name;
  if (w->kind == kernel::WorldExpr::Kind::Dot)
    return worldHasFVar(w->a, name) || worldHasFVar(w->b, name);
  return false;
}

bool worldHasBVar(const WorldPtr& w) {
  if (!w) return false;
  if (w->kind == kernel::WorldExpr::Kind::BVar) return true;
  if (w->kind == kernel::WorldExpr::Kind::Dot)
    return worldHasBVar(w->a) || worldHasBVar(w->b);
  return false;
}

bool formulaHasTermFVar(const HyllPtr& f, const std::string& name) {
  if (!f) return false;
  for (const auto& a : f->args)
    if (termHasFVar(a, name)) return true;
  return formulaHasTermFVar(f->left, name) ||
         formulaHasTermFVar(f->right, name);
}

bool formulaHasWorldFVar(const HyllPtr& f, const std::string& name) {
  if (!f) return false;
  if (f->world && worldHasFVar(f->world, name)) return true;
  return formulaHasWorldFVar(f->left, name) ||
         formulaHasWorldFVar(f->right, name);
}

bool judgmentHasTermFVar(const HyllJudgment& j, const std::string& name) {
  return formulaHasTermFVar(j.formula, name);
}

bool judgmentHasWorldFVar(const HyllJudgment& j, const std::string& name) {
  return worldHasFVar(j.world, name) || formulaHasWorldFVar(j.formula, name);
}

// Collectors used to seed the fresh-name counter past anything already in
// the input sequent.
void collectTermFVarNames(const TermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->kind == kernel::Term::Kind::FVar) out.insert(t->name);
  for (const auto& a : t->args) collectTermFVarNames(a, out);
}

void collectWorldFVarNames(const WorldPtr& w, std::set<std::string>& out) {
  if (!w) return;
  if (w->kind == kernel::WorldExpr::Kind::FVar) out.insert(w->name);
  if (w->kind == kernel::WorldExpr::Kind::Dot) {
    collectWorldFVarNames(w->a, out);
    collectWorldFVarNames(w->b, out);
  }
}

void collectFormulaFVarNames(const HyllPtr& f, std::set<std::string>& out) {
  if (!f) return;
  for (const auto& a : f->args) collectTermFVarNames(a, out);
  if (f->world) collectWorldFVarNames(f->world, out);
  collectFormulaFVarNames(f->left, out);
  collectFormulaFVarNames(f->right, out);
}

// ---------------------------------------------------------------------------
// Witness pools
// ---------------------------------------------------------------------------

void poolTermsFromFormula(const HyllPtr& f, std::vector<TermPtr>& out) {
  if (!f) return;
  for (const auto& a : f->args) kernel::collectClosedSubterms(a, out);
  poolTermsFromFormula(f->left, out);
  poolTermsFromFormula(f->right, out);
}

void poolWorldsFromFormula(const HyllPtr& f, std::vector<WorldPtr>& out) {
  if (!f) return;
  if (f->world && !worldHasBVar(f->world)) out.push_back(f->world);
  poolWorldsFromFormula(f->left, out);
  poolWorldsFromFormula(f->right, out);
}

// ---------------------------------------------------------------------------
// Search engine
// ---------------------------------------------------------------------------

struct GammaEntry {
  HyllJudgment j;
  std::string key;
  int copiesLeft;
};

using Gamma = std::vector<GammaEntry>;
using Delta = std::vector<HyllJudgment>;

// Linear contexts stay small in practice; splitting rules enumerate subsets
// by bitmask, so put a hard ceiling on what we are willing to split.
constexpr size_t kMaxSplit = 16;

struct Engine {
  Options opt;
  long steps = 0;
  bool exhausted = false;
  int eigenCounter = 0;

  // States that failed after a full exploration of their alternatives.
  // Budgets are part of the key, so a retry with more copies left is not
  // shadowed by an earlier failure. The cache lives for one query only.
  std::unordered_map<std::string, char> failed;
  // Key cache for formulas. The engine builds fresh nodes on substitution,
  // so cached pointers are pinned to keep them from being recycled.
  std::unordered_map<const kernel::HyllFormula*, std::string> keyCache;
  std::vector<HyllPtr> pins;

  HyllJudgment norm(const HyllJudgment& j) const {
    return normJudgment(j, opt.domain);
  }

  const std::string& fkey(const HyllPtr& f) {
    auto it = keyCache.find(f.get());
    if (it != keyCache.end()) return it->second;
    pins.push_back(f);
    return keyCache.emplace(f.get(), kernel::key(f)).first->second;
  }

  std::string stateKey(const Gamma& gamma, const Delta& delta,
                       const HyllJudgment& goal) {
    std::vector<std::string> gs;
    gs.reserve(gamma.size());
    for (const auto& e : gamma)
      gs.push_back(e.key + ":" + std::to_string(e.copiesLeft));
    std::sort(gs.begin(), gs.end());
    std::vector<std::string> ds;
    ds.reserve(delta.size());
    for (const auto& j : delta)
      ds.push_back(fkey(j.formula) + "@" + kernel::toString(j.world));
    std::sort(ds.begin(), ds.end());
    std::string out;
    for (const auto& s : gs) {
      out += s;
      out += '|';
    }
    out += '#';
    for (const auto& s : ds) {
      out += s;
      out += '|';
    }
    out += '#';
    out += fkey(goal.formula) + "@" + kernel::toString(goal.world);
    return out;
  }

  std::string freshName(const char* prefix) {
    return std::string(prefix) + std::to_string(++eigenCounter);
  }

  std::vector<kernel::HyllJudgment> plainGamma(const Gamma& g) const {
    std::vector<kernel::HyllJudgment> out;
    out.reserve(g.size());
    for (const auto& e : g) out.push_back(e.j);
    return out;
  }

  ProofPtr node(std::string rule, const Gamma& g, const Delta& d,
                const HyllJudgment& goal, int principal,
                std::vector<ProofPtr> premises) const {
    auto p = std::make_shared<Proof>();
    p->rule = std::move(rule);
    p->gamma = plainGamma(g);
    p->linear = d;
    p->goal = goal;
    p->principal = principal;
    p->premises = std::move(premises);
    return p;
  }

  // All candidate instantiations for a term quantifier: closed subterms of
  // atom arguments anywhere in the sequent, deduplicated, in print order.
  std::vector<TermPtr> termPool(const Gamma& g, const Delta& d,
                                const HyllJudgment& goal) const {
    std::vector<TermPtr> raw;
    for (const auto& e : g) poolTermsFromFormula(e.j.formula, raw);
    for (const auto& j : d) poolTermsFromFormula(j.formula, raw);
    poolTermsFromFormula(goal.formula, raw);
    std::map<std::string, TermPtr> dedup;
    for (const auto& t : raw) dedup.emplace(kernel::toString(t), t);
    std::vector<TermPtr> out;
    for (auto& kv : dedup) {
      if ((int)out.size() >= opt.poolCap) break;
      out.push_back(kv.second);
    }
    return out;
  }

  // Candidate worlds: everything occurring in the sequent (judgment worlds
  // and annotation worlds without loose indices), iota, and products and
  // differences of the closed occurrences. Closed candidates sort before
  // eigenvariable-bearing ones so concrete witnesses are tried first.
  std::vector<WorldPtr> worldPool(const Gamma& g, const Delta& d,
                                  const HyllJudgment& goal) const {
    std::vector<WorldPtr> raw;
    auto takeJudgment = [&](const HyllJudgment& j) {
      raw.push_back(j.world);
      poolWorldsFromFormula(j.formula, raw);
    };
    for (const auto& e : g) takeJudgment(e.j);
    for (const auto& j : d) takeJudgment(j);
    takeJudgment(goal);
    raw.push_back(kernel::wiota());

    std::vector<WorldPtr> base;
    std::set<std::string> seen;
    for (const auto& w : raw) {
      WorldPtr n = kernel::normalizeWorld(w, opt.domain);
      if (seen.insert(kernel::toString(n)).second) base.push_back(n);
    }
    std::vector<WorldPtr> closed;
    for (const auto& w : base)
      if (kernel::closedWorld(w)) closed.push_back(w);
    std::vector<WorldPtr> extra;
    for (const auto& a : closed) {
      for (const auto& b : closed) {
        extra.push_back(
            kernel::normalizeWorld(kernel::wdot(a, b), opt.domain));
        auto diff = kernel::worldDifference(a, b, opt.domain);
        if (diff) extra.push_back(*diff);
      }
    }
    for (const auto& w : extra)
      if (seen.insert(kernel::toString(w)).second) base.push_back(w);

    std::stable_sort(base.begin(), base.end(),
                     [](const WorldPtr& a, const WorldPtr& b) {
                       bool ca = kernel::closedWorld(a);
                       bool cb = kernel::closedWorld(b);
                       if (ca != cb) return ca;
                       return kernel::toString(a) < kernel::toString(b);
                     });
    if ((int)base.size() > opt.poolCap) base.resize(opt.poolCap);
    return base;
  }

  // Replaces position i by the given judgments (normalized), keeping the
  // rest of the context in order.
  Delta replaceAt(const Delta& d, size_t i,
                  std::initializer_list<HyllJudgment> js) const {
    Delta out;
    out.reserve(d.size() + js.size());
    for (size_t k = 0; k < d.size(); ++k) {
      if (k == i) {
        for (const auto& j : js) out.push_back(norm(j));
      } else {
        out.push_back(d[k]);
      }
    }
    if (i >= d.size())
      for (const auto& j : js) out.push_back(norm(j));
    return out;
  }

  ProofPtr prove(const Gamma& gamma, const Delta& delta,
                 const HyllJudgment& goal) {
    if (++steps > opt.steps) {
      exhausted = true;
      return nullptr;
    }
    std::string sk = stateKey(gamma, delta, goal);
    if (failed.count(sk)) return nullptr;
    ProofPtr p = proveCore(gamma, delta, goal);
    if (!p) failed.emplace(std::move(sk), 1);
    return p;
  }

  ProofPtr proveCore(const Gamma& gamma, const Delta& delta,
                     const HyllJudgment& goal) {
    const HyllPtr& gf = goal.formula;

    // Terminal rules.
    if (gf->tag == HTag::Top)
      return node("top_r", gamma, delta, goal, -1, {});
    for (size_t i = 0; i < delta.size(); ++i)
      if (delta[i].formula->tag == HTag::Zero)
        return node("zero_l", gamma, delta, goal, (int)i, {});
    if (gf->tag == HTag::Atom && delta.size() == 1 &&
        delta[0].formula->tag == HTag::Atom &&
        kernel::equal(delta[0].formula, gf) &&
        kernel::equal(delta[0].world, goal.world))
      return node("init", gamma, delta, goal, 0, {});
    if (gf->tag == HTag::One && delta.empty())
      return node("one_r", gamma, delta, goal, -1, {});

    // Invertible left rules: apply the first one available and commit.
    for (size_t i = 0; i < delta.size(); ++i) {
      const HyllPtr& f = delta[i].formula;
      const WorldPtr& u = delta[i].world;
      switch (f->tag) {
        case HTag::Tensor: {
          Delta d2 = replaceAt(delta, i, {{f->left, u}, {f->right, u}});
          ProofPtr q = prove(gamma, d2, goal);
          if (!q) return nullptr;
          return node("tensor_l", gamma, delta, goal, (int)i, {q});
        }
        case HTag::One: {
          Delta d2 = replaceAt(delta, i, {});
          ProofPtr q = prove(gamma, d2, goal);
          if (!q) return nullptr;
          return node("one_l", gamma, delta, goal, (int)i, {q});
        }
        case HTag::Plus: {
          Delta dl = replaceAt(delta, i, {{f->left, u}});
          ProofPtr ql = prove(gamma, dl, goal);
          if (!ql) return nullptr;
          Delta dr = replaceAt(delta, i, {{f->right, u}});
          ProofPtr qr = prove(gamma, dr, goal);
          if (!qr) return nullptr;
          return node("plus_l", gamma, delta, goal, (int)i, {ql, qr});
        }
        case HTag::ExistsT: {
          std::string e = freshName("_e");
          Delta d2 = replaceAt(
              delta, i, {{kernel::substTerm(f->left, 0, kernel::fvar(e)), u}});
          ProofPtr q = prove(gamma, d2, goal);
          if (!q) return nullptr;
          ProofPtr n = node("exists_l", gamma, delta, goal, (int)i, {q});
          n->eigen = e;
          return n;
        }
        case HTag::ExistsW: {
          std::string e = freshName("_w");
          Delta d2 = replaceAt(
              delta, i,
              {{kernel::substWorld(f->left, 0, kernel::wfvar(e), opt.domain),
                u}});
          ProofPtr q = prove(gamma, d2, goal);
          if (!q) return nullptr;
          ProofPtr n = node("exists_l", gamma, delta, goal, (int)i, {q});
          n->eigen = e;
          return n;
        }
        case HTag::Bang: {
          HyllJudgment moved = norm({f->left, u});
          std::string mk = jkey(moved);
          Gamma g2 = gamma;
          bool present = false;
          for (const auto& e : g2)
            if (e.key == mk) {
              present = true;
              break;
            }
          if (!present) g2.push_back({moved, mk, opt.depth});
          Delta d2 = replaceAt(delta, i, {});
          ProofPtr q = prove(g2, d2, goal);
          if (!q) return nullptr;
          return node("bang_l", gamma, delta, goal, (int)i, {q});
        }
        case HTag::At: {
          Delta d2 = replaceAt(delta, i, {{f->left, f->world}});
          ProofPtr q = prove(gamma, d2, goal);
          if (!q) return nullptr;
          return node("at_l", gamma, delta, goal, (int)i, {q});
        }
        case HTag::Down: {
          Delta d2 =
              replaceAt(delta, i, {{kernel::substWorld(f->left, 0, u,
                                                       opt.domain),
                                    u}});
          ProofPtr q = prove(gamma, d2, goal);
          if (!q) return nullptr;
          return node("down_l", gamma, delta, goal, (int)i, {q});
        }
        default:
          break;
      }
    }

    // Invertible right rules.
    switch (gf->tag) {
      case HTag::Limp: {
        Delta d2 = delta;
        d2.push_back(norm({gf->left, goal.world}));
        ProofPtr q = prove(gamma, d2, norm({gf->right, goal.world}));
        if (!q) return nullptr;
        return node("limp_r", gamma, delta, goal, -1, {q});
      }
      case HTag::With: {
        ProofPtr ql = prove(gamma, delta, norm({gf->left, goal.world}));
        if (!ql) return nullptr;
        ProofPtr qr = prove(gamma, delta, norm({gf->right, goal.world}));
        if (!qr) return nullptr;
        return node("with_r", gamma, delta, goal, -1, {ql, qr});
      }
      case HTag::ForallT: {
        std::string e = freshName("_e");
        ProofPtr q = prove(
            gamma, delta,
            norm({kernel::substTerm(gf->left, 0, kernel::fvar(e)),
                  goal.world}));
        if (!q) return nullptr;
        ProofPtr n = node("forall_r", gamma, delta, goal, -1, {q});
        n->eigen = e;
        return n;
      }
      case HTag::ForallW: {
        std::string e = freshName("_w");
        ProofPtr q =
            prove(gamma, delta,
                  norm({kernel::substWorld(gf->left, 0, kernel::wfvar(e),
                                           opt.domain),
                        goal.world}));
        if (!q) return nullptr;
        ProofPtr n = node("forall_r", gamma, delta, goal, -1, {q});
        n->eigen = e;
        return n;
      }
      case HTag::At: {
        ProofPtr q = prove(gamma, delta, norm({gf->left, gf->world}));
        if (!q) return nullptr;
        return node("at_r", gamma, delta, goal, -1, {q});
      }
      case HTag::Down: {
        ProofPtr q =
            prove(gamma, delta,
                  norm({kernel::substWorld(gf->left, 0, goal.world,
                                           opt.domain),
                        goal.world}));
        if (!q) return nullptr;
        return node("down_r", gamma, delta, goal, -1, {q});
      }
      default:
        break;
    }

    // Choice phase: everything below backtracks.
    bool blockedCopy = false;

    if (gf->tag == HTag::Bang && delta.empty()) {
      if (ProofPtr q = prove(gamma, delta, norm({gf->left, goal.world})))
        return node("bang_r", gamma, delta, goal, -1, {q});
    }

    if (gf->tag == HTag::Plus) {
      if (ProofPtr q = prove(gamma, delta, norm({gf->left, goal.world})))
        return node("plus_r1", gamma, delta, goal, -1, {q});
      if (ProofPtr q = prove(gamma, delta, norm({gf->right, goal.world})))
        return node("plus_r2", gamma, delta, goal, -1, {q});
    }

    for (size_t i = 0; i < delta.size(); ++i) {
      if (delta[i].formula->tag != HTag::With) continue;
      const HyllPtr& f = delta[i].formula;
      const WorldPtr& u = delta[i].world;
      if (ProofPtr q = prove(gamma, replaceAt(delta, i, {{f->left, u}}), goal))
        return node("with_l1", gamma, delta, goal, (int)i, {q});
      if (ProofPtr q =
              prove(gamma, replaceAt(delta, i, {{f->right, u}}), goal))
        return node("with_l2", gamma, delta, goal, (int)i, {q});
    }

    if (gf->tag == HTag::ExistsT) {
      auto pool = termPool(gamma, delta, goal);
      if (pool.empty()) exhausted = true;
      for (const auto& t : pool) {
        if (ProofPtr q =
                prove(gamma, delta,
                      norm({kernel::substTerm(gf->left, 0, t), goal.world}))) {
          ProofPtr n = node("exists_r", gamma, delta, goal, -1, {q});
          n->witnessTerm = t;
          return n;
        }
      }
    }
    if (gf->tag == HTag::ExistsW) {
      for (const auto& w : worldPool(gamma, delta, goal)) {
        if (ProofPtr q = prove(gamma, delta,
                               norm({kernel::substWorld(gf->left, 0, w,
                                                        opt.domain),
                                     goal.world}))) {
          ProofPtr n = node("exists_r", gamma, delta, goal, -1, {q});
          n->witnessWorld = w;
          return n;
        }
      }
    }

    for (size_t i = 0; i < delta.size(); ++i) {
      const HyllPtr& f = delta[i].formula;
      const WorldPtr& u = delta[i].world;
      if (f->tag == HTag::ForallT) {
        auto pool = termPool(gamma, delta, goal);
        if (pool.empty()) exhausted = true;
        for (const auto& t : pool) {
          Delta d2 =
              replaceAt(delta, i, {{kernel::substTerm(f->left, 0, t), u}});
          if (ProofPtr q = prove(gamma, d2, goal)) {
            ProofPtr n = node("forall_l", gamma, delta, goal, (int)i, {q});
            n->witnessTerm = t;
            return n;
          }
        }
      } else if (f->tag == HTag::ForallW) {
        for (const auto& w : worldPool(gamma, delta, goal)) {
          Delta d2 = replaceAt(
              delta, i,
              {{kernel::substWorld(f->left, 0, w, opt.domain), u}});
          if (ProofPtr q = prove(gamma, d2, goal)) {
            ProofPtr n = node("forall_l", gamma, delta, goal, (int)i, {q});
            n->witnessWorld = w;
            return n;
          }
        }
      }
    }

    if (gf->tag == HTag::Tensor) {
      if (delta.size() > kMaxSplit) {
        exhausted = true;
      } else {
        size_t n = delta.size();
        for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
          Delta left, right;
          for (size_t k = 0; k < n; ++k)
            (mask >> k & 1 ? left : right).push_back(delta[k]);
          ProofPtr q1 = prove(gamma, left, norm({gf->left, goal.world}));
          if (!q1) continue;
          ProofPtr q2 = prove(gamma, right, norm({gf->right, goal.world}));
          if (!q2) continue;
          return node("tensor_r", gamma, delta, goal, -1, {q1, q2});
        }
      }
    }

    for (size_t i = 0; i < delta.size(); ++i) {
      const HyllPtr& f = delta[i].formula;
      if (f->tag != HTag::Limp) continue;
      const WorldPtr& u = delta[i].world;
      Delta rest;
      for (size_t k = 0; k < delta.size(); ++k)
        if (k != i) rest.push_back(delta[k]);
      if (rest.size() > kMaxSplit) {
        exhausted = true;
        continue;
      }
      size_t n = rest.size();
      for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        Delta arg, keep;
        for (size_t k = 0; k < n; ++k)
          (mask >> k & 1 ? arg : keep).push_back(rest[k]);
        ProofPtr q1 = prove(gamma, arg, norm({f->left, u}));
        if (!q1) continue;
        keep.push_back(norm({f->right, u}));
        ProofPtr q2 = prove(gamma, keep, goal);
        if (!q2) continue;
        return node("limp_l", gamma, delta, goal, (int)i, {q1, q2});
      }
    }

    for (size_t gi = 0; gi < gamma.size(); ++gi) {
      if (gamma[gi].copiesLeft <= 0) {
        blockedCopy = true;
        continue;
      }
      Gamma g2 = gamma;
      --g2[gi].copiesLeft;
      Delta d2 = delta;
      d2.push_back(gamma[gi].j);
      if (ProofPtr q = prove(g2, d2, goal))
        return node("copy", gamma, delta, goal, (int)gi, {q});
    }

    if (blockedCopy) exhausted = true;
    return nullptr;
  }
};

// Multiset helpers for the replay checker.
bool sameMultiset(const std::vector<HyllJudgment>& a,
                  const std::vector<HyllJudgment>& b) {
  return sortedKeys(a) == sortedKeys(b);
}

bool removeOne(std::vector<std::string>& ks, const std::string& k) {
  auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) return false;
  ks.erase(it);
  return true;
}

struct Replayer {
  const Domain& dom;
  std::string err;

  bool fail(const std::string& m) {
    if (err.empty()) err = m;
    return false;
  }

  bool normed(const HyllJudgment& j) {
    HyllJudgment n = normJudgment(j, dom);
    return jkey(n) == jkey(j);
  }

  bool jeq(const HyllJudgment& a, const HyllJudgment& b) {
    return jkey(normJudgment(a, dom)) == jkey(normJudgment(b, dom));
  }

  bool sameGamma(const ProofPtr& p, const ProofPtr& q) {
    std::set<std::string> a, b;
    for (const auto& j : p->gamma) a.insert(jkey(j));
    for (const auto& j : q->gamma) b.insert(jkey(j));
    return a == b;
  }

  // Premise q must carry the conclusion's contexts with position `principal`
  // of the linear zone replaced by `repl`, same unbounded zone, goal as
  // given.
  bool checkReplaced(const ProofPtr& p, const ProofPtr& q,
                     const std::vector<HyllJudgment>& repl,
                     const HyllJudgment& qGoal) {
    if (!sameGamma(p, q)) return fail(p->rule + ": unbounded zone changed");
    if (p->principal < 0 || p->principal >= (int)p->linear.size())
      return fail(p->rule + ": bad principal index");
    std::vector<std::string> want;
    for (size_t k = 0; k < p->linear.size(); ++k)
      if ((int)k != p->principal) want.push_back(jkey(p->linear[k]));
    for (const auto& j : repl) want.push_back(jkey(normJudgment(j, dom)));
    std::sort(want.begin(), want.end());
    if (sortedKeys(q->linear) != want)
      return fail(p->rule + ": linear zone mismatch");
    if (!jeq(q->goal, qGoal)) return fail(p->rule + ": goal mismatch");
    return true;
  }

  bool premiseCount(const ProofPtr& p, size_t n) {
    if (p->premises.size() != n)
      return fail(p->rule + ": expected " + std::to_string(n) + " premises");
    return true;
  }

  bool eigenFreshTerm(const ProofPtr& p) {
    if (p->eigen.empty()) return fail(p->rule + ": missing eigenvariable");
    for (const auto& j : p->gamma)
      if (judgmentHasTermFVar(j, p->eigen))
        return fail(p->rule + ": eigenvariable not fresh");
    for (const auto& j : p->linear)
      if (judgmentHasTermFVar(j, p->eigen))
        return fail(p->rule + ": eigenvariable not fresh");
    if (judgmentHasTermFVar(p->goal, p->eigen))
      return fail(p->rule + ": eigenvariable not fresh");
    return true;
  }

  bool eigenFreshWorld(const ProofPtr& p) {
    if (p->eigen.empty()) return fail(p->rule + ": missing eigenvariable");
    for (const auto& j : p->gamma)
      if (judgmentHasWorldFVar(j, p->eigen))
        return fail(p->rule + ": eigenvariable not fresh");
    for (const auto& j : p->linear)
      if (judgmentHasWorldFVar(j, p->eigen))
        return fail(p->rule + ": eigenvariable not fresh");
    if (judgmentHasWorldFVar(p->goal, p->eigen))
      return fail(p->rule + ": eigenvariable not fresh");
    return true;
  }

  bool check(const ProofPtr& p) {
    if (!p) return fail("null proof node");
    for (const auto& q : p->premises)
      if (!check(q)) return false;
    for (const auto& j : p->linear)
      if (!normed(j)) return fail(p->rule + ": non-normal linear judgment");
    if (!normed(p->goal)) return fail(p->rule + ": non-normal goal");

    const HyllPtr& gf = p->goal.formula;
    const std::string& r = p->rule;

    auto principalFormula = [&]() -> HyllPtr {
      if (p->principal < 0 || p->principal >= (int)p->linear.size())
        return nullptr;
      return p->linear[p->principal].formula;
    };
    auto principalWorld = [&]() -> WorldPtr {
      return p->linear[p->principal].world;
    };

    if (r == "init") {
      if (!premiseCount(p, 0)) return false;
      if (gf->tag != HTag::Atom) return fail("init: goal not atomic");
      if (p->linear.size() != 1)
        return fail("init: linear zone not a single judgment");
      if (!kernel::equal(p->linear[0].formula, gf) ||
          !kernel::equal(p->linear[0].world, p->goal.world))
        return fail("init: judgment does not match goal");
      return true;
    }
    if (r == "top_r") {
      if (!premiseCount(p, 0)) return false;
      if (gf->tag != HTag::Top) return fail("top_r: goal not top");
      return true;
    }
    if (r == "zero_l") {
      if (!premiseCount(p, 0)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::Zero)
        return fail("zero_l: principal not zero");
      return true;
    }
    if (r == "one_r") {
      if (!premiseCount(p, 0)) return false;
      if (gf->tag != HTag::One || !p->linear.empty())
        return fail("one_r: needs unit goal and empty linear zone");
      return true;
    }
    if (r == "one_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::One) return fail("one_l: principal not unit");
      return checkReplaced(p, p->premises[0], {}, p->goal);
    }
    if (r == "tensor_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::Tensor)
        return fail("tensor_l: principal not a tensor");
      WorldPtr u = principalWorld();
      return checkReplaced(p, p->premises[0], {{f->left, u}, {f->right, u}},
                           p->goal);
    }
    if (r == "plus_l") {
      if (!premiseCount(p, 2)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::Plus)
        return fail("plus_l: principal not a plus");
      WorldPtr u = principalWorld();
      return checkReplaced(p, p->premises[0], {{f->left, u}}, p->goal) &&
             checkReplaced(p, p->premises[1], {{f->right, u}}, p->goal);
    }
    if (r == "with_l1" || r == "with_l2") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::With)
        return fail(r + ": principal not a with");
      HyllPtr side = (r == "with_l1") ? f->left : f->right;
      return checkReplaced(p, p->premises[0], {{side, principalWorld()}},
                           p->goal);
    }
    if (r == "exists_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || (f->tag != HTag::ExistsT && f->tag != HTag::ExistsW))
        return fail("exists_l: principal not existential");
      WorldPtr u = principalWorld();
      if (f->tag == HTag::ExistsT) {
        if (!eigenFreshTerm(p)) return false;
        HyllPtr body = kernel::substTerm(f->left, 0, kernel::fvar(p->eigen));
        return checkReplaced(p, p->premises[0], {{body, u}}, p->goal);
      }
      if (!eigenFreshWorld(p)) return false;
      HyllPtr body =
          kernel::substWorld(f->left, 0, kernel::wfvar(p->eigen), dom);
      return checkReplaced(p, p->premises[0], {{body, u}}, p->goal);
    }
    if (r == "forall_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      WorldPtr u = principalWorld();
      if (f && f->tag == HTag::ForallT) {
        if (!p->witnessTerm) return fail("forall_l: missing term witness");
        HyllPtr body = kernel::substTerm(f->left, 0, p->witnessTerm);
        return checkReplaced(p, p->premises[0], {{body, u}}, p->goal);
      }
      if (f && f->tag == HTag::ForallW) {
        if (!p->witnessWorld) return fail("forall_l: missing world witness");
        HyllPtr body = kernel::substWorld(f->left, 0, p->witnessWorld, dom);
        return checkReplaced(p, p->premises[0], {{body, u}}, p->goal);
      }
      return fail("forall_l: principal not universal");
    }
    if (r == "bang_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::Bang)
        return fail("bang_l: principal not banged");
      const ProofPtr& q = p->premises[0];
      HyllJudgment moved = normJudgment({f->left, principalWorld()}, dom);
      std::set<std::string> want;
      for (const auto& j : p->gamma) want.insert(jkey(j));
      want.insert(jkey(moved));
      std::set<std::string> got;
      for (const auto& j : q->gamma) got.insert(jkey(j));
      if (want != got) return fail("bang_l: unbounded zone mismatch");
      std::vector<std::string> lin;
      for (size_t k = 0; k < p->linear.size(); ++k)
        if ((int)k != p->principal) lin.push_back(jkey(p->linear[k]));
      std::sort(lin.begin(), lin.end());
      if (sortedKeys(q->linear) != lin)
        return fail("bang_l: linear zone mismatch");
      if (!jeq(q->goal, p->goal)) return fail("bang_l: goal mismatch");
      return true;
    }
    if (r == "at_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::At)
        return fail("at_l: principal not an at");
      return checkReplaced(p, p->premises[0], {{f->left, f->world}}, p->goal);
    }
    if (r == "down_l") {
      if (!premiseCount(p, 1)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::Down)
        return fail("down_l: principal not a down");
      WorldPtr u = principalWorld();
      HyllPtr body = kernel::substWorld(f->left, 0, u, dom);
      return checkReplaced(p, p->premises[0], {{body, u}}, p->goal);
    }
    if (r == "copy") {
      if (!premiseCount(p, 1)) return false;
      if (p->principal < 0 || p->principal >= (int)p->gamma.size())
        return fail("copy: bad unbounded index");
      const ProofPtr& q = p->premises[0];
      if (!sameGamma(p, q)) return fail("copy: unbounded zone changed");
      std::vector<std::string> want = sortedKeys(p->linear);
      want.push_back(jkey(p->gamma[p->principal]));
      std::sort(want.begin(), want.end());
      if (sortedKeys(q->linear) != want)
        return fail("copy: linear zone mismatch");
      if (!jeq(q->goal, p->goal)) return fail("copy: goal mismatch");
      return true;
    }

    // Right rules: contexts unchanged unless stated.
    auto sameContexts = [&](const ProofPtr& q) {
      if (!sameGamma(p, q)) return fail(r + ": unbounded zone changed");
      if (!sameMultiset(p->linear, q->linear))
        return fail(r + ": linear zone changed");
      return true;
    };

    if (r == "tensor_r") {
      if (!premiseCount(p, 2)) return false;
      if (gf->tag != HTag::Tensor) return fail("tensor_r: goal not a tensor");
      const ProofPtr& q1 = p->premises[0];
      const ProofPtr& q2 = p->premises[1];
      if (!sameGamma(p, q1) || !sameGamma(p, q2))
        return fail("tensor_r: unbounded zone changed");
      std::vector<std::string> merged = sortedKeys(q1->linear);
      for (const auto& k : sortedKeys(q2->linear)) merged.push_back(k);
      std::sort(merged.begin(), merged.end());
      if (merged != sortedKeys(p->linear))
        return fail("tensor_r: split does not cover the linear zone");
      if (!jeq(q1->goal, {gf->left, p->goal.world}) ||
          !jeq(q2->goal, {gf->right, p->goal.world}))
        return fail("tensor_r: premise goals mismatch");
      return true;
    }
    if (r == "limp_r") {
      if (!premiseCount(p, 1)) return false;
      if (gf->tag != HTag::Limp) return fail("limp_r: goal not an arrow");
      const ProofPtr& q = p->premises[0];
      if (!sameGamma(p, q)) return fail("limp_r: unbounded zone changed");
      std::vector<std::string> want = sortedKeys(p->linear);
      want.push_back(jkey(normJudgment({gf->left, p->goal.world}, dom)));
      std::sort(want.begin(), want.end());
      if (sortedKeys(q->linear) != want)
        return fail("limp_r: linear zone mismatch");
      if (!jeq(q->goal, {gf->right, p->goal.world}))
        return fail("limp_r: goal mismatch");
      return true;
    }
    if (r == "limp_l") {
      if (!premiseCount(p, 2)) return false;
      HyllPtr f = principalFormula();
      if (!f || f->tag != HTag::Limp)
        return fail("limp_l: principal not an arrow");
      WorldPtr u = principalWorld();
      const ProofPtr& q1 = p->premises[0];
      const ProofPtr& q2 = p->premises[1];
      if (!sameGamma(p, q1) || !sameGamma(p, q2))
        return fail("limp_l: unbounded zone changed");
      if (!jeq(q1->goal, {f->left, u}))
        return fail("limp_l: argument premise goal mismatch");
      if (!jeq(q2->goal, p->goal)) return fail("limp_l: goal mismatch");
      std::vector<std::string> rhs = sortedKeys(q2->linear);
      if (!removeOne(rhs, jkey(normJudgment({f->right, u}, dom))))
        return fail("limp_l: result judgment missing from premise");
      std::vector<std::string> merged = sortedKeys(q1->linear);
      for (const auto& k : rhs) merged.push_back(k);
      std::vector<std::string> want;
      for (size_t k = 0; k < p->linear.size(); ++k)
        if ((int)k != p->principal) want.push_back(jkey(p->linear[k]));
      std::sort(merged.begin(), merged.end());
      std::sort(want.begin(), want.end());
      if (merged != want)
        return fail("limp_l: split does not cover the linear zone");
      return true;
    }
    if (r == "with_r") {
      if (!premiseCount(p, 2)) return false;
      if (gf->tag != HTag::With) return fail("with_r: goal not a with");
      if (!sameContexts(p->premises[0]) || !sameContexts(p->premises[1]))
        return false;
      if (!jeq(p->premises[0]->goal, {gf->left, p->goal.world}) ||
          !jeq(p->premises[1]->goal, {gf->right, p->goal.world}))
        return fail("with_r: premise goals mismatch");
      return true;
    }
    if (r == "plus_r1" || r == "plus_r2") {
      if (!premiseCount(p, 1)) return false;
      if (gf->tag != HTag::Plus) return fail(r + ": goal not a plus");
      if (!sameContexts(p->premises[0])) return false;
      HyllPtr side = (r == "plus_r1") ? gf->left : gf->right;
      if (!jeq(p->premises[0]->goal, {side, p->goal.world}))
        return fail(r + ": premise goal mismatch");
      return true;
    }
    if (r == "forall_r") {
      if (!premiseCount(p, 1)) return false;
      if (!sameContexts(p->premises[0])) return false;
      if (gf->tag == HTag::ForallT) {
        if (!eigenFreshTerm(p)) return false;
        HyllPtr body = kernel::substTerm(gf->left, 0, kernel::fvar(p->eigen));
        if (!jeq(p->premises[0]->goal, {body, p->goal.world}))
          return fail("forall_r: premise goal mismatch");
        return true;
      }
      if (gf->tag == HTag::ForallW) {
        if (!eigenFreshWorld(p)) return false;
        HyllPtr body =
            kernel::substWorld(gf->left, 0, kernel::wfvar(p->eigen), dom);
        if (!jeq(p->premises[0]->goal, {body, p->goal.world}))
          return fail("forall_r: premise goal mismatch");
        return true;
      }
      return fail("forall_r: goal not universal");
    }
    if (r == "exists_r") {
      if (!premiseCount(p, 1)) return false;
      if (!sameContexts(p->premises[0])) return false;
      if (gf->tag == HTag::ExistsT) {
        if (!p->witnessTerm) return fail("exists_r: missing term witness");
        HyllPtr body = kernel::substTerm(gf->left, 0, p->witnessTerm);
        if (!jeq(p->premises[0]->goal, {body, p->goal.world}))
          return fail("exists_r: premise goal mismatch");
        return true;
      }
      if (gf->tag == HTag::ExistsW) {
        if (!p->witnessWorld) return fail("exists_r: missing world witness");
        HyllPtr body = kernel::substWorld(gf->left, 0, p->witnessWorld, dom);
        if (!jeq(p->premises[0]->goal, {body, p->goal.world}))
          return fail("exists_r: premise goal mismatch");
        return true;
      }
      return fail("exists_r: goal not existential");
    }
    if (r == "bang_r") {
      if (!premiseCount(p, 1)) return false;
      if (gf->tag != HTag::Bang) return fail("bang_r: goal not banged");
      if (!p->linear.empty())
        return fail("bang_r: linear zone must be empty");
      if (!sameContexts(p->premises[0])) return false;
      if (!jeq(p->premises[0]->goal, {gf->left, p->goal.world}))
        return fail("bang_r: premise goal mismatch");
      return true;
    }
    if (r == "at_r") {
      if (!premiseCount(p, 1)) return false;
      if (gf->tag != HTag::At) return fail("at_r: goal not an at");
      if (!sameContexts(p->premises[0])) return false;
      if (!jeq(p->premises[0]->goal, {gf->left, gf->world}))
        return fail("at_r: premise goal mismatch");
      return true;
    }
    if (r == "down_r") {
      if (!premiseCount(p, 1)) return false;
      if (gf->tag != HTag::Down) return fail("down_r: goal not a down");
      if (!sameContexts(p->premises[0])) return false;
      HyllPtr body = kernel::substWorld(gf->left, 0, p->goal.world, dom);
      if (!jeq(p->premises[0]->goal, {body, p->goal.world}))
        return fail("down_r: premise goal mismatch");
      return true;
    }

    return fail("unknown rule: " + r);
  }
};

void serializeNode(const ProofPtr& p, std::ostringstream& out) {
  out << "(rule " << p->rule << " (seq (gamma";
  for (const auto& j : p->gamma) out << " [" << kernel::toString(j) << "]";
  out << ") (lin";
  for (const auto& j : p->linear) out << " [" << kernel::toString(j) << "]";
  out << ") (goal [" << kernel::toString(p->goal) << "]))";
  if (p->witnessTerm) out << " (witness " << kernel::toString(p->witnessTerm) << ")";
  if (p->witnessWorld)
    out << " (witness " << kernel::toString(p->witnessWorld) << ")";
  if (!p->eigen.empty()) out << " (eigen " << p->eigen << ")";
  for (const auto& q : p->premises) {
    out << " ";
    serializeNode(q, out);
  }
  out << ")";
}

}  // namespace

Result prove_hyll(const Sequent& s, const Options& opt) {
  Engine eng;
  eng.opt = opt;

  Gamma gamma;
  for (const auto& j : s.unbounded) {
    HyllJudgment n = normJudgment(j, opt.domain);
    std::string k = jkey(n);
    bool dup = false;
    for (const auto& e : gamma)
      if (e.key == k) {
        dup = true;
        break;
      }
    if (!dup) gamma.push_back({n, k, opt.depth});
  }
  Delta delta;
  for (const auto& j : s.linear)
    delta.push_back(normJudgment(j, opt.domain));
  HyllJudgment goal = normJudgment(s.goal, opt.domain);

  // Start the fresh-name counter past any eigenvariable-shaped names the
  // caller already used.
  std::set<std::string> names;
  auto scan = [&](const HyllJudgment& j) {
    collectFormulaFVarNames(j.formula, names);
    collectWorldFVarNames(j.world, names);
  };
  for (const auto& e : gamma) scan(e.j);
  for (const auto& j : delta) scan(j);
  scan(goal);
  for (const auto& n : names) {
    if (n.size() < 3 || n[0] != '_' || (n[1] != 'e' && n[1] != 'w')) continue;
    bool digits = true;
    for (size_t i = 2; i < n.size(); ++i)
      if (!isdigit((unsigned char)n[i])) digits = false;
    if (digits) eng.eigenCounter = std::max(eng.eigenCounter,
                                            (int)std::stol(n.substr(2)));
  }

  ProofPtr proof;
  util::runWithBigStack([&] { proof = eng.prove(gamma, delta, goal); });

  Result r;
  if (proof) {
    r.verdict = Verdict::Proved;
    r.proof = proof;
  } else {
    r.verdict = eng.exhausted ? Verdict::Exhausted : Verdict::NotProvable;
  }
  return r;
}

bool replay(const ProofPtr& p, const kernel::Domain& dom, std::string* error) {
  Replayer rp{dom, {}};
  bool ok = false;
  util::runWithBigStack([&] { ok = rp.check(p); });
  if (!ok && error) *error = rp.err;
  return ok;
}

std::string serialize(const ProofPtr& p) {
  if (!p) return "()";
  std::ostringstream out;
  serializeNode(p, out);
  return out.str();
}

Result check_cut_instance(const ProofPtr& d1, const ProofPtr& d2,
                          const Options& opt) {
  Result bad;
  bad.verdict = Verdict::NotProvable;
  if (!replay(d1, opt.domain, nullptr) || !replay(d2, opt.domain, nullptr))
    return bad;

  HyllJudgment cut = normJudgment(d1->goal, opt.domain);
  std::string ck = jkey(cut);

  Sequent comp;
  std::set<std::string> seen;
  for (const auto& j : d1->gamma) {
    HyllJudgment n = normJudgment(j, opt.domain);
    if (seen.insert(jkey(n)).second) comp.unbounded.push_back(n);
  }
  for (const auto& j : d2->gamma) {
    HyllJudgment n = normJudgment(j, opt.domain);
    if (seen.insert(jkey(n)).second) comp.unbounded.push_back(n);
  }
  comp.linear = d1->linear;
  bool found = false;
  for (const auto& j : d2->linear) {
    if (!found && jkey(normJudgment(j, opt.domain)) == ck) {
      found = true;  // the cut occurrence itself is replaced by d1's context
      continue;
    }
    comp.linear.push_back(j);
  }
  if (!found) return bad;
  comp.goal = d2->goal;
  return prove_hyll(comp, opt);
}

}  // namespace wb::hyll
