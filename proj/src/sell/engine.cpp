#include "wb/sell/engine.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "wb/kernel/term.hpp"
#include "wb/util/bigstack.hpp"

namespace wb::sell {

using kernel::Formula;
using kernel::FormulaPtr;
using kernel::Polarity;
using kernel::SubexpSignature;
using kernel::Tag;
using kernel::TermPtr;

namespace {

// ---------------------------------------------------------------------------
// Phase classification, shared with the replay checker.

bool storable(const FormulaPtr& f, Polarity bias) {
  return kernel::polarity(f, bias) == Polarity::Positive ||
         kernel::isLiteral(f);
}

// Decide may focus anything except the literal kind the initial rule expects
// to find as a context mate; negative compounds release immediately but are
// legal foci.
bool decidable(const FormulaPtr& f, Polarity bias) {
  if (kernel::isLiteral(f))
    return kernel::polarity(f, bias) == Polarity::Positive;
  return true;
}

// The term standing for a location when it occurs inside atom arguments:
// the world term the signature binds to the label when present, otherwise a
// constant named after the label.
TermPtr termFor(const SubexpSignature& sig, const std::string& label) {
  TermPtr t = sig.worldTermOf(label);
  return t ? t : kernel::fun(label);
}

// ---------------------------------------------------------------------------
// Scans: labels mentioned by a formula, eigenvariable occurrences, witness
// pool collection.

void collectLabels(const FormulaPtr& f, std::set<std::string>& out) {
  if (!f) return;
  if (f->tag == Tag::Bang || f->tag == Tag::Quest ||
      f->tag == Tag::ForallLoc || f->tag == Tag::ExistsLoc) {
    if (!f->label.isVar()) out.insert(f->label.name);
  }
  collectLabels(f->left, out);
  collectLabels(f->right, out);
}

bool termHasFVar(const TermPtr& t, const std::string& name) {
  if (!t) return false;
  if (t->kind == kernel::Term::Kind::FVar) return t->name == name;
  for (const auto& a : t->args)
    if (termHasFVar(a, name)) return true;
  return false;
}

bool formulaHasFVar(const FormulaPtr& f, const std::string& name) {
  if (!f) return false;
  for (const auto& a : f->args)
    if (termHasFVar(a, name)) return true;
  return formulaHasFVar(f->left, name) || formulaHasFVar(f->right, name);
}

void collectFVarNames(const TermPtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->kind == kernel::Term::Kind::FVar) out.insert(t->name);
  for (const auto& a : t->args) collectFVarNames(a, out);
}

void collectFormulaFVarNames(const FormulaPtr& f, std::set<std::string>& out) {
  if (!f) return;
  for (const auto& a : f->args) collectFVarNames(a, out);
  collectFormulaFVarNames(f->left, out);
  collectFormulaFVarNames(f->right, out);
}

void poolTerms(const FormulaPtr& f, std::vector<TermPtr>& out) {
  if (!f) return;
  for (const auto& a : f->args) kernel::collectClosedSubterms(a, out);
  poolTerms(f->left, out);
  poolTerms(f->right, out);
}

// ---------------------------------------------------------------------------
// Engine state. Unbounded entries live in a deduplicated set-like vector;
// linear entries and the workbench are plain multisets. Everything is passed
// by value down the recursion, so branch premises cannot contaminate each
// other, and failed states are memoized per query with budgets in the key.

struct UEntry {
  std::string label;
  FormulaPtr f;
  std::string key;
};
struct LEntry {
  std::string label;
  FormulaPtr f;
};
using UCtx = std::vector<UEntry>;
using KCtx = std::vector<LEntry>;
using WB = std::vector<FormulaPtr>;

constexpr size_t kMaxSplit = 16;

struct Engine {
  Options opt;
  long steps = 0;
  bool exhausted = false;
  int eigenCounter = 0;

  std::unordered_map<std::string, char> failed;
  std::unordered_map<const Formula*, std::string> keyCache;
  std::vector<FormulaPtr> pins;

  const std::string& fkey(const FormulaPtr& f) {
    auto it = keyCache.find(f.get());
    if (it != keyCache.end()) return it->second;
    pins.push_back(f);
    return keyCache.emplace(f.get(), kernel::key(f)).first->second;
  }

  std::string freshName(const char* prefix) {
    return std::string(prefix) + std::to_string(++eigenCounter);
  }

  std::string stateKey(const SubexpSignature& sig, const UCtx& u,
                       const KCtx& k, const WB& wb, const WB& list,
                       const FormulaPtr& focus, int budget) {
    std::vector<std::string> parts;
    parts.reserve(u.size() + k.size() + wb.size());
    std::string out = std::to_string(sig.labels().size());
    out += 'u';
    for (const auto& e : u) parts.push_back(e.key);
    std::sort(parts.begin(), parts.end());
    for (const auto& s : parts) {
      out += s;
      out += '|';
    }
    parts.clear();
    out += 'k';
    for (const auto& e : k) parts.push_back(e.label + "#" + fkey(e.f));
    std::sort(parts.begin(), parts.end());
    for (const auto& s : parts) {
      out += s;
      out += '|';
    }
    parts.clear();
    out += 'g';
    for (const auto& f : wb) parts.push_back(fkey(f));
    std::sort(parts.begin(), parts.end());
    for (const auto& s : parts) {
      out += s;
      out += '|';
    }
    if (focus) {
      out += 'v';
      out += fkey(focus);
    } else {
      out += '^';
      for (const auto& f : list) {
        out += fkey(f);
        out += '|';
      }
    }
    out += 'b';
    out += std::to_string(budget);
    return out;
  }

  std::vector<std::pair<std::string, FormulaPtr>> snapshotCtx(
      const UCtx& u, const KCtx& k) const {
    std::vector<std::pair<std::string, FormulaPtr>> out;
    out.reserve(u.size() + k.size());
    for (const auto& e : k) out.emplace_back(e.label, e.f);
    for (const auto& e : u) out.emplace_back(e.label, e.f);
    return out;
  }

  ProofPtr upNode(const char* rule, const UCtx& u, const KCtx& k,
                  const WB& wb, const WB& list,
                  std::vector<ProofPtr> premises) const {
    auto p = std::make_shared<Proof>();
    p->rule = rule;
    p->context = snapshotCtx(u, k);
    p->workbench = wb;
    p->list = list;
    p->premises = std::move(premises);
    return p;
  }

  ProofPtr downNode(const char* rule, const UCtx& u, const KCtx& k,
                    const WB& wb, const FormulaPtr& focus,
                    std::vector<ProofPtr> premises) const {
    auto p = std::make_shared<Proof>();
    p->rule = rule;
    p->context = snapshotCtx(u, k);
    p->workbench = wb;
    p->focus = focus;
    p->premises = std::move(premises);
    return p;
  }

  std::vector<TermPtr> termPool(const UCtx& u, const KCtx& k, const WB& wb,
                                const FormulaPtr& focus) {
    std::vector<TermPtr> raw;
    for (const auto& e : u) poolTerms(e.f, raw);
    for (const auto& e : k) poolTerms(e.f, raw);
    for (const auto& f : wb) poolTerms(f, raw);
    poolTerms(focus, raw);
    std::map<std::string, TermPtr> dedup;
    for (const auto& t : raw) dedup.emplace(kernel::toString(t), t);
    std::vector<TermPtr> out;
    for (auto& kv : dedup) {
      if ((int)out.size() >= opt.poolCap) break;
      out.push_back(kv.second);
    }
    return out;
  }

  ProofPtr up(const SubexpSignature& sig, const UCtx& u, const KCtx& k,
              const WB& wb, const WB& list, int budget) {
    if (++steps > opt.steps) {
      exhausted = true;
      return nullptr;
    }
    std::string sk = stateKey(sig, u, k, wb, list, nullptr, budget);
    if (failed.count(sk)) return nullptr;
    ProofPtr p = upCore(sig, u, k, wb, list, budget);
    if (!p) failed.emplace(std::move(sk), 1);
    return p;
  }

  ProofPtr upCore(const SubexpSignature& sig, const UCtx& u, const KCtx& k,
                  const WB& wb, const WB& list, int budget) {
    if (list.empty()) return decide(sig, u, k, wb, budget);
    FormulaPtr f = list.back();
    WB rest(list.begin(), list.end() - 1);
    switch (f->tag) {
      case Tag::Bot: {
        ProofPtr q = up(sig, u, k, wb, rest, budget);
        if (!q) return nullptr;
        return upNode("bot", u, k, wb, list, {q});
      }
      case Tag::Par: {
        WB l2 = rest;
        l2.push_back(f->left);
        l2.push_back(f->right);
        ProofPtr q = up(sig, u, k, wb, l2, budget);
        if (!q) return nullptr;
        return upNode("par", u, k, wb, list, {q});
      }
      case Tag::With: {
        WB la = rest;
        la.push_back(f->left);
        ProofPtr q1 = up(sig, u, k, wb, la, budget);
        if (!q1) return nullptr;
        WB lb = rest;
        lb.push_back(f->right);
        ProofPtr q2 = up(sig, u, k, wb, lb, budget);
        if (!q2) return nullptr;
        return upNode("with", u, k, wb, list, {q1, q2});
      }
      case Tag::Top:
        return upNode("top", u, k, wb, list, {});
      case Tag::Quest: {
        if (f->label.isVar())
          throw std::logic_error("quest with unresolved label");
        const std::string& l = f->label.name;
        ProofPtr q;
        if (sig.unbounded(l)) {
          UEntry e{l, f->left, l + "#" + fkey(f->left)};
          UCtx u2 = u;
          bool dup = false;
          for (const auto& x : u2)
            if (x.key == e.key) {
              dup = true;
              break;
            }
          if (!dup) u2.push_back(e);
          q = up(sig, u2, k, wb, rest, budget);
        } else {
          KCtx k2 = k;
          k2.push_back({l, f->left});
          q = up(sig, u, k2, wb, rest, budget);
        }
        if (!q) return nullptr;
        ProofPtr n = upNode("quest", u, k, wb, list, {q});
        n->label = l;
        return n;
      }
      case Tag::Forall: {
        std::string e = freshName("_e");
        WB l2 = rest;
        l2.push_back(kernel::substTermBVar(f->left, 0, kernel::fvar(e)));
        ProofPtr q = up(sig, u, k, wb, l2, budget);
        if (!q) return nullptr;
        ProofPtr n = upNode("forall", u, k, wb, list, {q});
        n->eigen = e;
        return n;
      }
      case Tag::ForallLoc: {
        if (f->label.isVar())
          throw std::logic_error("forall_loc with unresolved type label");
        SubexpSignature sig2 = sig;
        std::string le = sig2.addEigenLabel(f->label.name);
        WB l2 = rest;
        l2.push_back(kernel::substLoc(f->left, 0, le, termFor(sig2, le)));
        ProofPtr q = up(sig2, u, k, wb, l2, budget);
        if (!q) return nullptr;
        ProofPtr n = upNode("forall_loc", u, k, wb, list, {q});
        n->eigen = le;
        n->label = f->label.name;
        return n;
      }
      default: {
        if (!storable(f, opt.bias))
          throw std::logic_error("up: unhandled formula " +
                                 kernel::toString(f));
        WB wb2 = wb;
        wb2.push_back(f);
        ProofPtr q = up(sig, u, k, wb2, rest, budget);
        if (!q) return nullptr;
        return upNode("store", u, k, wb, list, {q});
      }
    }
  }

  ProofPtr decide(const SubexpSignature& sig, const UCtx& u, const KCtx& k,
                  const WB& wb, int budget) {
    bool candidate = false;
    for (const auto& f : wb)
      if (decidable(f, opt.bias)) {
        candidate = true;
        break;
      }
    if (!candidate)
      for (const auto& e : k)
        if (decidable(e.f, opt.bias)) {
          candidate = true;
          break;
        }
    if (!candidate)
      for (const auto& e : u)
        if (decidable(e.f, opt.bias)) {
          candidate = true;
          break;
        }
    if (!candidate) return nullptr;
    if (budget <= 0) {
      exhausted = true;
      return nullptr;
    }

    for (size_t i = 0; i < wb.size(); ++i) {
      if (!decidable(wb[i], opt.bias)) continue;
      WB wb2;
      for (size_t j = 0; j < wb.size(); ++j)
        if (j != i) wb2.push_back(wb[j]);
      if (ProofPtr q = down(sig, u, k, wb2, wb[i], budget - 1)) {
        ProofPtr n = upNode("d1", u, k, wb, {}, {q});
        n->focus = wb[i];
        return n;
      }
    }
    for (size_t i = 0; i < k.size(); ++i) {
      if (!decidable(k[i].f, opt.bias)) continue;
      KCtx k2;
      for (size_t j = 0; j < k.size(); ++j)
        if (j != i) k2.push_back(k[j]);
      if (ProofPtr q = down(sig, u, k2, wb, k[i].f, budget - 1)) {
        ProofPtr n = upNode("dl", u, k, wb, {}, {q});
        n->focus = k[i].f;
        n->label = k[i].label;
        return n;
      }
    }
    for (const auto& e : u) {
      if (!decidable(e.f, opt.bias)) continue;
      if (ProofPtr q = down(sig, u, k, wb, e.f, budget - 1)) {
        ProofPtr n = upNode("dl", u, k, wb, {}, {q});
        n->focus = e.f;
        n->label = e.label;
        return n;
      }
    }
    return nullptr;
  }

  ProofPtr down(const SubexpSignature& sig, const UCtx& u, const KCtx& k,
                const WB& wb, const FormulaPtr& f, int budget) {
    if (++steps > opt.steps) {
      exhausted = true;
      return nullptr;
    }
    std::string sk = stateKey(sig, u, k, wb, {}, f, budget);
    if (failed.count(sk)) return nullptr;
    ProofPtr p = downCore(sig, u, k, wb, f, budget);
    if (!p) failed.emplace(std::move(sk), 1);
    return p;
  }

  ProofPtr downCore(const SubexpSignature& sig, const UCtx& u, const KCtx& k,
                    const WB& wb, const FormulaPtr& f, int budget) {
    Polarity pol = kernel::polarity(f, opt.bias);
    if (kernel::isLiteral(f) && pol == Polarity::Positive) {
      FormulaPtr mate = kernel::negate(f);
      if (wb.size() == 1 && k.empty() && kernel::equal(wb[0], mate))
        return downNode("i", u, k, wb, f, {});
      if (wb.empty() && k.size() == 1 && kernel::equal(k[0].f, mate)) {
        ProofPtr n = downNode("i", u, k, wb, f, {});
        n->label = k[0].label;
        return n;
      }
      if (wb.empty() && k.empty()) {
        for (const auto& e : u) {
          if (!kernel::equal(e.f, mate)) continue;
          ProofPtr n = downNode("i", u, k, wb, f, {});
          n->label = e.label;
          return n;
        }
      }
      return nullptr;
    }
    if (pol == Polarity::Negative) {
      ProofPtr q = up(sig, u, k, wb, {f}, budget);
      if (!q) return nullptr;
      return downNode("release", u, k, wb, f, {q});
    }
    switch (f->tag) {
      case Tag::One:
        if (wb.empty() && k.empty())
          return downNode("one", u, k, wb, f, {});
        return nullptr;
      case Tag::Zero:
        return nullptr;
      case Tag::Tensor: {
        if (wb.size() > kMaxSplit || k.size() > kMaxSplit) {
          exhausted = true;
          return nullptr;
        }
        size_t nw = wb.size(), nk = k.size();
        for (size_t mw = 0; mw < (size_t(1) << nw); ++mw) {
          WB wa, wbRest;
          for (size_t x = 0; x < nw; ++x)
            (mw >> x & 1 ? wa : wbRest).push_back(wb[x]);
          for (size_t mk = 0; mk < (size_t(1) << nk); ++mk) {
            KCtx ka, kb;
            for (size_t x = 0; x < nk; ++x)
              (mk >> x & 1 ? ka : kb).push_back(k[x]);
            ProofPtr q1 = down(sig, u, ka, wa, f->left, budget);
            if (!q1) continue;
            ProofPtr q2 = down(sig, u, kb, wbRest, f->right, budget);
            if (!q2) continue;
            return downNode("tensor", u, k, wb, f, {q1, q2});
          }
        }
        return nullptr;
      }
      case Tag::Plus: {
        if (ProofPtr q = down(sig, u, k, wb, f->left, budget))
          return downNode("plus_l", u, k, wb, f, {q});
        if (ProofPtr q = down(sig, u, k, wb, f->right, budget))
          return downNode("plus_r", u, k, wb, f, {q});
        return nullptr;
      }
      case Tag::Exists: {
        auto pool = termPool(u, k, wb, f);
        if (pool.empty()) exhausted = true;
        for (const auto& t : pool) {
          ProofPtr q =
              down(sig, u, k, wb, kernel::substTermBVar(f->left, 0, t),
                   budget);
          if (!q) continue;
          ProofPtr n = downNode("exists", u, k, wb, f, {q});
          n->witness = t;
          return n;
        }
        return nullptr;
      }
      case Tag::ExistsLoc: {
        if (f->label.isVar())
          throw std::logic_error("exists_loc with unresolved type label");
        const std::string& bound = f->label.name;
        for (const auto& l : sig.labels()) {
          if (!sig.leq(l, bound)) continue;
          ProofPtr q = down(sig, u, k, wb,
                            kernel::substLoc(f->left, 0, l, termFor(sig, l)),
                            budget);
          if (!q) continue;
          ProofPtr n = downNode("exists_loc", u, k, wb, f, {q});
          n->label = l;
          return n;
        }
        return nullptr;
      }
      case Tag::Bang: {
        if (f->label.isVar())
          throw std::logic_error("bang with unresolved label");
        const std::string& l = f->label.name;
        if (!wb.empty()) return nullptr;
        for (const auto& e : k)
          if (!sig.leq(l, e.label)) return nullptr;
        UCtx u2;
        for (const auto& e : u)
          if (sig.leq(l, e.label)) u2.push_back(e);
        ProofPtr q = up(sig, u2, k, {}, {f->left}, budget);
        if (!q) return nullptr;
        ProofPtr n = downNode("bang", u, k, wb, f, {q});
        n->label = l;
        return n;
      }
      default:
        throw std::logic_error("down: unhandled formula " +
                               kernel::toString(f));
    }
  }
};

// ---------------------------------------------------------------------------
// Replay checker

std::string entryKey(const std::string& label, const FormulaPtr& f) {
  return label + "#" + kernel::key(f);
}

struct Replayer {
  Polarity bias;
  std::string err;

  bool fail(const std::string& m) {
    if (err.empty()) err = m;
    return false;
  }

  // Partition a node's context into unbounded (set) and linear (multiset)
  // views under the signature in scope at that node.
  void split(const ProofPtr& p, const SubexpSignature& sig,
             std::set<std::string>& uset, std::vector<std::string>& lin) {
    for (const auto& [l, f] : p->context) {
      if (sig.unbounded(l))
        uset.insert(entryKey(l, f));
      else
        lin.push_back(entryKey(l, f));
    }
    std::sort(lin.begin(), lin.end());
  }

  std::vector<std::string> wbKeys(const ProofPtr& p) {
    std::vector<std::string> ks;
    for (const auto& f : p->workbench) ks.push_back(kernel::key(f));
    std::sort(ks.begin(), ks.end());
    return ks;
  }

  bool sameList(const std::vector<FormulaPtr>& a,
                const std::vector<FormulaPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (!kernel::equal(a[i], b[i])) return false;
    return true;
  }

  // Premise q must carry the same contexts as p except for stated edits.
  bool sameZones(const ProofPtr& p, const ProofPtr& q,
                 const SubexpSignature& sig) {
    std::set<std::string> up, uq;
    std::vector<std::string> lp, lq;
    split(p, sig, up, lp);
    split(q, sig, uq, lq);
    if (up != uq) return fail(p->rule + ": unbounded zone changed");
    if (lp != lq) return fail(p->rule + ": linear zone changed");
    if (wbKeys(p) != wbKeys(q)) return fail(p->rule + ": workbench changed");
    return true;
  }

  bool premiseCount(const ProofPtr& p, size_t n) {
    if (p->premises.size() != n)
      return fail(p->rule + ": expected " + std::to_string(n) + " premises");
    return true;
  }

  bool listTail(const ProofPtr& p, const ProofPtr& q,
                const std::vector<FormulaPtr>& pushed) {
    if (p->list.empty()) return fail(p->rule + ": empty up list");
    std::vector<FormulaPtr> want(p->list.begin(), p->list.end() - 1);
    for (const auto& f : pushed) want.push_back(f);
    if (!sameList(want, q->list))
      return fail(p->rule + ": premise list mismatch");
    return true;
  }

  bool check(const ProofPtr& p, const SubexpSignature& sig) {
    if (!p) return fail("null proof node");
    const std::string& r = p->rule;

    for (const auto& [l, f] : p->context) {
      (void)f;
      if (!sig.hasLabel(l)) return fail(r + ": unknown label " + l);
    }

    FormulaPtr cur = p->list.empty() ? nullptr : p->list.back();

    if (r == "top") {
      if (!premiseCount(p, 0)) return false;
      if (!cur || cur->tag != Tag::Top) return fail("top: not a top");
      return true;
    }
    if (r == "bot") {
      if (!premiseCount(p, 1)) return false;
      if (!cur || cur->tag != Tag::Bot) return fail("bot: not a bottom");
      return sameZones(p, p->premises[0], sig) &&
             listTail(p, p->premises[0], {}) &&
             check(p->premises[0], sig);
    }
    if (r == "par") {
      if (!premiseCount(p, 1)) return false;
      if (!cur || cur->tag != Tag::Par) return fail("par: not a par");
      return sameZones(p, p->premises[0], sig) &&
             listTail(p, p->premises[0], {cur->left, cur->right}) &&
             check(p->premises[0], sig);
    }
    if (r == "with") {
      if (!premiseCount(p, 2)) return false;
      if (!cur || cur->tag != Tag::With) return fail("with: not a with");
      return sameZones(p, p->premises[0], sig) &&
             listTail(p, p->premises[0], {cur->left}) &&
             sameZones(p, p->premises[1], sig) &&
             listTail(p, p->premises[1], {cur->right}) &&
             check(p->premises[0], sig) && check(p->premises[1], sig);
    }
    if (r == "quest") {
      if (!premiseCount(p, 1)) return false;
      if (!cur || cur->tag != Tag::Quest) return fail("quest: not a quest");
      if (cur->label.isVar() || cur->label.name != p->label)
        return fail("quest: label mismatch");
      const ProofPtr& q = p->premises[0];
      std::set<std::string> up, uq;
      std::vector<std::string> lp, lq;
      split(p, sig, up, lp);
      split(q, sig, uq, lq);
      if (sig.unbounded(p->label)) {
        up.insert(entryKey(p->label, cur->left));
        if (up != uq || lp != lq)
          return fail("quest: context extension mismatch");
      } else {
        lp.push_back(entryKey(p->label, cur->left));
        std::sort(lp.begin(), lp.end());
        if (up != uq || lp != lq)
          return fail("quest: context extension mismatch");
      }
      if (wbKeys(p) != wbKeys(q)) return fail("quest: workbench changed");
      return listTail(p, q, {}) && check(q, sig);
    }
    if (r == "forall") {
      if (!premiseCount(p, 1)) return false;
      if (!cur || cur->tag != Tag::Forall) return fail("forall: not a forall");
      if (p->eigen.empty()) return fail("forall: missing eigenvariable");
      for (const auto& [l, g] : p->context) {
        (void)l;
        if (formulaHasFVar(g, p->eigen))
          return fail("forall: eigenvariable not fresh");
      }
      for (const auto& g : p->workbench)
        if (formulaHasFVar(g, p->eigen))
          return fail("forall: eigenvariable not fresh");
      for (const auto& g : p->list)
        if (formulaHasFVar(g, p->eigen))
          return fail("forall: eigenvariable not fresh");
      FormulaPtr body =
          kernel::substTermBVar(cur->left, 0, kernel::fvar(p->eigen));
      return sameZones(p, p->premises[0], sig) &&
             listTail(p, p->premises[0], {body}) &&
             check(p->premises[0], sig);
    }
    if (r == "forall_loc") {
      if (!premiseCount(p, 1)) return false;
      if (!cur || cur->tag != Tag::ForallLoc)
        return fail("forall_loc: not a location quantifier");
      if (p->eigen.empty()) return fail("forall_loc: missing eigenlabel");
      if (sig.hasLabel(p->eigen))
        return fail("forall_loc: eigenlabel not fresh");
      std::set<std::string> mentioned;
      for (const auto& [l, g] : p->context) {
        mentioned.insert(l);
        collectLabels(g, mentioned);
      }
      for (const auto& g : p->workbench) collectLabels(g, mentioned);
      for (const auto& g : p->list) collectLabels(g, mentioned);
      if (mentioned.count(p->eigen))
        return fail("forall_loc: eigenlabel not fresh");
      if (cur->label.isVar() || cur->label.name != p->label)
        return fail("forall_loc: type label mismatch");
      SubexpSignature sig2 = sig;
      sig2.addEigenLabelNamed(p->eigen, p->label);
      FormulaPtr body =
          kernel::substLoc(cur->left, 0, p->eigen, termFor(sig2, p->eigen));
      return sameZones(p, p->premises[0], sig2) &&
             listTail(p, p->premises[0], {body}) &&
             check(p->premises[0], sig2);
    }
    if (r == "store") {
      if (!premiseCount(p, 1)) return false;
      if (!cur) return fail("store: empty up list");
      if (!storable(cur, bias)) return fail("store: formula not storable");
      const ProofPtr& q = p->premises[0];
      std::set<std::string> up, uq;
      std::vector<std::string> lp, lq;
      split(p, sig, up, lp);
      split(q, sig, uq, lq);
      if (up != uq || lp != lq) return fail("store: context changed");
      std::vector<std::string> want = wbKeys(p);
      want.push_back(kernel::key(cur));
      std::sort(want.begin(), want.end());
      if (want != wbKeys(q)) return fail("store: workbench mismatch");
      return listTail(p, q, {}) && check(q, sig);
    }
    if (r == "d1" || r == "dl") {
      if (!premiseCount(p, 1)) return false;
      if (!p->list.empty()) return fail(r + ": decide with pending list");
      const ProofPtr& q = p->premises[0];
      if (!q->focus || !p->focus || !kernel::equal(q->focus, p->focus))
        return fail(r + ": focus mismatch");
      if (!decidable(p->focus, bias)) return fail(r + ": focus not decidable");
      std::set<std::string> up, uq;
      std::vector<std::string> lp, lq;
      split(p, sig, up, lp);
      split(q, sig, uq, lq);
      if (r == "d1") {
        if (up != uq || lp != lq) return fail("d1: context changed");
        std::vector<std::string> want = wbKeys(q);
        want.push_back(kernel::key(p->focus));
        std::sort(want.begin(), want.end());
        if (want != wbKeys(p)) return fail("d1: focus not from workbench");
      } else {
        if (!sig.hasLabel(p->label)) return fail("dl: unknown label");
        if (wbKeys(p) != wbKeys(q)) return fail("dl: workbench changed");
        std::string ek = entryKey(p->label, p->focus);
        if (sig.unbounded(p->label)) {
          if (!up.count(ek)) return fail("dl: focus not in context");
          if (up != uq || lp != lq)
            return fail("dl: unbounded decide must retain the entry");
        } else {
          if (up != uq) return fail("dl: unbounded zone changed");
          auto it = std::find(lp.begin(), lp.end(), ek);
          if (it == lp.end()) return fail("dl: focus not in context");
          lp.erase(it);
          if (lp != lq) return fail("dl: linear decide must consume the entry");
        }
      }
      return check(q, sig);
    }
    if (r == "release") {
      if (!premiseCount(p, 1)) return false;
      if (!p->focus) return fail("release: no focus");
      if (kernel::polarity(p->focus, bias) != Polarity::Negative)
        return fail("release: focus not negative");
      const ProofPtr& q = p->premises[0];
      if (q->list.size() != 1 || !kernel::equal(q->list[0], p->focus))
        return fail("release: premise list mismatch");
      return sameZones(p, q, sig) && check(q, sig);
    }
    if (r == "i") {
      if (!premiseCount(p, 0)) return false;
      if (!p->focus || !kernel::isLiteral(p->focus) ||
          kernel::polarity(p->focus, bias) != Polarity::Positive)
        return fail("i: focus is not a positive literal");
      FormulaPtr mate = kernel::negate(p->focus);
      std::set<std::string> uset;
      std::vector<std::string> lin;
      split(p, sig, uset, lin);
      std::vector<std::string> wk = wbKeys(p);
      if (p->label.empty()) {
        if (!(wk.size() == 1 && wk[0] == kernel::key(mate) && lin.empty()))
          return fail("i: leftover context beside the workbench mate");
        return true;
      }
      if (!sig.hasLabel(p->label)) return fail("i: unknown label");
      std::string ek = entryKey(p->label, mate);
      if (sig.unbounded(p->label)) {
        if (!uset.count(ek)) return fail("i: mate not at the stated label");
        if (!wk.empty() || !lin.empty())
          return fail("i: leftover linear context beside an unbounded mate");
        return true;
      }
      if (!(wk.empty() && lin.size() == 1 && lin[0] == ek))
        return fail("i: leftover context beside the linear mate");
      return true;
    }
    if (r == "one") {
      if (!premiseCount(p, 0)) return false;
      if (!p->focus || p->focus->tag != Tag::One) return fail("one: not unit");
      std::set<std::string> uset;
      std::vector<std::string> lin;
      split(p, sig, uset, lin);
      if (!p->workbench.empty() || !lin.empty())
        return fail("one: nonempty linear context");
      return true;
    }
    if (r == "tensor") {
      if (!premiseCount(p, 2)) return false;
      if (!p->focus || p->focus->tag != Tag::Tensor)
        return fail("tensor: not a tensor");
      const ProofPtr& q1 = p->premises[0];
      const ProofPtr& q2 = p->premises[1];
      if (!q1->focus || !kernel::equal(q1->focus, p->focus->left) ||
          !q2->focus || !kernel::equal(q2->focus, p->focus->right))
        return fail("tensor: premise foci mismatch");
      std::set<std::string> up, u1, u2;
      std::vector<std::string> lp, l1, l2;
      split(p, sig, up, lp);
      split(q1, sig, u1, l1);
      split(q2, sig, u2, l2);
      if (u1 != up || u2 != up)
        return fail("tensor: unbounded entries must be shared");
      std::vector<std::string> merged = l1;
      merged.insert(merged.end(), l2.begin(), l2.end());
      std::sort(merged.begin(), merged.end());
      if (merged != lp)
        return fail("tensor: linear entries not partitioned");
      std::vector<std::string> wmerged = wbKeys(q1);
      for (const auto& s : wbKeys(q2)) wmerged.push_back(s);
      std::sort(wmerged.begin(), wmerged.end());
      if (wmerged != wbKeys(p))
        return fail("tensor: workbench not partitioned");
      return check(q1, sig) && check(q2, sig);
    }
    if (r == "plus_l" || r == "plus_r") {
      if (!premiseCount(p, 1)) return false;
      if (!p->focus || p->focus->tag != Tag::Plus)
        return fail(r + ": not a plus");
      FormulaPtr side = (r == "plus_l") ? p->focus->left : p->focus->right;
      const ProofPtr& q = p->premises[0];
      if (!q->focus || !kernel::equal(q->focus, side))
        return fail(r + ": premise focus mismatch");
      return sameZones(p, q, sig) && check(q, sig);
    }
    if (r == "exists") {
      if (!premiseCount(p, 1)) return false;
      if (!p->focus || p->focus->tag != Tag::Exists)
        return fail("exists: not an existential");
      if (!p->witness) return fail("exists: missing witness");
      FormulaPtr body =
          kernel::substTermBVar(p->focus->left, 0, p->witness);
      const ProofPtr& q = p->premises[0];
      if (!q->focus || !kernel::equal(q->focus, body))
        return fail("exists: premise focus mismatch");
      return sameZones(p, q, sig) && check(q, sig);
    }
    if (r == "exists_loc") {
      if (!premiseCount(p, 1)) return false;
      if (!p->focus || p->focus->tag != Tag::ExistsLoc)
        return fail("exists_loc: not a location existential");
      if (!sig.hasLabel(p->label)) return fail("exists_loc: unknown label");
      if (p->focus->label.isVar())
        return fail("exists_loc: unresolved type label");
      if (!sig.leq(p->label, p->focus->label.name))
        return fail("exists_loc: witness outside the ideal of the bound");
      FormulaPtr body = kernel::substLoc(p->focus->left, 0, p->label,
                                         termFor(sig, p->label));
      const ProofPtr& q = p->premises[0];
      if (!q->focus || !kernel::equal(q->focus, body))
        return fail("exists_loc: premise focus mismatch");
      return sameZones(p, q, sig) && check(q, sig);
    }
    if (r == "bang") {
      if (!premiseCount(p, 1)) return false;
      if (!p->focus || p->focus->tag != Tag::Bang)
        return fail("bang: not a bang");
      if (p->focus->label.isVar() || p->focus->label.name != p->label)
        return fail("bang: label mismatch");
      if (!p->workbench.empty())
        return fail("bang: workbench must be empty at promotion");
      for (const auto& [l, g] : p->context) {
        (void)g;
        if (!sig.unbounded(l) && !sig.leq(p->label, l))
          return fail("bang: linear entry below an unrelated label");
      }
      const ProofPtr& q = p->premises[0];
      if (!q->workbench.empty())
        return fail("bang: premise workbench not empty");
      if (q->list.size() != 1 || !kernel::equal(q->list[0], p->focus->left))
        return fail("bang: premise list mismatch");
      std::set<std::string> uq;
      std::vector<std::string> lq;
      split(q, sig, uq, lq);
      std::set<std::string> uwant;
      std::vector<std::string> lwant;
      for (const auto& [l, g] : p->context) {
        if (sig.unbounded(l)) {
          if (sig.leq(p->label, l)) uwant.insert(entryKey(l, g));
        } else {
          lwant.push_back(entryKey(l, g));
        }
      }
      std::sort(lwant.begin(), lwant.end());
      if (uq != uwant || lq != lwant)
        return fail("bang: premise context is not the filtered context");
      return check(q, sig);
    }

    return fail("unknown rule: " + r);
  }
};

void serializeNode(const ProofPtr& p, std::ostringstream& out) {
  out << "(rule " << p->rule << " (seq (ctx";
  for (const auto& [l, f] : p->context)
    out << " [" << l << ": " << kernel::toString(f) << "]";
  out << ") (wb";
  for (const auto& f : p->workbench) out << " [" << kernel::toString(f) << "]";
  out << ")";
  if (p->focus) {
    out << " (down " << kernel::toString(p->focus) << ")";
  } else {
    out << " (up";
    for (const auto& f : p->list) out << " [" << kernel::toString(f) << "]";
    out << ")";
  }
  out << ")";
  if (!p->label.empty()) out << " (label " << p->label << ")";
  if (p->witness) out << " (witness " << kernel::toString(p->witness) << ")";
  if (!p->eigen.empty()) out << " (eigen " << p->eigen << ")";
  for (const auto& q : p->premises) {
    out << " ";
    serializeNode(q, out);
  }
  out << ")";
}

void validateLabels(const SubexpSignature& sig, const FormulaPtr& f) {
  std::set<std::string> ls;
  collectLabels(f, ls);
  for (const auto& l : ls)
    if (!sig.hasLabel(l))
      throw std::invalid_argument("unknown label: " + l);
}

}  // namespace

Result prove_sell(const kernel::SubexpSignature& sig, const Sequent& s,
                  const Options& opt) {
  UCtx u;
  KCtx k;
  for (const auto& [l, f] : s.context) {
    if (!sig.hasLabel(l)) throw std::invalid_argument("unknown label: " + l);
    validateLabels(sig, f);
    if (sig.unbounded(l)) {
      std::string key = l + "#" + kernel::key(f);
      bool dup = false;
      for (const auto& e : u)
        if (e.key == key) {
          dup = true;
          break;
        }
      if (!dup) u.push_back({l, f, key});
    } else {
      k.push_back({l, f});
    }
  }
  for (const auto& f : s.workbench) validateLabels(sig, f);
  for (const auto& f : s.list) validateLabels(sig, f);
  if (s.focus) {
    validateLabels(sig, s.focus);
    if (!s.list.empty())
      throw std::invalid_argument("focused sequent cannot carry an up list");
  }

  Engine eng;
  eng.opt = opt;

  std::set<std::string> names;
  for (const auto& e : u) collectFormulaFVarNames(e.f, names);
  for (const auto& e : k) collectFormulaFVarNames(e.f, names);
  for (const auto& f : s.workbench) collectFormulaFVarNames(f, names);
  for (const auto& f : s.list) collectFormulaFVarNames(f, names);
  collectFormulaFVarNames(s.focus, names);
  for (const auto& n : names) {
    if (n.size() < 3 || n[0] != '_' || n[1] != 'e') continue;
    bool digits = true;
    for (size_t i = 2; i < n.size(); ++i)
      if (!isdigit((unsigned char)n[i])) digits = false;
    if (digits)
      eng.eigenCounter =
          std::max(eng.eigenCounter, (int)std::stol(n.substr(2)));
  }

  ProofPtr proof;
  util::runWithBigStack([&] {
    proof = s.focus ? eng.down(sig, u, k, s.workbench, s.focus, opt.depth)
                    : eng.up(sig, u, k, s.workbench, s.list, opt.depth);
  });

  Result r;
  if (proof) {
    r.verdict = Verdict::Proved;
    r.proof = proof;
  } else {
    r.verdict = eng.exhausted ? Verdict::Exhausted : Verdict::NotProvable;
  }
  return r;
}

kernel::FormulaPtr instantiate_loc(const kernel::SubexpSignature& sig,
                                   const kernel::FormulaPtr& f,
                                   const std::string& witness) {
  if (!f || f->tag != Tag::ExistsLoc)
    throw std::invalid_argument(
        "instantiate_loc: not an existential location quantifier");
  if (f->label.isVar())
    throw std::invalid_argument("instantiate_loc: unresolved type label");
  if (!sig.hasLabel(witness))
    throw std::invalid_argument("unknown label: " + witness);
  if (!sig.leq(witness, f->label.name))
    throw std::invalid_argument("label type violation: " + witness +
                                " of type " + sig.typeOf(witness) +
                                " is not below " + f->label.name);
  return kernel::substLoc(f->left, 0, witness, termFor(sig, witness));
}

bool replay(const ProofPtr& p, const kernel::SubexpSignature& sig,
            kernel::Polarity bias, std::string* error) {
  Replayer rp{bias, {}};
  bool ok = false;
  util::runWithBigStack([&] {
    try {
      ok = rp.check(p, sig);
    } catch (const std::exception& e) {
      rp.fail(e.what());
      ok = false;
    }
  });
  if (!ok && error) *error = rp.err;
  return ok;
}

std::string serialize(const ProofPtr& p) {
  if (!p) return "()";
  std::ostringstream out;
  serializeNode(p, out);
  return out.str();
}

int decideDepth(const ProofPtr& p) {
  if (!p) return 0;
  int best = 0;
  for (const auto& q : p->premises) best = std::max(best, decideDepth(q));
  if (p->rule == "d1" || p->rule == "dl") ++best;
  return best;
}

kernel::SubexpSignature parseSignature(const std::string& text) {
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> order;
  std::set<std::string> unbounded;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  auto bad = [&](const std::string& m) {
    throw std::invalid_argument("signature line " + std::to_string(lineNo) +
                                ": " + m);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head == "labels:") {
      std::string l;
      while (ls >> l) labels.push_back(l);
    } else if (head == "order:") {
      std::string a, lt, b;
      if (!(ls >> a >> lt >> b) || lt != "<") bad("expected `order: a < b`");
      std::string extra;
      if (ls >> extra) bad("trailing tokens after order pair");
      order.emplace_back(a, b);
    } else if (head == "unbounded:") {
      std::string l;
      while (ls >> l) unbounded.insert(l);
    } else {
      bad("unknown directive `" + head + "`");
    }
  }
  for (const auto& [a, b] : order) {
    if (std::find(labels.begin(), labels.end(), a) == labels.end())
      throw std::invalid_argument("order mentions unknown label: " + a);
    if (std::find(labels.begin(), labels.end(), b) == labels.end())
      throw std::invalid_argument("order mentions unknown label: " + b);
  }
  for (const auto& l : unbounded)
    if (std::find(labels.begin(), labels.end(), l) == labels.end())
      throw std::invalid_argument("unbounded mentions unknown label: " + l);
  return kernel::SubexpSignature(labels, order, unbounded);
}

}  // namespace wb::sell
