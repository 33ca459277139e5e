#include "wb/mumall/engine.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "wb/util/bigstack.hpp"

namespace wb::mumall {

using kernel::Formula;
using kernel::FormulaPtr;
using kernel::Tag;

namespace {

constexpr size_t kMaxSplit = 16;

bool hasFreeFix(const FormulaPtr& f, int depth) {
  if (!f) return false;
  if (f->tag == Tag::FixVar) return f->fixIndex >= depth;
  int bump = (f->tag == Tag::Mu || f->tag == Tag::Nu) ? 1 : 0;
  return hasFreeFix(f->left, depth + bump) ||
         hasFreeFix(f->right, depth + bump);
}

using Ctx = std::vector<FormulaPtr>;
using Budgets = std::map<std::string, int>;

struct Engine {
  const HintMap& hints;
  Options opt;

  long steps = 0;
  bool exhausted = false;

  Engine(const HintMap& h, const Options& o) : hints(h), opt(o) {}

  std::unordered_map<std::string, char> failed;
  std::unordered_map<const Formula*, std::string> keyCache;
  std::vector<FormulaPtr> pins;

  const std::string& fkey(const FormulaPtr& f) {
    auto it = keyCache.find(f.get());
    if (it != keyCache.end()) return it->second;
    pins.push_back(f);
    return keyCache.emplace(f.get(), kernel::key(f)).first->second;
  }

  std::string stateKey(const Ctx& d, const Budgets& b) {
    std::vector<std::string> ks;
    ks.reserve(d.size());
    for (const auto& f : d) ks.push_back(fkey(f));
    std::sort(ks.begin(), ks.end());
    std::string out;
    for (const auto& s : ks) {
      out += s;
      out += '|';
    }
    out += '#';
    for (const auto& [k, v] : b) {
      out += k;
      out += ':';
      out += std::to_string(v);
      out += '|';
    }
    return out;
  }

  ProofPtr node(const char* rule, const Ctx& d, int principal,
                std::vector<ProofPtr> premises) const {
    auto p = std::make_shared<Proof>();
    p->rule = rule;
    p->sequent = d;
    p->principal = principal;
    p->premises = std::move(premises);
    return p;
  }

  FormulaPtr invariantFor(const FormulaPtr& f) {
    auto it = hints.find(kernel::key(f));
    FormulaPtr inv = it != hints.end() ? it->second : nullptr;
    if (!inv && opt.synth) inv = opt.synth(f);
    if (!inv)
      throw std::runtime_error("no invariant hint for " +
                               kernel::toString(f));
    if (!kernel::exponentialFree(inv) || hasFreeFix(inv, 0))
      throw std::invalid_argument("invariant must be closed and "
                                  "exponential-free: " +
                                  kernel::toString(inv));
    return inv;
  }

  Ctx without(const Ctx& d, size_t i) const {
    Ctx out;
    out.reserve(d.size() - 1);
    for (size_t j = 0; j < d.size(); ++j)
      if (j != i) out.push_back(d[j]);
    return out;
  }

  Ctx replaceAt(const Ctx& d, size_t i, FormulaPtr f) const {
    Ctx out = d;
    out[i] = std::move(f);
    return out;
  }

  ProofPtr prove(const Ctx& d, const Budgets& b) {
    if (++steps > opt.steps) {
      exhausted = true;
      return nullptr;
    }
    std::string sk = stateKey(d, b);
    if (failed.count(sk)) return nullptr;
    ProofPtr p = proveCore(d, b);
    if (!p) failed.emplace(std::move(sk), 1);
    return p;
  }

  ProofPtr proveCore(const Ctx& d, const Budgets& b) {
    for (size_t i = 0; i < d.size(); ++i)
      if (d[i]->tag == Tag::Top) return node("top", d, (int)i, {});
    if (d.size() == 1 && d[0]->tag == Tag::One)
      return node("one", d, 0, {});
    if (d.size() == 2 && kernel::isLiteral(d[0]) && kernel::isLiteral(d[1]) &&
        kernel::equal(kernel::negate(d[0]), d[1]))
      return node("ax", d, 0, {});

    // Invertible steps commit without backtracking.
    for (size_t i = 0; i < d.size(); ++i) {
      if (d[i]->tag == Tag::Bot) {
        ProofPtr q = prove(without(d, i), b);
        return q ? node("bot", d, (int)i, {q}) : nullptr;
      }
      if (d[i]->tag == Tag::Par) {
        Ctx d2 = replaceAt(d, i, d[i]->left);
        d2.push_back(d[i]->right);
        ProofPtr q = prove(d2, b);
        return q ? node("par", d, (int)i, {q}) : nullptr;
      }
    }
    for (size_t i = 0; i < d.size(); ++i) {
      if (d[i]->tag != Tag::With) continue;
      ProofPtr q1 = prove(replaceAt(d, i, d[i]->left), b);
      if (!q1) return nullptr;
      ProofPtr q2 = prove(replaceAt(d, i, d[i]->right), b);
      if (!q2) return nullptr;
      return node("with", d, (int)i, {q1, q2});
    }

    for (size_t i = 0; i < d.size(); ++i) {
      const FormulaPtr& f = d[i];
      switch (f->tag) {
        case Tag::Plus: {
          if (ProofPtr q = prove(replaceAt(d, i, f->left), b))
            return node("plus_l", d, (int)i, {q});
          if (ProofPtr q = prove(replaceAt(d, i, f->right), b))
            return node("plus_r", d, (int)i, {q});
          break;
        }
        case Tag::Tensor: {
          Ctx rest = without(d, i);
          if (rest.size() > kMaxSplit) {
            exhausted = true;
            break;
          }
          for (size_t m = 0; m < (size_t(1) << rest.size()); ++m) {
            Ctx da, db;
            for (size_t x = 0; x < rest.size(); ++x)
              (m >> x & 1 ? da : db).push_back(rest[x]);
            da.push_back(f->left);
            db.push_back(f->right);
            ProofPtr q1 = prove(da, b);
            if (!q1) continue;
            ProofPtr q2 = prove(db, b);
            if (!q2) continue;
            return node("tensor", d, (int)i, {q1, q2});
          }
          break;
        }
        case Tag::Mu: {
          const std::string& k = fkey(f);
          auto it = b.find(k);
          int left = it == b.end() ? opt.depth : it->second;
          if (left <= 0) {
            exhausted = true;
            break;
          }
          Budgets b2 = b;
          b2[k] = left - 1;
          ProofPtr q = prove(replaceAt(d, i, unfold_mu(f)), b2);
          if (q) return node("mu", d, (int)i, {q});
          break;
        }
        case Tag::Nu: {
          FormulaPtr inv = invariantFor(f);
          Ctx d1 = replaceAt(d, i, inv);
          ProofPtr q1 = prove(d1, b);
          if (!q1) break;
          Ctx d2 = {kernel::substFix(f->left, 0, inv), kernel::negate(inv)};
          ProofPtr q2 = prove(d2, b);
          if (!q2) break;
          ProofPtr n = node("nu", d, (int)i, {q1, q2});
          n->invariant = inv;
          return n;
        }
        default:
          break;
      }
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Replay checker

std::vector<std::string> seqKeys(const std::vector<FormulaPtr>& d) {
  std::vector<std::string> ks;
  ks.reserve(d.size());
  for (const auto& f : d) ks.push_back(kernel::key(f));
  std::sort(ks.begin(), ks.end());
  return ks;
}

struct Replayer {
  std::string err;

  bool fail(const std::string& m) {
    if (err.empty()) err = m;
    return false;
  }

  bool premiseIs(const ProofPtr& p, size_t idx,
                 const std::vector<FormulaPtr>& want) {
    if (seqKeys(p->premises[idx]->sequent) != seqKeys(want))
      return fail(p->rule + ": premise sequent mismatch");
    return true;
  }

  bool check(const ProofPtr& p) {
    if (!p) return fail("null proof node");
    const std::string& r = p->rule;
    if (p->principal < 0 || (size_t)p->principal >= p->sequent.size())
      return fail(r + ": principal index out of range");
    const FormulaPtr& f = p->sequent[p->principal];
    auto rest = [&] {
      std::vector<FormulaPtr> out;
      for (size_t j = 0; j < p->sequent.size(); ++j)
        if ((int)j != p->principal) out.push_back(p->sequent[j]);
      return out;
    };

    if (r == "top") {
      if (!p->premises.empty()) return fail("top: leaf with premises");
      if (f->tag != Tag::Top) return fail("top: principal is not top");
      return true;
    }
    if (r == "one") {
      if (!p->premises.empty()) return fail("one: leaf with premises");
      if (f->tag != Tag::One || p->sequent.size() != 1)
        return fail("one: sequent must be the unit alone");
      return true;
    }
    if (r == "ax") {
      if (!p->premises.empty()) return fail("ax: leaf with premises");
      if (p->sequent.size() != 2) return fail("ax: needs exactly two formulas");
      if (!kernel::isLiteral(p->sequent[0]) ||
          !kernel::isLiteral(p->sequent[1]) ||
          !kernel::equal(kernel::negate(p->sequent[0]), p->sequent[1]))
        return fail("ax: formulas are not dual literals");
      return true;
    }

    if (r == "bot") {
      if (p->premises.size() != 1 || f->tag != Tag::Bot)
        return fail("bot: malformed");
      return premiseIs(p, 0, rest()) && check(p->premises[0]);
    }
    if (r == "par") {
      if (p->premises.size() != 1 || f->tag != Tag::Par)
        return fail("par: malformed");
      auto want = rest();
      want.push_back(f->left);
      want.push_back(f->right);
      return premiseIs(p, 0, want) && check(p->premises[0]);
    }
    if (r == "with") {
      if (p->premises.size() != 2 || f->tag != Tag::With)
        return fail("with: malformed");
      auto wl = rest(), wr = rest();
      wl.push_back(f->left);
      wr.push_back(f->right);
      return premiseIs(p, 0, wl) && premiseIs(p, 1, wr) &&
             check(p->premises[0]) && check(p->premises[1]);
    }
    if (r == "plus_l" || r == "plus_r") {
      if (p->premises.size() != 1 || f->tag != Tag::Plus)
        return fail(r + ": malformed");
      auto want = rest();
      want.push_back(r == "plus_l" ? f->left : f->right);
      return premiseIs(p, 0, want) && check(p->premises[0]);
    }
    if (r == "tensor") {
      if (p->premises.size() != 2 || f->tag != Tag::Tensor)
        return fail("tensor: malformed");
      const auto& s1 = p->premises[0]->sequent;
      const auto& s2 = p->premises[1]->sequent;
      if (s1.empty() || s2.empty() ||
          !kernel::equal(s1.back(), f->left) ||
          !kernel::equal(s2.back(), f->right))
        return fail("tensor: premises do not end in the components");
      std::vector<FormulaPtr> merged(s1.begin(), s1.end() - 1);
      merged.insert(merged.end(), s2.begin(), s2.end() - 1);
      if (seqKeys(merged) != seqKeys(rest()))
        return fail("tensor: context not partitioned");
      return check(p->premises[0]) && check(p->premises[1]);
    }
    if (r == "mu") {
      if (p->premises.size() != 1 || f->tag != Tag::Mu)
        return fail("mu: malformed");
      auto want = rest();
      want.push_back(kernel::substFix(f->left, 0, f));
      return premiseIs(p, 0, want) && check(p->premises[0]);
    }
    if (r == "nu") {
      if (p->premises.size() != 2 || f->tag != Tag::Nu)
        return fail("nu: malformed");
      const FormulaPtr& inv = p->invariant;
      if (!inv) return fail("nu: missing invariant");
      if (!kernel::exponentialFree(inv) || hasFreeFix(inv, 0))
        return fail("nu: invariant not closed and exponential-free");
      auto want = rest();
      want.push_back(inv);
      if (!premiseIs(p, 0, want)) return false;
      std::vector<FormulaPtr> co = {kernel::substFix(f->left, 0, inv),
                                    kernel::negate(inv)};
      if (!premiseIs(p, 1, co)) return false;
      return check(p->premises[0]) && check(p->premises[1]);
    }
    return fail("unknown rule: " + r);
  }
};

void serializeNode(const ProofPtr& p, std::ostringstream& out) {
  out << "(rule " << p->rule << " (seq";
  for (const auto& f : p->sequent) out << " [" << kernel::toString(f) << "]";
  out << ")";
  if (p->invariant)
    out << " (inv " << kernel::toString(p->invariant) << ")";
  for (const auto& q : p->premises) {
    out << " ";
    serializeNode(q, out);
  }
  out << ")";
}

}  // namespace

FormulaPtr unfold_mu(const FormulaPtr& f) {
  if (!f || f->tag != Tag::Mu)
    throw std::invalid_argument("unfold_mu: not a least fixed point");
  return kernel::substFix(f->left, 0, f);
}

Result prove_mumall(const std::vector<FormulaPtr>& goal, const HintMap& hints,
                    const Options& opt) {
  for (const auto& f : goal)
    if (!kernel::exponentialFree(f))
      throw std::invalid_argument("sequent carries an exponential: " +
                                  kernel::toString(f));

  Engine eng{hints, opt};
  ProofPtr proof;
  util::runWithBigStack([&] { proof = eng.prove(goal, {}); });

  Result r;
  if (proof) {
    r.verdict = Verdict::Proved;
    r.proof = proof;
  } else {
    r.verdict = eng.exhausted ? Verdict::Exhausted : Verdict::NotProvable;
  }
  return r;
}

bool replay(const ProofPtr& p, std::string* error) {
  Replayer rp;
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

int unfoldCount(const ProofPtr& p) {
  if (!p) return 0;
  int n = p->rule == "mu" ? 1 : 0;
  for (const auto& q : p->premises) n += unfoldCount(q);
  return n;
}

}  // namespace wb::mumall
