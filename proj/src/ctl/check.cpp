#include "wb/ctl/check.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace wb::ctl {

namespace {

constexpr size_t kMaxVars = 12;

void guardSize(const TransitionSystem& ts) {
  if (ts.vars.size() > kMaxVars)
    throw std::invalid_argument("state space too large to enumerate (" +
                                std::to_string(ts.vars.size()) +
                                " variables)");
}

}  // namespace

std::vector<State> allStates(const TransitionSystem& ts) {
  guardSize(ts);
  size_t n = ts.vars.size();
  std::vector<State> out;
  out.reserve(size_t(1) << n);
  for (size_t m = 0; m < (size_t(1) << n); ++m) {
    State s;
    s.bits.resize(n);
    for (size_t i = 0; i < n; ++i) s.bits[i] = (m >> i) & 1;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<State> reachable(const TransitionSystem& ts, const State& from) {
  std::vector<State> order;
  std::set<State> seen;
  std::deque<State> work{from};
  seen.insert(from);
  while (!work.empty()) {
    State s = work.front();
    work.pop_front();
    order.push_back(s);
    for (const State& t : successors(ts, s))
      if (seen.insert(t).second) work.push_back(t);
  }
  return order;
}

bool serialFrom(const TransitionSystem& ts, const State& from) {
  for (const State& s : reachable(ts, from))
    if (successors(ts, s).empty()) return false;
  return true;
}

bool isTemporal(const CtlPtr& f) {
  if (!f) return false;
  switch (f->tag) {
    case CtlTag::Lit:
      return false;
    case CtlTag::And:
    case CtlTag::Or:
      return isTemporal(f->left) || isTemporal(f->right);
    default:
      return true;
  }
}

std::set<State> satStates(const TransitionSystem& ts, const CtlPtr& f) {
  guardSize(ts);
  validateCtl(ts, f);
  std::vector<State> space = allStates(ts);

  auto hasSuccIn = [&](const State& s, const std::set<State>& z) {
    for (const State& t : successors(ts, s))
      if (z.count(t)) return true;
    return false;
  };
  auto allSuccIn = [&](const State& s, const std::set<State>& z) {
    for (const State& t : successors(ts, s))
      if (!z.count(t)) return false;
    return true;
  };

  switch (f->tag) {
    case CtlTag::Lit: {
      int i = ts.varIndex(f->var);
      std::set<State> out;
      for (const State& s : space)
        if ((s.bits[i] != 0) == f->positive) out.insert(s);
      return out;
    }
    case CtlTag::And: {
      std::set<State> a = satStates(ts, f->left);
      std::set<State> b = satStates(ts, f->right);
      std::set<State> out;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::inserter(out, out.begin()));
      return out;
    }
    case CtlTag::Or: {
      std::set<State> out = satStates(ts, f->left);
      std::set<State> b = satStates(ts, f->right);
      out.insert(b.begin(), b.end());
      return out;
    }
    case CtlTag::EX:
    case CtlTag::AX: {
      std::set<State> sub = satStates(ts, f->left);
      std::set<State> out;
      for (const State& s : space) {
        bool in = f->tag == CtlTag::EX ? hasSuccIn(s, sub) : allSuccIn(s, sub);
        if (in) out.insert(s);
      }
      return out;
    }
    case CtlTag::EF:
    case CtlTag::AF: {
      std::set<State> sub = satStates(ts, f->left);
      std::set<State> z;
      for (;;) {
        std::set<State> next = sub;
        for (const State& s : space) {
          bool in = f->tag == CtlTag::EF ? hasSuccIn(s, z) : allSuccIn(s, z);
          if (in) next.insert(s);
        }
        if (next == z) return z;
        z = std::move(next);
      }
    }
    case CtlTag::EG:
    case CtlTag::AG: {
      std::set<State> sub = satStates(ts, f->left);
      std::set<State> z = sub;
      for (;;) {
        std::set<State> next;
        for (const State& s : z) {
          bool in = f->tag == CtlTag::EG ? hasSuccIn(s, z) : allSuccIn(s, z);
          if (in) next.insert(s);
        }
        if (next == z) return z;
        z = std::move(next);
      }
    }
    case CtlTag::EU:
    case CtlTag::AU: {
      std::set<State> a = satStates(ts, f->left);
      std::set<State> b = satStates(ts, f->right);
      std::set<State> z;
      for (;;) {
        std::set<State> next = b;
        for (const State& s : space) {
          if (!a.count(s)) continue;
          bool in = f->tag == CtlTag::EU ? hasSuccIn(s, z) : allSuccIn(s, z);
          if (in) next.insert(s);
        }
        if (next == z) return z;
        z = std::move(next);
      }
    }
  }
  throw std::logic_error("satStates: unhandled formula");
}

bool ctl_check(const TransitionSystem& ts, const State& s, const CtlPtr& f) {
  validateCtl(ts, f);
  if (s.bits.size() != ts.vars.size())
    throw std::invalid_argument("state does not assign every variable");
  if (isTemporal(f) && !serialFrom(ts, s))
    throw std::runtime_error(
        "non-serial system: a reachable state has no successor");
  return satStates(ts, f).count(s) > 0;
}

}  // namespace wb::ctl
