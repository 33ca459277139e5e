#include "wb/ctl/system.hpp"

#include <stdexcept>

namespace wb::ctl {

int TransitionSystem::varIndex(const std::string& v) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == v) return static_cast<int>(i);
  return -1;
}

std::string toString(const TransitionSystem& ts, const State& s) {
  std::string out;
  for (size_t i = 0; i < ts.vars.size(); ++i) {
    if (i) out += " ";
    out += (s.bits[i] ? "+" : "-") + ts.vars[i];
  }
  return out;
}

std::optional<State> step(const TransitionSystem& ts, const State& s,
                          const Rule& r) {
  (void)ts;
  if (s == r.from) return r.to;
  return std::nullopt;
}

std::vector<State> successors(const TransitionSystem& ts, const State& s) {
  std::vector<State> out;
  for (const auto& r : ts.rules) {
    auto t = step(ts, s, r);
    if (!t) continue;
    bool dup = false;
    for (const auto& u : out) dup = dup || u == *t;
    if (!dup) out.push_back(*t);
  }
  return out;
}

namespace {
std::shared_ptr<CtlFormula> freshC(CtlTag tag) {
  auto f = std::make_shared<CtlFormula>();
  f->tag = tag;
  return f;
}
}  // namespace

CtlPtr clit(std::string var, bool positive) {
  auto f = freshC(CtlTag::Lit);
  f->var = std::move(var);
  f->positive = positive;
  return f;
}

CtlPtr cand(CtlPtr a, CtlPtr b) {
  auto f = freshC(CtlTag::And);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

CtlPtr cor(CtlPtr a, CtlPtr b) {
  auto f = freshC(CtlTag::Or);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

CtlPtr cunary(CtlTag tag, CtlPtr a) {
  switch (tag) {
    case CtlTag::EX:
    case CtlTag::AX:
    case CtlTag::EF:
    case CtlTag::AF:
    case CtlTag::EG:
    case CtlTag::AG:
      break;
    default:
      throw std::logic_error("cunary: not a unary temporal operator");
  }
  auto f = freshC(tag);
  f->left = std::move(a);
  return f;
}

CtlPtr cuntil(bool existential, CtlPtr a, CtlPtr b) {
  auto f = freshC(existential ? CtlTag::EU : CtlTag::AU);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

bool equal(const CtlPtr& a, const CtlPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b || a->tag != b->tag) return false;
  switch (a->tag) {
    case CtlTag::Lit:
      return a->var == b->var && a->positive == b->positive;
    case CtlTag::And:
    case CtlTag::Or:
    case CtlTag::EU:
    case CtlTag::AU:
      return equal(a->left, b->left) && equal(a->right, b->right);
    default:
      return equal(a->left, b->left);
  }
}

namespace {

// | is looser than &; unary operators bind tightest
std::string printC(const CtlPtr& f, int parentPrec) {
  switch (f->tag) {
    case CtlTag::Lit:
      return (f->positive ? "+" : "-") + f->var;
    case CtlTag::And: {
      std::string s = printC(f->left, 3) + " & " + printC(f->right, 2);
      return parentPrec > 2 ? "(" + s + ")" : s;
    }
    case CtlTag::Or: {
      std::string s = printC(f->left, 2) + " | " + printC(f->right, 1);
      return parentPrec > 1 ? "(" + s + ")" : s;
    }
    case CtlTag::EU:
      return "E[" + printC(f->left, 0) + " U " + printC(f->right, 0) + "]";
    case CtlTag::AU:
      return "A[" + printC(f->left, 0) + " U " + printC(f->right, 0) + "]";
    case CtlTag::EX:
      return "EX " + printC(f->left, 3);
    case CtlTag::AX:
      return "AX " + printC(f->left, 3);
    case CtlTag::EF:
      return "EF " + printC(f->left, 3);
    case CtlTag::AF:
      return "AF " + printC(f->left, 3);
    case CtlTag::EG:
      return "EG " + printC(f->left, 3);
    case CtlTag::AG:
      return "AG " + printC(f->left, 3);
  }
  return "?";
}

}  // namespace

std::string toString(const CtlPtr& f) { return printC(f, 0); }

int sizeOf(const CtlPtr& f) {
  switch (f->tag) {
    case CtlTag::Lit:
      return 1;
    case CtlTag::And:
    case CtlTag::Or:
    case CtlTag::EU:
    case CtlTag::AU:
      return 1 + sizeOf(f->left) + sizeOf(f->right);
    default:
      return 1 + sizeOf(f->left);
  }
}

void validateCtl(const TransitionSystem& ts, const CtlPtr& f) {
  if (f->tag == CtlTag::Lit) {
    if (ts.varIndex(f->var) < 0)
      throw std::runtime_error("ctl formula mentions undeclared variable '" +
                               f->var + "'");
    return;
  }
  if (f->left) validateCtl(ts, f->left);
  if (f->right) validateCtl(ts, f->right);
}

}  // namespace wb::ctl
