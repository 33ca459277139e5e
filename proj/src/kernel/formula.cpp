#include "wb/kernel/formula.hpp"

#include <stdexcept>

namespace wb::kernel {

namespace {

std::shared_ptr<Formula> fresh(Tag tag) {
  auto f = std::make_shared<Formula>();
  f->tag = tag;
  return f;
}

FormulaPtr node(Tag tag) { return fresh(tag); }

}  // namespace

bool equal(const LabelRef& a, const LabelRef& b) {
  if (a.isVar() != b.isVar()) return false;
  return a.isVar() ? a.var == b.var : a.name == b.name;
}

FormulaPtr atom(std::string pred, std::vector<TermPtr> args, bool negated) {
  auto f = fresh(Tag::Atom);
  f->pred = std::move(pred);
  f->args = std::move(args);
  f->negated = negated;
  return f;
}

FormulaPtr one() { return node(Tag::One); }
FormulaPtr bottom() { return node(Tag::Bot); }
FormulaPtr zero() { return node(Tag::Zero); }
FormulaPtr top() { return node(Tag::Top); }

namespace {
FormulaPtr binary(Tag tag, FormulaPtr a, FormulaPtr b) {
  auto f = fresh(tag);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}
}  // namespace

FormulaPtr tensor(FormulaPtr a, FormulaPtr b) { return binary(Tag::Tensor, std::move(a), std::move(b)); }
FormulaPtr par(FormulaPtr a, FormulaPtr b) { return binary(Tag::Par, std::move(a), std::move(b)); }
FormulaPtr plus(FormulaPtr a, FormulaPtr b) { return binary(Tag::Plus, std::move(a), std::move(b)); }
FormulaPtr with(FormulaPtr a, FormulaPtr b) { return binary(Tag::With, std::move(a), std::move(b)); }

FormulaPtr bang(FormulaPtr body, LabelRef label) {
  auto f = fresh(Tag::Bang);
  f->left = std::move(body);
  f->label = std::move(label);
  return f;
}

FormulaPtr quest(FormulaPtr body, LabelRef label) {
  auto f = fresh(Tag::Quest);
  f->left = std::move(body);
  f->label = std::move(label);
  return f;
}

FormulaPtr forallQ(std::string binder, FormulaPtr body, VarSort sort) {
  auto f = fresh(Tag::Forall);
  f->binder = std::move(binder);
  f->left = std::move(body);
  f->sort = sort;
  return f;
}

FormulaPtr existsQ(std::string binder, FormulaPtr body, VarSort sort) {
  auto f = fresh(Tag::Exists);
  f->binder = std::move(binder);
  f->left = std::move(body);
  f->sort = sort;
  return f;
}

FormulaPtr forallLoc(std::string binder, LabelRef type, FormulaPtr body) {
  auto f = fresh(Tag::ForallLoc);
  f->binder = std::move(binder);
  f->label = std::move(type);
  f->left = std::move(body);
  return f;
}

FormulaPtr existsLoc(std::string binder, LabelRef type, FormulaPtr body) {
  auto f = fresh(Tag::ExistsLoc);
  f->binder = std::move(binder);
  f->label = std::move(type);
  f->left = std::move(body);
  return f;
}

FormulaPtr mu(std::string binder, FormulaPtr body) {
  auto f = fresh(Tag::Mu);
  f->binder = std::move(binder);
  f->left = std::move(body);
  return f;
}

FormulaPtr nu(std::string binder, FormulaPtr body) {
  auto f = fresh(Tag::Nu);
  f->binder = std::move(binder);
  f->left = std::move(body);
  return f;
}

FormulaPtr fixvar(int index, std::string display) {
  auto f = fresh(Tag::FixVar);
  f->fixIndex = index;
  f->binder = std::move(display);
  return f;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case Tag::Atom: {
      if (a->pred != b->pred || a->negated != b->negated ||
          a->args.size() != b->args.size())
        return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i])) return false;
      return true;
    }
    case Tag::One:
    case Tag::Bot:
    case Tag::Zero:
    case Tag::Top:
      return true;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      return equal(a->left, b->left) && equal(a->right, b->right);
    case Tag::Bang:
    case Tag::Quest:
      return equal(a->label, b->label) && equal(a->left, b->left);
    case Tag::Forall:
    case Tag::Exists:
      return a->sort == b->sort && equal(a->left, b->left);
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
      return equal(a->label, b->label) && equal(a->left, b->left);
    case Tag::Mu:
    case Tag::Nu:
      return equal(a->left, b->left);
    case Tag::FixVar:
      return a->fixIndex == b->fixIndex;
  }
  return false;
}

FormulaPtr negate(const FormulaPtr& f) {
  switch (f->tag) {
    case Tag::Atom:
      return atom(f->pred, f->args, !f->negated);
    case Tag::One:
      return bottom();
    case Tag::Bot:
      return one();
    case Tag::Zero:
      return top();
    case Tag::Top:
      return zero();
    case Tag::Tensor:
      return par(negate(f->left), negate(f->right));
    case Tag::Par:
      return tensor(negate(f->left), negate(f->right));
    case Tag::Plus:
      return with(negate(f->left), negate(f->right));
    case Tag::With:
      return plus(negate(f->left), negate(f->right));
    case Tag::Bang:
      return quest(negate(f->left), f->label);
    case Tag::Quest:
      return bang(negate(f->left), f->label);
    case Tag::Forall:
      return existsQ(f->binder, negate(f->left), f->sort);
    case Tag::Exists:
      return forallQ(f->binder, negate(f->left), f->sort);
    case Tag::ForallLoc:
      return existsLoc(f->binder, f->label, negate(f->left));
    case Tag::ExistsLoc:
      return forallLoc(f->binder, f->label, negate(f->left));
    case Tag::Mu:
      return nu(f->binder, negate(f->left));
    case Tag::Nu:
      return mu(f->binder, negate(f->left));
    case Tag::FixVar:
      return f;
  }
  return f;
}

Polarity polarity(const FormulaPtr& f, Polarity atomBias) {
  switch (f->tag) {
    case Tag::Atom: {
      bool plainIsNegative = (atomBias == Polarity::Negative);
      bool negative = f->negated ? !plainIsNegative : plainIsNegative;
      return negative ? Polarity::Negative : Polarity::Positive;
    }
    case Tag::One:
    case Tag::Zero:
    case Tag::Tensor:
    case Tag::Plus:
    case Tag::Bang:
    case Tag::Exists:
    case Tag::ExistsLoc:
    case Tag::Mu:
      return Polarity::Positive;
    case Tag::Bot:
    case Tag::Top:
    case Tag::Par:
    case Tag::With:
    case Tag::Quest:
    case Tag::Forall:
    case Tag::ForallLoc:
    case Tag::Nu:
      return Polarity::Negative;
    case Tag::FixVar:
      // treated like its binder; only reachable on open subterms
      return Polarity::Positive;
  }
  return Polarity::Positive;
}

bool isLiteral(const FormulaPtr& f) { return f->tag == Tag::Atom; }

namespace {

bool isMonopole(const FormulaPtr& f, Polarity bias) {
  switch (f->tag) {
    case Tag::Atom:
      return polarity(f, bias) == Polarity::Negative;
    case Tag::Bot:
    case Tag::Top:
      return true;
    case Tag::Par:
    case Tag::With:
      return isMonopole(f->left, bias) && isMonopole(f->right, bias);
    case Tag::Forall:
    case Tag::ForallLoc:
      return isMonopole(f->left, bias);
    case Tag::Quest:
      return f->left->tag == Tag::Atom;
    default:
      return false;
  }
}

bool isBipole(const FormulaPtr& f, Polarity bias) {
  if (isMonopole(f, bias)) return true;
  switch (f->tag) {
    case Tag::Atom:
      return true;  // positive literal (the negative case is a monopole)
    case Tag::One:
      return true;
    case Tag::Tensor:
    case Tag::Plus:
      return isBipole(f->left, bias) && isBipole(f->right, bias);
    case Tag::Exists:
    case Tag::ExistsLoc:
      return isBipole(f->left, bias);
    case Tag::Bang:
      return isMonopole(f->left, bias) || f->left->tag == Tag::Atom;
    default:
      return false;
  }
}

}  // namespace

Shape classify(const FormulaPtr& f, Polarity atomBias) {
  if (isMonopole(f, atomBias)) return Shape::Monopole;
  if (isBipole(f, atomBias)) return Shape::Bipole;
  return Shape::Neither;
}

namespace {

// Depth bookkeeping: term binders (Forall/Exists) and location binders
// (ForallLoc/ExistsLoc) are independent index spaces; fixed-point binders a
// third. Each substitution tracks only its own space.
template <class FnAtomArgs, class FnLabel>
FormulaPtr mapFormula(const FormulaPtr& f, int termDepth, int locDepth,
                      int fixDepth, const FnAtomArgs& onArgs,
                      const FnLabel& onLabel) {
  switch (f->tag) {
    case Tag::Atom: {
      auto args = onArgs(f->args, termDepth, locDepth);
      if (!args) return f;
      return atom(f->pred, std::move(*args), f->negated);
    }
    case Tag::One:
    case Tag::Bot:
    case Tag::Zero:
    case Tag::Top:
      return f;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With: {
      auto l = mapFormula(f->left, termDepth, locDepth, fixDepth, onArgs,
                          onLabel);
      auto r = mapFormula(f->right, termDepth, locDepth, fixDepth, onArgs,
                          onLabel);
      if (l.get() == f->left.get() && r.get() == f->right.get()) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      g->right = r;
      return g;
    }
    case Tag::Bang:
    case Tag::Quest: {
      auto l = mapFormula(f->left, termDepth, locDepth, fixDepth, onArgs,
                          onLabel);
      LabelRef nl = onLabel(f->label, locDepth);
      if (l.get() == f->left.get() && equal(nl, f->label)) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      g->label = nl;
      return g;
    }
    case Tag::Forall:
    case Tag::Exists: {
      auto l = mapFormula(f->left, termDepth + 1, locDepth, fixDepth, onArgs,
                          onLabel);
      if (l.get() == f->left.get()) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      return g;
    }
    case Tag::ForallLoc:
    case Tag::ExistsLoc: {
      auto l = mapFormula(f->left, termDepth, locDepth + 1, fixDepth, onArgs,
                          onLabel);
      LabelRef nl = onLabel(f->label, locDepth);
      if (l.get() == f->left.get() && equal(nl, f->label)) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      g->label = nl;
      return g;
    }
    case Tag::Mu:
    case Tag::Nu: {
      auto l = mapFormula(f->left, termDepth, locDepth, fixDepth + 1, onArgs,
                          onLabel);
      if (l.get() == f->left.get()) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      return g;
    }
    case Tag::FixVar:
      return f;
  }
  return f;
}

LabelRef keepLabel(const LabelRef& l, int) { return l; }

}  // namespace

FormulaPtr substTermBVar(const FormulaPtr& f, int depth, const TermPtr& value) {
  auto onArgs = [&](const std::vector<TermPtr>& args, int termDepth,
                    int) -> std::optional<std::vector<TermPtr>> {
    bool changed = false;
    std::vector<TermPtr> out;
    out.reserve(args.size());
    for (const auto& a : args) {
      auto na = substBVar(a, depth + termDepth, value);
      changed = changed || na.get() != a.get();
      out.push_back(std::move(na));
    }
    if (!changed) return std::nullopt;
    return out;
  };
  return mapFormula(f, 0, 0, 0, onArgs, keepLabel);
}

FormulaPtr substLoc(const FormulaPtr& f, int depth, const std::string& label,
                    const TermPtr& worldTerm) {
  auto onArgs = [&](const std::vector<TermPtr>& args, int,
                    int locDepth) -> std::optional<std::vector<TermPtr>> {
    bool changed = false;
    std::vector<TermPtr> out;
    out.reserve(args.size());
    for (const auto& a : args) {
      auto na = substLocVar(a, depth + locDepth, worldTerm);
      changed = changed || na.get() != a.get();
      out.push_back(std::move(na));
    }
    if (!changed) return std::nullopt;
    return out;
  };
  auto onLabel = [&](const LabelRef& l, int locDepth) -> LabelRef {
    if (!l.isVar()) return l;
    if (l.var == depth + locDepth) return LabelRef::constant(label);
    if (l.var > depth + locDepth) return LabelRef::variable(l.var - 1, l.name);
    return l;
  };
  return mapFormula(f, 0, 0, 0, onArgs, onLabel);
}

FormulaPtr substFix(const FormulaPtr& f, int depth, const FormulaPtr& value) {
  // `value` is closed in the engines' usage (unfolding plugs the fixed point
  // itself, invariants are closed formulas), so no shifting is required.
  switch (f->tag) {
    case Tag::FixVar:
      if (f->fixIndex == depth) return value;
      if (f->fixIndex > depth) return fixvar(f->fixIndex - 1, f->binder);
      return f;
    case Tag::Mu:
    case Tag::Nu: {
      auto l = substFix(f->left, depth + 1, value);
      if (l.get() == f->left.get()) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      return g;
    }
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With: {
      auto l = substFix(f->left, depth, value);
      auto r = substFix(f->right, depth, value);
      if (l.get() == f->left.get() && r.get() == f->right.get()) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      g->right = r;
      return g;
    }
    case Tag::Bang:
    case Tag::Quest:
    case Tag::Forall:
    case Tag::Exists:
    case Tag::ForallLoc:
    case Tag::ExistsLoc: {
      auto l = substFix(f->left, depth, value);
      if (l.get() == f->left.get()) return f;
      auto g = std::make_shared<Formula>(*f);
      g->left = l;
      return g;
    }
    default:
      return f;
  }
}

namespace {

bool matchFormulaAt(const FormulaPtr& pattern, const FormulaPtr& target,
                    int metaCount, std::vector<TermPtr>& out, int depth) {
  if (pattern->tag != target->tag) return false;
  switch (pattern->tag) {
    case Tag::Atom: {
      if (pattern->pred != target->pred ||
          pattern->negated != target->negated ||
          pattern->args.size() != target->args.size())
        return false;
      for (size_t i = 0; i < pattern->args.size(); ++i)
        if (!matchTerm(pattern->args[i], target->args[i], metaCount, out,
                       depth))
          return false;
      return true;
    }
    case Tag::One:
    case Tag::Bot:
    case Tag::Zero:
    case Tag::Top:
      return true;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      return matchFormulaAt(pattern->left, target->left, metaCount, out,
                            depth) &&
             matchFormulaAt(pattern->right, target->right, metaCount, out,
                            depth);
    case Tag::Bang:
    case Tag::Quest:
      return equal(pattern->label, target->label) &&
             matchFormulaAt(pattern->left, target->left, metaCount, out,
                            depth);
    case Tag::Forall:
    case Tag::Exists:
      return pattern->sort == target->sort &&
             matchFormulaAt(pattern->left, target->left, metaCount, out,
                            depth + 1);
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
      return equal(pattern->label, target->label) &&
             matchFormulaAt(pattern->left, target->left, metaCount, out,
                            depth);
    case Tag::Mu:
    case Tag::Nu:
      return matchFormulaAt(pattern->left, target->left, metaCount, out,
                            depth);
    case Tag::FixVar:
      return pattern->fixIndex == target->fixIndex;
  }
  return false;
}

}  // namespace

bool matchFormula(const FormulaPtr& pattern, const FormulaPtr& target,
                  int metaCount, std::vector<TermPtr>& out) {
  if (out.size() != static_cast<size_t>(metaCount)) out.resize(metaCount);
  return matchFormulaAt(pattern, target, metaCount, out, 0);
}

bool exponentialFree(const FormulaPtr& f) {
  switch (f->tag) {
    case Tag::Bang:
    case Tag::Quest:
      return false;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      return exponentialFree(f->left) && exponentialFree(f->right);
    case Tag::Forall:
    case Tag::Exists:
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
    case Tag::Mu:
    case Tag::Nu:
      return exponentialFree(f->left);
    default:
      return true;
  }
}

bool plainLL(const FormulaPtr& f) {
  switch (f->tag) {
    case Tag::Bang:
    case Tag::Quest:
      return !f->label.isVar() && f->label.name == kClassicalLabel &&
             plainLL(f->left);
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
    case Tag::Mu:
    case Tag::Nu:
    case Tag::FixVar:
      return false;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      return plainLL(f->left) && plainLL(f->right);
    case Tag::Forall:
    case Tag::Exists:
      return plainLL(f->left);
    default:
      return true;
  }
}

namespace {

// Precedence: -o (handled by the hybrid grammar only), then (+), &, |, *,
// prefixes/atoms. Printing always parenthesizes mixed binary operators, so
// only same-operator chains stay bare (right associated).
int prec(Tag t) {
  switch (t) {
    case Tag::Plus:
      return 1;
    case Tag::With:
      return 2;
    case Tag::Par:
      return 3;
    case Tag::Tensor:
      return 4;
    default:
      return 9;
  }
}

const char* opName(Tag t) {
  switch (t) {
    case Tag::Plus:
      return " (+) ";
    case Tag::With:
      return " & ";
    case Tag::Par:
      return " | ";
    case Tag::Tensor:
      return " * ";
    default:
      return "?";
  }
}

std::string labelText(const LabelRef& l, const std::vector<std::string>& locNames) {
  if (!l.isVar()) return l.name;
  int pos = static_cast<int>(locNames.size()) - 1 - l.var;
  if (pos >= 0 && pos < static_cast<int>(locNames.size())) return locNames[pos];
  return "'l" + std::to_string(l.var);
}

struct PrintCtx {
  bool canonical = false;
  std::vector<std::string> termNames, locNames, fixNames;
  int counter = 0;

  std::string freshName(const std::string& display, const char* fallback) {
    if (!canonical && !display.empty()) return display;
    return std::string(fallback) + std::to_string(counter++);
  }
};

std::string printTerm(const TermPtr& t, PrintCtx& ctx);

std::string printArgs(const std::vector<TermPtr>& args, PrintCtx& ctx) {
  if (args.empty()) return "";
  std::string s = "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += printTerm(args[i], ctx);
  }
  return s + ")";
}

std::string printTerm(const TermPtr& t, PrintCtx& ctx) {
  switch (t->kind) {
    case Term::Kind::BVar: {
      int pos = static_cast<int>(ctx.termNames.size()) - 1 - t->index;
      if (pos >= 0 && pos < static_cast<int>(ctx.termNames.size()))
        return ctx.termNames[pos];
      return "'" + std::to_string(t->index);
    }
    case Term::Kind::LocVar: {
      int pos = static_cast<int>(ctx.locNames.size()) - 1 - t->index;
      if (pos >= 0 && pos < static_cast<int>(ctx.locNames.size()))
        return ctx.locNames[pos];
      return "'l" + std::to_string(t->index);
    }
    case Term::Kind::FVar:
      return t->name;
    case Term::Kind::Fun:
      return t->name + printArgs(t->args, ctx);
  }
  return "?";
}

std::string print(const FormulaPtr& f, PrintCtx& ctx, int parentPrec) {
  switch (f->tag) {
    case Tag::Atom: {
      std::string s = (f->negated ? "~" : "") + f->pred;
      s += printArgs(f->args, ctx);
      return s;
    }
    case Tag::One:
      return "1";
    case Tag::Bot:
      return "bot";
    case Tag::Zero:
      return "0";
    case Tag::Top:
      return "top";
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With: {
      int p = prec(f->tag);
      std::string s = print(f->left, ctx, p + 1) + opName(f->tag) +
                      print(f->right, ctx, p);
      if (p < parentPrec) return "(" + s + ")";
      return s;
    }
    case Tag::Bang:
    case Tag::Quest: {
      std::string head = f->tag == Tag::Bang ? "!" : "?";
      std::string lt = labelText(f->label, ctx.locNames);
      if (lt != kClassicalLabel) head += "^" + lt;
      return head + " " + print(f->left, ctx, 9);
    }
    case Tag::Forall:
    case Tag::Exists: {
      std::string name = ctx.freshName(f->binder, "x");
      std::string kw = f->tag == Tag::Forall
                           ? (f->sort == VarSort::World ? "forallw" : "forall")
                           : (f->sort == VarSort::World ? "existsw" : "exists");
      ctx.termNames.push_back(name);
      std::string s = kw + " " + name + ". " + print(f->left, ctx, 0);
      ctx.termNames.pop_back();
      if (parentPrec > 0) return "(" + s + ")";
      return s;
    }
    case Tag::ForallLoc:
    case Tag::ExistsLoc: {
      std::string name = ctx.freshName(f->binder, "l");
      std::string kw = f->tag == Tag::ForallLoc ? "foralloc" : "existsloc";
      std::string ty = labelText(f->label, ctx.locNames);
      ctx.locNames.push_back(name);
      std::string s = kw + " " + name + ":" + ty + ". " + print(f->left, ctx, 0);
      ctx.locNames.pop_back();
      if (parentPrec > 0) return "(" + s + ")";
      return s;
    }
    case Tag::Mu:
    case Tag::Nu: {
      std::string name = ctx.freshName(f->binder, "X");
      ctx.fixNames.push_back(name);
      std::string s = (f->tag == Tag::Mu ? "mu " : "nu ") + name + ". " +
                      print(f->left, ctx, 0);
      ctx.fixNames.pop_back();
      if (parentPrec > 0) return "(" + s + ")";
      return s;
    }
    case Tag::FixVar: {
      int pos = static_cast<int>(ctx.fixNames.size()) - 1 - f->fixIndex;
      if (pos >= 0 && pos < static_cast<int>(ctx.fixNames.size()))
        return ctx.fixNames[pos];
      return "'X" + std::to_string(f->fixIndex);
    }
  }
  return "?";
}

}  // namespace

std::string toString(const FormulaPtr& f) {
  PrintCtx ctx;
  return print(f, ctx, 0);
}

std::string key(const FormulaPtr& f) {
  PrintCtx ctx;
  ctx.canonical = true;
  return print(f, ctx, 0);
}

void collectAtoms(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  switch (f->tag) {
    case Tag::Atom:
      out.push_back(f);
      return;
    case Tag::Tensor:
    case Tag::Par:
    case Tag::Plus:
    case Tag::With:
      collectAtoms(f->left, out);
      collectAtoms(f->right, out);
      return;
    case Tag::Bang:
    case Tag::Quest:
    case Tag::Forall:
    case Tag::Exists:
    case Tag::ForallLoc:
    case Tag::ExistsLoc:
    case Tag::Mu:
    case Tag::Nu:
      collectAtoms(f->left, out);
      return;
    default:
      return;
  }
}

}  // namespace wb::kernel
