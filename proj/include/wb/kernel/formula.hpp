#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wb/kernel/term.hpp"

namespace wb::kernel {

// One-sided classical formulas in negation normal form: negation appears only
// on atoms. Covers the plain exponential fragment (Bang/Quest with the
// distinguished classical label), subexponentials (arbitrary labels, location
// quantifiers) and least/greatest fixed points. FixVar indices count Mu/Nu
// binders outward; location binders have their own index space.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// The distinguished classical label of the plain-LL fragment.
inline const std::string kClassicalLabel = "cl";

struct LabelRef {
  int var = -1;      // >= 0: de Bruijn index into location binders
  std::string name;  // concrete label when var < 0, display name otherwise

  bool isVar() const { return var >= 0; }
  static LabelRef constant(std::string n) { return {-1, std::move(n)}; }
  static LabelRef variable(int idx, std::string display = "") {
    return {idx, std::move(display)};
  }
};

bool equal(const LabelRef& a, const LabelRef& b);

enum class Tag {
  Atom,   // pred(args), possibly negated
  One,
  Bot,
  Zero,
  Top,
  Tensor,
  Par,
  Plus,
  With,
  Bang,     // label
  Quest,    // label
  Forall,   // sorted first-order quantifier
  Exists,
  ForallLoc,  // location quantifier, type label in `label`
  ExistsLoc,
  Mu,
  Nu,
  FixVar,
};

enum class VarSort { Term, World };

struct Formula {
  Tag tag;
  // Atom
  std::string pred;
  std::vector<TermPtr> args;
  bool negated = false;
  // Tensor/Par/Plus/With: left+right. Unary forms use left as the body.
  FormulaPtr left, right;
  // Bang/Quest label; ForallLoc/ExistsLoc type label.
  LabelRef label;
  // Forall/Exists binder sort, display name for all binders.
  VarSort sort = VarSort::Term;
  std::string binder;
  // FixVar
  int fixIndex = 0;
};

FormulaPtr atom(std::string pred, std::vector<TermPtr> args = {},
                bool negated = false);
FormulaPtr one();
FormulaPtr bottom();
FormulaPtr zero();
FormulaPtr top();
FormulaPtr tensor(FormulaPtr a, FormulaPtr b);
FormulaPtr par(FormulaPtr a, FormulaPtr b);
FormulaPtr plus(FormulaPtr a, FormulaPtr b);
FormulaPtr with(FormulaPtr a, FormulaPtr b);
FormulaPtr bang(FormulaPtr body, LabelRef label = LabelRef::constant(kClassicalLabel));
FormulaPtr quest(FormulaPtr body, LabelRef label = LabelRef::constant(kClassicalLabel));
FormulaPtr forallQ(std::string binder, FormulaPtr body, VarSort sort = VarSort::Term);
FormulaPtr existsQ(std::string binder, FormulaPtr body, VarSort sort = VarSort::Term);
FormulaPtr forallLoc(std::string binder, LabelRef type, FormulaPtr body);
FormulaPtr existsLoc(std::string binder, LabelRef type, FormulaPtr body);
FormulaPtr mu(std::string binder, FormulaPtr body);
FormulaPtr nu(std::string binder, FormulaPtr body);
FormulaPtr fixvar(int index, std::string display = "");

// Structural equality; binder display names are ignored.
bool equal(const FormulaPtr& a, const FormulaPtr& b);

// De Morgan dual. Involutive: negate(negate(f)) == f. FixVar is self-dual
// (the binder's sense flips instead).
FormulaPtr negate(const FormulaPtr& f);

enum class Polarity { Positive, Negative };

// Atom bias is configurable; the default assigns atoms Negative and negated
// atoms Positive. Mu is positive, Nu negative.
Polarity polarity(const FormulaPtr& f, Polarity atomBias = Polarity::Negative);

enum class Shape { Monopole, Bipole, Neither };

// Monopole: built from atoms and negative connectives, Quest only over
// literals. Bipole: positive combinations of monopoles and negated atoms,
// Bang over a monopole or a literal. Location quantifiers follow their
// first-order counterparts. A monopole also counts as a bipole.
Shape classify(const FormulaPtr& f, Polarity atomBias = Polarity::Negative);

bool isLiteral(const FormulaPtr& f);

// Substitute a first-order binder: replaces BVar(depth) inside atom args,
// where depth counts Forall/Exists binders between the root and the
// occurrence. Values are inserted verbatim (see term.hpp conventions).
FormulaPtr substTermBVar(const FormulaPtr& f, int depth, const TermPtr& value);

// Substitute a location binder: LabelRef var and Term::LocVar occurrences at
// `depth` become `label` / `worldTerm` respectively.
FormulaPtr substLoc(const FormulaPtr& f, int depth, const std::string& label,
                    const TermPtr& worldTerm);

// Substitute FixVar(depth) by `value` (used by fixed-point unfolding and by
// invariant instantiation).
FormulaPtr substFix(const FormulaPtr& f, int depth, const FormulaPtr& value);

// One-way matching at the formula level, used by proof replay to recover
// quantifier witnesses. Metavariable convention as in matchTerm, with depth
// counting Forall/Exists binders between root and occurrence. Everything
// outside atom arguments must agree exactly (tags, labels, binder sorts).
bool matchFormula(const FormulaPtr& pattern, const FormulaPtr& target,
                  int metaCount, std::vector<TermPtr>& out);

// No Bang/Quest anywhere (precondition of the fixed-point engine).
bool exponentialFree(const FormulaPtr& f);

// Every Bang/Quest label is the distinguished classical label and there are
// no location binders or fixed points (precondition of the plain-LL engine).
bool plainLL(const FormulaPtr& f);

std::string toString(const FormulaPtr& f);

// Canonical key for maps: toString with canonical binder names.
std::string key(const FormulaPtr& f);

void collectAtoms(const FormulaPtr& f,
                  std::vector<FormulaPtr>& out);  // positive occurrences only

}  // namespace wb::kernel
