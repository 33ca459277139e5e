#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wb/kernel/formula.hpp"
#include "wb/kernel/term.hpp"
#include "wb/kernel/world.hpp"

namespace wb::kernel {

// Hybrid intuitionistic formulas. Judgments pair a formula with the world it
// is asserted at. Term binders (ForallT/ExistsT) and world binders
// (Down/ForallW/ExistsW/ForallWBelow) are separate de Bruijn spaces; world
// binder indices appear as WorldExpr::BVar inside At/ForallWBelow positions.
struct HyllFormula;
using HyllPtr = std::shared_ptr<const HyllFormula>;

enum class HTag {
  Atom,
  Tensor,
  One,
  Limp,  // linear implication
  With,
  Top,
  Plus,
  Zero,
  Bang,
  ForallT,
  ExistsT,
  At,        // body at world
  Down,      // binds the current world
  ForallW,
  ExistsW,
  // Bounded world quantifier: body for every strict predecessor of `world`.
  // Definitional sugar: once the bound is closed it expands into a finite
  // additive conjunction (Top when the bound is the unit), which happens
  // automatically during world substitution.
  ForallWBelow,
};

struct HyllFormula {
  HTag tag;
  // Atom
  std::string pred;
  std::vector<TermPtr> args;
  // Binary forms use left+right; unary / binder forms use left.
  HyllPtr left, right;
  // At / ForallWBelow
  WorldPtr world;
  std::string binder;
};

HyllPtr hatom(std::string pred, std::vector<TermPtr> args = {});
HyllPtr htensor(HyllPtr a, HyllPtr b);
HyllPtr hone();
HyllPtr hlimp(HyllPtr a, HyllPtr b);
HyllPtr hwith(HyllPtr a, HyllPtr b);
HyllPtr htop();
HyllPtr hplus(HyllPtr a, HyllPtr b);
HyllPtr hzero();
HyllPtr hbang(HyllPtr body);
HyllPtr hforallT(std::string binder, HyllPtr body);
HyllPtr hexistsT(std::string binder, HyllPtr body);
HyllPtr hat(HyllPtr body, WorldPtr world);
HyllPtr hdown(std::string binder, HyllPtr body);
HyllPtr hforallW(std::string binder, HyllPtr body);
HyllPtr hexistsW(std::string binder, HyllPtr body);
HyllPtr hforallWBelow(std::string binder, WorldPtr bound, HyllPtr body);

bool equal(const HyllPtr& a, const HyllPtr& b);
std::string toString(const HyllPtr& f);
std::string key(const HyllPtr& f);

struct HyllJudgment {
  HyllPtr formula;
  WorldPtr world;
};

bool equal(const HyllJudgment& a, const HyllJudgment& b);
std::string toString(const HyllJudgment& j);

// Substitute the outermost world binder by `value`, shifting deeper indices.
// When the substitution closes a ForallWBelow bound, that node expands into
// the finite conjunction it abbreviates (needs `dom` for predecessor
// enumeration).
HyllPtr substWorld(const HyllPtr& f, int depth, const WorldPtr& value,
                   const Domain& dom);

// Substitute the outermost term binder inside atom arguments.
HyllPtr substTerm(const HyllPtr& f, int depth, const TermPtr& value);

// Expand a closed-bound ForallWBelow node; identity on other tags.
HyllPtr expandBelow(const HyllPtr& f, const Domain& dom);

bool closedHyll(const HyllPtr& f);

// Worlds are normalized during reification so world-equal judgments reify
// equally. Injective on normalized judgments; unreify inverts reify.
TermPtr reifyFormula(const HyllPtr& f, const Domain& dom);
TermPtr reifyWorld(const WorldPtr& w, const Domain& dom);
TermPtr reifyJudgment(const HyllJudgment& j, const Domain& dom);
std::optional<HyllPtr> unreifyFormula(const TermPtr& t);
std::optional<WorldPtr> unreifyWorld(const TermPtr& t);
std::optional<HyllJudgment> unreifyJudgment(const TermPtr& t);

// All closed worlds occurring in a formula / judgment (normalized).
void collectWorlds(const HyllPtr& f, const Domain& dom,
                   std::vector<WorldPtr>& out);

bool hybridFree(const HyllPtr& f);  // no At/Down/world quantifiers

}  // namespace wb::kernel
