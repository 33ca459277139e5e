#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wb/kernel/formula.hpp"

namespace wb::mumall {

// One-sided multiset sequents ⊢ Δ over exponential-free formulas:
// multiplicative/additive rules plus bounded least-fixed-point unfolding
// and coinduction through explicit invariants.
struct Proof;
using ProofPtr = std::shared_ptr<Proof>;

// `principal` indexes the formula a rule acted on inside `sequent`;
// `invariant` is the S of a coinduction step.
struct Proof {
  std::string rule;
  std::vector<kernel::FormulaPtr> sequent;
  int principal = -1;
  kernel::FormulaPtr invariant;
  std::vector<ProofPtr> premises;
};

enum class Verdict { Proved, NotProvable, Exhausted };

// Invariants for ν-formulas are looked up by the formula's structural key;
// when absent, the synthesizer hook is consulted, and a null result raises
// the missing-hint error.
using HintMap = std::map<std::string, kernel::FormulaPtr>;
using Synthesizer = std::function<kernel::FormulaPtr(
    const kernel::FormulaPtr& nuFormula)>;

struct Options {
  int depth = 8;         // unfoldings per distinct μ-formula along a branch
  long steps = 2000000;  // total rule applications across all backtracking
  Synthesizer synth;
};

struct Result {
  Verdict verdict = Verdict::NotProvable;
  ProofPtr proof;
};

// Replaces the bound fixed-point variable of a μ-formula by the formula
// itself. Throws std::invalid_argument on anything but a μ.
kernel::FormulaPtr unfold_mu(const kernel::FormulaPtr& f);

// Bounded search. Throws std::invalid_argument when a formula carries an
// exponential, and std::runtime_error when a ν surfaces with no hint and no
// synthesizer (or the synthesizer declines).
Result prove_mumall(const std::vector<kernel::FormulaPtr>& goal,
                    const HintMap& hints, const Options& opt = {});

// Re-derives every node: leaf strictness, exact premise multisets for the
// context-splitting and unfolding rules, and the two coinduction premises
// ⊢ Δ, S and ⊢ B(S), S^⊥ with a closed exponential-free invariant.
bool replay(const ProofPtr& p, std::string* error = nullptr);

std::string serialize(const ProofPtr& p);

// Number of μ-unfolding nodes in the derivation.
int unfoldCount(const ProofPtr& p);

}  // namespace wb::mumall
