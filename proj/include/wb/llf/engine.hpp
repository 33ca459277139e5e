#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wb/kernel/formula.hpp"
#include "wb/kernel/world.hpp"

namespace wb::llf {

// One-sided focused sequents ⊢ Ψ : Δ ⇑ L  /  ⊢ Ψ : Δ ⇓ F. The classical
// context Ψ admits contraction and weakening; the linear context Δ does not.
struct Proof;
using ProofPtr = std::shared_ptr<const Proof>;

struct Proof {
  std::string rule;
  // conclusion snapshot
  std::vector<kernel::FormulaPtr> classical;  // Ψ
  std::vector<kernel::FormulaPtr> linear;     // Δ
  std::vector<kernel::FormulaPtr> list;       // L (up-phase tail)
  kernel::FormulaPtr focus;                   // down-phase focus, else null
  std::vector<ProofPtr> premises;
};

enum class Verdict { Proved, NotProvable, Exhausted };

struct Options {
  int depth = 6;         // decide budget along any branch
  long steps = 4000000;  // total decide budget across all backtracking
  // cap on decides alive in one candidate tree; completed branch premises
  // stay on the call stack while their siblings run, so this also bounds
  // stack usage
  int nest = 1200;
  kernel::Polarity bias = kernel::Polarity::Negative;
  // witness pools for existentials the clause matcher cannot resolve;
  // world-sorted pools close under monoid product/difference when a
  // domain is supplied
  std::optional<kernel::Domain> domain;
  int poolCap = 48;
};

struct Result {
  Verdict verdict = Verdict::NotProvable;
  ProofPtr proof;
};

// Bounded focused search: the negative phase is exhaustive and
// deterministic, decides are the only backtracking points and the only
// steps counted against the depth bound.
Result prove_llf(const std::vector<kernel::FormulaPtr>& classical,
                 const std::vector<kernel::FormulaPtr>& linear,
                 const std::vector<kernel::FormulaPtr>& goal,
                 const Options& opt = {});

// Validates every node against its rule's side conditions, including exact
// context splitting, promotion emptiness, and initial-rule strictness.
// Returns false and fills `error` with the first offending node.
bool replay(const ProofPtr& p, kernel::Polarity bias,
            std::string* error = nullptr);

// Nested parenthesized records `(rule <name> (seq ...) <premise>*)`.
std::string serialize(const ProofPtr& p);

// Decide steps along the deepest branch (bipole-phase audits use this).
int decideDepth(const ProofPtr& p);

}  // namespace wb::llf
