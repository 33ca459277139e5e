#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wb/kernel/formula.hpp"
#include "wb/kernel/signature.hpp"

namespace wb::sell {

// One-sided focused sequents over a subexponential signature:
// ⊢ K : Γ ⇑ L  /  ⊢ K : Γ ⇓ F, where K maps labels to formula multisets
// (entries at unbounded labels admit contraction and weakening) and the
// workbench Γ holds stored positives and literals.
struct Proof;
using ProofPtr = std::shared_ptr<Proof>;

// Full sequent snapshot per node. `context` lists K as (label, formula)
// pairs, unbounded and linear entries together; `label` names the
// subexponential a rule touched (?^l, d_l, !^l, the initial rule's mate
// location, or a location-quantifier instantiation), `eigen` the fresh
// first-order or location variable of a universal rule.
struct Proof {
  std::string rule;
  std::vector<std::pair<std::string, kernel::FormulaPtr>> context;
  std::vector<kernel::FormulaPtr> workbench;
  std::vector<kernel::FormulaPtr> list;  // ⇑ tail, current formula at back
  kernel::FormulaPtr focus;              // ⇓ only
  std::string label;
  kernel::TermPtr witness;
  std::string eigen;
  std::vector<ProofPtr> premises;
};

struct Sequent {
  std::vector<std::pair<std::string, kernel::FormulaPtr>> context;
  std::vector<kernel::FormulaPtr> workbench;
  std::vector<kernel::FormulaPtr> list;
  kernel::FormulaPtr focus;  // start in the ⇓ phase; list must be empty
};

enum class Verdict { Proved, NotProvable, Exhausted };

struct Options {
  int depth = 6;         // decide budget along any branch
  long steps = 2000000;  // total rule applications across all backtracking
  kernel::Polarity bias = kernel::Polarity::Negative;
  int poolCap = 48;  // witness pool ceiling for first-order existentials
};

struct Result {
  Verdict verdict = Verdict::NotProvable;
  ProofPtr proof;
};

// Bounded focused search. Throws std::invalid_argument when a formula
// mentions a label missing from the signature. Fresh location labels from
// universal location quantifiers extend a working copy of the signature;
// the input signature is never mutated.
Result prove_sell(const kernel::SubexpSignature& sig, const Sequent& s,
                  const Options& opt = {});

// Instantiates a leading existential location quantifier with a label whose
// type sits below the quantifier's type bound; throws std::invalid_argument
// on a type violation or a non-existential input.
kernel::FormulaPtr instantiate_loc(const kernel::SubexpSignature& sig,
                                   const kernel::FormulaPtr& f,
                                   const std::string& witness);

// Re-derives every node, including the promotion emptiness condition, the
// initial rule's context audit, tensor distribution of linear entries and
// duplication of unbounded ones, and freshness of eigenvariables and
// eigenlabels. Location labels a proof introduced are re-added to a working
// copy of the signature on the way down.
bool replay(const ProofPtr& p, const kernel::SubexpSignature& sig,
            kernel::Polarity bias, std::string* error = nullptr);

std::string serialize(const ProofPtr& p);

// Decide steps along the deepest branch.
int decideDepth(const ProofPtr& p);

// Loads a signature section: `labels: a b c`, `order: a < b` (one pair per
// line, transitively closed), `unbounded: c ...`. Rejects unknown labels and
// an unbounded set that is not upward closed.
kernel::SubexpSignature parseSignature(const std::string& text);

}  // namespace wb::sell
