#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wb/kernel/hyll.hpp"
#include "wb/kernel/world.hpp"

namespace wb::hyll {

// Proof node for the two-sided hybrid calculus. `gamma` is the unbounded
// zone, `linear` the consumable zone, `goal` the judgment being proved.
// Rules that pick a linear judgment record its position in `principal`
// (copy records the unbounded index there instead); quantifier rules record
// the instantiation so an independent checker can recompute the substitution
// instead of searching for it.
struct Proof;
using ProofPtr = std::shared_ptr<Proof>;

struct Proof {
  std::string rule;
  std::vector<kernel::HyllJudgment> gamma;
  std::vector<kernel::HyllJudgment> linear;
  kernel::HyllJudgment goal;
  int principal = -1;                 // index into linear, -1 if unused
  kernel::TermPtr witnessTerm;        // forall_l / exists_r at term sort
  kernel::WorldPtr witnessWorld;      // forall_l / exists_r at world sort
  std::string eigen;                  // forall_r / exists_l fresh variable
  std::vector<ProofPtr> premises;
};

struct Sequent {
  std::vector<kernel::HyllJudgment> unbounded;
  std::vector<kernel::HyllJudgment> linear;
  kernel::HyllJudgment goal;
};

enum class Verdict { Proved, NotProvable, Exhausted };

struct Options {
  // Copies allowed of each unbounded judgment per branch. Runs past the
  // limit report Exhausted rather than NotProvable.
  int depth = 4;
  // Total rule applications across all backtracking before giving up.
  long steps = 2000000;
  // World monoid the judgments live in.
  kernel::Domain domain;
  // Cap on the candidate witness pool per quantifier application.
  int poolCap = 48;
};

struct Result {
  Verdict verdict = Verdict::NotProvable;
  ProofPtr proof;  // set iff verdict == Proved
};

Result prove_hyll(const Sequent& s, const Options& opt);

// Re-derives every node of a proof from its premises, checking context
// discipline, world normalization, instantiations, and eigenvariable
// freshness. Independent of the search path that produced the proof.
bool replay(const ProofPtr& p, const kernel::Domain& dom, std::string* error);

std::string serialize(const ProofPtr& p);

// Cut admissibility witness: given d1 proving G; D |- A@u and d2 proving
// G; D', A@u |- C@w, searches for a direct proof of G; D, D' |- C@w.
Result check_cut_instance(const ProofPtr& d1, const ProofPtr& d2,
                          const Options& opt);

}  // namespace wb::hyll
