#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wb/ctl/system.hpp"
#include "wb/kernel/formula.hpp"
#include "wb/kernel/hyll.hpp"
#include "wb/kernel/signature.hpp"
#include "wb/kernel/world.hpp"

namespace wb::text {

// One task per file, line-oriented `key: value` records. List-valued keys
// accumulate across repeated lines; formulas on one line split on ';'.
// The `task:` line must come before any section whose reading depends on it.
struct ProblemFile {
  std::string task;  // llf | hyll | sellf | mumall | ctl
  std::optional<kernel::Domain> domain;
  int depth = -1;  // unset
  std::optional<kernel::Polarity> bias;
  std::optional<std::string> expect;  // provable | not-provable

  // hybrid sequent (task hyll)
  std::vector<kernel::HyllJudgment> gamma, delta;
  std::optional<kernel::HyllJudgment> goal;

  // one-sided classical sequent (task llf)
  std::vector<kernel::FormulaPtr> classical, linear, goalFormulas;

  // subexponential sequent (task sellf)
  std::optional<kernel::SubexpSignature> signature;
  std::vector<std::pair<std::string, kernel::FormulaPtr>> contextEntries;
  std::vector<kernel::FormulaPtr> workbench;

  // fixed-point sequent (task mumall) with optional invariant hints;
  // a hint path is `<formula index>.<child index>...` into the sequent
  std::vector<kernel::FormulaPtr> sequent;
  std::vector<std::pair<std::string, kernel::FormulaPtr>> hints;

  // branching-time query (task ctl / embedded system for mumall synthesis)
  ctl::CtlPtr ctlQuery;
  std::optional<ctl::State> state;
  std::optional<ctl::TransitionSystem> system;
};

ProblemFile parseProblem(const std::string& text);
ProblemFile loadProblem(const std::string& path);
std::string printProblem(const ProblemFile& p);

// Standalone transition-system files (`vars:`, `rule ...:`, `init:`).
// With expandPartial, rules mentioning a subset of the variables expand to
// the 2^k completions (unmentioned source values enumerate, targets inherit
// the source value unless overridden); otherwise partial rules are an error.
ctl::TransitionSystem parseTransitionSystem(const std::string& text,
                                            bool expandPartial = false);
ctl::TransitionSystem loadTransitionSystem(const std::string& path,
                                           bool expandPartial = false);
std::string printTransitionSystem(const ctl::TransitionSystem& ts);

std::string printState(const ctl::TransitionSystem& ts, const ctl::State& s);

// `labels:` / `order: a < b, c < d` / `unbounded:` accumulated sections.
kernel::SubexpSignature parseSignatureText(const std::string& text);
std::string printSignature(const kernel::SubexpSignature& sig);

std::string readFile(const std::string& path);
void writeFile(const std::string& path, const std::string& content);

}  // namespace wb::text
