#pragma once

#include <set>
#include <vector>

#include "wb/ctl/system.hpp"

namespace wb::ctl {

// Explicit-state enumeration; systems at this scale stay tiny, and the
// guard keeps an accidental 2^n blowup from hanging a test run.
std::vector<State> allStates(const TransitionSystem& ts);

std::vector<State> reachable(const TransitionSystem& ts, const State& from);

// Every state reachable from `from` has at least one successor.
bool serialFrom(const TransitionSystem& ts, const State& from);

bool isTemporal(const CtlPtr& f);

// Fixpoint semantics over the full state space: least fixed points iterate
// up from the empty set, greatest ones down from the full set.
std::set<State> satStates(const TransitionSystem& ts, const CtlPtr& f);

// Model checking entry point. Throws std::runtime_error when f carries a
// temporal operator but some state reachable from s has no successor, and
// std::invalid_argument when f mentions unknown variables.
bool ctl_check(const TransitionSystem& ts, const State& s, const CtlPtr& f);

}  // namespace wb::ctl
