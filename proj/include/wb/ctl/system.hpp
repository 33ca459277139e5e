#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wb::ctl {

// A state is a total assignment to the system's ordered variable list.
struct State {
  std::vector<uint8_t> bits;

  bool operator==(const State& o) const { return bits == o.bits; }
  bool operator<(const State& o) const { return bits < o.bits; }
};

struct Rule {
  std::string name;
  State from, to;
};

// Finite transition system over propositional variables. Every rule source
// and target assigns all variables; partial rule declarations must be
// expanded before construction.
struct TransitionSystem {
  std::vector<std::string> vars;
  std::vector<Rule> rules;
  std::optional<State> init;

  int varIndex(const std::string& v) const;
};

std::string toString(const TransitionSystem& ts, const State& s);

// Fires r on s: the target state when s matches r's source exactly.
std::optional<State> step(const TransitionSystem& ts, const State& s,
                          const Rule& r);

std::vector<State> successors(const TransitionSystem& ts, const State& s);

// Branching-time formulas, negation-free: literals carry their own sign.
enum class CtlTag { Lit, And, Or, EX, AX, EF, AF, EG, AG, EU, AU };

struct CtlFormula;
using CtlPtr = std::shared_ptr<const CtlFormula>;

struct CtlFormula {
  CtlTag tag;
  // Lit
  std::string var;
  bool positive = true;
  // And/Or/EU/AU use left+right; unary temporal operators use left.
  CtlPtr left, right;
};

CtlPtr clit(std::string var, bool positive);
CtlPtr cand(CtlPtr a, CtlPtr b);
CtlPtr cor(CtlPtr a, CtlPtr b);
CtlPtr cunary(CtlTag tag, CtlPtr a);
CtlPtr cuntil(bool existential, CtlPtr a, CtlPtr b);

bool equal(const CtlPtr& a, const CtlPtr& b);
std::string toString(const CtlPtr& f);

// Number of literal occurrences plus connectives/operators.
int sizeOf(const CtlPtr& f);

// Variables mentioned by a formula must exist in the system.
void validateCtl(const TransitionSystem& ts, const CtlPtr& f);

}  // namespace wb::ctl
