#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wb::kernel {

// First-order terms. Binders live in the surrounding formula; BVar indices
// count binders outward from the occurrence (de Bruijn). FVar is a free
// name, used for eigenvariables introduced during search. LocVar refers to a
// location binder (foralloc/existsloc), a separate index space from BVar.
struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { BVar, FVar, LocVar, Fun };

  Kind kind;
  int index = 0;              // BVar / LocVar
  std::string name;           // FVar / Fun symbol
  std::vector<TermPtr> args;  // Fun
};

TermPtr bvar(int index);
TermPtr fvar(std::string name);
TermPtr locvar(int index);
TermPtr fun(std::string symbol, std::vector<TermPtr> args = {});

bool equal(const TermPtr& a, const TermPtr& b);

// Closed = no BVar/LocVar at any depth; FVars are allowed (they denote
// eigenvariables, which are closed from the binder's point of view).
bool closedTerm(const TermPtr& t);

std::string toString(const TermPtr& t);

// Replace BVar(depth) by `value` and shift deeper indices down by one.
// `value` is inserted verbatim: callers guarantee it is closed, or that its
// dangling indices are meant for the binders surrounding the target position.
TermPtr substBVar(const TermPtr& t, int depth, const TermPtr& value);

// Replace LocVar(depth) by `value` (same conventions as substBVar).
TermPtr substLocVar(const TermPtr& t, int depth, const TermPtr& value);

// One-way first-order matching. Pattern positions BVar(i) with i >= depth
// refer to metavariables bound by a peeled quantifier prefix of size
// `metaCount`: metavariable j corresponds to BVar(depth + j). Bindings are
// accumulated in `out` (size metaCount, unresolved entries null). Returns
// false on clash. Non-meta pattern structure must match the target exactly;
// pattern BVar(i) with i < depth only matches the identical target index.
bool matchTerm(const TermPtr& pattern, const TermPtr& target, int metaCount,
               std::vector<TermPtr>& out, int depth = 0);

// Substitute metavariables (same convention as matchTerm) by their bindings;
// unresolved metavariables are an error. Used to instantiate clause bodies
// after matching.
TermPtr applyMeta(const TermPtr& t, int metaCount,
                  const std::vector<TermPtr>& bindings);

// Collect every closed subterm of t into out (deduplicated by equal()).
void collectClosedSubterms(const TermPtr& t, std::vector<TermPtr>& out);

}  // namespace wb::kernel
