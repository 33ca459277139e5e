#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wb::kernel {

// Worlds form a commutative monoid <W, ., iota>. Two domains are supported:
// naturals under addition (numerals, iota = 0) and the free commutative
// monoid over a finite generator set (iota = empty word). BVar indices count
// world binders (down/forallworld/existsworld) outward from the occurrence;
// FVar names eigenvariables.
struct WorldExpr;
using WorldPtr = std::shared_ptr<const WorldExpr>;

struct WorldExpr {
  enum class Kind { Iota, Nat, Gen, BVar, FVar, Dot };

  Kind kind;
  uint64_t nat = 0;    // Nat
  std::string name;    // Gen / FVar
  int index = 0;       // BVar
  WorldPtr a, b;       // Dot
};

WorldPtr wiota();
WorldPtr wnat(uint64_t n);
WorldPtr wgen(std::string name);
WorldPtr wbvar(int index);
WorldPtr wfvar(std::string name);
WorldPtr wdot(WorldPtr a, WorldPtr b);

struct Domain {
  enum class Kind { NatPlus, FreeCommutative };
  Kind kind = Kind::NatPlus;
  std::vector<std::string> generators;  // FreeCommutative only

  bool hasGenerator(const std::string& g) const;
};

bool equal(const WorldPtr& a, const WorldPtr& b);
bool closedWorld(const WorldPtr& w);
std::string toString(const WorldPtr& w);

// Canonical form. NatPlus: a closed world becomes Nat(n); with variables, a
// right-nested dot chain of the sorted variable atoms followed by Nat(n) when
// n > 0. FreeCommutative: the sorted multiset of generator/variable atoms as
// a right-nested dot chain, Iota when empty. Numerals other than 0/iota are
// rejected in FreeCommutative mode, unknown generators in both.
WorldPtr normalizeWorld(const WorldPtr& w, const Domain& dom);

// Reachability u <= w: exists v with u.v = w. Defined on closed worlds.
bool worldReachable(const WorldPtr& u, const WorldPtr& w, const Domain& dom);

// The v with u.v = w when reachable (closed worlds), else nullopt.
std::optional<WorldPtr> worldDifference(const WorldPtr& u, const WorldPtr& w,
                                        const Domain& dom);

// Strict predecessors of a closed world under the reachability preorder,
// canonical and sorted. NatPlus: 0..n-1. FreeCommutative: proper submultisets.
std::vector<WorldPtr> strictPredecessors(const WorldPtr& w, const Domain& dom);

WorldPtr substWorldBVar(const WorldPtr& w, int depth, const WorldPtr& value);

void collectWorldAtoms(const WorldPtr& w, std::vector<WorldPtr>& out);

}  // namespace wb::kernel
