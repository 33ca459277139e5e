#include "wb/kernel/world.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace wb::kernel {

WorldPtr wiota() {
  auto w = std::make_shared<WorldExpr>();
  w->kind = WorldExpr::Kind::Iota;
  return w;
}

WorldPtr wnat(uint64_t n) {
  auto w = std::make_shared<WorldExpr>();
  w->kind = WorldExpr::Kind::Nat;
  w->nat = n;
  return w;
}

WorldPtr wgen(std::string name) {
  auto w = std::make_shared<WorldExpr>();
  w->kind = WorldExpr::Kind::Gen;
  w->name = std::move(name);
  return w;
}

WorldPtr wbvar(int index) {
  auto w = std::make_shared<WorldExpr>();
  w->kind = WorldExpr::Kind::BVar;
  w->index = index;
  return w;
}

WorldPtr wfvar(std::string name) {
  auto w = std::make_shared<WorldExpr>();
  w->kind = WorldExpr::Kind::FVar;
  w->name = std::move(name);
  return w;
}

WorldPtr wdot(WorldPtr a, WorldPtr b) {
  auto w = std::make_shared<WorldExpr>();
  w->kind = WorldExpr::Kind::Dot;
  w->a = std::move(a);
  w->b = std::move(b);
  return w;
}

bool Domain::hasGenerator(const std::string& g) const {
  return std::find(generators.begin(), generators.end(), g) != generators.end();
}

bool equal(const WorldPtr& a, const WorldPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case WorldExpr::Kind::Iota:
      return true;
    case WorldExpr::Kind::Nat:
      return a->nat == b->nat;
    case WorldExpr::Kind::Gen:
    case WorldExpr::Kind::FVar:
      return a->name == b->name;
    case WorldExpr::Kind::BVar:
      return a->index == b->index;
    case WorldExpr::Kind::Dot:
      return equal(a->a, b->a) && equal(a->b, b->b);
  }
  return false;
}

bool closedWorld(const WorldPtr& w) {
  switch (w->kind) {
    case WorldExpr::Kind::BVar:
      return false;
    case WorldExpr::Kind::Dot:
      return closedWorld(w->a) && closedWorld(w->b);
    default:
      return true;
  }
}

std::string toString(const WorldPtr& w) {
  switch (w->kind) {
    case WorldExpr::Kind::Iota:
      return "iota";
    case WorldExpr::Kind::Nat:
      return std::to_string(w->nat);
    case WorldExpr::Kind::Gen:
    case WorldExpr::Kind::FVar:
      return w->name;
    case WorldExpr::Kind::BVar:
      return "'w" + std::to_string(w->index);
    case WorldExpr::Kind::Dot:
      return toString(w->a) + "." + toString(w->b);
  }
  return "?";
}

namespace {

// Flattened view: multiset of non-numeral atoms plus a numeral total.
struct Flat {
  // (sort key kind, name-or-index) pairs; 0 = Gen, 1 = FVar, 2 = BVar
  std::vector<std::tuple<int, std::string, int>> atoms;
  uint64_t nat = 0;
};

void flatten(const WorldPtr& w, const Domain& dom, Flat& out) {
  switch (w->kind) {
    case WorldExpr::Kind::Iota:
      return;
    case WorldExpr::Kind::Nat:
      if (dom.kind == Domain::Kind::FreeCommutative && w->nat != 0)
        throw std::runtime_error(
            "world numeral '" + std::to_string(w->nat) +
            "' is not valid in a free commutative domain");
      out.nat += w->nat;
      return;
    case WorldExpr::Kind::Gen:
      if (dom.kind == Domain::Kind::NatPlus)
        throw std::runtime_error("world generator '" + w->name +
                                 "' is not valid in the naturals domain");
      if (!dom.hasGenerator(w->name))
        throw std::runtime_error("unknown world generator '" + w->name + "'");
      out.atoms.emplace_back(0, w->name, 0);
      return;
    case WorldExpr::Kind::FVar:
      out.atoms.emplace_back(1, w->name, 0);
      return;
    case WorldExpr::Kind::BVar:
      out.atoms.emplace_back(2, "", w->index);
      return;
    case WorldExpr::Kind::Dot:
      flatten(w->a, dom, out);
      flatten(w->b, dom, out);
      return;
  }
}

WorldPtr atomOf(const std::tuple<int, std::string, int>& a) {
  switch (std::get<0>(a)) {
    case 0:
      return wgen(std::get<1>(a));
    case 1:
      return wfvar(std::get<1>(a));
    default:
      return wbvar(std::get<2>(a));
  }
}

WorldPtr rebuild(const Flat& f, const Domain& dom) {
  std::vector<WorldPtr> parts;
  for (const auto& a : f.atoms) parts.push_back(atomOf(a));
  if (dom.kind == Domain::Kind::NatPlus) {
    if (parts.empty()) return wnat(f.nat);
    if (f.nat > 0) parts.push_back(wnat(f.nat));
  } else {
    if (parts.empty()) return wiota();
  }
  WorldPtr acc = parts.back();
  for (size_t i = parts.size() - 1; i-- > 0;) acc = wdot(parts[i], acc);
  return acc;
}

Flat flatNormal(const WorldPtr& w, const Domain& dom) {
  Flat f;
  flatten(w, dom, f);
  std::sort(f.atoms.begin(), f.atoms.end());
  return f;
}

}  // namespace

WorldPtr normalizeWorld(const WorldPtr& w, const Domain& dom) {
  return rebuild(flatNormal(w, dom), dom);
}

bool worldReachable(const WorldPtr& u, const WorldPtr& w, const Domain& dom) {
  if (!closedWorld(u) || !closedWorld(w))
    throw std::runtime_error("reachability requires closed worlds");
  Flat fu = flatNormal(u, dom);
  Flat fw = flatNormal(w, dom);
  if (fu.nat > fw.nat) return false;
  // multiset inclusion of atoms
  size_t i = 0;
  for (const auto& a : fu.atoms) {
    while (i < fw.atoms.size() && fw.atoms[i] < a) ++i;
    if (i >= fw.atoms.size() || !(fw.atoms[i] == a)) return false;
    ++i;
  }
  return true;
}

std::optional<WorldPtr> worldDifference(const WorldPtr& u, const WorldPtr& w,
                                        const Domain& dom) {
  if (!worldReachable(u, w, dom)) return std::nullopt;
  Flat fu = flatNormal(u, dom);
  Flat fw = flatNormal(w, dom);
  Flat diff;
  diff.nat = fw.nat - fu.nat;
  size_t i = 0;
  for (const auto& a : fw.atoms) {
    if (i < fu.atoms.size() && fu.atoms[i] == a) {
      ++i;
      continue;
    }
    diff.atoms.push_back(a);
  }
  return rebuild(diff, dom);
}

std::vector<WorldPtr> strictPredecessors(const WorldPtr& w, const Domain& dom) {
  if (!closedWorld(w))
    throw std::runtime_error("strictPredecessors requires a closed world");
  Flat f = flatNormal(w, dom);
  std::vector<WorldPtr> out;
  if (dom.kind == Domain::Kind::NatPlus) {
    for (uint64_t k = 0; k < f.nat; ++k) out.push_back(wnat(k));
    return out;
  }
  // Proper submultisets, enumerated by bitmask over atom occurrences and
  // deduplicated (occurrences of the same generator are interchangeable).
  size_t n = f.atoms.size();
  if (n > 16)
    throw std::runtime_error("world too large to enumerate predecessors");
  std::vector<WorldPtr> seen;
  for (uint32_t mask = 0; mask + 1 < (1u << n); ++mask) {
    Flat sub;
    for (size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) sub.atoms.push_back(f.atoms[i]);
    WorldPtr cand = rebuild(sub, dom);
    bool dup = false;
    for (const auto& s : seen)
      if (equal(s, cand)) {
        dup = true;
        break;
      }
    if (!dup) seen.push_back(cand);
  }
  std::sort(seen.begin(), seen.end(), [](const WorldPtr& a, const WorldPtr& b) {
    return toString(a) < toString(b);
  });
  return seen;
}

WorldPtr substWorldBVar(const WorldPtr& w, int depth, const WorldPtr& value) {
  switch (w->kind) {
    case WorldExpr::Kind::BVar:
      if (w->index == depth) return value;
      if (w->index > depth) return wbvar(w->index - 1);
      return w;
    case WorldExpr::Kind::Dot: {
      auto a = substWorldBVar(w->a, depth, value);
      auto b = substWorldBVar(w->b, depth, value);
      if (a.get() == w->a.get() && b.get() == w->b.get()) return w;
      return wdot(std::move(a), std::move(b));
    }
    default:
      return w;
  }
}

void collectWorldAtoms(const WorldPtr& w, std::vector<WorldPtr>& out) {
  if (w->kind == WorldExpr::Kind::Dot) {
    collectWorldAtoms(w->a, out);
    collectWorldAtoms(w->b, out);
    return;
  }
  bool seen = false;
  for (const auto& u : out)
    if (equal(u, w)) {
      seen = true;
      break;
    }
  if (!seen) out.push_back(w);
}

}  // namespace wb::kernel
