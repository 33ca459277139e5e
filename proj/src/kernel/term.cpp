#include "wb/kernel/term.hpp"

#include <stdexcept>

namespace wb::kernel {

TermPtr bvar(int index) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::BVar;
  t->index = index;
  return t;
}

TermPtr fvar(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::FVar;
  t->name = std::move(name);
  return t;
}

TermPtr locvar(int index) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::LocVar;
  t->index = index;
  return t;
}

TermPtr fun(std::string symbol, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = Term::Kind::Fun;
  t->name = std::move(symbol);
  t->args = std::move(args);
  return t;
}

bool equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::BVar:
    case Term::Kind::LocVar:
      return a->index == b->index;
    case Term::Kind::FVar:
      return a->name == b->name;
    case Term::Kind::Fun: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i])) return false;
      return true;
    }
  }
  return false;
}

namespace {

bool closedAt(const TermPtr& t, int depth) {
  switch (t->kind) {
    case Term::Kind::BVar:
      return t->index < depth;
    case Term::Kind::LocVar:
      return false;
    case Term::Kind::FVar:
      return true;
    case Term::Kind::Fun:
      for (const auto& a : t->args)
        if (!closedAt(a, depth)) return false;
      return true;
  }
  return false;
}

}  // namespace

bool closedTerm(const TermPtr& t) { return closedAt(t, 0); }

std::string toString(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::BVar:
      return "'" + std::to_string(t->index);
    case Term::Kind::LocVar:
      return "'l" + std::to_string(t->index);
    case Term::Kind::FVar:
      return t->name;
    case Term::Kind::Fun: {
      if (t->args.empty()) return t->name;
      std::string s = t->name + "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) s += ", ";
        s += toString(t->args[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

TermPtr substBVar(const TermPtr& t, int depth, const TermPtr& value) {
  switch (t->kind) {
    case Term::Kind::BVar:
      if (t->index == depth) return value;
      if (t->index > depth) return bvar(t->index - 1);
      return t;
    case Term::Kind::FVar:
    case Term::Kind::LocVar:
      return t;
    case Term::Kind::Fun: {
      bool changed = false;
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) {
        auto na = substBVar(a, depth, value);
        changed = changed || na.get() != a.get();
        args.push_back(std::move(na));
      }
      if (!changed) return t;
      return fun(t->name, std::move(args));
    }
  }
  return t;
}

TermPtr substLocVar(const TermPtr& t, int depth, const TermPtr& value) {
  switch (t->kind) {
    case Term::Kind::LocVar:
      if (t->index == depth) return value;
      if (t->index > depth) return locvar(t->index - 1);
      return t;
    case Term::Kind::FVar:
    case Term::Kind::BVar:
      return t;
    case Term::Kind::Fun: {
      bool changed = false;
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) {
        auto na = substLocVar(a, depth, value);
        changed = changed || na.get() != a.get();
        args.push_back(std::move(na));
      }
      if (!changed) return t;
      return fun(t->name, std::move(args));
    }
  }
  return t;
}

bool matchTerm(const TermPtr& pattern, const TermPtr& target, int metaCount,
               std::vector<TermPtr>& out, int depth) {
  if (out.size() != static_cast<size_t>(metaCount)) out.resize(metaCount);
  switch (pattern->kind) {
    case Term::Kind::BVar: {
      int meta = pattern->index - depth;
      if (meta >= 0 && meta < metaCount) {
        if (out[meta]) return equal(out[meta], target);
        out[meta] = target;
        return true;
      }
      return target->kind == Term::Kind::BVar && target->index == pattern->index;
    }
    case Term::Kind::FVar:
      return target->kind == Term::Kind::FVar && target->name == pattern->name;
    case Term::Kind::LocVar:
      return target->kind == Term::Kind::LocVar &&
             target->index == pattern->index;
    case Term::Kind::Fun: {
      if (target->kind != Term::Kind::Fun || target->name != pattern->name ||
          target->args.size() != pattern->args.size())
        return false;
      for (size_t i = 0; i < pattern->args.size(); ++i)
        if (!matchTerm(pattern->args[i], target->args[i], metaCount, out, depth))
          return false;
      return true;
    }
  }
  return false;
}

namespace {

// Metavariable j appears as BVar(depth + j) when the occurrence sits under
// `depth` genuine binders. Bound values are plugged in verbatim; clause
// templates arrange for any dangling index in a value to land under exactly
// the binder it expects.
TermPtr applyMetaAt(const TermPtr& t, int depth, int metaCount,
                    const std::vector<TermPtr>& bindings) {
  switch (t->kind) {
    case Term::Kind::BVar: {
      int meta = t->index - depth;
      if (meta >= 0 && meta < metaCount) {
        if (!bindings[meta])
          throw std::logic_error("applyMeta: unresolved metavariable");
        return bindings[meta];
      }
      return t;
    }
    case Term::Kind::FVar:
    case Term::Kind::LocVar:
      return t;
    case Term::Kind::Fun: {
      bool changed = false;
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) {
        auto na = applyMetaAt(a, depth, metaCount, bindings);
        changed = changed || na.get() != a.get();
        args.push_back(std::move(na));
      }
      if (!changed) return t;
      return fun(t->name, std::move(args));
    }
  }
  return t;
}

}  // namespace

TermPtr applyMeta(const TermPtr& t, int metaCount,
                  const std::vector<TermPtr>& bindings) {
  return applyMetaAt(t, 0, metaCount, bindings);
}

void collectClosedSubterms(const TermPtr& t, std::vector<TermPtr>& out) {
  if (closedTerm(t)) {
    bool seen = false;
    for (const auto& u : out)
      if (equal(u, t)) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(t);
  }
  if (t->kind == Term::Kind::Fun)
    for (const auto& a : t->args) collectClosedSubterms(a, out);
}

}  // namespace wb::kernel
