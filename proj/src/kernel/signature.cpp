#include "wb/kernel/signature.hpp"

#include <algorithm>
#include <stdexcept>

namespace wb::kernel {

SubexpSignature::SubexpSignature(
    std::vector<std::string> labels,
    std::vector<std::pair<std::string, std::string>> order,
    std::set<std::string> unbounded)
    : labels_(std::move(labels)), unbounded_(std::move(unbounded)) {
  for (const auto& [a, b] : order) {
    if (!hasLabel(a) || !hasLabel(b))
      throw std::runtime_error("order relates unknown label '" +
                               (hasLabel(a) ? b : a) + "'");
    if (a != b) leq_.emplace(a, b);
  }
  for (const auto& u : unbounded_)
    if (!hasLabel(u))
      throw std::runtime_error("unbounded set mentions unknown label '" + u +
                               "'");
  closeTransitively();
  checkUpwardClosure();
}

bool SubexpSignature::hasLabel(const std::string& l) const {
  return std::find(labels_.begin(), labels_.end(), l) != labels_.end();
}

bool SubexpSignature::leq(const std::string& a, const std::string& b) const {
  return a == b || leq_.count({a, b}) > 0;
}

bool SubexpSignature::unbounded(const std::string& l) const {
  return unbounded_.count(l) > 0;
}

std::string SubexpSignature::typeOf(const std::string& l) const {
  auto it = eigenType_.find(l);
  return it == eigenType_.end() ? l : it->second;
}

std::string SubexpSignature::addEigenLabel(const std::string& type) {
  std::string name;
  do {
    name = "_loc" + std::to_string(++eigenCounter_);
  } while (hasLabel(name));
  addEigenLabelNamed(name, type);
  return name;
}

void SubexpSignature::addEigenLabelNamed(const std::string& name,
                                         const std::string& type) {
  if (!hasLabel(type))
    throw std::runtime_error("eigenvariable type '" + type +
                             "' is not a signature label");
  if (hasLabel(name))
    throw std::runtime_error("eigenvariable label '" + name +
                             "' already exists");
  labels_.push_back(name);
  eigenType_[name] = type;
  leq_.emplace(name, type);
  for (const auto& l : labels_)
    if (l != name && l != type && leq(type, l)) leq_.emplace(name, l);
}

void SubexpSignature::bindWorldTerm(const std::string& label, TermPtr t) {
  worldTerm_[label] = std::move(t);
}

TermPtr SubexpSignature::worldTermOf(const std::string& label) const {
  auto it = worldTerm_.find(label);
  return it == worldTerm_.end() ? nullptr : it->second;
}

std::string SubexpSignature::labelOfWorldTerm(const TermPtr& t) const {
  for (const auto& [l, wt] : worldTerm_)
    if (wt && equal(wt, t)) return l;
  return "";
}

void SubexpSignature::closeTransitively() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [a, b] : std::set<std::pair<std::string, std::string>>(leq_))
      for (const auto& [c, d] : std::set<std::pair<std::string, std::string>>(leq_))
        if (b == c && a != d && !leq_.count({a, d})) {
          leq_.emplace(a, d);
          changed = true;
        }
  }
}

void SubexpSignature::checkUpwardClosure() const {
  for (const auto& u : unbounded_)
    for (const auto& l : labels_)
      if (leq(u, l) && !unbounded_.count(l))
        throw std::runtime_error("unbounded set is not upward closed: " + u +
                                 " <= " + l + " but '" + l + "' is bounded");
}

std::string SubexpSignature::toString() const {
  std::string s = "labels:";
  for (const auto& l : labels_) s += " " + l;
  s += "\n";
  if (!leq_.empty()) {
    std::string ord = "order:";
    bool first = true;
    for (const auto& [a, b] : leq_) {
      ord += first ? " " : ", ";
      ord += a + " < " + b;
      first = false;
    }
    s += ord + "\n";
  }
  if (!unbounded_.empty()) {
    s += "unbounded:";
    for (const auto& u : unbounded_) s += " " + u;
    s += "\n";
  }
  return s;
}

}  // namespace wb::kernel
