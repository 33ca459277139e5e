#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wb/kernel/term.hpp"

namespace wb::kernel {

// A subexponential signature <I, <=, U>: finite label set, preorder, and an
// upward-closed set U of unbounded (weakening/contraction-admitting) labels.
// Search extends a working copy with fresh eigenvariable labels; the base
// signature stays immutable.
class SubexpSignature {
 public:
  SubexpSignature() = default;

  // Declared order pairs are closed under reflexivity and transitivity.
  // Throws if U is not upward closed or an order side mentions an unknown
  // label.
  SubexpSignature(std::vector<std::string> labels,
                  std::vector<std::pair<std::string, std::string>> order,
                  std::set<std::string> unbounded);

  bool hasLabel(const std::string& l) const;
  bool leq(const std::string& a, const std::string& b) const;
  bool unbounded(const std::string& l) const;
  const std::vector<std::string>& labels() const { return labels_; }
  const std::set<std::string>& unboundedSet() const { return unbounded_; }

  // The type of a label for location quantification: a declared label is its
  // own type; an eigenvariable label reports its declared type.
  std::string typeOf(const std::string& l) const;

  // Fresh label for a location eigenvariable of type `type`: it sits below
  // `type` (and transitively below everything above it) and carries no other
  // relations. Never unbounded. Returns the new label's name.
  std::string addEigenLabel(const std::string& type);

  // Same, with a caller-chosen name (proof replay re-inserts the labels a
  // search committed to). Throws if the name is already a label.
  void addEigenLabelNamed(const std::string& name, const std::string& type);

  // Optional world term attached to a label (used when signatures stand for
  // world sets); empty when absent.
  void bindWorldTerm(const std::string& label, TermPtr t);
  TermPtr worldTermOf(const std::string& label) const;
  // Reverse lookup by structural term equality; empty string when absent.
  std::string labelOfWorldTerm(const TermPtr& t) const;

  std::string toString() const;

 private:
  std::vector<std::string> labels_;
  std::set<std::pair<std::string, std::string>> leq_;  // a <= b, a != b
  std::set<std::string> unbounded_;
  std::map<std::string, std::string> eigenType_;
  std::map<std::string, TermPtr> worldTerm_;
  int eigenCounter_ = 0;

  void closeTransitively();
  void checkUpwardClosure() const;
};

}  // namespace wb::kernel
