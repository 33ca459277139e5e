#include "wb/text/files.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wb/text/parse.hpp"

namespace wb::text {

using namespace wb::kernel;

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> splitOn(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string stripComment(const std::string& line) {
  size_t h = line.find('#');
  return h == std::string::npos ? line : line.substr(0, h);
}

// `+a -b` over the declared variable order; must be total
ctl::State parseStateLits(const ctl::TransitionSystem& ts,
                          const std::string& text, int line,
                          std::vector<bool>* mentioned = nullptr) {
  auto toks = lex(text, LexFlavor::Rule, line);
  ctl::State s;
  s.bits.assign(ts.vars.size(), 0);
  std::vector<bool> seen(ts.vars.size(), false);
  size_t i = 0;
  while (toks[i].kind != Tok::End) {
    bool value;
    if (toks[i].kind == Tok::Plus)
      value = true;
    else if (toks[i].kind == Tok::Minus)
      value = false;
    else
      throw ParseError(toks[i].line, toks[i].col, "expected '+x' or '-x'");
    ++i;
    if (toks[i].kind != Tok::Ident)
      throw ParseError(toks[i].line, toks[i].col, "expected a variable");
    int vi = ts.varIndex(toks[i].text);
    if (vi < 0)
      throw ParseError(toks[i].line, toks[i].col,
                       "undeclared variable '" + toks[i].text + "'");
    if (seen[vi])
      throw ParseError(toks[i].line, toks[i].col,
                       "variable '" + toks[i].text + "' assigned twice");
    seen[vi] = true;
    s.bits[vi] = value ? 1 : 0;
    ++i;
  }
  if (mentioned) {
    *mentioned = seen;
  } else {
    for (size_t v = 0; v < seen.size(); ++v)
      if (!seen[v])
        throw ParseError(line, 1,
                         "state does not assign variable '" + ts.vars[v] + "'");
  }
  return s;
}

struct RawRule {
  std::string name;
  ctl::State from, to;
  std::vector<bool> fromSeen, toSeen;
  int line;
};

void finishRules(ctl::TransitionSystem& ts, const std::vector<RawRule>& raw,
                 bool expandPartial) {
  for (const auto& r : raw) {
    std::vector<int> freeVars;
    for (size_t v = 0; v < ts.vars.size(); ++v)
      if (!r.fromSeen[v]) freeVars.push_back(static_cast<int>(v));
    if (!expandPartial) {
      for (size_t v = 0; v < ts.vars.size(); ++v)
        if (!r.fromSeen[v] || !r.toSeen[v])
          throw ParseError(
              r.line, 1,
              "rule '" + r.name + "' does not mention variable '" +
                  ts.vars[v] +
                  "' on both sides; every rule uses all variables "
                  "(preprocess the input or enable expansion)");
    }
    size_t combos = size_t{1} << freeVars.size();
    for (size_t m = 0; m < combos; ++m) {
      ctl::Rule rule;
      rule.name = r.name;
      rule.from = r.from;
      rule.to = r.to;
      if (!freeVars.empty()) {
        std::string suffix;
        for (size_t k = 0; k < freeVars.size(); ++k) {
          uint8_t bit = (m >> k) & 1;
          rule.from.bits[freeVars[k]] = bit;
          suffix += bit ? '1' : '0';
        }
        rule.name += "_" + suffix;
      }
      // target variables left unmentioned inherit the concretized source
      for (size_t v = 0; v < ts.vars.size(); ++v)
        if (!r.toSeen[v]) rule.to.bits[v] = rule.from.bits[v];
      ts.rules.push_back(std::move(rule));
    }
  }
}

}  // namespace

ctl::TransitionSystem parseTransitionSystem(const std::string& text,
                                            bool expandPartial) {
  ctl::TransitionSystem ts;
  std::vector<RawRule> raw;
  std::optional<std::pair<std::string, int>> initLine;
  int lineNo = 0;
  for (const auto& rawLine : splitOn(text, '\n')) {
    ++lineNo;
    std::string line = trim(stripComment(rawLine));
    if (line.empty()) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError(lineNo, 1, "expected 'key: value'");
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key == "vars") {
      if (!ts.vars.empty()) throw ParseError(lineNo, 1, "duplicate vars line");
      auto toks = lex(value, LexFlavor::Rule, lineNo);
      for (size_t i = 0; toks[i].kind != Tok::End; ++i) {
        if (toks[i].kind != Tok::Ident)
          throw ParseError(toks[i].line, toks[i].col, "expected a variable");
        if (ts.varIndex(toks[i].text) >= 0)
          throw ParseError(toks[i].line, toks[i].col, "duplicate variable");
        ts.vars.push_back(toks[i].text);
      }
      if (ts.vars.empty()) throw ParseError(lineNo, 1, "empty vars line");
      continue;
    }
    if (key.rfind("rule", 0) == 0) {
      if (ts.vars.empty())
        throw ParseError(lineNo, 1, "vars must be declared before rules");
      std::string name = trim(key.substr(4));
      if (name.empty()) throw ParseError(lineNo, 1, "rule needs a name");
      size_t arrow = value.find("->");
      if (arrow == std::string::npos)
        throw ParseError(lineNo, 1, "rule needs 'source -> target'");
      RawRule r;
      r.name = name;
      r.line = lineNo;
      r.from = parseStateLits(ts, trim(value.substr(0, arrow)), lineNo,
                              &r.fromSeen);
      r.to = parseStateLits(ts, trim(value.substr(arrow + 2)), lineNo,
                            &r.toSeen);
      raw.push_back(std::move(r));
      continue;
    }
    if (key == "init") {
      if (ts.vars.empty())
        throw ParseError(lineNo, 1, "vars must be declared before init");
      ts.init = parseStateLits(ts, value, lineNo);
      continue;
    }
    throw ParseError(lineNo, 1, "unknown key '" + key + "'");
  }
  if (ts.vars.empty()) throw ParseError(1, 1, "missing vars line");
  finishRules(ts, raw, expandPartial);
  for (const auto& a : ts.rules)
    for (const auto& b : ts.rules)
      if (&a != &b && a.name == b.name)
        throw ParseError(1, 1, "duplicate rule name '" + a.name + "'");
  return ts;
}

std::string printState(const ctl::TransitionSystem& ts, const ctl::State& s) {
  return ctl::toString(ts, s);
}

std::string printTransitionSystem(const ctl::TransitionSystem& ts) {
  std::string out = "vars:";
  for (const auto& v : ts.vars) out += " " + v;
  out += "\n";
  for (const auto& r : ts.rules)
    out += "rule " + r.name + ": " + printState(ts, r.from) + " -> " +
           printState(ts, r.to) + "\n";
  if (ts.init) out += "init: " + printState(ts, *ts.init) + "\n";
  return out;
}

kernel::SubexpSignature parseSignatureText(const std::string& text) {
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, std::string>> order;
  std::set<std::string> unbounded;
  int lineNo = 0;
  for (const auto& rawLine : splitOn(text, '\n')) {
    ++lineNo;
    std::string line = trim(stripComment(rawLine));
    if (line.empty()) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError(lineNo, 1, "expected 'key: value'");
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key == "labels") {
      auto toks = lex(value, LexFlavor::Rule, lineNo);
      for (size_t i = 0; toks[i].kind != Tok::End; ++i) {
        if (toks[i].kind != Tok::Ident)
          throw ParseError(toks[i].line, toks[i].col, "expected a label");
        labels.push_back(toks[i].text);
      }
    } else if (key == "order") {
      for (const auto& pairText : splitOn(value, ',')) {
        auto toks = lex(trim(pairText), LexFlavor::Rule, lineNo);
        if (toks.size() != 4 || toks[0].kind != Tok::Ident ||
            toks[1].kind != Tok::Less || toks[2].kind != Tok::Ident)
          throw ParseError(lineNo, 1, "order entries have the form 'a < b'");
        order.emplace_back(toks[0].text, toks[2].text);
      }
    } else if (key == "unbounded") {
      auto toks = lex(value, LexFlavor::Rule, lineNo);
      for (size_t i = 0; toks[i].kind != Tok::End; ++i) {
        if (toks[i].kind != Tok::Ident)
          throw ParseError(toks[i].line, toks[i].col, "expected a label");
        unbounded.insert(toks[i].text);
      }
    } else {
      throw ParseError(lineNo, 1, "unknown signature key '" + key + "'");
    }
  }
  return kernel::SubexpSignature(std::move(labels), std::move(order),
                                 std::move(unbounded));
}

std::string printSignature(const kernel::SubexpSignature& sig) {
  return sig.toString();
}

namespace {

Domain parseDomainValue(const std::string& value, int lineNo) {
  auto toks = lex(value, LexFlavor::Rule, lineNo);
  if (toks[0].kind == Tok::Ident && toks[0].text == "nat" &&
      toks[1].kind == Tok::End)
    return Domain{Domain::Kind::NatPlus, {}};
  if (toks[0].kind == Tok::Ident && toks[0].text == "free") {
    Domain d{Domain::Kind::FreeCommutative, {}};
    for (size_t i = 1; toks[i].kind != Tok::End; ++i) {
      if (toks[i].kind != Tok::Ident)
        throw ParseError(toks[i].line, toks[i].col, "expected a generator");
      d.generators.push_back(toks[i].text);
    }
    if (d.generators.empty())
      throw ParseError(lineNo, 1, "free domain needs at least one generator");
    return d;
  }
  throw ParseError(lineNo, 1, "domain is 'nat' or 'free g1 g2 ...'");
}

}  // namespace

ProblemFile parseProblem(const std::string& text) {
  ProblemFile p;
  std::string sigText;  // accumulated signature lines, parsed at the end
  std::vector<std::string> tsLines;
  std::optional<std::pair<std::string, int>> stateLine;
  int lineNo = 0;
  for (const auto& rawLine : splitOn(text, '\n')) {
    ++lineNo;
    std::string line = trim(stripComment(rawLine));
    if (line.empty()) continue;

    // hint lines: nu <path> := <formula>
    if (line.rfind("nu ", 0) == 0 && line.find(":=") != std::string::npos) {
      size_t eq = line.find(":=");
      std::string path = trim(line.substr(3, eq - 3));
      FormulaPtr inv = parseFormula(line.substr(eq + 2), lineNo);
      p.hints.emplace_back(path, inv);
      continue;
    }

    size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError(lineNo, 1, "expected 'key: value'");
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));

    if (key == "task") {
      if (!p.task.empty()) throw ParseError(lineNo, 1, "duplicate task line");
      p.task = value;
      if (value != "llf" && value != "hyll" && value != "sellf" &&
          value != "mumall" && value != "ctl")
        throw ParseError(lineNo, 1, "unknown task '" + value + "'");
      continue;
    }
    if (key == "domain") {
      p.domain = parseDomainValue(value, lineNo);
      continue;
    }
    if (key == "depth") {
      try {
        p.depth = std::stoi(value);
      } catch (...) {
        throw ParseError(lineNo, 1, "depth must be a number");
      }
      continue;
    }
    if (key == "bias") {
      if (value == "pos")
        p.bias = Polarity::Positive;
      else if (value == "neg")
        p.bias = Polarity::Negative;
      else
        throw ParseError(lineNo, 1, "bias is 'pos' or 'neg'");
      continue;
    }
    if (key == "expect") {
      if (value != "provable" && value != "not-provable")
        throw ParseError(lineNo, 1, "expect is 'provable' or 'not-provable'");
      p.expect = value;
      continue;
    }
    if (key == "gamma" || key == "delta") {
      auto& dst = key == "gamma" ? p.gamma : p.delta;
      for (const auto& piece : splitOn(value, ';')) {
        if (trim(piece).empty()) continue;
        dst.push_back(parseHyllJudgment(piece, lineNo));
      }
      continue;
    }
    if (key == "goal") {
      if (p.task.empty())
        throw ParseError(lineNo, 1, "task must be declared before goal");
      if (p.task == "hyll") {
        if (p.goal) throw ParseError(lineNo, 1, "duplicate goal line");
        p.goal = parseHyllJudgment(value, lineNo);
      } else {
        for (const auto& piece : splitOn(value, ';')) {
          if (trim(piece).empty()) continue;
          p.goalFormulas.push_back(parseFormula(piece, lineNo));
        }
      }
      continue;
    }
    if (key == "classical" || key == "linear" || key == "workbench" ||
        key == "sequent") {
      auto& dst = key == "classical" ? p.classical
                  : key == "linear"  ? p.linear
                  : key == "workbench" ? p.workbench
                                       : p.sequent;
      for (const auto& piece : splitOn(value, ';')) {
        if (trim(piece).empty()) continue;
        dst.push_back(parseFormula(piece, lineNo));
      }
      continue;
    }
    if (key == "labels" || key == "order" || key == "unbounded") {
      sigText += line + "\n";
      continue;
    }
    if (key.rfind("context", 0) == 0) {
      std::string label = trim(key.substr(7));
      if (label.empty())
        throw ParseError(lineNo, 1, "context lines name a label");
      for (const auto& piece : splitOn(value, ';')) {
        if (trim(piece).empty()) continue;
        p.contextEntries.emplace_back(label, parseFormula(piece, lineNo));
      }
      continue;
    }
    if (key == "vars" || key.rfind("rule", 0) == 0 || key == "init") {
      tsLines.push_back(line);
      continue;
    }
    if (key == "state") {
      stateLine = {value, lineNo};
      continue;
    }
    if (key == "ctl") {
      if (p.ctlQuery) throw ParseError(lineNo, 1, "duplicate ctl line");
      p.ctlQuery = parseCtl(value, lineNo);
      continue;
    }
    throw ParseError(lineNo, 1, "unknown key '" + key + "'");
  }

  if (!sigText.empty()) p.signature = parseSignatureText(sigText);
  if (!tsLines.empty()) {
    std::string tsText;
    for (const auto& l : tsLines) tsText += l + "\n";
    p.system = parseTransitionSystem(tsText);
  }
  if (stateLine) {
    if (!p.system)
      throw ParseError(stateLine->second, 1,
                       "state lines need a transition system in the file");
    p.state = parseStateLits(*p.system, stateLine->first, stateLine->second);
  }
  if (p.task.empty()) throw ParseError(1, 1, "missing task line");
  return p;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

ProblemFile loadProblem(const std::string& path) {
  try {
    return parseProblem(readFile(path));
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ctl::TransitionSystem loadTransitionSystem(const std::string& path,
                                           bool expandPartial) {
  try {
    return parseTransitionSystem(readFile(path), expandPartial);
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

template <typename T, typename F>
void printList(std::string& out, const std::string& key,
               const std::vector<T>& items, F format) {
  if (items.empty()) return;
  out += key + ":";
  for (size_t i = 0; i < items.size(); ++i) {
    out += i ? " ; " : " ";
    out += format(items[i]);
  }
  out += "\n";
}

}  // namespace

std::string printProblem(const ProblemFile& p) {
  std::string out;
  out += "task: " + p.task + "\n";
  if (p.domain) {
    out += "domain: ";
    if (p.domain->kind == Domain::Kind::NatPlus) {
      out += "nat";
    } else {
      out += "free";
      for (const auto& g : p.domain->generators) out += " " + g;
    }
    out += "\n";
  }
  if (p.depth >= 0) out += "depth: " + std::to_string(p.depth) + "\n";
  if (p.bias)
    out += std::string("bias: ") +
           (*p.bias == Polarity::Positive ? "pos" : "neg") + "\n";
  if (p.signature) out += p.signature->toString();
  if (p.system) out += printTransitionSystem(*p.system);
  if (p.state && p.system)
    out += "state: " + printState(*p.system, *p.state) + "\n";
  if (p.ctlQuery) out += "ctl: " + ctl::toString(p.ctlQuery) + "\n";
  printList(out, "gamma", p.gamma,
            [](const HyllJudgment& j) { return toString(j); });
  printList(out, "delta", p.delta,
            [](const HyllJudgment& j) { return toString(j); });
  if (p.goal) out += "goal: " + toString(*p.goal) + "\n";
  printList(out, "classical", p.classical,
            [](const FormulaPtr& f) { return toString(f); });
  printList(out, "linear", p.linear,
            [](const FormulaPtr& f) { return toString(f); });
  printList(out, "goal", p.goalFormulas,
            [](const FormulaPtr& f) { return toString(f); });
  for (const auto& [label, f] : p.contextEntries)
    out += "context " + label + ": " + toString(f) + "\n";
  printList(out, "workbench", p.workbench,
            [](const FormulaPtr& f) { return toString(f); });
  printList(out, "sequent", p.sequent,
            [](const FormulaPtr& f) { return toString(f); });
  for (const auto& [path, inv] : p.hints)
    out += "nu " + path + " := " + toString(inv) + "\n";
  if (p.expect) out += "expect: " + *p.expect + "\n";
  return out;
}

}  // namespace wb::text
