#include "wb/text/parse.hpp"

#include <algorithm>

namespace wb::text {

using namespace wb::kernel;

bool reservedWord(const std::string& s) {
  static const char* words[] = {
      "forall", "exists", "foralloc", "existsloc", "forallw", "existsw",
      "forallbelow", "down", "at", "mu", "nu", "top", "bot", "iota"};
  return std::find(std::begin(words), std::end(words), s) != std::end(words);
}

namespace {

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  // --- cursor helpers -------------------------------------------------
  const Token& cur() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool atIdent(const char* s) const {
    return cur().kind == Tok::Ident && cur().text == s;
  }
  bool eat(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(cur().line, cur().col, msg);
  }
  Token expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    return next();
  }
  void expectEnd() {
    if (!at(Tok::End)) fail("trailing input");
  }

  // --- terms ----------------------------------------------------------
  TermPtr parseTermExpr() {
    if (at(Tok::Num)) return fun(next().text);
    if (!at(Tok::Ident)) fail("expected a term");
    Token id = next();
    if (at(Tok::LParen)) {
      next();
      std::vector<TermPtr> args;
      if (!at(Tok::RParen)) {
        args.push_back(parseTermExpr());
        while (eat(Tok::Comma)) args.push_back(parseTermExpr());
      }
      expect(Tok::RParen, "')'");
      return fun(id.text, std::move(args));
    }
    int ti = lookup(termVars_, id.text);
    if (ti >= 0) return bvar(ti);
    int li = lookup(locVars_, id.text);
    if (li >= 0) return locvar(li);
    return fun(id.text);
  }

  // --- worlds ---------------------------------------------------------
  WorldPtr worldFromSegment(const std::string& seg) {
    bool digits = !seg.empty() &&
                  std::all_of(seg.begin(), seg.end(),
                              [](char c) { return c >= '0' && c <= '9'; });
    if (digits) return wnat(std::stoull(seg));
    if (seg == "iota") return wiota();
    int wi = lookup(worldVars_, seg);
    if (wi >= 0) return wbvar(wi);
    return wgen(seg);
  }

  WorldPtr parseWorldExpr() {
    if (at(Tok::Path)) {
      Token t = next();
      WorldPtr acc;
      for (const auto& seg : t.path) {
        WorldPtr w = worldFromSegment(seg);
        acc = acc ? wdot(acc, w) : w;
      }
      return acc;
    }
    if (at(Tok::Num) || at(Tok::Ident)) {
      Token t = next();
      return worldFromSegment(t.text);
    }
    fail("expected a world");
  }

  // --- classical / subexponential formulas -----------------------------
  // (+) < & < | < * ; unary prefixes and binders bind tightest
  FormulaPtr parseLL() { return parsePlusLL(); }

  FormulaPtr parsePlusLL() {
    FormulaPtr f = parseWithLL();
    if (eat(Tok::OPlus)) return plus(f, parsePlusLL());
    return f;
  }
  FormulaPtr parseWithLL() {
    FormulaPtr f = parseParLL();
    if (eat(Tok::Amp)) return with(f, parseWithLL());
    return f;
  }
  FormulaPtr parseParLL() {
    FormulaPtr f = parseTensorLL();
    if (eat(Tok::Bar)) return par(f, parseParLL());
    return f;
  }
  FormulaPtr parseTensorLL() {
    FormulaPtr f = parseUnaryLL();
    if (eat(Tok::Star)) return tensor(f, parseTensorLL());
    return f;
  }

  LabelRef parseLabelSuffix() {
    if (!eat(Tok::Caret)) return LabelRef::constant(kClassicalLabel);
    Token id = expect(Tok::Ident, "a label");
    int li = lookup(locVars_, id.text);
    if (li >= 0) return LabelRef::variable(li, id.text);
    return LabelRef::constant(id.text);
  }

  FormulaPtr parseUnaryLL() {
    if (eat(Tok::Bang)) {
      LabelRef l = parseLabelSuffix();
      return bang(parseUnaryLL(), l);
    }
    if (eat(Tok::Quest)) {
      LabelRef l = parseLabelSuffix();
      return quest(parseUnaryLL(), l);
    }
    if (eat(Tok::Tilde)) {
      FormulaPtr a = parsePrimaryLL();
      if (a->tag != Tag::Atom || a->negated)
        fail("'~' applies to a plain atom");
      return atom(a->pred, a->args, true);
    }
    if (at(Tok::Ident)) {
      const std::string& s = cur().text;
      if (s == "forall" || s == "exists") {
        next();
        Token id = expect(Tok::Ident, "a variable");
        expect(Tok::Dot, "'.'");
        termVars_.push_back(id.text);
        FormulaPtr body = parseLL();
        termVars_.pop_back();
        return s == "forall" ? forallQ(id.text, body) : existsQ(id.text, body);
      }
      if (s == "forallw" || s == "existsw") {
        next();
        Token id = expect(Tok::Ident, "a variable");
        expect(Tok::Dot, "'.'");
        termVars_.push_back(id.text);
        FormulaPtr body = parseLL();
        termVars_.pop_back();
        return s == "forallw" ? forallQ(id.text, body, VarSort::World)
                              : existsQ(id.text, body, VarSort::World);
      }
      if (s == "foralloc" || s == "existsloc") {
        next();
        Token id = expect(Tok::Ident, "a location variable");
        expect(Tok::Colon, "':'");
        Token ty = expect(Tok::Ident, "a type label");
        int li = lookup(locVars_, ty.text);
        LabelRef type = li >= 0 ? LabelRef::variable(li, ty.text)
                                : LabelRef::constant(ty.text);
        expect(Tok::Dot, "'.'");
        locVars_.push_back(id.text);
        FormulaPtr body = parseLL();
        locVars_.pop_back();
        return s == "foralloc" ? forallLoc(id.text, type, body)
                               : existsLoc(id.text, type, body);
      }
      if (s == "mu" || s == "nu") {
        next();
        Token id = expect(Tok::Ident, "a fixed-point variable");
        expect(Tok::Dot, "'.'");
        fixVars_.push_back(id.text);
        FormulaPtr body = parseLL();
        fixVars_.pop_back();
        return s == "mu" ? mu(id.text, body) : nu(id.text, body);
      }
    }
    return parsePrimaryLL();
  }

  FormulaPtr parsePrimaryLL() {
    if (eat(Tok::LParen)) {
      FormulaPtr f = parseLL();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at(Tok::Num)) {
      Token n = next();
      if (n.num == 0) return zero();
      if (n.num == 1) return one();
      throw ParseError(n.line, n.col, "numeral is not a formula");
    }
    if (!at(Tok::Ident)) fail("expected a formula");
    Token id = next();
    if (id.text == "top") return top();
    if (id.text == "bot") return bottom();
    if (reservedWord(id.text))
      throw ParseError(id.line, id.col,
                       "reserved word '" + id.text + "' cannot name an atom");
    int fi = lookup(fixVars_, id.text);
    if (fi >= 0 && !at(Tok::LParen)) return fixvar(fi, id.text);
    std::vector<TermPtr> args;
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        args.push_back(parseTermExpr());
        while (eat(Tok::Comma)) args.push_back(parseTermExpr());
      }
      expect(Tok::RParen, "')'");
    }
    return atom(id.text, std::move(args));
  }

  // --- hybrid formulas -------------------------------------------------
  // -o < (+) < & < * < at ; -o associates right
  HyllPtr parseHy() { return parseLimpHy(); }

  HyllPtr parseLimpHy() {
    HyllPtr f = parsePlusHy();
    if (eat(Tok::Limp)) return hlimp(f, parseLimpHy());
    return f;
  }
  HyllPtr parsePlusHy() {
    HyllPtr f = parseWithHy();
    if (eat(Tok::OPlus)) return hplus(f, parsePlusHy());
    return f;
  }
  HyllPtr parseWithHy() {
    HyllPtr f = parseTensorHy();
    if (eat(Tok::Amp)) return hwith(f, parseWithHy());
    return f;
  }
  HyllPtr parseTensorHy() {
    HyllPtr f = parseAtHy();
    if (eat(Tok::Star)) return htensor(f, parseTensorHy());
    return f;
  }
  HyllPtr parseAtHy() {
    HyllPtr f = parseUnaryHy();
    while (atIdent("at")) {
      next();
      f = hat(f, parseWorldExpr());
    }
    return f;
  }

  HyllPtr parseUnaryHy() {
    if (eat(Tok::Bang)) return hbang(parseUnaryHy());
    if (at(Tok::Ident)) {
      const std::string& s = cur().text;
      if (s == "forall" || s == "exists") {
        next();
        Token id = expect(Tok::Ident, "a variable");
        expect(Tok::Dot, "'.'");
        termVars_.push_back(id.text);
        HyllPtr body = parseHy();
        termVars_.pop_back();
        return s == "forall" ? hforallT(id.text, body)
                             : hexistsT(id.text, body);
      }
      if (s == "down" || s == "forallw" || s == "existsw") {
        next();
        Token id = expect(Tok::Ident, "a world variable");
        expect(Tok::Dot, "'.'");
        worldVars_.push_back(id.text);
        HyllPtr body = parseHy();
        worldVars_.pop_back();
        if (s == "down") return hdown(id.text, body);
        return s == "forallw" ? hforallW(id.text, body)
                              : hexistsW(id.text, body);
      }
      if (s == "forallbelow") {
        next();
        Token id = expect(Tok::Ident, "a world variable");
        expect(Tok::Less, "'<'");
        WorldPtr bound = parseWorldExpr();
        expect(Tok::Dot, "'.'");
        worldVars_.push_back(id.text);
        HyllPtr body = parseHy();
        worldVars_.pop_back();
        return hforallWBelow(id.text, bound, body);
      }
    }
    return parsePrimaryHy();
  }

  HyllPtr parsePrimaryHy() {
    if (eat(Tok::LParen)) {
      HyllPtr f = parseHy();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at(Tok::Num)) {
      Token n = next();
      if (n.num == 0) return hzero();
      if (n.num == 1) return hone();
      throw ParseError(n.line, n.col, "numeral is not a formula");
    }
    if (!at(Tok::Ident)) fail("expected a formula");
    Token id = next();
    if (id.text == "top") return htop();
    if (id.text == "bot")
      throw ParseError(id.line, id.col, "the hybrid syntax has no 'bot'");
    if (reservedWord(id.text))
      throw ParseError(id.line, id.col,
                       "reserved word '" + id.text + "' cannot name an atom");
    std::vector<TermPtr> args;
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        args.push_back(parseTermExpr());
        while (eat(Tok::Comma)) args.push_back(parseTermExpr());
      }
      expect(Tok::RParen, "')'");
    }
    return hatom(id.text, std::move(args));
  }

  // --- branching-time formulas ------------------------------------------
  ctl::CtlPtr parseCtlExpr() { return parseOrCtl(); }

  ctl::CtlPtr parseOrCtl() {
    ctl::CtlPtr f = parseAndCtl();
    if (eat(Tok::Bar)) return ctl::cor(f, parseOrCtl());
    return f;
  }
  ctl::CtlPtr parseAndCtl() {
    ctl::CtlPtr f = parseUnaryCtl();
    if (eat(Tok::Amp)) return ctl::cand(f, parseAndCtl());
    return f;
  }

  ctl::CtlPtr parseUnaryCtl() {
    if (eat(Tok::Plus)) {
      Token id = expect(Tok::Ident, "a variable");
      return ctl::clit(id.text, true);
    }
    if (eat(Tok::Minus)) {
      Token id = expect(Tok::Ident, "a variable");
      return ctl::clit(id.text, false);
    }
    if (eat(Tok::LParen)) {
      ctl::CtlPtr f = parseCtlExpr();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at(Tok::Ident)) {
      const std::string& s = cur().text;
      if (s == "EX") return next(), ctl::cunary(ctl::CtlTag::EX, parseUnaryCtl());
      if (s == "AX") return next(), ctl::cunary(ctl::CtlTag::AX, parseUnaryCtl());
      if (s == "EF") return next(), ctl::cunary(ctl::CtlTag::EF, parseUnaryCtl());
      if (s == "AF") return next(), ctl::cunary(ctl::CtlTag::AF, parseUnaryCtl());
      if (s == "EG") return next(), ctl::cunary(ctl::CtlTag::EG, parseUnaryCtl());
      if (s == "AG") return next(), ctl::cunary(ctl::CtlTag::AG, parseUnaryCtl());
      if (s == "E" || s == "A") {
        bool existential = s == "E";
        next();
        expect(Tok::LBracket, "'['");
        ctl::CtlPtr a = parseCtlExpr();
        Token u = expect(Tok::Ident, "'U'");
        if (u.text != "U") throw ParseError(u.line, u.col, "expected 'U'");
        ctl::CtlPtr b = parseCtlExpr();
        expect(Tok::RBracket, "']'");
        return ctl::cuntil(existential, a, b);
      }
    }
    fail("expected a branching-time formula");
  }

 private:
  static int lookup(const std::vector<std::string>& stack,
                    const std::string& name) {
    for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i)
      if (stack[i] == name) return static_cast<int>(stack.size()) - 1 - i;
    return -1;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<std::string> termVars_, worldVars_, locVars_, fixVars_;

 public:
  WorldPtr parseWorldTop() {
    WorldPtr w = parseWorldExpr();
    expectEnd();
    return w;
  }
  TermPtr parseTermTop() {
    TermPtr t = parseTermExpr();
    expectEnd();
    return t;
  }
  FormulaPtr parseLLTop() {
    FormulaPtr f = parseLL();
    expectEnd();
    return f;
  }
  HyllPtr parseHyTop() {
    HyllPtr f = parseHy();
    expectEnd();
    return f;
  }
  HyllJudgment parseJudgmentTop() {
    HyllPtr f = parseHy();
    expect(Tok::AtSign, "'@'");
    WorldPtr w = parseWorldExpr();
    expectEnd();
    return HyllJudgment{f, w};
  }
  ctl::CtlPtr parseCtlTop() {
    ctl::CtlPtr f = parseCtlExpr();
    expectEnd();
    return f;
  }
};

}  // namespace

FormulaPtr parseFormula(const std::string& src, int startLine) {
  Parser p(lex(src, LexFlavor::Formula, startLine));
  return p.parseLLTop();
}

TermPtr parseTerm(const std::string& src, int startLine) {
  Parser p(lex(src, LexFlavor::Formula, startLine));
  return p.parseTermTop();
}

WorldPtr parseWorld(const std::string& src, int startLine) {
  Parser p(lex(src, LexFlavor::Formula, startLine));
  return p.parseWorldTop();
}

HyllPtr parseHyllFormula(const std::string& src, int startLine) {
  Parser p(lex(src, LexFlavor::Formula, startLine));
  return p.parseHyTop();
}

HyllJudgment parseHyllJudgment(const std::string& src, int startLine) {
  Parser p(lex(src, LexFlavor::Formula, startLine));
  return p.parseJudgmentTop();
}

ctl::CtlPtr parseCtl(const std::string& src, int startLine) {
  Parser p(lex(src, LexFlavor::Rule, startLine));
  return p.parseCtlTop();
}

}  // namespace wb::text
