#include "wb/text/lex.hpp"

#include <cctype>

namespace wb::text {

namespace {

bool identStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

bool identChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<Token> lex(const std::string& src, LexFlavor flavor,
                       int startLine) {
  std::vector<Token> out;
  size_t i = 0;
  int line = startLine, col = 1;

  auto peek = [&](size_t ahead) -> char {
    return i + ahead < src.size() ? src[i + ahead] : '\0';
  };
  auto advance = [&]() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  auto push = [&](Tok k, std::string text, int l, int c) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.line = l;
    t.col = c;
    out.push_back(std::move(t));
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '#') {  // comment to end of line
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    int l = line, cl = col;
    if (identStart(c) || digit(c)) {
      // one segment, or a dotted path when `.` is glued to the next segment
      std::vector<std::string> segs;
      for (;;) {
        std::string seg;
        while (i < src.size() && identChar(src[i])) {
          seg += src[i];
          advance();
        }
        segs.push_back(std::move(seg));
        if (peek(0) == '.' && (identStart(peek(1)) || digit(peek(1)))) {
          advance();  // the joining dot
          continue;
        }
        break;
      }
      if (segs.size() > 1) {
        Token t;
        t.kind = Tok::Path;
        t.path = std::move(segs);
        t.line = l;
        t.col = cl;
        out.push_back(std::move(t));
      } else {
        const std::string& s = segs[0];
        bool allDigits = !s.empty();
        for (char d : s) allDigits = allDigits && digit(d);
        if (allDigits) {
          Token t;
          t.kind = Tok::Num;
          t.text = s;
          t.num = std::stoull(s);
          t.line = l;
          t.col = cl;
          out.push_back(std::move(t));
        } else {
          push(Tok::Ident, s, l, cl);
        }
      }
      continue;
    }
    switch (c) {
      case '(':
        if (peek(1) == '+' && peek(2) == ')') {
          advance();
          advance();
          advance();
          push(Tok::OPlus, "(+)", l, cl);
        } else {
          advance();
          push(Tok::LParen, "(", l, cl);
        }
        continue;
      case ')':
        advance();
        push(Tok::RParen, ")", l, cl);
        continue;
      case '*':
        advance();
        push(Tok::Star, "*", l, cl);
        continue;
      case '|':
        if (peek(1) == '-') {
          advance();
          advance();
          push(Tok::Turnstile, "|-", l, cl);
          continue;
        }
        advance();
        push(Tok::Bar, "|", l, cl);
        continue;
      case '&':
        advance();
        push(Tok::Amp, "&", l, cl);
        continue;
      case '-':
        if (flavor == LexFlavor::Formula && peek(1) == 'o' &&
            !identChar(peek(2))) {
          advance();
          advance();
          push(Tok::Limp, "-o", l, cl);
          continue;
        }
        if (flavor == LexFlavor::Rule && peek(1) == '>') {
          advance();
          advance();
          push(Tok::Arrow, "->", l, cl);
          continue;
        }
        advance();
        push(Tok::Minus, "-", l, cl);
        continue;
      case '!':
        advance();
        push(Tok::Bang, "!", l, cl);
        continue;
      case '?':
        advance();
        push(Tok::Quest, "?", l, cl);
        continue;
      case '^':
        advance();
        push(Tok::Caret, "^", l, cl);
        continue;
      case '~':
        advance();
        push(Tok::Tilde, "~", l, cl);
        continue;
      case '.':
        advance();
        push(Tok::Dot, ".", l, cl);
        continue;
      case ',':
        advance();
        push(Tok::Comma, ",", l, cl);
        continue;
      case ':':
        if (peek(1) == '=') {
          advance();
          advance();
          push(Tok::ColonEq, ":=", l, cl);
          continue;
        }
        advance();
        push(Tok::Colon, ":", l, cl);
        continue;
      case ';':
        advance();
        push(Tok::Semi, ";", l, cl);
        continue;
      case '<':
        advance();
        push(Tok::Less, "<", l, cl);
        continue;
      case '+':
        advance();
        push(Tok::Plus, "+", l, cl);
        continue;
      case '@':
        advance();
        push(Tok::AtSign, "@", l, cl);
        continue;
      case '[':
        advance();
        push(Tok::LBracket, "[", l, cl);
        continue;
      case ']':
        advance();
        push(Tok::RBracket, "]", l, cl);
        continue;
      default:
        throw ParseError(l, cl, std::string("unexpected character '") + c + "'");
    }
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

}  // namespace wb::text
