#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wb::text {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

enum class Tok {
  Ident,
  Num,
  Path,  // dotted segments written without spaces, e.g. u.w or a.b.3
  LParen,
  RParen,
  OPlus,  // (+)
  Star,
  Bar,
  Amp,
  Limp,   // -o   (formula flavor only)
  Arrow,  // ->   (rule flavor only)
  Bang,
  Quest,
  Caret,
  Tilde,
  Dot,
  Comma,
  Colon,
  ColonEq,
  Semi,
  Less,
  Plus,
  Minus,
  Turnstile,  // |-
  AtSign,
  LBracket,
  RBracket,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  uint64_t num = 0;
  std::vector<std::string> path;  // Path segments
  int line = 1, col = 1;
};

// Formula flavor munches `-o`; rule flavor munches `->` and bare +/- signs.
enum class LexFlavor { Formula, Rule };

std::vector<Token> lex(const std::string& src, LexFlavor flavor,
                       int startLine = 1);

}  // namespace wb::text
