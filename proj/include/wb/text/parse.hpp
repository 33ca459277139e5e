#pragma once

#include <string>

#include "wb/ctl/system.hpp"
#include "wb/kernel/formula.hpp"
#include "wb/kernel/hyll.hpp"
#include "wb/kernel/term.hpp"
#include "wb/kernel/world.hpp"
#include "wb/text/lex.hpp"

namespace wb::text {

// Grammar (loosest to tightest): (+) < & < | < * in the classical syntax;
// -o < (+) < & < * < at in the hybrid syntax. Same-precedence operators
// associate right. Binders extend to the end of the enclosing group. World
// products are written without spaces (u.w); a binder dot is followed by
// whitespace. Reserved words cannot name atoms.
kernel::FormulaPtr parseFormula(const std::string& src, int startLine = 1);
kernel::TermPtr parseTerm(const std::string& src, int startLine = 1);
kernel::WorldPtr parseWorld(const std::string& src, int startLine = 1);
kernel::HyllPtr parseHyllFormula(const std::string& src, int startLine = 1);

// `F @ w` (the judgment separator `@` is distinct from the `at` connective)
kernel::HyllJudgment parseHyllJudgment(const std::string& src,
                                       int startLine = 1);

// Literals +x/-x, & over |, prefix EX AX EF AF EG AG, mixfix E[f U g].
ctl::CtlPtr parseCtl(const std::string& src, int startLine = 1);

bool reservedWord(const std::string& s);

}  // namespace wb::text
