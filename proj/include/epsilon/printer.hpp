#pragma once

#include "epsilon/syntax.hpp"

namespace eps {

// Concrete syntax: `~ & | -> <->`, constants `_|_` and `T`, binders
// `all x.` / `ex x.` / `eps x.` extending maximally right, `=` between
// terms, application `f(t1,...,tn)`.  Parenthesizes just enough that
// parse(print(E)) reproduces E.
std::string print(const TermPtr& t);
std::string print(const FormulaPtr& f);
std::string print(const Expr& e);

} // namespace eps
