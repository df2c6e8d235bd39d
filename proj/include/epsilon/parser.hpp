#pragma once

#include "epsilon/syntax.hpp"

namespace eps {

// Parses the concrete grammar over a signature.  Undeclared identifiers
// in term position are variables; declared symbols must be applied with
// their arity.  Throws SyntaxError (with byte position) on bad input,
// including the binder-formation violations (VacuousBinder).
TermPtr parse_term(const std::string& text, const Signature& sig);
FormulaPtr parse_formula(const std::string& text, const Signature& sig);
Expr parse_expr(const std::string& text, const Signature& sig);

} // namespace eps
