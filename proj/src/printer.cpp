#include "epsilon/printer.hpp"

namespace eps {

namespace {

// Precedence levels: <-> 1 (right), -> 2 (right), | 3 (left), & 4 (left),
// ~ 5, atoms 6.  Binder scopes extend maximally right, so a binder (or an
// eps term left of `=`) needs parentheses whenever material follows it.
constexpr int LV_IFF = 1, LV_IMP = 2, LV_OR = 3, LV_AND = 4, LV_NOT = 5, LV_ATOM = 6;

void print_term(const TermPtr& t, bool right_edge, std::string& out);
void print_formula(const FormulaPtr& f, int min_level, bool right_edge, std::string& out);

void print_term(const TermPtr& t, bool right_edge, std::string& out) {
  switch (t->kind()) {
    case Term::Kind::Var:
      out += t->var().name;
      break;
    case Term::Kind::App:
      out += t->fn();
      if (!t->args().empty()) {
        out += '(';
        for (size_t i = 0; i < t->args().size(); ++i) {
          if (i) out += ", ";
          print_term(t->args()[i], true, out);
        }
        out += ')';
      }
      break;
    case Term::Kind::Eps:
      if (!right_edge) {
        out += '(';
        print_term(t, true, out);
        out += ')';
        return;
      }
      out += "eps ";
      out += t->var().name;
      out += ". ";
      print_formula(t->body(), 0, true, out);
      break;
  }
}

int level_of(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Iff: return LV_IFF;
    case Formula::Kind::Imp: return LV_IMP;
    case Formula::Kind::Or: return LV_OR;
    case Formula::Kind::And: return LV_AND;
    case Formula::Kind::Not: return LV_NOT;
    default: return LV_ATOM;
  }
}

void print_formula(const FormulaPtr& f, int min_level, bool right_edge, std::string& out) {
  auto parens = [&](auto&& inner) {
    out += '(';
    inner();
    out += ')';
  };

  switch (f->kind()) {
    case Formula::Kind::Atom:
      out += f->pred();
      if (!f->args().empty()) {
        out += '(';
        for (size_t i = 0; i < f->args().size(); ++i) {
          if (i) out += ", ";
          print_term(f->args()[i], true, out);
        }
        out += ')';
      }
      return;
    case Formula::Kind::Eq:
      print_term(f->args()[0], false, out);
      out += " = ";
      print_term(f->args()[1], right_edge, out);
      return;
    case Formula::Kind::Bottom: out += "_|_"; return;
    case Formula::Kind::Top: out += "T"; return;
    case Formula::Kind::Not:
      out += '~';
      print_formula(f->lhs(), LV_NOT, right_edge, out);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff: {
      int lv = level_of(f->kind());
      if (lv < min_level) {
        parens([&] { print_formula(f, 0, true, out); });
        return;
      }
      bool right_assoc = f->kind() == Formula::Kind::Imp || f->kind() == Formula::Kind::Iff;
      const char* op = f->kind() == Formula::Kind::And   ? " & "
                       : f->kind() == Formula::Kind::Or  ? " | "
                       : f->kind() == Formula::Kind::Imp ? " -> "
                                                         : " <-> ";
      print_formula(f->lhs(), lv + (right_assoc ? 1 : 0), false, out);
      out += op;
      print_formula(f->rhs(), lv + (right_assoc ? 0 : 1), right_edge, out);
      return;
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      if (!right_edge) {
        parens([&] { print_formula(f, 0, true, out); });
        return;
      }
      out += f->kind() == Formula::Kind::Forall ? "all " : "ex ";
      out += f->var().name;
      out += ". ";
      print_formula(f->lhs(), 0, true, out);
      return;
  }
}

} // namespace

std::string print(const TermPtr& t) {
  std::string out;
  print_term(t, true, out);
  return out;
}

std::string print(const FormulaPtr& f) {
  std::string out;
  print_formula(f, 0, true, out);
  return out;
}

std::string print(const Expr& e) {
  if (std::holds_alternative<TermPtr>(e)) return print(std::get<TermPtr>(e));
  return print(std::get<FormulaPtr>(e));
}

} // namespace eps
