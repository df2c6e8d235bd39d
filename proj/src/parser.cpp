#include "epsilon/parser.hpp"

#include <cctype>

namespace eps {

namespace {

struct Token {
  enum Type { Ident, LParen, RParen, Comma, Dot, Tilde, Amp, Pipe, Arrow, IffOp, EqOp, Bottom, End };
  Type type;
  std::string text;
  size_t pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  size_t i = 0;
  auto push = [&](Token::Type t, std::string text, size_t pos) {
    out.push_back(Token{t, std::move(text), pos});
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    size_t start = i;
    switch (c) {
      case '(': push(Token::LParen, "(", start); ++i; continue;
      case ')': push(Token::RParen, ")", start); ++i; continue;
      case ',': push(Token::Comma, ",", start); ++i; continue;
      case '.': push(Token::Dot, ".", start); ++i; continue;
      case '~': push(Token::Tilde, "~", start); ++i; continue;
      case '&': push(Token::Amp, "&", start); ++i; continue;
      case '|': push(Token::Pipe, "|", start); ++i; continue;
      case '=': push(Token::EqOp, "=", start); ++i; continue;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          push(Token::Arrow, "->", start);
          i += 2;
          continue;
        }
        throw SyntaxError("expected '->'", start);
      case '<':
        if (i + 2 < s.size() && s[i + 1] == '-' && s[i + 2] == '>') {
          push(Token::IffOp, "<->", start);
          i += 3;
          continue;
        }
        throw SyntaxError("expected '<->'", start);
      default: break;
    }
    if (c == '_' && s.compare(i, 3, "_|_") == 0) {
      push(Token::Bottom, "_|_", start);
      i += 3;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      push(Token::Ident, s.substr(i, j - i), start);
      i = j;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", start);
  }
  push(Token::End, "", s.size());
  return out;
}

bool is_keyword(const std::string& w) {
  return w == "all" || w == "ex" || w == "eps" || w == "T";
}

struct Parser {
  const Signature& sig;
  std::vector<Token> toks;
  size_t pos = 0;

  const Token& peek() const { return toks[pos]; }
  Token next() { return toks[pos++]; }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }

  void expect(Token::Type t, const char* what) {
    if (peek().type != t) fail(std::string("expected ") + what);
    ++pos;
  }

  // Binder variables must be plain identifiers, not declared symbols.
  Variable binder_var() {
    if (peek().type != Token::Ident || is_keyword(peek().text))
      fail("expected binder variable");
    const std::string& name = peek().text;
    if (sig.functions.count(name) || sig.predicates.count(name))
      fail("binder variable '" + name + "' clashes with a declared symbol");
    ++pos;
    return Variable(name);
  }

  Expr parse_binder(const std::string& kw) {
    size_t at = peek().pos;
    ++pos;  // keyword
    Variable x = binder_var();
    expect(Token::Dot, "'.'");
    Expr body = parse_expr(0);
    if (!std::holds_alternative<FormulaPtr>(body))
      throw SyntaxError("binder body must be a formula", at);
    FormulaPtr b = std::get<FormulaPtr>(body);
    if (!free_vars(b).count(x))
      throw SyntaxError("VacuousBinder: '" + x.name + "' is not free in the body of '" +
                            kw + "'",
                        at);
    // A bound re-occurrence violates the formation condition too; the
    // constructors rename in that case, which we do not silently accept
    // from source text.
    if (occurs_bound(b, x))
      throw SyntaxError("VacuousBinder: '" + x.name + "' has a bound occurrence in the body",
                        at);
    if (kw == "eps") {
      if (!sig.has_epsilon) throw SyntaxError("epsilon terms not allowed by signature", at);
      return Term::mk_eps(x, b);
    }
    if (!sig.has_quantifiers) throw SyntaxError("quantifiers not allowed by signature", at);
    if (kw == "all") return Formula::mk_forall(x, b);
    return Formula::mk_exists(x, b);
  }

  std::vector<TermPtr> parse_args(int arity, const std::string& name, size_t at) {
    expect(Token::LParen, "'('");
    std::vector<TermPtr> args;
    for (int i = 0; i < arity; ++i) {
      if (i) expect(Token::Comma, "','");
      args.push_back(parse_term());
    }
    if (peek().type == Token::Comma)
      throw SyntaxError("arity mismatch: too many arguments for '" + name + "'", at);
    expect(Token::RParen, "')'");
    return args;
  }

  TermPtr parse_term() {
    const Token& t = peek();
    if (t.type == Token::LParen) {
      ++pos;
      TermPtr inner = parse_term();
      expect(Token::RParen, "')'");
      return inner;
    }
    if (t.type != Token::Ident) fail("expected term");
    if (t.text == "eps") {
      Expr e = parse_binder("eps");
      return std::get<TermPtr>(e);
    }
    if (t.text == "all" || t.text == "ex" || t.text == "T")
      fail("expected term, found '" + t.text + "'");
    std::string name = t.text;
    size_t at = t.pos;
    ++pos;
    if (auto it = sig.functions.find(name); it != sig.functions.end()) {
      if (it->second == 0) {
        if (peek().type == Token::LParen)
          throw SyntaxError("arity mismatch: '" + name + "' is a constant", at);
        return Term::mk_app(name, {});
      }
      return Term::mk_app(name, parse_args(it->second, name, at));
    }
    if (sig.predicates.count(name))
      throw SyntaxError("predicate symbol '" + name + "' used in term position", at);
    if (peek().type == Token::LParen)
      throw SyntaxError("undeclared symbol '" + name + "'", at);
    return Term::mk_var(Variable(name));
  }

  // Primary: atom, constant, parenthesized expression, binder, or a term
  // (possibly continued by '=' into an identity atom).
  Expr parse_primary() {
    const Token& t = peek();
    switch (t.type) {
      case Token::Bottom:
        ++pos;
        return Formula::mk_bottom();
      case Token::Tilde: {
        ++pos;
        Expr a = parse_unary();
        if (!std::holds_alternative<FormulaPtr>(a))
          throw SyntaxError("'~' applies to a formula", t.pos);
        return Formula::mk_not(std::get<FormulaPtr>(a));
      }
      case Token::LParen: {
        ++pos;
        Expr inner = parse_expr(0);
        expect(Token::RParen, "')'");
        return maybe_equality(inner);
      }
      case Token::Ident: break;
      default: fail("expected formula or term");
    }
    if (t.text == "T") {
      ++pos;
      return Formula::mk_top();
    }
    if (t.text == "all" || t.text == "ex" || t.text == "eps")
      return maybe_equality(parse_binder(t.text));

    if (auto it = sig.predicates.find(t.text); it != sig.predicates.end()) {
      std::string name = t.text;
      size_t at = t.pos;
      ++pos;
      if (it->second == 0) {
        if (peek().type == Token::LParen)
          throw SyntaxError("arity mismatch: '" + name + "' takes no arguments", at);
        return Formula::mk_atom(name, {});
      }
      return Formula::mk_atom(name, parse_args(it->second, name, at));
    }
    return maybe_equality(parse_term());
  }

  Expr maybe_equality(Expr e) {
    if (std::holds_alternative<TermPtr>(e) && peek().type == Token::EqOp) {
      size_t at = peek().pos;
      if (!sig.has_identity) throw SyntaxError("identity not allowed by signature", at);
      ++pos;
      TermPtr rhs = parse_term();
      return Formula::mk_eq(std::get<TermPtr>(e), rhs);
    }
    return e;
  }

  Expr parse_unary() { return parse_primary(); }

  struct OpInfo {
    int level;
    bool right_assoc;
  };

  static std::optional<OpInfo> op_info(Token::Type t) {
    switch (t) {
      case Token::IffOp: return OpInfo{1, true};
      case Token::Arrow: return OpInfo{2, true};
      case Token::Pipe: return OpInfo{3, false};
      case Token::Amp: return OpInfo{4, false};
      default: return std::nullopt;
    }
  }

  Expr parse_expr(int min_level) {
    Expr lhs = parse_unary();
    for (;;) {
      auto info = op_info(peek().type);
      if (!info || info->level < min_level) return lhs;
      if (!std::holds_alternative<FormulaPtr>(lhs))
        fail("term used where a formula is expected");
      Token::Type op = next().type;
      Expr rhs = parse_expr(info->level + (info->right_assoc ? 0 : 1));
      if (!std::holds_alternative<FormulaPtr>(rhs))
        fail("term used where a formula is expected");
      FormulaPtr a = std::get<FormulaPtr>(lhs);
      FormulaPtr b = std::get<FormulaPtr>(rhs);
      switch (op) {
        case Token::Amp: lhs = Formula::mk_and(a, b); break;
        case Token::Pipe: lhs = Formula::mk_or(a, b); break;
        case Token::Arrow: lhs = Formula::mk_imp(a, b); break;
        default: lhs = Formula::mk_iff(a, b); break;
      }
    }
  }

  Expr parse_top() {
    Expr e = parse_expr(0);
    if (peek().type != Token::End) fail("unexpected trailing input");
    return e;
  }
};

} // namespace

Expr parse_expr(const std::string& text, const Signature& sig) {
  Parser p{sig, lex(text)};
  return p.parse_top();
}

TermPtr parse_term(const std::string& text, const Signature& sig) {
  Expr e = parse_expr(text, sig);
  if (!std::holds_alternative<TermPtr>(e))
    throw SyntaxError("expected a term, parsed a formula", 0);
  return std::get<TermPtr>(e);
}

FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
  Expr e = parse_expr(text, sig);
  if (!std::holds_alternative<FormulaPtr>(e))
    throw SyntaxError("expected a formula, parsed a term", 0);
  return std::get<FormulaPtr>(e);
}

} // namespace eps
