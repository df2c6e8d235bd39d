#pragma once

#include <compare>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Abstract syntax for the elementary / epsilon / predicate calculi:
// terms with an epsilon binder, formulas with quantifiers and identity,
// alpha-equivalence via canonical binder keys, capture-avoiding
// substitution, subterm occurrences and brute-force replacement, and the
// epsilon-type / degree / rank combinatorics.
namespace eps {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a binder would not satisfy the formation condition
// (binder variable free, and not bound, in the body).
struct VacuousBinderError : Error {
  using Error::Error;
};

struct SyntaxError : Error {
  SyntaxError(const std::string& msg, size_t pos) : Error(msg), position(pos) {}
  size_t position;
};

struct PreconditionError : Error {
  using Error::Error;
};

// A transformation produced a line that no longer matches any
// justification; indicates a bug, not a user error.
struct InternalError : Error {
  using Error::Error;
};

struct LimitError : Error {
  using Error::Error;
};

struct Variable {
  std::string name;

  Variable() = default;
  explicit Variable(std::string n) : name(std::move(n)) {}
  auto operator<=>(const Variable&) const = default;
};

class Term;
class Formula;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;

class Term {
public:
  enum class Kind { Var, App, Eps };

  Kind kind() const { return kind_; }
  const Variable& var() const { return var_; }             // Var: the variable; Eps: the binder
  const std::string& fn() const { return fn_; }            // App
  const std::vector<TermPtr>& args() const { return args_; } // App
  const FormulaPtr& body() const { return body_; }         // Eps

  static TermPtr mk_var(Variable v);
  static TermPtr mk_var(const std::string& name) { return mk_var(Variable(name)); }
  static TermPtr mk_app(std::string fn, std::vector<TermPtr> args);
  // Renames the binder if x occurs bound in the body; throws
  // VacuousBinderError if x is not free in the body.
  static TermPtr mk_eps(Variable x, FormulaPtr body);

private:
  Term() = default;
  Kind kind_ = Kind::Var;
  Variable var_;
  std::string fn_;
  std::vector<TermPtr> args_;
  FormulaPtr body_;
};

class Formula {
public:
  enum class Kind { Atom, Eq, Bottom, Top, Not, And, Or, Imp, Iff, Forall, Exists };

  Kind kind() const { return kind_; }
  const std::string& pred() const { return pred_; }
  const std::vector<TermPtr>& args() const { return args_; } // Atom; Eq uses args[0], args[1]
  const Variable& var() const { return var_; }               // quantifiers
  const FormulaPtr& lhs() const { return lhs_; }             // binary; Not and quantifier body
  const FormulaPtr& rhs() const { return rhs_; }

  static FormulaPtr mk_atom(std::string pred, std::vector<TermPtr> args);
  static FormulaPtr mk_eq(TermPtr l, TermPtr r);
  static FormulaPtr mk_bottom();
  static FormulaPtr mk_top();
  static FormulaPtr mk_not(FormulaPtr a);
  static FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
  static FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
  static FormulaPtr mk_imp(FormulaPtr a, FormulaPtr b);
  static FormulaPtr mk_iff(FormulaPtr a, FormulaPtr b);
  static FormulaPtr mk_forall(Variable x, FormulaPtr body);
  static FormulaPtr mk_exists(Variable x, FormulaPtr body);

private:
  Formula() = default;
  Kind kind_ = Kind::Bottom;
  std::string pred_;
  std::vector<TermPtr> args_;
  Variable var_;
  FormulaPtr lhs_;
  FormulaPtr rhs_;
};

// An expression is a term or a formula; most syntactic operations accept both.
using Expr = std::variant<TermPtr, FormulaPtr>;

struct Signature {
  std::map<std::string, int> functions;   // name -> arity (0 = constant)
  std::map<std::string, int> predicates;  // name -> arity
  bool has_identity = false;
  bool has_epsilon = true;
  bool has_quantifiers = true;
};

// --- free variables and names ---

std::set<Variable> free_vars(const TermPtr& t);
std::set<Variable> free_vars(const FormulaPtr& f);
bool is_closed(const TermPtr& t);
bool is_closed(const FormulaPtr& f);
bool has_epsilon_term(const TermPtr& t);
bool has_epsilon_term(const FormulaPtr& f);
bool has_quantifier(const FormulaPtr& f);

// Every variable name occurring in the expression, free or bound.
std::set<std::string> all_var_names(const TermPtr& t);
std::set<std::string> all_var_names(const FormulaPtr& f);

// True if some binder in the expression binds x.
bool occurs_bound(const TermPtr& t, const Variable& x);
bool occurs_bound(const FormulaPtr& f, const Variable& x);

// Deterministic fresh name "_v<k>" avoiding everything in `used`.
Variable fresh_var(const std::set<std::string>& used, const std::string& prefix = "_v");

// --- alpha-equivalence ---

// Canonical binder-index form serialized as a string: equal keys iff
// alpha-equivalent expressions.
std::string alpha_key(const TermPtr& t);
std::string alpha_key(const FormulaPtr& f);

bool alpha_equiv(const TermPtr& a, const TermPtr& b);
bool alpha_equiv(const FormulaPtr& a, const FormulaPtr& b);

// Renames every bound variable to prefix+counter in traversal order.
TermPtr canonicalize_bound(const TermPtr& t, const std::string& prefix = "_e");
FormulaPtr canonicalize_bound(const FormulaPtr& f, const std::string& prefix = "_e");

// --- substitution ---

TermPtr substitute(const TermPtr& e, const Variable& x, const TermPtr& t);
FormulaPtr substitute(const FormulaPtr& e, const Variable& x, const TermPtr& t);

// Simultaneous substitution of several variables.
TermPtr substitute_parallel(const TermPtr& e, const std::map<Variable, TermPtr>& sub);
FormulaPtr substitute_parallel(const FormulaPtr& e, const std::map<Variable, TermPtr>& sub);

// --- subterm occurrences and replacement ---

// Path of child indices from the root.  Term children: App args, Eps body
// (index 0).  Formula children: Atom args, Eq {0,1}, Not {0}, binary
// {0,1}, quantifier body {0}.
using Path = std::vector<int>;

struct Occurrence {
  TermPtr term;
  Path path;
  bool immediate;  // not properly contained in another subterm occurrence
};

// Proper subterm occurrences of E: term positions where no free variable
// of the subterm is bound by an enclosing binder of E.
std::vector<Occurrence> subterm_occurrences(const TermPtr& e);
std::vector<Occurrence> subterm_occurrences(const FormulaPtr& e);

// E[[t/u]]: simultaneous replacement of every subterm occurrence of any
// t' alpha-equivalent to t by u, renaming binders so u is not captured.
TermPtr replace_subterm(const TermPtr& e, const TermPtr& t, const TermPtr& u);
FormulaPtr replace_subterm(const FormulaPtr& e, const TermPtr& t, const TermPtr& u);

bool contains_subterm(const TermPtr& e, const TermPtr& t);
bool contains_subterm(const FormulaPtr& e, const TermPtr& t);

// Raw positional replacement of the subtrees at the given term positions;
// performs no capture avoidance (callers validate the result).
TermPtr replace_at_paths(const TermPtr& e, const std::map<Path, TermPtr>& repl);
FormulaPtr replace_at_paths(const FormulaPtr& e, const std::map<Path, TermPtr>& repl);

// Subtree access by path; empty optional if the path does not lead to a term.
std::optional<TermPtr> term_at_path(const TermPtr& e, const Path& p);
std::optional<TermPtr> term_at_path(const FormulaPtr& e, const Path& p);

// --- epsilon types, degree, rank ---

struct EpsilonType {
  TermPtr pattern;                 // canonical: bound vars "_e<k>", slots x1..xn
  std::vector<Variable> argvars;   // x1..xn in slot order

  int arity() const { return static_cast<int>(argvars.size()); }
  std::string key() const;         // canonical printed pattern
  bool operator==(const EpsilonType& o) const { return key() == o.key(); }
};

struct TypedTerm {
  EpsilonType type;
  std::vector<TermPtr> args;   // one per slot, left to right
  std::vector<Path> arg_paths; // positions of the slots within the term
};

// Type of an epsilon term; throws PreconditionError if t is not one.
TypedTerm epsilon_type(const TermPtr& t);

// Builds the instance pattern[x1/args1, ..., xn/argsn].
TermPtr instantiate_type(const EpsilonType& type, const std::vector<TermPtr>& args);

// 0 for non-epsilon terms; otherwise 1 + max degree of nested
// (proper-subterm) epsilon terms.
int degree(const TermPtr& t);

// 1 + max rank of subordinate epsilon terms; requires an epsilon term.
int rank(const TermPtr& t);

} // namespace eps
