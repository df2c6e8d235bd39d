#pragma once

#include "epsilon/syntax.hpp"

#include <cstdint>
#include <functional>

namespace eps {

// Finite structure: domain {0..n-1}, total function tables (row-major,
// leftmost argument most significant) and predicate tables (one flag per
// tuple index).
struct Structure {
  int n = 1;
  std::map<std::string, std::vector<int>> functions;   // size n^arity
  std::map<std::string, std::vector<char>> predicates; // size n^arity

  static size_t table_size(int n, int arity);
  size_t tuple_index(const std::vector<int>& tuple) const;
};

// Total table on subsets (bitmask-indexed); picks a member of every
// nonempty subset, anything for the empty set.
struct ExtChoiceFunction {
  std::vector<int> table;  // size 1 << n

  int choose(uint32_t mask) const { return table[mask]; }
  bool valid(int n) const;
};

// Choice functions indexed by epsilon type and slot values.
struct IntChoiceOperator {
  std::map<std::pair<std::string, std::vector<int>>, ExtChoiceFunction> table;

  const ExtChoiceFunction* lookup(const std::string& type_key,
                                  const std::vector<int>& args) const {
    auto it = table.find({type_key, args});
    return it == table.end() ? nullptr : &it->second;
  }
};

struct Assignment {
  std::map<std::string, int> values;
  int fallback = 0;

  int get(const Variable& v) const {
    auto it = values.find(v.name);
    return it == values.end() ? fallback : it->second;
  }
  Assignment with(const Variable& v, int m) const {
    Assignment s = *this;
    s.values[v.name] = m;
    return s;
  }
};

struct EvalError : Error {
  using Error::Error;
};

// Either an extensional choice function or an intensional operator.
struct Chooser {
  const ExtChoiceFunction* phi = nullptr;
  const IntChoiceOperator* psi = nullptr;

  static Chooser ext(const ExtChoiceFunction& f) { return Chooser{&f, nullptr}; }
  static Chooser intens(const IntChoiceOperator& o) { return Chooser{nullptr, &o}; }
};

int eval_term(const Structure& m, const Chooser& ch, const Assignment& s, const TermPtr& t);
bool eval_formula(const Structure& m, const Chooser& ch, const Assignment& s,
                  const FormulaPtr& f);

// All extensional choice functions, deterministic order.  Count is
// n * prod over nonempty subsets of |subset|.
std::vector<ExtChoiceFunction> enumerate_choice_functions(const Structure& m,
                                                          int max_n = 3);
long count_choice_functions(int n);

// Distinct epsilon types occurring in an expression (any depth).
std::vector<EpsilonType> collect_epsilon_types(const FormulaPtr& f);

// Lazy stream over all assignments of choice functions to the keys
// (type, argument tuple); throws LimitError past the budget.
class IntOperatorStream {
public:
  IntOperatorStream(const Structure& m, const std::vector<EpsilonType>& types,
                    long budget = 1000000);
  std::optional<IntChoiceOperator> next();
  long total() const { return total_; }

private:
  std::vector<std::pair<std::string, std::vector<int>>> keys_;
  std::vector<ExtChoiceFunction> cfs_;
  std::vector<size_t> odometer_;
  bool done_ = false;
  long total_ = 1;
};

// Assignments over the free variables of a set of formulas.
std::vector<Assignment> enumerate_assignments(const Structure& m,
                                              const std::vector<FormulaPtr>& fs);

enum class TruthMode { Local, Truth, Generic, Valid };

// local: fixed chooser and assignment; truth: all assignments; generic:
// all choice functions at a fixed assignment; valid: all of both.
bool check_truth_mode(const Structure& m, const FormulaPtr& f, TruthMode mode,
                      const ExtChoiceFunction* phi, const Assignment* s,
                      int max_n = 3);

enum class ConsequenceMode { Local, Truth, Generic, Validity };

std::optional<ConsequenceMode> consequence_mode_from_name(const std::string& s);
std::string consequence_mode_name(ConsequenceMode m);

struct Counterexample {
  Structure m;
  std::optional<ExtChoiceFunction> phi;
  std::optional<IntChoiceOperator> psi;
  Assignment s;
  std::string note;
};

struct ConsequenceVerdict {
  bool holds = true;  // up to the explored bound
  std::optional<Counterexample> cex;
  long structures_checked = 0;
};

// Enumerates all structures over the signature up to max_n and applies the
// quantifier pattern of the chosen consequence relation.  With intensional
// set, choice operators over the epsilon types of gamma and a replace the
// extensional choice functions.
ConsequenceVerdict check_consequence(const Signature& sig,
                                     const std::vector<FormulaPtr>& gamma,
                                     const FormulaPtr& a, ConsequenceMode mode,
                                     int max_n, bool intensional = false,
                                     long budget = 2000000);

// The sub-signature of the symbols actually occurring in the formulas
// (with the same flags); keeps enumeration spaces small.
Signature restrict_signature(const Signature& sig, const std::vector<FormulaPtr>& fs);

// All structures over a signature with the given domain size, streamed.
class StructureStream {
public:
  StructureStream(const Signature& sig, int n, long budget = 2000000);
  std::optional<Structure> next();
  long total() const { return total_; }

private:
  Structure base_;
  std::vector<std::pair<std::string, int>> fn_syms_;   // name, arity
  std::vector<std::pair<std::string, int>> pred_syms_;
  std::vector<size_t> odometer_;
  std::vector<size_t> radix_;
  bool done_ = false;
  long total_ = 1;
};

} // namespace eps
