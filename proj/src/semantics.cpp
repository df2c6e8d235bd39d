#include "epsilon/semantics.hpp"
#include "epsilon/printer.hpp"

#include <algorithm>

namespace eps {

size_t Structure::table_size(int n, int arity) {
  size_t s = 1;
  for (int i = 0; i < arity; ++i) s *= static_cast<size_t>(n);
  return s;
}

size_t Structure::tuple_index(const std::vector<int>& tuple) const {
  size_t idx = 0;
  for (int v : tuple) idx = idx * static_cast<size_t>(n) + static_cast<size_t>(v);
  return idx;
}

bool ExtChoiceFunction::valid(int n) const {
  if (table.size() != (size_t{1} << n)) return false;
  for (size_t mask = 0; mask < table.size(); ++mask) {
    int v = table[mask];
    if (v < 0 || v >= n) return false;
    if (mask != 0 && !((mask >> v) & 1)) return false;
  }
  return true;
}

// --- evaluation ---

namespace {

uint32_t satisfier_set(const Structure& m, const Chooser& ch, const Assignment& s,
                       const Variable& x, const FormulaPtr& body) {
  uint32_t mask = 0;
  for (int v = 0; v < m.n; ++v)
    if (eval_formula(m, ch, s.with(x, v), body)) mask |= (1u << v);
  return mask;
}

} // namespace

int eval_term(const Structure& m, const Chooser& ch, const Assignment& s, const TermPtr& t) {
  switch (t->kind()) {
    case Term::Kind::Var: return s.get(t->var());
    case Term::Kind::App: {
      auto it = m.functions.find(t->fn());
      if (it == m.functions.end())
        throw EvalError("function symbol not interpreted: " + t->fn());
      std::vector<int> args;
      args.reserve(t->args().size());
      for (auto& a : t->args()) args.push_back(eval_term(m, ch, s, a));
      size_t idx = m.tuple_index(args);
      if (idx >= it->second.size())
        throw EvalError("arity mismatch in table for " + t->fn());
      return it->second[idx];
    }
    case Term::Kind::Eps: {
      uint32_t mask = satisfier_set(m, ch, s, t->var(), t->body());
      if (ch.phi) return ch.phi->choose(mask);
      if (ch.psi) {
        auto tt = epsilon_type(t);
        std::vector<int> args;
        for (auto& a : tt.args) args.push_back(eval_term(m, ch, s, a));
        const ExtChoiceFunction* f = ch.psi->lookup(tt.type.key(), args);
        if (!f)
          throw EvalError("intensional operator undefined on type " + tt.type.key());
        return f->choose(mask);
      }
      throw EvalError("no choice function supplied for epsilon term");
    }
  }
  throw EvalError("unreachable term kind");
}

bool eval_formula(const Structure& m, const Chooser& ch, const Assignment& s,
                  const FormulaPtr& f) {
  switch (f->kind()) {
    case Formula::Kind::Atom: {
      auto it = m.predicates.find(f->pred());
      if (it == m.predicates.end())
        throw EvalError("predicate symbol not interpreted: " + f->pred());
      std::vector<int> args;
      for (auto& a : f->args()) args.push_back(eval_term(m, ch, s, a));
      size_t idx = m.tuple_index(args);
      if (idx >= it->second.size())
        throw EvalError("arity mismatch in table for " + f->pred());
      return it->second[idx] != 0;
    }
    case Formula::Kind::Eq:
      return eval_term(m, ch, s, f->args()[0]) == eval_term(m, ch, s, f->args()[1]);
    case Formula::Kind::Bottom: return false;
    case Formula::Kind::Top: return true;
    case Formula::Kind::Not: return !eval_formula(m, ch, s, f->lhs());
    case Formula::Kind::And:
      return eval_formula(m, ch, s, f->lhs()) && eval_formula(m, ch, s, f->rhs());
    case Formula::Kind::Or:
      return eval_formula(m, ch, s, f->lhs()) || eval_formula(m, ch, s, f->rhs());
    case Formula::Kind::Imp:
      return !eval_formula(m, ch, s, f->lhs()) || eval_formula(m, ch, s, f->rhs());
    case Formula::Kind::Iff:
      return eval_formula(m, ch, s, f->lhs()) == eval_formula(m, ch, s, f->rhs());
    case Formula::Kind::Exists: {
      for (int v = 0; v < m.n; ++v)
        if (eval_formula(m, ch, s.with(f->var(), v), f->lhs())) return true;
      return false;
    }
    case Formula::Kind::Forall: {
      for (int v = 0; v < m.n; ++v)
        if (!eval_formula(m, ch, s.with(f->var(), v), f->lhs())) return false;
      return true;
    }
  }
  throw EvalError("unreachable formula kind");
}

// --- choice function enumeration ---

long count_choice_functions(int n) {
  long total = n;  // choices for the empty set
  for (uint32_t mask = 1; mask < (1u << n); ++mask)
    total *= static_cast<long>(__builtin_popcount(mask));
  return total;
}

std::vector<ExtChoiceFunction> enumerate_choice_functions(const Structure& m, int max_n) {
  if (m.n > max_n)
    throw LimitError("choice-function enumeration bound exceeded: n = " +
                     std::to_string(m.n) + " > " + std::to_string(max_n));
  int n = m.n;
  size_t masks = size_t{1} << n;
  // members[mask] lists the allowed values at mask
  std::vector<std::vector<int>> members(masks);
  for (size_t mask = 0; mask < masks; ++mask) {
    if (mask == 0) {
      for (int v = 0; v < n; ++v) members[0].push_back(v);
    } else {
      for (int v = 0; v < n; ++v)
        if ((mask >> v) & 1) members[mask].push_back(static_cast<int>(v));
    }
  }
  std::vector<ExtChoiceFunction> out;
  std::vector<size_t> odo(masks, 0);
  for (;;) {
    ExtChoiceFunction f;
    f.table.resize(masks);
    for (size_t i = 0; i < masks; ++i) f.table[i] = members[i][odo[i]];
    out.push_back(std::move(f));
    size_t i = 0;
    for (; i < masks; ++i) {
      if (++odo[i] < members[i].size()) break;
      odo[i] = 0;
    }
    if (i == masks) break;
  }
  return out;
}

// --- epsilon type collection ---

namespace {

void collect_types_term(const TermPtr& t, std::map<std::string, EpsilonType>& out);
void collect_types_formula(const FormulaPtr& f, std::map<std::string, EpsilonType>& out);

void collect_types_term(const TermPtr& t, std::map<std::string, EpsilonType>& out) {
  switch (t->kind()) {
    case Term::Kind::Var: return;
    case Term::Kind::App:
      for (auto& a : t->args()) collect_types_term(a, out);
      return;
    case Term::Kind::Eps: {
      auto tt = epsilon_type(t);
      out.emplace(tt.type.key(), tt.type);
      for (auto& a : tt.args) collect_types_term(a, out);
      collect_types_formula(t->body(), out);
      return;
    }
  }
}

void collect_types_formula(const FormulaPtr& f, std::map<std::string, EpsilonType>& out) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Eq:
      for (auto& a : f->args()) collect_types_term(a, out);
      return;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return;
    case Formula::Kind::Not: collect_types_formula(f->lhs(), out); return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      collect_types_formula(f->lhs(), out);
      collect_types_formula(f->rhs(), out);
      return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      collect_types_formula(f->lhs(), out);
      return;
  }
}

} // namespace

std::vector<EpsilonType> collect_epsilon_types(const FormulaPtr& f) {
  std::map<std::string, EpsilonType> found;
  collect_types_formula(f, found);
  std::vector<EpsilonType> out;
  for (auto& [k, v] : found) out.push_back(v);
  return out;
}

// --- intensional operator stream ---

IntOperatorStream::IntOperatorStream(const Structure& m,
                                     const std::vector<EpsilonType>& types, long budget) {
  cfs_ = enumerate_choice_functions(m);
  std::set<std::string> seen;
  for (auto& type : types) {
    if (!seen.insert(type.key()).second) continue;
    int arity = type.arity();
    size_t tuples = Structure::table_size(m.n, arity);
    for (size_t i = 0; i < tuples; ++i) {
      std::vector<int> tuple(static_cast<size_t>(arity));
      size_t rest = i;
      for (int k = arity - 1; k >= 0; --k) {
        tuple[static_cast<size_t>(k)] = static_cast<int>(rest % static_cast<size_t>(m.n));
        rest /= static_cast<size_t>(m.n);
      }
      keys_.emplace_back(type.key(), tuple);
    }
  }
  for (size_t i = 0; i < keys_.size(); ++i) {
    total_ *= static_cast<long>(cfs_.size());
    if (total_ > budget)
      throw LimitError("intensional operator budget exceeded");
  }
  odometer_.assign(keys_.size(), 0);
}

std::optional<IntChoiceOperator> IntOperatorStream::next() {
  if (done_) return std::nullopt;
  IntChoiceOperator op;
  for (size_t i = 0; i < keys_.size(); ++i) op.table[keys_[i]] = cfs_[odometer_[i]];
  size_t i = 0;
  for (; i < odometer_.size(); ++i) {
    if (++odometer_[i] < cfs_.size()) break;
    odometer_[i] = 0;
  }
  if (i == odometer_.size()) done_ = true;
  return op;
}

// --- assignments ---

std::vector<Assignment> enumerate_assignments(const Structure& m,
                                              const std::vector<FormulaPtr>& fs) {
  std::set<Variable> fv;
  for (auto& f : fs)
    for (auto& v : free_vars(f)) fv.insert(v);
  std::vector<Variable> vars(fv.begin(), fv.end());
  std::vector<Assignment> out;
  std::vector<int> odo(vars.size(), 0);
  for (;;) {
    Assignment s;
    for (size_t i = 0; i < vars.size(); ++i) s.values[vars[i].name] = odo[i];
    out.push_back(std::move(s));
    size_t i = 0;
    for (; i < vars.size(); ++i) {
      if (++odo[i] < m.n) break;
      odo[i] = 0;
    }
    if (i == vars.size()) break;
  }
  return out;
}

bool check_truth_mode(const Structure& m, const FormulaPtr& f, TruthMode mode,
                      const ExtChoiceFunction* phi, const Assignment* s, int max_n) {
  Assignment default_s;
  switch (mode) {
    case TruthMode::Local: {
      if (!phi) throw PreconditionError("local truth needs a choice function");
      return eval_formula(m, Chooser::ext(*phi), s ? *s : default_s, f);
    }
    case TruthMode::Truth: {
      if (!phi) throw PreconditionError("truth needs a choice function");
      for (auto& sa : enumerate_assignments(m, {f}))
        if (!eval_formula(m, Chooser::ext(*phi), sa, f)) return false;
      return true;
    }
    case TruthMode::Generic: {
      for (auto& cf : enumerate_choice_functions(m, max_n))
        if (!eval_formula(m, Chooser::ext(cf), s ? *s : default_s, f)) return false;
      return true;
    }
    case TruthMode::Valid: {
      for (auto& cf : enumerate_choice_functions(m, max_n))
        for (auto& sa : enumerate_assignments(m, {f}))
          if (!eval_formula(m, Chooser::ext(cf), sa, f)) return false;
      return true;
    }
  }
  return false;
}

// --- structure enumeration ---

namespace {

void collect_symbols_term(const TermPtr& t, std::set<std::string>& fns,
                          std::set<std::string>& preds);
void collect_symbols_formula(const FormulaPtr& f, std::set<std::string>& fns,
                             std::set<std::string>& preds);

void collect_symbols_term(const TermPtr& t, std::set<std::string>& fns,
                          std::set<std::string>& preds) {
  switch (t->kind()) {
    case Term::Kind::Var: return;
    case Term::Kind::App:
      fns.insert(t->fn());
      for (auto& a : t->args()) collect_symbols_term(a, fns, preds);
      return;
    case Term::Kind::Eps: collect_symbols_formula(t->body(), fns, preds); return;
  }
}

void collect_symbols_formula(const FormulaPtr& f, std::set<std::string>& fns,
                             std::set<std::string>& preds) {
  switch (f->kind()) {
    case Formula::Kind::Atom:
      preds.insert(f->pred());
      [[fallthrough]];
    case Formula::Kind::Eq:
      for (auto& a : f->args()) collect_symbols_term(a, fns, preds);
      return;
    case Formula::Kind::Bottom:
    case Formula::Kind::Top: return;
    case Formula::Kind::Not: collect_symbols_formula(f->lhs(), fns, preds); return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      collect_symbols_formula(f->lhs(), fns, preds);
      collect_symbols_formula(f->rhs(), fns, preds);
      return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      collect_symbols_formula(f->lhs(), fns, preds);
      return;
  }
}

} // namespace

Signature restrict_signature(const Signature& sig, const std::vector<FormulaPtr>& fs) {
  std::set<std::string> fns, preds;
  for (auto& f : fs) collect_symbols_formula(f, fns, preds);
  Signature out;
  out.has_identity = sig.has_identity;
  out.has_epsilon = sig.has_epsilon;
  out.has_quantifiers = sig.has_quantifiers;
  for (auto& name : fns) {
    auto it = sig.functions.find(name);
    if (it != sig.functions.end()) out.functions.insert(*it);
  }
  for (auto& name : preds) {
    auto it = sig.predicates.find(name);
    if (it != sig.predicates.end()) out.predicates.insert(*it);
  }
  return out;
}

StructureStream::StructureStream(const Signature& sig, int n, long budget) {
  base_.n = n;
  for (auto& [name, arity] : sig.functions) {
    fn_syms_.emplace_back(name, arity);
    base_.functions[name] = std::vector<int>(Structure::table_size(n, arity), 0);
  }
  for (auto& [name, arity] : sig.predicates) {
    pred_syms_.emplace_back(name, arity);
    base_.predicates[name] = std::vector<char>(Structure::table_size(n, arity), 0);
  }
  // one odometer digit per table cell; functions in radix n, predicates in 2
  for (auto& [name, arity] : fn_syms_)
    for (size_t i = 0; i < Structure::table_size(n, arity); ++i)
      radix_.push_back(static_cast<size_t>(n));
  for (auto& [name, arity] : pred_syms_)
    for (size_t i = 0; i < Structure::table_size(n, arity); ++i) radix_.push_back(2);
  odometer_.assign(radix_.size(), 0);
  for (size_t r : radix_) {
    total_ *= static_cast<long>(r);
    if (total_ > budget) throw LimitError("structure enumeration budget exceeded");
  }
}

std::optional<Structure> StructureStream::next() {
  if (done_) return std::nullopt;
  Structure m = base_;
  size_t digit = 0;
  for (auto& [name, arity] : fn_syms_) {
    auto& table = m.functions[name];
    for (auto& cell : table) cell = static_cast<int>(odometer_[digit++]);
  }
  for (auto& [name, arity] : pred_syms_) {
    auto& table = m.predicates[name];
    for (auto& cell : table) cell = static_cast<char>(odometer_[digit++]);
  }
  size_t i = 0;
  for (; i < odometer_.size(); ++i) {
    if (++odometer_[i] < radix_[i]) break;
    odometer_[i] = 0;
  }
  if (i == odometer_.size()) done_ = true;
  return m;
}

// --- consequence relations ---

std::optional<ConsequenceMode> consequence_mode_from_name(const std::string& s) {
  if (s == "l" || s == "local") return ConsequenceMode::Local;
  if (s == "t" || s == "truth") return ConsequenceMode::Truth;
  if (s == "g" || s == "generic") return ConsequenceMode::Generic;
  if (s == "v" || s == "validity") return ConsequenceMode::Validity;
  return std::nullopt;
}

std::string consequence_mode_name(ConsequenceMode m) {
  switch (m) {
    case ConsequenceMode::Local: return "local";
    case ConsequenceMode::Truth: return "truth";
    case ConsequenceMode::Generic: return "generic";
    case ConsequenceMode::Validity: return "validity";
  }
  return "?";
}

namespace {

struct ChooserSet {
  std::vector<ExtChoiceFunction> ext;
  std::vector<IntChoiceOperator> intens;
  bool intensional = false;

  size_t size() const { return intensional ? intens.size() : ext.size(); }
  Chooser at(size_t i) const {
    return intensional ? Chooser::intens(intens[i]) : Chooser::ext(ext[i]);
  }
};

bool eval_all_assignments(const Structure& m, const Chooser& ch,
                          const std::vector<Assignment>& ss, const FormulaPtr& f) {
  for (auto& s : ss)
    if (!eval_formula(m, ch, s, f)) return false;
  return true;
}

} // namespace

ConsequenceVerdict check_consequence(const Signature& sig,
                                     const std::vector<FormulaPtr>& gamma,
                                     const FormulaPtr& a, ConsequenceMode mode, int max_n,
                                     bool intensional, long budget) {
  ConsequenceVerdict verdict;
  std::vector<FormulaPtr> all = gamma;
  all.push_back(a);

  std::vector<EpsilonType> types;
  if (intensional) {
    std::map<std::string, EpsilonType> merged;
    for (auto& f : all)
      for (auto& t : collect_epsilon_types(f)) merged.emplace(t.key(), t);
    for (auto& [k, v] : merged) types.push_back(v);
  }

  for (int n = 1; n <= max_n; ++n) {
    StructureStream structures(sig, n, budget);
    while (auto mo = structures.next()) {
      const Structure& m = *mo;
      ++verdict.structures_checked;

      ChooserSet choosers;
      choosers.intensional = intensional;
      if (intensional) {
        IntOperatorStream ops(m, types, budget);
        while (auto op = ops.next()) choosers.intens.push_back(std::move(*op));
      } else {
        choosers.ext = enumerate_choice_functions(m, n);
      }
      auto ss = enumerate_assignments(m, all);

      auto report = [&](size_t ci, const Assignment& s, const std::string& note) {
        Counterexample cex;
        cex.m = m;
        if (intensional)
          cex.psi = choosers.intens[ci];
        else
          cex.phi = choosers.ext[ci];
        cex.s = s;
        cex.note = note;
        verdict.holds = false;
        verdict.cex = std::move(cex);
      };

      switch (mode) {
        case ConsequenceMode::Local: {
          for (size_t ci = 0; ci < choosers.size(); ++ci) {
            for (auto& s : ss) {
              bool prem = true;
              for (auto& g : gamma)
                prem = prem && eval_formula(m, choosers.at(ci), s, g);
              if (prem && !eval_formula(m, choosers.at(ci), s, a)) {
                report(ci, s, "premises locally true, conclusion false");
                return verdict;
              }
            }
          }
          break;
        }
        case ConsequenceMode::Truth: {
          for (size_t ci = 0; ci < choosers.size(); ++ci) {
            bool prem = true;
            for (auto& g : gamma)
              prem = prem && eval_all_assignments(m, choosers.at(ci), ss, g);
            if (!prem) continue;
            for (auto& s : ss) {
              if (!eval_formula(m, choosers.at(ci), s, a)) {
                report(ci, s, "premises true, conclusion false at this assignment");
                return verdict;
              }
            }
          }
          break;
        }
        case ConsequenceMode::Generic: {
          // premises generically true at s implies conclusion generically
          // valid (the notes state the asymmetric version; kept as written)
          for (auto& s : ss) {
            bool prem = true;
            for (auto& g : gamma) {
              for (size_t ci = 0; ci < choosers.size() && prem; ++ci)
                prem = prem && eval_formula(m, choosers.at(ci), s, g);
            }
            if (!prem) continue;
            for (size_t ci = 0; ci < choosers.size(); ++ci) {
              for (auto& s2 : ss) {
                if (!eval_formula(m, choosers.at(ci), s2, a)) {
                  report(ci, s2, "premises generically true, conclusion not valid");
                  return verdict;
                }
              }
            }
          }
          break;
        }
        case ConsequenceMode::Validity: {
          bool prem = true;
          for (auto& g : gamma) {
            for (size_t ci = 0; ci < choosers.size() && prem; ++ci)
              prem = prem && eval_all_assignments(m, choosers.at(ci), ss, g);
          }
          if (!prem) break;
          for (size_t ci = 0; ci < choosers.size(); ++ci) {
            for (auto& s : ss) {
              if (!eval_formula(m, choosers.at(ci), s, a)) {
                report(ci, s, "premises generically valid, conclusion not valid");
                return verdict;
              }
            }
          }
          break;
        }
      }
    }
  }
  return verdict;
}

} // namespace eps
