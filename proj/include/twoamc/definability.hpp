#pragma once

#include <map>
#include <vector>

#include "twoamc/cnf.hpp"
#include "twoamc/error.hpp"
#include "twoamc/graph.hpp"
#include "twoamc/sat.hpp"

namespace twoamc {

struct DefinabilityReport {
  VarSet base;
  VarSet defined;
  int query_count = 0;
  std::map<int, bool> verdicts;  // every non-base variable that was asked about
};

// Padoa's method on one incremental solver. The solver holds T over V and a
// primed copy T' over V'; for every variable v a selector s_v switches on
// v <-> v'. Variable y is defined by X iff
//   T(V) & T(V') & /\_{x in X} (x <-> x') & y & -y'
// is unsatisfiable, which is one solve() with selectors of X as assumptions.
class DefinabilityOracle {
 public:
  explicit DefinabilityOracle(const LabeledCnf& cnf) : n_(cnf.num_vars), vars_(cnf.variables()), solver_(3 * n_) {
    for (const auto& c : cnf.clauses) {
      std::vector<int> primed;
      primed.reserve(c.size());
      for (int l : c) primed.push_back(l > 0 ? l + n_ : l - n_);
      solver_.add_clause(c);
      solver_.add_clause(primed);
    }
    for (int v : vars_) {
      const int s = selector(v);
      solver_.add_clause({-s, -v, v + n_});
      solver_.add_clause({-s, v, -(v + n_)});
    }
  }

  // `extra` lists variables already known to be defined by `base`; their
  // equalities are implied, so switching them on only helps the solver.
  bool is_defined(const VarSet& base, int y, const VarSet& extra = {}) {
    if (contains(base, y)) throw PreconditionError("variable " + std::to_string(y) + " is in the base set");
    if (y < 1 || y > n_) throw PreconditionError("variable " + std::to_string(y) + " out of range");
    std::vector<int> assumptions;
    assumptions.reserve(base.size() + extra.size() + 2);
    for (int x : base) assumptions.push_back(selector(x));
    for (int x : extra)
      if (x != y) assumptions.push_back(selector(x));
    assumptions.push_back(y);
    assumptions.push_back(-(y + n_));
    ++queries_;
    return solver_.solve(assumptions) == sat::Solver::Result::Unsat;
  }

  int queries() const { return queries_; }
  const sat::Solver& solver() const { return solver_; }

 private:
  int selector(int v) const { return 2 * n_ + v; }

  int n_;
  VarSet vars_;
  sat::Solver solver_;
  int queries_ = 0;
};

inline bool is_defined(const LabeledCnf& cnf, const VarSet& base, int y) {
  DefinabilityOracle oracle(cnf);
  return oracle.is_defined(base, y);
}

// D(T, X): all variables outside X whose value every assignment of X fixes.
inline DefinabilityReport defined_vars(const LabeledCnf& cnf, const VarSet& base) {
  DefinabilityReport report;
  report.base = base;
  DefinabilityOracle oracle(cnf);
  for (int y : cnf.variables()) {
    if (contains(base, y)) continue;
    const bool d = oracle.is_defined(base, y, report.defined);
    report.verdicts[y] = d;
    if (d) report.defined.push_back(y);  // ascending, stays sorted
  }
  report.query_count = oracle.queries();
  return report;
}

}  // namespace twoamc
