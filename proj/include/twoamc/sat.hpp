#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <vector>

#include "twoamc/error.hpp"

namespace twoamc::sat {

// Conflict-driven clause-learning solver: two watched literals, first-UIP
// learning with minimization, VSIDS decisions with phase saving, Luby
// restarts. Literals at the API are DIMACS integers. Assumptions are
// installed as the first decisions of every search, so learnt clauses stay
// valid across solve() calls.
class Solver {
 public:
  enum class Result { Sat, Unsat };

  struct Stats {
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t restarts = 0;
    std::uint64_t solves = 0;
  };

  // Outcome of an explicit propagate() call.
  struct Propagation {
    bool conflict = false;
    std::vector<int> conflict_clause;  // literals of the falsified clause
    std::vector<int> implied;          // literals implied during this call
  };

  explicit Solver(int num_vars = 0) { ensure_vars(num_vars); }

  int num_vars() const { return static_cast<int>(assigns_.size()); }

  int new_var() {
    ensure_vars(num_vars() + 1);
    return num_vars();
  }

  void ensure_vars(int n) {
    while (num_vars() < n) {
      const int v = num_vars();
      assigns_.push_back(kUndef);
      level_.push_back(0);
      reason_.push_back(kNoReason);
      activity_.push_back(0.0);
      polarity_.push_back(1);  // prefer false first
      seen_.push_back(0);
      heap_index_.push_back(-1);
      watches_.emplace_back();
      watches_.emplace_back();
      heap_insert(v);
    }
  }

  // Adds a clause permanently. Returns false if the database became
  // unsatisfiable at the root level. Must be called at decision level 0.
  bool add_clause(std::span<const int> dimacs) {
    if (!ok_) return false;
    if (decision_level() != 0) backtrack(0);
    std::vector<Lit> lits;
    lits.reserve(dimacs.size());
    for (int d : dimacs) {
      if (d == 0) throw PreconditionError("literal 0 in clause");
      ensure_vars(std::abs(d));
      lits.push_back(to_lit(d));
    }
    std::sort(lits.begin(), lits.end());
    std::vector<Lit> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      const Lit l = lits[i];
      if (i > 0 && l == lits[i - 1]) continue;
      if (i > 0 && l == (lits[i - 1] ^ 1)) return true;  // tautology
      if (value(l) == kTrue) return true;
      if (value(l) == kFalse) continue;
      kept.push_back(l);
    }
    if (kept.empty()) return ok_ = false;
    if (kept.size() == 1) {
      enqueue(kept[0], kNoReason);
      if (propagate_internal() != kNoReason) ok_ = false;
      return ok_;
    }
    attach(new_clause(std::move(kept), false));
    return true;
  }

  bool add_clause(std::initializer_list<int> lits) { return add_clause(std::span<const int>(lits.begin(), lits.size())); }

  // Complete search under the given assumptions.
  Result solve(std::span<const int> assumptions = {}) {
    ++stats_.solves;
    model_.clear();
    if (!ok_) return Result::Unsat;
    backtrack(0);
    assumptions_.clear();
    for (int a : assumptions) {
      ensure_vars(std::abs(a));
      assumptions_.push_back(to_lit(a));
    }
    Result res = Result::Unsat;
    for (int restart = 0;; ++restart) {
      const auto budget = static_cast<std::uint64_t>(luby(restart) * 100);
      const auto r = search(budget);
      if (r == SearchResult::Sat) {
        res = Result::Sat;
        break;
      }
      if (r == SearchResult::Unsat) break;
      ++stats_.restarts;
    }
    if (res == Result::Sat) {
      model_.resize(num_vars());
      for (int v = 0; v < num_vars(); ++v) model_[v] = assigns_[v] == kTrue ? v + 1 : -(v + 1);
    }
    backtrack(0);
    return res;
  }

  Result solve(std::initializer_list<int> assumptions) {
    return solve(std::span<const int>(assumptions.begin(), assumptions.size()));
  }

  // Total assignment from the last Sat result, as DIMACS literals by variable.
  const std::vector<int>& model() const { return model_; }

  bool okay() const { return ok_; }
  const Stats& stats() const { return stats_; }

  // ---- Low-level interface (trail inspection and manual stepping) ----

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  // Value of a DIMACS literal under the current trail.
  std::optional<bool> value_of(int dimacs) const {
    if (std::abs(dimacs) > num_vars()) return std::nullopt;
    const auto v = value(to_lit(dimacs));
    if (v == kUndef) return std::nullopt;
    return v == kTrue;
  }

  // Opens a new decision level and assigns `dimacs` true.
  void decide(int dimacs) {
    ensure_vars(std::abs(dimacs));
    const Lit l = to_lit(dimacs);
    if (value(l) != kUndef) throw PreconditionError("deciding an assigned literal");
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    enqueue(l, kNoReason);
  }

  // Exhaustive unit propagation from the current trail position.
  Propagation propagate() {
    Propagation out;
    const std::size_t start = qhead_;
    const auto before = trail_.size();
    const ClauseRef confl = propagate_internal();
    (void)start;
    for (std::size_t i = before; i < trail_.size(); ++i) out.implied.push_back(to_dimacs(trail_[i]));
    if (confl != kNoReason) {
      out.conflict = true;
      for (Lit l : clauses_[confl].lits) out.conflict_clause.push_back(to_dimacs(l));
    }
    return out;
  }

  void backtrack(int level) {
    if (decision_level() <= level) return;
    for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[level]; --i) {
      const int v = var(trail_[i]);
      assigns_[v] = kUndef;
      reason_[v] = kNoReason;
      polarity_[v] = sign(trail_[i]);
      if (heap_index_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[level]);
    trail_lim_.resize(level);
    qhead_ = trail_.size();
  }

  // Trail as DIMACS literals, in assignment order.
  std::vector<int> trail() const {
    std::vector<int> out;
    for (Lit l : trail_) out.push_back(to_dimacs(l));
    return out;
  }

  // Reason clause of an implied variable (empty for decisions and level-0 units).
  std::vector<int> reason_of(int var) const {
    std::vector<int> out;
    const ClauseRef r = reason_[var - 1];
    if (r != kNoReason)
      for (Lit l : clauses_[r].lits) out.push_back(to_dimacs(l));
    return out;
  }

  int level_of(int var) const { return level_[var - 1]; }

 private:
  using Lit = int;  // 2*var + (negative ? 1 : 0), var 0-based
  using ClauseRef = int;
  static constexpr ClauseRef kNoReason = -1;
  static constexpr std::int8_t kTrue = 1, kFalse = -1, kUndef = 0;

  struct ClauseData {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0.0;
  };

  struct Watcher {
    ClauseRef cref;
    Lit blocker;
  };

  enum class SearchResult { Sat, Unsat, Restart };

  static Lit to_lit(int d) { return 2 * (std::abs(d) - 1) + (d < 0 ? 1 : 0); }
  static int to_dimacs(Lit l) { return (l & 1) ? -(l / 2 + 1) : (l / 2 + 1); }
  static int var(Lit l) { return l >> 1; }
  static int sign(Lit l) { return l & 1; }

  std::int8_t value(Lit l) const {
    const std::int8_t a = assigns_[var(l)];
    if (a == kUndef) return kUndef;
    return sign(l) ? static_cast<std::int8_t>(-a) : a;
  }

  void enqueue(Lit l, ClauseRef reason) {
    const int v = var(l);
    assigns_[v] = sign(l) ? kFalse : kTrue;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  ClauseRef new_clause(std::vector<Lit> lits, bool learnt) {
    clauses_.push_back({std::move(lits), learnt, false, 0.0});
    const ClauseRef cr = static_cast<ClauseRef>(clauses_.size() - 1);
    if (learnt) learnts_.push_back(cr);
    return cr;
  }

  void attach(ClauseRef cr) {
    const auto& c = clauses_[cr].lits;
    watches_[c[0] ^ 1].push_back({cr, c[1]});
    watches_[c[1] ^ 1].push_back({cr, c[0]});
  }

  ClauseRef propagate_internal() {
    ClauseRef confl = kNoReason;
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];  // p became true; visit clauses watching ~p
      ++stats_.propagations;
      auto& ws = watches_[p];
      std::size_t i = 0, j = 0;
      const Lit false_lit = p ^ 1;
      while (i < ws.size()) {
        const Watcher w = ws[i];
        if (clauses_[w.cref].deleted) {
          ++i;
          continue;
        }
        if (value(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        auto& c = clauses_[w.cref].lits;
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        ++i;
        const Lit first = c[0];
        if (first != w.blocker && value(first) == kTrue) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != kFalse) {
            std::swap(c[1], c[k]);
            watches_[c[1] ^ 1].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (value(first) == kFalse) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoReason) break;
    }
    return confl;
  }

  // First-UIP conflict analysis. Fills `learnt` (asserting literal first) and
  // returns the backjump level.
  int analyze(ClauseRef confl, std::vector<Lit>& learnt) {
    learnt.assign(1, 0);
    int path = 0;
    Lit p = -1;
    int index = static_cast<int>(trail_.size()) - 1;
    std::vector<int> touched;
    do {
      auto& c = clauses_[confl];
      if (c.learnt) bump_clause(c);
      for (Lit q : c.lits) {
        if (q == p) continue;
        const int v = var(q);
        if (!seen_[v] && level_[v] > 0) {
          bump_var(v);
          seen_[v] = 1;
          touched.push_back(v);
          if (level_[v] >= decision_level())
            ++path;
          else
            learnt.push_back(q);
        }
      }
      while (!seen_[var(trail_[index])]) --index;
      p = trail_[index--];
      confl = reason_[var(p)];
      seen_[var(p)] = 0;
      --path;
    } while (path > 0);
    learnt[0] = p ^ 1;

    // Drop literals whose reason is subsumed by the clause.
    std::size_t keep = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      const ClauseRef r = reason_[var(learnt[i])];
      bool redundant = r != kNoReason;
      if (redundant)
        for (Lit q : clauses_[r].lits)
          if (var(q) != var(learnt[i]) && !seen_[var(q)] && level_[var(q)] > 0) {
            redundant = false;
            break;
          }
      if (!redundant) learnt[keep++] = learnt[i];
    }
    learnt.resize(keep);
    for (int v : touched) seen_[v] = 0;

    int bt = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level_[var(learnt[i])] > level_[var(learnt[max_i])]) max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      bt = level_[var(learnt[1])];
    }
    return bt;
  }

  SearchResult search(std::uint64_t conflict_budget) {
    std::uint64_t conflicts = 0;
    std::vector<Lit> learnt;
    for (;;) {
      const ClauseRef confl = propagate_internal();
      if (confl != kNoReason) {
        ++stats_.conflicts;
        ++conflicts;
        if (decision_level() == 0) {
          ok_ = false;
          return SearchResult::Unsat;
        }
        const int bt = analyze(confl, learnt);
        backtrack(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          const ClauseRef cr = new_clause(learnt, true);
          attach(cr);
          bump_clause(clauses_[cr]);
          enqueue(learnt[0], cr);
        }
        var_inc_ /= kVarDecay;
        clause_inc_ /= kClauseDecay;
        continue;
      }
      if (conflicts >= conflict_budget) {
        backtrack(0);
        return SearchResult::Restart;
      }
      if (learnts_.size() >= max_learnts_ + trail_.size()) reduce_db();

      Lit next = -1;
      while (decision_level() < static_cast<int>(assumptions_.size())) {
        const Lit a = assumptions_[decision_level()];
        if (value(a) == kTrue) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));
        } else if (value(a) == kFalse) {
          return SearchResult::Unsat;
        } else {
          next = a;
          break;
        }
      }
      if (next == -1) {
        const int v = pick_branch_var();
        if (v < 0) return SearchResult::Sat;
        next = 2 * v + polarity_[v];
      }
      ++stats_.decisions;
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(next, kNoReason);
    }
  }

  void reduce_db() {
    std::vector<ClauseRef> live;
    for (ClauseRef cr : learnts_)
      if (!clauses_[cr].deleted) live.push_back(cr);
    std::sort(live.begin(), live.end(),
              [&](ClauseRef a, ClauseRef b) { return clauses_[a].activity < clauses_[b].activity; });
    std::vector<ClauseRef> kept;
    for (std::size_t i = 0; i < live.size(); ++i) {
      auto& c = clauses_[live[i]];
      const bool locked = reason_[var(c.lits[0])] == live[i] && value(c.lits[0]) == kTrue;
      if (i < live.size() / 2 && c.lits.size() > 2 && !locked) {
        c.deleted = true;
        c.lits.shrink_to_fit();
      } else {
        kept.push_back(live[i]);
      }
    }
    learnts_ = std::move(kept);
    max_learnts_ = max_learnts_ * 11 / 10;
  }

  static double luby(int x) {
    int size = 1, seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    double y = 1;
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    for (int i = 0; i < seq; ++i) y *= 2;
    return y;
  }

  void bump_var(int v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_index_[v] >= 0) sift_up(heap_index_[v]);
  }

  void bump_clause(ClauseData& c) {
    if ((c.activity += clause_inc_) > 1e20) {
      for (ClauseRef cr : learnts_) clauses_[cr].activity *= 1e-20;
      clause_inc_ *= 1e-20;
    }
  }

  int pick_branch_var() {
    while (!heap_.empty()) {
      const int v = heap_pop();
      if (assigns_[v] == kUndef) return v;
    }
    return -1;
  }

  // Binary max-heap over variable activity.
  void heap_insert(int v) {
    heap_index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    sift_up(heap_index_[v]);
  }

  int heap_pop() {
    const int top = heap_[0];
    heap_index_[top] = -1;
    const int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_index_[last] = 0;
      sift_down(0);
    }
    return top;
  }

  void sift_up(int i) {
    const int v = heap_[i];
    while (i > 0) {
      const int parent = (i - 1) / 2;
      if (activity_[heap_[parent]] >= activity_[v]) break;
      heap_[i] = heap_[parent];
      heap_index_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = i;
  }

  void sift_down(int i) {
    const int v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    for (;;) {
      int child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]]) ++child;
      if (activity_[heap_[child]] <= activity_[v]) break;
      heap_[i] = heap_[child];
      heap_index_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    heap_index_[v] = i;
  }

  static constexpr double kVarDecay = 0.95;
  static constexpr double kClauseDecay = 0.999;

  bool ok_ = true;
  std::vector<ClauseData> clauses_;
  std::vector<ClauseRef> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<ClauseRef> reason_;
  std::vector<double> activity_;
  std::vector<std::int8_t> polarity_;
  std::vector<char> seen_;
  std::vector<int> heap_;
  std::vector<int> heap_index_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<Lit> assumptions_;
  std::vector<int> model_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  std::size_t max_learnts_ = 2000;
  Stats stats_;
};

// Convenience: satisfiability of a clause list under assumptions.
inline std::optional<std::vector<int>> solve(std::span<const std::vector<int>> clauses,
                                             std::span<const int> assumptions = {}, int num_vars = 0) {
  Solver s(num_vars);
  for (const auto& c : clauses)
    if (!s.add_clause(c)) return std::nullopt;
  if (s.solve(assumptions) == Solver::Result::Unsat) return std::nullopt;
  return s.model();
}

}  // namespace twoamc::sat
