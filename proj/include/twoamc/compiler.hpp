#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "twoamc/cnf.hpp"
#include "twoamc/error.hpp"
#include "twoamc/graph.hpp"
#include "twoamc/nnf.hpp"
#include "twoamc/sat.hpp"
#include "twoamc/treedecomp.hpp"

namespace twoamc {

enum class CompileMode { Free, XFirst, XDFirst };

inline std::string_view to_token(CompileMode m) {
  switch (m) {
    case CompileMode::Free: return "free";
    case CompileMode::XFirst: return "x";
    case CompileMode::XDFirst: return "xd";
  }
  return "free";
}

inline std::optional<CompileMode> compile_mode_from_token(std::string_view s) {
  if (s == "free") return CompileMode::Free;
  if (s == "x") return CompileMode::XFirst;
  if (s == "xd") return CompileMode::XDFirst;
  return std::nullopt;
}

struct CompileConfig {
  VariableOrder order;
  CompileMode mode = CompileMode::Free;
  std::size_t cache_budget = std::size_t{256} << 20;  // bytes
  bool unit_propagation = true;
  VarSet defined;  // D(T, X_O); consulted in XDFirst mode only
};

struct CompileStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t decisions = 0;
  std::size_t propagations = 0;
};

class CompileCapacityError : public CapacityError {
 public:
  CompileCapacityError(const std::string& what, CompileStats partial) : CapacityError(what), stats(partial) {}
  CompileStats stats;
};

struct CompileResult {
  Circuit circuit;
  CompileStats stats;
};

namespace detail {

// Rough per-node memory cost used to turn the byte budget into a node cap.
inline constexpr std::size_t kBytesPerNode = 96;

using ClauseList = std::vector<Clause>;

struct ClauseListHash {
  std::size_t operator()(const ClauseList& cs) const {
    std::size_t h = cs.size();
    for (const auto& c : cs) {
      h ^= 0x51ed270b27d1a6a5ULL + (h << 6) + (h >> 2);
      for (int l : c) h ^= static_cast<std::size_t>(l) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

inline ClauseList canonical(ClauseList cs) {
  for (auto& c : cs) std::sort(c.begin(), c.end());
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  return cs;
}

inline VarSet vars_of(const ClauseList& cs) {
  VarSet vs;
  for (const auto& c : cs)
    for (int l : c) vs.push_back(var_of(l));
  return make_varset(std::move(vs));
}

// Top-down decision-DNNF construction with component caching.
class Compiler {
 public:
  Compiler(const LabeledCnf& cnf, const CompileConfig& cfg) : cnf_(cnf), cfg_(cfg) {
    const VarSet all = cnf.variables();
    std::vector<int> seq = cfg.order.sequence;
    if (make_varset(seq) != all || seq.size() != all.size())
      throw PreconditionError("variable order is not a permutation of the theory's variables");
    pos_.assign(cnf.num_vars + 1, 0);
    for (std::size_t i = 0; i < seq.size(); ++i) pos_[seq[i]] = static_cast<int>(i);
    outer_.assign(cnf.num_vars + 1, 0);
    front_.assign(cnf.num_vars + 1, 0);
    for (int v : cnf.outer_vars) outer_[v] = front_[v] = 1;
    if (cfg.mode == CompileMode::XDFirst)
      for (int v : cfg.defined) front_[v] = 1;
    max_nodes_ = std::max<std::size_t>(16, cfg.cache_budget / kBytesPerNode);
    circuit_.num_vars = cnf.num_vars;
  }

  CompileResult run() {
    ClauseList start;
    bool empty_clause = false;
    for (const auto& c : cnf_.clauses) {
      if (c.empty()) empty_clause = true;
      start.push_back(c);
    }
    const int root = empty_clause ? circuit_.make_false() : formula(canonical(std::move(start)));
    circuit_.set_root(root);
    CompileResult out;
    out.circuit = circuit_.compact();
    stats_.nodes = out.circuit.size();
    stats_.edges = out.circuit.num_edges();
    out.stats = stats_;
    return out;
  }

 private:
  bool is_outer(int v) const { return outer_[v] != 0; }
  bool in_front(int v) const { return front_[v] != 0; }

  void guard() {
    if (static_cast<std::size_t>(circuit_.size()) > max_nodes_) {
      stats_.nodes = circuit_.size();
      stats_.edges = circuit_.num_edges();
      throw CompileCapacityError("compilation exceeded the node budget of " + std::to_string(max_nodes_) + " nodes",
                                 stats_);
    }
  }

  // Assign `lit` in cs: drop satisfied clauses, shorten the rest.
  static ClauseList assign(const ClauseList& cs, int lit, bool& conflict) {
    ClauseList out;
    out.reserve(cs.size());
    conflict = false;
    for (const auto& c : cs) {
      bool sat = false;
      Clause kept;
      kept.reserve(c.size());
      for (int l : c) {
        if (l == lit) {
          sat = true;
          break;
        }
        if (l != -lit) kept.push_back(l);
      }
      if (sat) continue;
      if (kept.empty()) {
        conflict = true;
        return {};
      }
      out.push_back(std::move(kept));
    }
    return out;
  }

  // Exhaustive unit propagation restricted by mode. Returns false on conflict.
  bool propagate(ClauseList& cs, std::vector<int>& implied) {
    if (!cfg_.unit_propagation) return true;
    for (;;) {
      bool inner_allowed = true;
      if (cfg_.mode == CompileMode::XFirst)
        for (const auto& c : cs)
          for (int l : c)
            if (is_outer(var_of(l))) inner_allowed = false;
      int unit = 0;
      for (const auto& c : cs)
        if (c.size() == 1 && (inner_allowed || is_outer(var_of(c[0])))) {
          unit = c[0];
          break;
        }
      if (unit == 0) return true;
      bool conflict = false;
      cs = assign(cs, unit, conflict);
      ++stats_.propagations;
      if (conflict) return false;
      implied.push_back(unit);
    }
  }

  std::vector<ClauseList> components(const ClauseList& cs) {
    const VarSet vs = vars_of(cs);
    std::vector<int> parent(vs.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto idx = [&](int v) { return static_cast<int>(std::lower_bound(vs.begin(), vs.end(), v) - vs.begin()); };
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& c : cs)
      for (std::size_t i = 1; i < c.size(); ++i) {
        int a = find(idx(var_of(c[0]))), b = find(idx(var_of(c[i])));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    std::map<int, ClauseList> by_root;
    for (const auto& c : cs) by_root[find(idx(var_of(c[0])))].push_back(c);
    std::vector<ClauseList> out;
    for (auto& [r, comp] : by_root) out.push_back(std::move(comp));
    return out;
  }

  // Mixed: touches X and is not inside the front (X, or X u D in XDFirst).
  bool mixed(const VarSet& vs) const {
    if (cfg_.mode == CompileMode::Free) return false;
    bool touches_x = false, outside_front = false;
    for (int v : vs) {
      touches_x = touches_x || is_outer(v);
      outside_front = outside_front || !in_front(v);
    }
    return touches_x && outside_front;
  }

  int formula(ClauseList cs) {
    if (cs.empty()) return circuit_.make_true();
    if (auto it = cache_.find(cs); it != cache_.end()) {
      ++stats_.cache_hits;
      return it->second;
    }
    ++stats_.cache_misses;
    const ClauseList key = cs;
    std::vector<int> implied;
    int result;
    if (!propagate(cs, implied)) {
      result = circuit_.make_false();
    } else {
      std::vector<int> children;
      for (int l : implied) children.push_back(circuit_.make_literal(l));
      if (!cs.empty()) {
        auto comps = components(cs);
        // Under a firstness constraint, all mixed components and every
        // component outside the front that has no X variable must be
        // decided together: an and-node may have one mixed child only, and
        // its other children must then lie inside the front.
        std::vector<ClauseList> groups;
        ClauseList merged;
        bool any_mixed = false;
        for (const auto& comp : comps)
          if (mixed(vars_of(comp))) any_mixed = true;
        for (auto& comp : comps) {
          const VarSet vs = vars_of(comp);
          bool inside_front = true;
          for (int v : vs) inside_front = inside_front && in_front(v);
          if (any_mixed && !inside_front)
            merged.insert(merged.end(), comp.begin(), comp.end());
          else
            groups.push_back(std::move(comp));
        }
        if (!merged.empty()) groups.push_back(std::move(merged));
        if (groups.size() == 1 && implied.empty()) {
          children.push_back(decide(canonical(std::move(groups[0]))));
        } else {
          for (auto& g : groups) children.push_back(formula(canonical(std::move(g))));
        }
      }
      result = circuit_.make_and(std::move(children));
    }
    for (int ch : circuit_.node(result).children)
      if (circuit_.node(ch).kind == NodeKind::False) {
        result = circuit_.make_false();
        break;
      }
    guard();
    cache_.emplace(key, result);
    return result;
  }

  int decide(const ClauseList& cs) {
    const VarSet vs = vars_of(cs);
    const bool restrict_front = mixed(vs);
    int best = 0;
    for (int v : vs) {
      if (restrict_front && !in_front(v)) continue;
      if (best == 0 || pos_[v] < pos_[best]) best = v;
    }
    ++stats_.decisions;
    std::vector<int> branches;
    for (int lit : {best, -best}) {
      bool conflict = false;
      ClauseList rest = assign(cs, lit, conflict);
      if (conflict) continue;
      const int sub = formula(canonical(std::move(rest)));
      if (circuit_.node(sub).kind == NodeKind::False) continue;
      branches.push_back(circuit_.make_and({circuit_.make_literal(lit), sub}));
    }
    const int r = circuit_.make_or(best, std::move(branches));
    guard();
    return r;
  }

  const LabeledCnf& cnf_;
  const CompileConfig& cfg_;
  std::vector<int> pos_;
  std::vector<char> outer_, front_;
  std::size_t max_nodes_;
  Circuit circuit_;
  CompileStats stats_;
  std::unordered_map<ClauseList, int, ClauseListHash> cache_;
};

}  // namespace detail

inline CompileResult compile(const LabeledCnf& cnf, const CompileConfig& cfg) {
  detail::Compiler c(cnf, cfg);
  return c.run();
}

// ---------------------------------------------------------------------------
// Smoothing

// Partition information used to keep firstness while padding.
struct SmoothPartition {
  VarSet outer;  // X
  VarSet front;  // X, or X u D
};

// Pads every or-node child to its parent's variables and the root to
// `universe` with gates (v | -v). With a partition, gates for non-front
// variables are pushed below mixed nodes so that an and-node never gains a
// non-front sibling next to its mixed child.
inline Circuit smooth(const Circuit& in, const VarSet& universe, const std::optional<SmoothPartition>& part = {}) {
  Circuit out;
  out.num_vars = std::max(in.num_vars, universe.empty() ? 0 : universe.back());
  const auto& vars = in.vars();
  if (!is_subset(vars[in.root()], universe)) throw PreconditionError("circuit mentions variables outside the universe");

  auto is_mixed = [&](const VarSet& vs) {
    if (!part) return false;
    bool tx = false, off = false;
    for (int v : vs) {
      tx = tx || contains(part->outer, v);
      off = off || !contains(part->front, v);
    }
    return tx && off;
  };
  auto gate = [&](int v) { return out.make_or(v, {out.make_literal(v), out.make_literal(-v)}); };

  std::map<std::pair<int, VarSet>, int> memo;
  std::function<int(int, const VarSet&)> pad = [&](int i, const VarSet& M) -> int {
    auto key = std::make_pair(i, M);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const Node& n = in.node(i);
    int r;
    if (n.kind == NodeKind::Or && !M.empty() && !is_mixed(vars[i])) {
      std::vector<int> kids{pad(i, {})};
      for (int v : M) kids.push_back(gate(v));
      r = out.make_and(std::move(kids));
    } else if (n.kind == NodeKind::Or) {
      std::vector<int> kids;
      for (int ch : n.children) kids.push_back(pad(ch, set_union(M, set_difference(vars[i], vars[ch]))));
      r = out.make_or(n.decision, std::move(kids));
    } else if (n.kind == NodeKind::And) {
      VarSet push_down, here = M;
      int mixed_child = -1;
      if (part && is_mixed(vars[i])) {
        for (int ch : n.children)
          if (is_mixed(vars[ch])) mixed_child = ch;
        if (mixed_child >= 0) {
          push_down = set_difference(M, part->front);
          here = set_intersection(M, part->front);
        }
      }
      std::vector<int> kids;
      for (int ch : n.children) kids.push_back(pad(ch, ch == mixed_child ? push_down : VarSet{}));
      for (int v : here) kids.push_back(gate(v));
      r = out.make_and(std::move(kids));
    } else {
      int base;
      switch (n.kind) {
        case NodeKind::Literal: base = out.make_literal(n.lit); break;
        case NodeKind::True: base = out.make_true(); break;
        default: base = out.make_false(); break;
      }
      if (M.empty()) {
        r = base;
      } else {
        std::vector<int> kids{base};
        if (n.kind == NodeKind::True) kids.clear();
        for (int v : M) kids.push_back(gate(v));
        r = out.make_and(std::move(kids));
      }
    }
    memo.emplace(std::move(key), r);
    return r;
  };
  const int root = pad(in.root(), set_difference(universe, vars[in.root()]));
  out.set_root(root);
  return out.compact();
}

// ---------------------------------------------------------------------------
// Verification

struct PropertyReport {
  bool decomposable = true;
  bool deterministic = true;
  bool smooth = true;
  bool x_first = true;
  bool xd_first = true;
  std::size_t xd_flagged = 0;            // and-nodes justified only by propagated literals
  std::optional<bool> equivalent;        // unset when the theory is too large
  std::size_t sat_determinism_checks = 0;
  std::vector<std::string> problems;

  bool sd_dnnf() const { return decomposable && deterministic && smooth; }
};

struct VerifyOptions {
  int max_equivalence_vars = 20;
  int max_sat_determinism_nodes = 2000;
};

namespace detail {

// Tseitin variables for every node below `root` inside a fresh solver region.
inline int tseitin(const Circuit& c, int root, sat::Solver& s, std::map<int, int>& var_of_node, int base_vars) {
  std::function<int(int)> enc = [&](int i) -> int {
    if (auto it = var_of_node.find(i); it != var_of_node.end()) return it->second;
    const Node& n = c.node(i);
    int out = 0;
    switch (n.kind) {
      case NodeKind::Literal: out = n.lit; break;
      case NodeKind::True:
        out = s.new_var();
        s.add_clause({out});
        break;
      case NodeKind::False:
        out = s.new_var();
        s.add_clause({-out});
        break;
      case NodeKind::And:
      case NodeKind::Or: {
        std::vector<int> ks;
        for (int ch : n.children) ks.push_back(enc(ch));
        out = s.new_var();
        if (n.kind == NodeKind::And) {
          std::vector<int> big{out};
          for (int k : ks) {
            s.add_clause({-out, k});
            big.push_back(-k);
          }
          s.add_clause(big);
        } else {
          std::vector<int> big{-out};
          for (int k : ks) {
            s.add_clause({out, -k});
            big.push_back(k);
          }
          s.add_clause(big);
        }
        break;
      }
    }
    var_of_node[i] = out;
    return out;
  };
  (void)base_vars;
  return enc(root);
}

// Literal pinned by a decision branch: the child itself or one of its
// literal children on variable v.
inline std::optional<int> branch_literal(const Circuit& c, int ch, int v) {
  const Node& n = c.node(ch);
  if (n.kind == NodeKind::Literal && var_of(n.lit) == v) return n.lit;
  if (n.kind == NodeKind::And)
    for (int k : n.children) {
      const Node& m = c.node(k);
      if (m.kind == NodeKind::Literal && var_of(m.lit) == v) return m.lit;
    }
  return std::nullopt;
}

}  // namespace detail

// Checks decomposability, determinism, smoothness, X-firstness and the static
// X/D-firstness for X = cnf.outer_vars and the given D, plus model-set
// equivalence with cnf when it is small enough.
inline PropertyReport verify_circuit(const Circuit& c, const LabeledCnf& cnf, const VarSet& d,
                                     const VerifyOptions& opt = {}) {
  PropertyReport rep;
  const auto& vars = c.vars();
  const auto live = c.reachable();
  const VarSet& X = cnf.outer_vars;
  const VarSet xd = set_union(X, d);
  auto subset_x = [&](const VarSet& vs) { return is_subset(vs, X); };
  auto subset_y = [&](const VarSet& vs) { return set_intersection(vs, X).empty(); };
  auto subset_xd = [&](const VarSet& vs) { return is_subset(vs, xd); };
  auto note = [&](bool& flag, const std::string& what) {
    if (flag) rep.problems.push_back(what);
    flag = false;
  };

  bool need_sat = false;
  std::vector<int> undecided_or;
  for (int i = 0; i < c.size(); ++i) {
    if (!live[i]) continue;
    const Node& n = c.node(i);
    if (n.kind == NodeKind::And) {
      VarSet seen;
      for (int ch : n.children) {
        if (!set_intersection(seen, vars[ch]).empty()) {
          note(rep.decomposable, "and-node " + std::to_string(i) + " has children sharing variables");
          break;
        }
        seen = set_union(seen, vars[ch]);
      }
      // X-first
      std::size_t mixed = 0;
      bool others_ok = true;
      for (int ch : n.children) {
        const bool pure = subset_x(vars[ch]) || subset_y(vars[ch]);
        if (!pure) ++mixed;
      }
      if (mixed > 0)
        for (int ch : n.children) {
          const bool pure = subset_x(vars[ch]) || subset_y(vars[ch]);
          if (pure && !subset_x(vars[ch])) others_ok = false;
        }
      if (mixed > 1 || !others_ok) note(rep.x_first, "and-node " + std::to_string(i) + " is not X-first");
      // Static X/D-first; literal children count as contextually defined.
      auto check_xd = [&](bool relax) {
        std::size_t mx = 0;
        bool ok = true;
        for (int ch : n.children) {
          const bool pure = subset_xd(vars[ch]) || subset_y(vars[ch]);
          if (!pure) ++mx;
        }
        if (mx > 0)
          for (int ch : n.children) {
            const bool pure = subset_xd(vars[ch]) || subset_y(vars[ch]);
            const bool lit = c.node(ch).kind == NodeKind::Literal;
            if (pure && !subset_xd(vars[ch]) && !(relax && lit)) ok = false;
          }
        return mx <= 1 && ok;
      };
      if (!check_xd(false)) {
        if (check_xd(true))
          ++rep.xd_flagged;
        else
          note(rep.xd_first, "and-node " + std::to_string(i) + " is not X/D-first");
      }
    } else if (n.kind == NodeKind::Or) {
      for (int ch : n.children)
        if (vars[ch] != vars[i]) {
          note(rep.smooth, "or-node " + std::to_string(i) + " has children over different variables");
          break;
        }
      bool structural = n.decision != 0;
      if (structural) {
        std::vector<int> pinned;
        for (int ch : n.children) {
          auto l = detail::branch_literal(c, ch, n.decision);
          if (!l) {
            structural = false;
            break;
          }
          pinned.push_back(*l);
        }
        if (structural) {
          std::sort(pinned.begin(), pinned.end());
          structural = std::adjacent_find(pinned.begin(), pinned.end()) == pinned.end();
        }
      }
      if (!structural) {
        need_sat = true;
        undecided_or.push_back(i);
      }
    }
  }

  if (need_sat) {
    if (c.size() > opt.max_sat_determinism_nodes) {
      note(rep.deterministic, "or-nodes without decision form in a circuit too large for SAT checks");
    } else {
      for (int i : undecided_or) {
        const auto& kids = c.node(i).children;
        for (std::size_t a = 0; a < kids.size() && rep.deterministic; ++a)
          for (std::size_t b = a + 1; b < kids.size(); ++b) {
            sat::Solver s(std::max(c.num_vars, cnf.num_vars));
            std::map<int, int> enc;
            const int va = detail::tseitin(c, kids[a], s, enc, c.num_vars);
            const int vb = detail::tseitin(c, kids[b], s, enc, c.num_vars);
            ++rep.sat_determinism_checks;
            if (s.solve({va, vb}) == sat::Solver::Result::Sat) {
              note(rep.deterministic, "or-node " + std::to_string(i) + " has overlapping children");
              break;
            }
          }
      }
    }
  }

  const VarSet universe = cnf.variables();
  if (static_cast<int>(universe.size()) <= opt.max_equivalence_vars) {
    if (!is_subset(vars[c.root()], universe)) {
      rep.equivalent = false;
      rep.problems.push_back("circuit mentions variables outside the theory");
    } else if (rep.decomposable && rep.deterministic) {
      // Every model of the theory satisfies the circuit and the counts agree.
      BigNat theory_models = 0;
      bool all_in = true;
      std::vector<char> truth(std::max(c.num_vars, cnf.num_vars) + 1, 0);
      for_each_model(
          cnf,
          [&](const std::vector<int>& m) {
            ++theory_models;
            if (!all_in) return;
            for (int l : m) truth[var_of(l)] = l > 0;
            if (!evaluate_bool(c, truth)) all_in = false;
          },
          opt.max_equivalence_vars);
      rep.equivalent = all_in && count_models(c, universe) == theory_models;
      if (!*rep.equivalent) rep.problems.push_back("circuit and theory have different models");
    } else {
      bool same = true;
      std::vector<char> truth(std::max(c.num_vars, cnf.num_vars) + 1, 0);
      const auto masks = detail::mask_clauses(cnf.clauses, universe);
      const std::size_t n = universe.size();
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << n) && same; ++m) {
        for (std::size_t k = 0; k < n; ++k) truth[universe[k]] = (m >> k) & 1;
        same = detail::satisfies_all(masks, m) == evaluate_bool(c, truth);
      }
      rep.equivalent = same;
      if (!same) rep.problems.push_back("circuit and theory have different models");
    }
  }
  return rep;
}

// Distinct inner-only nodes hanging directly below and-nodes that mention
// an outer variable: the places where the transform is applied.
inline std::size_t count_boundary_nodes(const Circuit& c, const VarSet& outer) {
  const auto& vars = c.vars();
  const auto live = c.reachable();
  auto inner_only = [&](int i) { return set_intersection(vars[i], outer).empty(); };
  std::vector<char> boundary(c.size(), 0);
  for (int i = 0; i < c.size(); ++i) {
    if (!live[i] || c.node(i).kind != NodeKind::And || inner_only(i)) continue;
    for (int ch : c.node(i).children)
      if (inner_only(ch)) boundary[ch] = 1;
  }
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 1));
}

// /\_{i=1..n} X_i <-> Y_i with X_i = i outer and Y_i = n + i inner.
inline LabeledCnf equivalence_theory(int n) {
  LabeledCnf t;
  t.num_vars = 2 * n;
  for (int i = 1; i <= n; ++i) {
    t.clauses.push_back({-i, n + i});
    t.clauses.push_back({i, -(n + i)});
    t.outer_vars.push_back(i);
    t.names[i] = "x" + std::to_string(i);
    t.names[n + i] = "y" + std::to_string(i);
  }
  return t;
}

struct SeparationRow {
  int n = 0;
  std::size_t x_nodes = 0;
  std::size_t x_boundary = 0;
  std::size_t xd_nodes = 0;
  std::size_t xd_boundary = 0;
};

// X-first compilation with all X before all Y and no unit propagation,
// against X/D-first compilation with the interleaved order X1,Y1,...,Xn,Yn.
inline SeparationRow separation_row(int n, const VarSet& defined) {
  const LabeledCnf t = equivalence_theory(n);
  SeparationRow row;
  row.n = n;
  CompileConfig xf;
  xf.mode = CompileMode::XFirst;
  xf.unit_propagation = false;
  for (int v = 1; v <= 2 * n; ++v) xf.order.sequence.push_back(v);
  const auto a = compile(t, xf);
  row.x_nodes = a.stats.nodes;
  row.x_boundary = count_boundary_nodes(a.circuit, t.outer_vars);
  CompileConfig xd;
  xd.mode = CompileMode::XDFirst;
  xd.defined = defined;
  for (int i = 1; i <= n; ++i) {
    xd.order.sequence.push_back(i);
    xd.order.sequence.push_back(n + i);
  }
  const auto b = compile(t, xd);
  row.xd_nodes = b.stats.nodes;
  row.xd_boundary = count_boundary_nodes(b.circuit, t.outer_vars);
  return row;
}

}  // namespace twoamc
