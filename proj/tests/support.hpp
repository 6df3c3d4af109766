#pragma once

// Random instance generators and independent oracles shared by the unit
// tests and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include "twoamc/twoamc.hpp"

namespace twoamc::testing {

inline std::string programs_dir() { return TWOAMC_PROGRAMS_DIR; }

inline std::string read_program(const std::string& name) {
  std::ifstream in(programs_dir() + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// L_ex with its completion; atoms a, b, c, d get variables 1..4.
inline constexpr const char* kLex = "0.4::a. 0.6::b. c :- a. d :- b. query(c).";
inline constexpr const char* kLeu = "?::a. 0.6::b. c :- a. d :- b. utility(c, 40). utility(\\+d, 20).";
inline constexpr const char* kLsm = "0.4::a. 0.6::b. c :- a. d :- b. e :- \\+f. f :- \\+e. query(e).";

inline LabeledCnf random_cnf(std::mt19937_64& rng, int max_vars, int max_clauses, int max_len = 3) {
  std::uniform_int_distribution<int> nv(1, max_vars);
  LabeledCnf t;
  t.num_vars = nv(rng);
  const int m = std::uniform_int_distribution<int>(0, max_clauses)(rng);
  std::uniform_int_distribution<int> var(1, t.num_vars), len(1, max_len), coin(0, 1);
  for (int i = 0; i < m; ++i) {
    Clause c;
    const int k = len(rng);
    for (int j = 0; j < k; ++j) c.push_back(coin(rng) ? var(rng) : -var(rng));
    if (auto n = normalize_clause(c)) t.clauses.push_back(*n);
  }
  return t;
}

inline VarSet random_subset(std::mt19937_64& rng, const VarSet& from, double p) {
  std::bernoulli_distribution pick(p);
  VarSet out;
  for (int v : from)
    if (pick(rng)) out.push_back(v);
  return out;
}

// Brute-force D(T, X): y is defined iff no assignment of X admits models
// with both values of y.
inline VarSet brute_defined(const LabeledCnf& t, const VarSet& base) {
  const auto models = enumerate_models(t);
  const VarSet vars = t.variables();
  VarSet out;
  for (int y : vars) {
    if (contains(base, y)) continue;
    std::map<std::vector<int>, int> seen;  // projection on base -> bitmask of y values
    for (const auto& m : models) {
      std::vector<int> proj;
      int yv = 0;
      for (int l : m) {
        if (contains(base, var_of(l))) proj.push_back(l);
        if (var_of(l) == y) yv = l > 0 ? 1 : 2;
      }
      seen[proj] |= yv;
    }
    bool defined = true;
    for (const auto& [k, mask] : seen)
      if (mask == 3) defined = false;
    if (defined) out.push_back(y);
  }
  return out;
}

enum class Family { Map, Meu, SuccSm, Succ };

// Random ground tight program for a task family. Rules only use atoms
// introduced earlier, so the positive dependency graph is acyclic; the
// SuccSm family also gets even negative loops (several models per world).
inline std::string random_program_text(std::mt19937_64& rng, Family fam) {
  auto uni = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  auto prob = [&] { return std::uniform_int_distribution<int>(1, 19)(rng) * 0.05; };
  std::ostringstream os;
  std::vector<std::string> atoms;
  std::vector<std::string> facts, decisions, derived;
  const int nf = uni(1, 4);
  for (int i = 0; i < nf; ++i) {
    const std::string a = "f" + std::to_string(i);
    os << prob() << "::" << a << ".\n";
    facts.push_back(a);
    atoms.push_back(a);
  }
  if (fam == Family::Meu) {
    const int nd = uni(1, 3);
    for (int i = 0; i < nd; ++i) {
      const std::string a = "d" + std::to_string(i);
      os << "?::" << a << ".\n";
      decisions.push_back(a);
      atoms.push_back(a);
    }
  }
  const int nh = uni(1, 4);
  for (int i = 0; i < nh; ++i) {
    const std::string h = "h" + std::to_string(i);
    const int nrules = uni(1, 2);
    for (int r = 0; r < nrules; ++r) {
      const int blen = uni(1, 2);
      os << h << " :- ";
      for (int j = 0; j < blen; ++j) {
        if (j) os << ", ";
        const auto& b = atoms[uni(0, static_cast<int>(atoms.size()) - 1)];
        if (uni(0, 3) == 0) os << "\\+";
        os << b;
      }
      os << ".\n";
    }
    derived.push_back(h);
    atoms.push_back(h);
  }
  if (fam == Family::SuccSm) {
    const int loops = uni(0, 2);
    for (int i = 0; i < loops; ++i) {
      const std::string e = "e" + std::to_string(i), f = "g" + std::to_string(i);
      const auto& ctx = atoms[uni(0, static_cast<int>(atoms.size()) - 1)];
      if (uni(0, 1))
        os << e << " :- \\+" << f << ".\n" << f << " :- \\+" << e << ".\n";
      else
        os << e << " :- \\+" << f << ", " << ctx << ".\n" << f << " :- \\+" << e << ".\n";
      derived.push_back(e);
      derived.push_back(f);
      atoms.push_back(e);
      atoms.push_back(f);
    }
  }
  switch (fam) {
    case Family::Map: {
      std::vector<std::string> q;
      for (const auto& a : atoms)
        if (uni(0, 2) == 0) q.push_back(a);
      if (q.empty()) q.push_back(atoms[uni(0, static_cast<int>(atoms.size()) - 1)]);
      for (const auto& a : q) os << "map(" << a << ").\n";
      if (uni(0, 2) == 0) {
        const auto& e = atoms[uni(0, static_cast<int>(atoms.size()) - 1)];
        os << "evidence(" << e << ", " << (uni(0, 1) ? "true" : "false") << ").\n";
      }
      break;
    }
    case Family::Meu: {
      for (const auto& a : atoms)
        for (const char* sign : {"", "\\+"})
          if (uni(0, 3) == 0) os << "utility(" << sign << a << ", " << uni(-50, 50) << ").\n";
      break;
    }
    case Family::SuccSm:
    case Family::Succ: {
      const auto& pool = derived.empty() ? atoms : derived;
      os << "query(" << pool[uni(0, static_cast<int>(pool.size()) - 1)] << ").\n";
      break;
    }
  }
  return os.str();
}

inline TaskKind task_of(Family f) {
  switch (f) {
    case Family::Map: return TaskKind::Map;
    case Family::Meu: return TaskKind::Meu;
    case Family::SuccSm: return TaskKind::SuccSm;
    case Family::Succ: return TaskKind::Succ;
  }
  return TaskKind::Succ;
}

// Random instance whose completion has <= max_vars variables and
// <= max_clauses clauses.
inline Instance random_instance(std::mt19937_64& rng, Family fam, int max_vars = 14, int max_clauses = 40) {
  for (;;) {
    const Program p = parse_program(random_program_text(rng, fam));
    Instance inst = build_instance(p, task_of(fam));
    if (inst.cnf().num_vars <= max_vars && static_cast<int>(inst.cnf().clauses.size()) <= max_clauses) return inst;
  }
}

// 2AMC contribution of one total outer assignment: outer labels times t of
// the inner sum over models of the conditioned theory.
inline Value value_of_outer(const LabeledCnf& inst, const std::vector<int>& outer_lits) {
  Value w = one(inst.outer_sr);
  for (int l : outer_lits) w = mul(inst.outer_sr, w, inst.outer_label(l));
  const LabeledCnf residual = condition(inst, PartialAssignment(outer_lits));
  Value inner = zero(inst.inner_sr);
  for_each_model(residual, [&](const std::vector<int>& m) {
    Value p = one(inst.inner_sr);
    for (int l : m) p = mul(inst.inner_sr, p, inst.inner_label(l));
    inner = add(inst.inner_sr, inner, p);
  });
  return mul(inst.outer_sr, w, transform(inst.transform, inner, inst.outer_sr));
}

inline double score_of(const Value& v) {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* e = std::get_if<ExtReal>(&v)) return e->as_double();
  if (auto* m = std::get_if<MapValue>(&v)) return m->score;
  if (auto* m = std::get_if<MeuValue>(&v)) return m->score.as_double();
  return 0.0;
}

inline const LitSet* witness_of(const Value& v) {
  if (auto* m = std::get_if<MapValue>(&v)) return &m->witness;
  if (auto* m = std::get_if<MeuValue>(&v)) return &m->witness;
  return nullptr;
}

inline bool scores_agree(const Value& a, const Value& b, double rel = 1e-6) {
  const double x = score_of(a), y = score_of(b);
  if (std::isinf(x) || std::isinf(y)) return x == y;
  return approx_equal(x, y, rel, 1e-9);
}

// Compiles in `mode` with the full pipeline and evaluates.
inline SolveResult pipeline(const LabeledCnf& cnf, CompileMode mode, std::uint64_t seed = 0) {
  SolveOptions o;
  o.mode = mode;
  o.seed = seed;
  return solve_cnf(cnf, o);
}

// Hand-built circuits for the L_ex completion (a=1, b=2, c=3, d=4).
// Left: decides a, then b, then the defined atoms; {a,b}-first.
inline Circuit lex_left_circuit() {
  Circuit k;
  k.num_vars = 4;
  auto lit = [&](int l) { return k.make_literal(l); };
  auto bd = [&](int cl) {
    return k.make_or(2, {k.make_and({lit(2), lit(cl), lit(4)}), k.make_and({lit(-2), lit(cl), lit(-4)})});
  };
  k.set_root(k.make_or(1, {k.make_and({lit(1), bd(3)}), k.make_and({lit(-1), bd(-3)})}));
  return k;
}

// Right: two independent components (a <-> c) and (b <-> d) under one and-node.
inline Circuit lex_right_circuit() {
  Circuit k;
  k.num_vars = 4;
  auto lit = [&](int l) { return k.make_literal(l); };
  const int ac = k.make_or(1, {k.make_and({lit(1), lit(3)}), k.make_and({lit(-1), lit(-3)})});
  const int bd = k.make_or(2, {k.make_and({lit(2), lit(4)}), k.make_and({lit(-2), lit(-4)})});
  k.set_root(k.make_and({ac, bd}));
  return k;
}

}  // namespace twoamc::testing
