#pragma once

#include <cctype>
#include <chrono>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "twoamc/cnf.hpp"
#include "twoamc/compiler.hpp"
#include "twoamc/definability.hpp"
#include "twoamc/error.hpp"
#include "twoamc/nnf.hpp"
#include "twoamc/semiring.hpp"
#include "twoamc/treedecomp.hpp"

namespace twoamc {

struct ProgramLiteral {
  std::string atom;
  bool positive = true;
  friend auto operator<=>(const ProgramLiteral&, const ProgramLiteral&) = default;
};

struct Rule {
  std::string head;
  std::vector<std::string> pos;
  std::vector<std::string> neg;
  std::size_t line = 0;
};

// Ground program. `atoms` lists every atom in order of first appearance and
// fixes the variable numbering of the completion.
struct Program {
  std::map<std::string, double> prob_facts;
  std::set<std::string> decision_facts;
  std::vector<Rule> rules;
  std::map<ProgramLiteral, double> utilities;
  std::vector<std::string> queries;
  std::map<std::string, bool> evidence;
  std::vector<std::string> map_queries;
  std::vector<std::string> atoms;

  bool is_derived(const std::string& a) const {
    for (const auto& r : rules)
      if (r.head == a) return true;
    return false;
  }
};

enum class TaskKind { Succ, Map, Meu, SuccSm };

inline std::string_view to_token(TaskKind t) {
  switch (t) {
    case TaskKind::Succ: return "succ";
    case TaskKind::Map: return "map";
    case TaskKind::Meu: return "meu";
    case TaskKind::SuccSm: return "smp";
  }
  return "succ";
}

inline std::optional<TaskKind> task_from_token(std::string_view s) {
  if (s == "succ") return TaskKind::Succ;
  if (s == "map") return TaskKind::Map;
  if (s == "meu") return TaskKind::Meu;
  if (s == "smp") return TaskKind::SuccSm;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Statement {
  std::string text;
  std::size_t line;
};

// Splits on '.' terminators; a '.' directly followed by a digit belongs to a
// number. '%' starts a comment.
inline std::vector<Statement> split_statements(std::istream& in) {
  std::vector<Statement> out;
  std::string cur;
  std::size_t cur_line = 0, line = 0;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line;
    if (auto p = raw.find('%'); p != std::string::npos) raw.erase(p);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const char ch = raw[i];
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!cur.empty()) cur += ' ';
        continue;
      }
      if (cur.empty()) cur_line = line;
      if (ch == '.' && !(i + 1 < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i + 1])))) {
        while (!cur.empty() && cur.back() == ' ') cur.pop_back();
        out.push_back({cur, cur_line});
        cur.clear();
        continue;
      }
      cur += ch;
    }
    if (!cur.empty() && cur.back() != ' ') cur += ' ';
  }
  while (!cur.empty() && cur.back() == ' ') cur.pop_back();
  if (!cur.empty()) throw ParseError(cur_line, "statement not terminated by '.'");
  return out;
}

inline std::string strip(std::string s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Splits on commas at parenthesis depth 0.
inline std::vector<std::string> split_top(const std::string& s, std::size_t line) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')' && --depth < 0) throw ParseError(line, "unbalanced parentheses");
    if (ch == ',' && depth == 0) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) throw ParseError(line, "unbalanced parentheses");
  out.push_back(strip(cur));
  return out;
}

// Ground atom: lowercase identifier, optionally with ground arguments.
inline std::string parse_atom(const std::string& raw, std::size_t line) {
  std::string s;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw ParseError(line, "missing atom");
  auto ident_start = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  std::size_t i = 0;
  if (!ident_start(s[0])) {
    if (std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_')
      throw ParseError(line, "non-ground term '" + s + "'");
    throw ParseError(line, "atom must start with a lowercase letter: '" + s + "'");
  }
  while (i < s.size() && ident_char(s[i])) ++i;
  if (i == s.size()) return s;
  if (s[i] != '(' || s.back() != ')') throw ParseError(line, "malformed atom '" + s + "'");
  for (const auto& arg : split_top(s.substr(i + 1, s.size() - i - 2), line)) {
    if (arg.empty()) throw ParseError(line, "empty argument in '" + s + "'");
    if (std::isupper(static_cast<unsigned char>(arg[0])) || arg[0] == '_')
      throw ParseError(line, "non-ground term '" + s + "'");
    if (!std::isdigit(static_cast<unsigned char>(arg[0])) && arg[0] != '-') parse_atom(arg, line);
  }
  return s;
}

inline ProgramLiteral parse_literal(const std::string& raw, std::size_t line) {
  std::string s = strip(raw);
  if (s.rfind("\\+", 0) == 0) return {parse_atom(s.substr(2), line), false};
  if (s.rfind("not ", 0) == 0) return {parse_atom(s.substr(4), line), false};
  return {parse_atom(s, line), true};
}

inline double parse_number(const std::string& raw, std::size_t line) {
  const std::string s = strip(raw);
  std::size_t used = 0;
  double x;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(x)) throw ParseError(line, "expected a number, got '" + s + "'");
  return x;
}

// Arguments of a builtin like query(...) if `s` has that functor.
inline std::optional<std::vector<std::string>> builtin_args(const std::string& s, const char* name,
                                                            std::size_t line) {
  const std::string n = name;
  if (s.rfind(n + "(", 0) != 0 || s.back() != ')') return std::nullopt;
  return split_top(s.substr(n.size() + 1, s.size() - n.size() - 2), line);
}

}  // namespace detail

inline Program parse_program(std::istream& in) {
  Program p;
  std::set<std::string> seen;
  std::map<std::string, std::size_t> role_line;
  std::map<std::string, std::string> role;
  auto touch = [&](const std::string& a) {
    if (seen.insert(a).second) p.atoms.push_back(a);
  };
  auto claim = [&](const std::string& a, const std::string& r, std::size_t line) {
    auto it = role.find(a);
    if (it != role.end() && it->second != r)
      throw ParseError(line, "atom '" + a + "' is both a " + it->second + " and a " + r);
    if (it != role.end() && r != "rule head")
      throw ParseError(line, "atom '" + a + "' declared twice as a " + r);
    role[a] = r;
    role_line[a] = line;
  };

  for (const auto& st : detail::split_statements(in)) {
    const std::string s = detail::strip(st.text);
    const std::size_t line = st.line;
    if (s.empty()) throw ParseError(line, "empty statement");
    if (auto pos = s.find(":-"); pos != std::string::npos) {
      Rule r;
      r.line = line;
      r.head = detail::parse_atom(s.substr(0, pos), line);
      touch(r.head);
      for (const auto& part : detail::split_top(s.substr(pos + 2), line)) {
        const auto lit = detail::parse_literal(part, line);
        touch(lit.atom);
        (lit.positive ? r.pos : r.neg).push_back(lit.atom);
      }
      claim(r.head, "rule head", line);
      p.rules.push_back(std::move(r));
      continue;
    }
    if (auto pos = s.find("::"); pos != std::string::npos) {
      const std::string lhs = detail::strip(s.substr(0, pos));
      const std::string atom = detail::parse_atom(s.substr(pos + 2), line);
      touch(atom);
      if (lhs == "?") {
        claim(atom, "decision fact", line);
        p.decision_facts.insert(atom);
      } else {
        const double pr = detail::parse_number(lhs, line);
        if (pr < 0.0 || pr > 1.0) throw ParseError(line, "probability outside [0,1]");
        claim(atom, "probabilistic fact", line);
        p.prob_facts[atom] = pr;
      }
      continue;
    }
    if (auto a = detail::builtin_args(s, "utility", line)) {
      if (a->size() != 2) throw ParseError(line, "utility/2 expects a literal and a number");
      const auto lit = detail::parse_literal((*a)[0], line);
      touch(lit.atom);
      if (p.utilities.count(lit)) throw ParseError(line, "duplicate utility for '" + (*a)[0] + "'");
      p.utilities[lit] = detail::parse_number((*a)[1], line);
      continue;
    }
    if (auto a = detail::builtin_args(s, "query", line)) {
      if (a->size() != 1) throw ParseError(line, "query/1 expects one atom");
      const auto atom = detail::parse_atom((*a)[0], line);
      touch(atom);
      p.queries.push_back(atom);
      continue;
    }
    if (auto a = detail::builtin_args(s, "evidence", line)) {
      if (a->size() != 2) throw ParseError(line, "evidence/2 expects an atom and true|false");
      const auto atom = detail::parse_atom((*a)[0], line);
      touch(atom);
      const std::string v = detail::strip((*a)[1]);
      if (v != "true" && v != "false") throw ParseError(line, "evidence value must be true or false");
      if (p.evidence.count(atom)) throw ParseError(line, "duplicate evidence on '" + atom + "'");
      p.evidence[atom] = v == "true";
      continue;
    }
    if (auto a = detail::builtin_args(s, "map", line)) {
      if (a->size() != 1) throw ParseError(line, "map/1 expects one atom");
      const auto atom = detail::parse_atom((*a)[0], line);
      touch(atom);
      p.map_queries.push_back(atom);
      continue;
    }
    // Plain fact "h." is a rule with an empty body.
    Rule r;
    r.line = line;
    r.head = detail::parse_atom(s, line);
    touch(r.head);
    claim(r.head, "rule head", line);
    p.rules.push_back(std::move(r));
  }

  // Tightness: the positive dependency graph must be acyclic.
  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> deps;
  for (const auto& r : p.rules)
    for (const auto& b : r.pos) deps[r.head].push_back({b, r.line});
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::function<void(const std::string&)> dfs = [&](const std::string& a) {
    state[a] = 1;
    for (const auto& [b, line] : deps[a]) {
      if (state[b] == 1) throw ParseError(line, "positive cycle through '" + b + "'; the program is not tight");
      if (state[b] == 0) dfs(b);
    }
    state[a] = 2;
  };
  for (const auto& a : p.atoms)
    if (state[a] == 0) dfs(a);
  return p;
}

inline Program parse_program(const std::string& text) {
  std::istringstream is(text);
  return parse_program(is);
}

// ---------------------------------------------------------------------------
// Clark completion

struct Completion {
  LabeledCnf cnf;
  std::map<std::string, int> var;  // atom -> variable
  VarSet aux;                      // Tseitin body variables

  int lit(const ProgramLiteral& l) const { return l.positive ? var.at(l.atom) : -var.at(l.atom); }
};

// h <-> (B1 | ... | Bk) per derived atom, bodies of length > 1 named by an
// auxiliary variable. Atoms that are neither facts nor heads are false.
inline Completion clark_completion(const Program& p) {
  Completion c;
  int n = 0;
  for (const auto& a : p.atoms) {
    c.var[a] = ++n;
    c.cnf.names[n] = a;
  }
  std::map<std::string, std::vector<const Rule*>> by_head;
  for (const auto& r : p.rules) by_head[r.head].push_back(&r);
  auto& cl = c.cnf.clauses;
  for (const auto& a : p.atoms) {
    if (p.prob_facts.count(a) || p.decision_facts.count(a)) continue;
    const int h = c.var[a];
    auto it = by_head.find(a);
    if (it == by_head.end()) {
      cl.push_back({-h});
      continue;
    }
    bool always = false;
    for (const Rule* r : it->second)
      if (r->pos.empty() && r->neg.empty()) always = true;
    if (always) {
      cl.push_back({h});
      continue;
    }
    std::vector<int> terms;
    for (const Rule* r : it->second) {
      std::vector<int> body;
      for (const auto& b : r->pos) body.push_back(c.var[b]);
      for (const auto& b : r->neg) body.push_back(-c.var[b]);
      if (body.size() == 1) {
        terms.push_back(body[0]);
        continue;
      }
      const int aux = ++n;
      c.aux.push_back(aux);
      c.cnf.names[aux] = "body" + std::to_string(aux);
      Clause big{aux};
      for (int l : body) {
        cl.push_back({-aux, l});
        big.push_back(-l);
      }
      cl.push_back(big);
      terms.push_back(aux);
    }
    Clause any{-h};
    for (int t : terms) {
      any.push_back(t);
      cl.push_back({h, -t});
    }
    cl.push_back(any);
  }
  c.cnf.num_vars = n;
  // Drop tautologies and duplicate literals, as the file parser would.
  std::vector<Clause> kept;
  for (auto& cls : cl)
    if (auto norm = normalize_clause(cls)) kept.push_back(std::move(*norm));
  cl = std::move(kept);
  return c;
}

// ---------------------------------------------------------------------------
// Task instances

struct Instance {
  TaskKind task = TaskKind::Succ;
  Completion completion;
  const LabeledCnf& cnf() const { return completion.cnf; }
};

namespace detail {

inline void require_single_query(const Program& p) {
  if (p.queries.size() != 1)
    throw ConfigError("task needs exactly one query/1 atom, found " + std::to_string(p.queries.size()));
}

inline void forbid_decisions(const Program& p, TaskKind t) {
  if (!p.decision_facts.empty())
    throw ConfigError("decision facts are only meaningful for the meu task, not '" + std::string(to_token(t)) + "'");
}

// Probability label of a fact literal, 0 when evidence rules it out.
inline double fact_weight(const Program& p, const std::string& a, bool positive) {
  double w = 1.0;
  if (auto it = p.prob_facts.find(a); it != p.prob_facts.end()) w = positive ? it->second : 1.0 - it->second;
  if (auto e = p.evidence.find(a); e != p.evidence.end() && e->second != positive) w = 0.0;
  return w;
}

}  // namespace detail

// MAP over an explicit query set Q (which may be empty).
inline Instance build_map_instance(const Program& p, const std::vector<std::string>& q) {
  detail::forbid_decisions(p, TaskKind::Map);
  Instance inst;
  inst.task = TaskKind::Map;
  inst.completion = clark_completion(p);
  auto& cnf = inst.completion.cnf;
  cnf.inner_sr = SemiringId::Probability;
  cnf.outer_sr = SemiringId::MapArgmax;
  cnf.transform = TransformId::ProbToMapArgmax;
  for (const auto& a : q) {
    if (!inst.completion.var.count(a)) throw ConfigError("map atom '" + a + "' does not occur in the program");
    cnf.outer_vars.push_back(inst.completion.var.at(a));
  }
  cnf.outer_vars = make_varset(cnf.outer_vars);
  for (const auto& a : p.atoms) {
    const int v = inst.completion.var.at(a);
    for (bool pos : {true, false}) {
      const int l = pos ? v : -v;
      const double w = detail::fact_weight(p, a, pos);
      if (cnf.is_outer(v))
        cnf.outer_labels[l] = MapValue{w, {l}};
      else if (w != 1.0)
        cnf.inner_labels[l] = w;
    }
  }
  return inst;
}

inline Instance build_instance(const Program& p, TaskKind task) {
  Instance inst;
  inst.task = task;
  switch (task) {
    case TaskKind::Succ: {
      detail::require_single_query(p);
      detail::forbid_decisions(p, task);
      inst.completion = clark_completion(p);
      auto& cnf = inst.completion.cnf;
      const int q = inst.completion.var.at(p.queries[0]);
      for (const auto& a : p.atoms) {
        const int v = inst.completion.var.at(a);
        for (bool pos : {true, false}) {
          double w = detail::fact_weight(p, a, pos);
          if (v == q && !pos) w = 0.0;
          if (w != 1.0) cnf.inner_labels[pos ? v : -v] = w;
        }
      }
      return inst;
    }
    case TaskKind::Map:
      if (p.map_queries.empty()) throw ConfigError("map task needs at least one map/1 atom");
      return build_map_instance(p, p.map_queries);
    case TaskKind::Meu: {
      if (p.decision_facts.empty()) throw ConfigError("meu task needs at least one decision fact ?::a");
      if (!p.evidence.empty()) throw ConfigError("evidence is not supported for the meu task");
      inst.completion = clark_completion(p);
      auto& cnf = inst.completion.cnf;
      cnf.inner_sr = SemiringId::ExpectedUtility;
      cnf.outer_sr = SemiringId::MeuArgmax;
      cnf.transform = TransformId::EuProject;
      for (const auto& d : p.decision_facts) cnf.outer_vars.push_back(inst.completion.var.at(d));
      cnf.outer_vars = make_varset(cnf.outer_vars);
      auto util = [&](const std::string& a, bool pos) {
        auto it = p.utilities.find({a, pos});
        return it == p.utilities.end() ? 0.0 : it->second;
      };
      for (const auto& a : p.atoms) {
        const int v = inst.completion.var.at(a);
        for (bool pos : {true, false}) {
          const int l = pos ? v : -v;
          const double u = util(a, pos);
          if (cnf.is_outer(v)) {
            cnf.outer_labels[l] = MeuValue{ExtReal(u), {l}};
          } else if (auto it = p.prob_facts.find(a); it != p.prob_facts.end()) {
            const double pr = pos ? it->second : 1.0 - it->second;
            cnf.inner_labels[l] = EuPair{pr, pr * u};
          } else if (u != 0.0) {
            cnf.inner_labels[l] = EuPair{1.0, u};
          }
        }
      }
      return inst;
    }
    case TaskKind::SuccSm: {
      detail::require_single_query(p);
      detail::forbid_decisions(p, task);
      if (!p.evidence.empty()) throw ConfigError("evidence is not supported for the smp task");
      inst.completion = clark_completion(p);
      auto& cnf = inst.completion.cnf;
      cnf.inner_sr = SemiringId::NatPair;
      cnf.outer_sr = SemiringId::Probability;
      cnf.transform = TransformId::NatPairRatio;
      for (const auto& [a, pr] : p.prob_facts) cnf.outer_vars.push_back(inst.completion.var.at(a));
      cnf.outer_vars = make_varset(cnf.outer_vars);
      for (const auto& [a, pr] : p.prob_facts) {
        const int v = inst.completion.var.at(a);
        cnf.outer_labels[v] = pr;
        cnf.outer_labels[-v] = 1.0 - pr;
      }
      const int q = inst.completion.var.at(p.queries[0]);
      if (cnf.is_outer(q))
        cnf.outer_labels[-q] = 0.0;  // a fact query: worlds without it contribute nothing
      else
        cnf.inner_labels[-q] = NatPair{0, 1};
      return inst;
    }
  }
  throw ConfigError("unknown task");
}

// ---------------------------------------------------------------------------
// Pipeline

struct SolveOptions {
  CompileMode mode = CompileMode::XDFirst;
  std::uint64_t seed = 0;
  int restarts = 8;
  std::size_t cache_budget = std::size_t{256} << 20;
  bool unit_propagation = true;
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct SolveDiagnostics {
  VarSet outer;
  VarSet defined;
  int definability_queries = 0;
  VarSet separator;
  int td_width = 0;
  std::size_t td_bags = 0;
  CompileStats compile;
  std::size_t smooth_nodes = 0;
  std::size_t smooth_edges = 0;
  EvaluationStats evaluation;
  std::vector<StageTime> times;
};

struct SolveResult {
  Value value;
  SolveDiagnostics diag;
  Circuit circuit;  // smoothed
};

namespace detail {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  void lap(std::vector<StageTime>& times, const char* stage) {
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back({stage, std::chrono::duration<double>(t1 - t0).count()});
    t0 = t1;
  }
};

}  // namespace detail

// definability -> constrained decomposition -> compile -> smooth. The
// returned circuit is smooth; the unsmoothed size is in diag.compile.
inline Circuit compile_cnf(const LabeledCnf& cnf, const SolveOptions& opt, SolveDiagnostics& dg) {
  detail::Stopwatch sw;
  cnf.check();
  const VarSet& X = cnf.outer_vars;
  dg.outer = X;
  const auto rep = defined_vars(cnf, X);
  dg.defined = rep.defined;
  dg.definability_queries = rep.query_count;
  sw.lap(dg.times, "definability");

  DecomposeOptions dopt{opt.seed, opt.restarts};
  CompileConfig cfg;
  cfg.mode = opt.mode;
  cfg.cache_budget = opt.cache_budget;
  cfg.unit_propagation = opt.unit_propagation;
  cfg.defined = rep.defined;
  if (opt.mode == CompileMode::Free) {
    const TreeDecomposition td = decompose(primal_graph(cnf), dopt);
    dg.td_width = td.width();
    dg.td_bags = td.size();
    cfg.order = order_from_td(td);
  } else {
    const VarSet d = opt.mode == CompileMode::XDFirst ? rep.defined : VarSet{};
    auto cd = constrain_and_root(cnf, X, d, dopt);
    dg.separator = cd.separator;
    dg.td_width = cd.td.width();
    dg.td_bags = cd.td.size();
    cfg.order = std::move(cd.order);
  }
  sw.lap(dg.times, "decomposition");

  auto compiled = compile(cnf, cfg);
  dg.compile = compiled.stats;
  sw.lap(dg.times, "compile");

  std::optional<SmoothPartition> part;
  if (opt.mode != CompileMode::Free)
    part = SmoothPartition{X, opt.mode == CompileMode::XDFirst ? set_union(X, rep.defined) : X};
  Circuit smoothed = smooth(compiled.circuit, cnf.variables(), part);
  dg.smooth_nodes = smoothed.size();
  dg.smooth_edges = smoothed.num_edges();
  sw.lap(dg.times, "smooth");
  return smoothed;
}

inline SolveResult solve_cnf(const LabeledCnf& cnf, const SolveOptions& opt = {}) {
  SolveResult res;
  auto& dg = res.diag;
  res.circuit = compile_cnf(cnf, opt, dg);
  detail::Stopwatch sw;
  if (opt.mode == CompileMode::Free && !cnf.outer_vars.empty()) {
    const auto pr = verify_circuit(res.circuit, cnf, dg.defined, VerifyOptions{-1, 0});
    if (!pr.x_first && !pr.xd_first)
      throw PreconditionError("circuit compiled in free mode is neither X-first nor X/D-first; use mode x or xd");
  }
  res.value = evaluate_2amc(res.circuit, cnf, &dg.evaluation);
  sw.lap(dg.times, "evaluate");
  return res;
}

inline SolveResult solve(const Program& p, TaskKind task, const SolveOptions& opt = {}) {
  const Instance inst = build_instance(p, task);
  return solve_cnf(inst.cnf(), opt);
}

// Value with literal witnesses printed by atom name.
inline std::string format_named(const Value& v, const LabeledCnf& cnf) {
  auto wit = [&](const LitSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += (s[i] < 0 ? "\\+" : "") + cnf.name(var_of(s[i]));
    }
    return out + "}";
  };
  if (const auto* m = std::get_if<MapValue>(&v)) return format_real(m->score) + " " + wit(m->witness);
  if (const auto* m = std::get_if<MeuValue>(&v)) return format_real(m->score) + " " + wit(m->witness);
  return format_value(v);
}

}  // namespace twoamc
