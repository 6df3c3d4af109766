#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twoamc/cnf.hpp"
#include "twoamc/compiler.hpp"
#include "twoamc/definability.hpp"
#include "twoamc/error.hpp"
#include "twoamc/nnf.hpp"
#include "twoamc/program.hpp"

namespace twoamc::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kCapacityError = 2 };

struct RunConfig {
  std::string input;
  std::string second_input;
  std::string output;
  std::string task = "succ";
  std::string mode = "xd";
  std::uint64_t seed = 0;
  std::size_t cache_mb = 256;
  int max_oracle_vars = kDefaultOracleLimit;
  std::string format = "text";
  std::string stats_path;
  std::string n_range = "2..8";
  bool smooth = false;
  std::vector<int> base;
  bool base_given = false;
};

namespace detail {

// Line-delimited (stage, metric, value) records.
class Records {
 public:
  void add(std::string stage, std::string metric, std::string value) {
    rows_.push_back({std::move(stage), std::move(metric), std::move(value)});
  }
  void add(std::string stage, std::string metric, std::size_t value) {
    add(std::move(stage), std::move(metric), std::to_string(value));
  }
  std::string kv() const {
    std::string out;
    for (const auto& r : rows_) out += r[0] + " " + r[1] + " " + r[2] + "\n";
    return out;
  }
  const std::vector<std::array<std::string, 3>>& rows() const { return rows_; }

 private:
  std::vector<std::array<std::string, 3>> rows_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string named_set(const VarSet& vs, const LabeledCnf& cnf) {
  std::string out = "{";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += cnf.name(vs[i]);
  }
  return out + "}";
}

inline bool looks_like_cnf(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c") continue;
    return tok == "p";
  }
  return false;
}

inline SolveOptions solve_options(const RunConfig& rc) {
  SolveOptions o;
  auto m = compile_mode_from_token(rc.mode);
  if (!m) throw ConfigError("unknown mode '" + rc.mode + "'");
  o.mode = *m;
  o.seed = rc.seed;
  o.cache_budget = rc.cache_mb << 20;
  return o;
}

inline TaskKind task_of(const RunConfig& rc) {
  auto t = task_from_token(rc.task);
  if (!t) throw ConfigError("unknown task '" + rc.task + "'");
  return *t;
}

inline void diagnostics(Records& r, const SolveDiagnostics& d, const LabeledCnf& cnf) {
  r.add("definability", "outer", named_set(d.outer, cnf));
  r.add("definability", "defined", named_set(d.defined, cnf));
  r.add("definability", "queries", static_cast<std::size_t>(d.definability_queries));
  r.add("decomposition", "separator", named_set(d.separator, cnf));
  r.add("decomposition", "separator_size", d.separator.size());
  r.add("decomposition", "width", static_cast<std::size_t>(d.td_width));
  r.add("decomposition", "bags", d.td_bags);
  r.add("compile", "nodes", d.compile.nodes);
  r.add("compile", "edges", d.compile.edges);
  r.add("compile", "cache_hits", d.compile.cache_hits);
  r.add("compile", "cache_misses", d.compile.cache_misses);
  r.add("compile", "decisions", d.compile.decisions);
  r.add("compile", "propagations", d.compile.propagations);
  r.add("smooth", "nodes", d.smooth_nodes);
  r.add("smooth", "edges", d.smooth_edges);
  r.add("evaluate", "boundary_nodes", d.evaluation.boundary_nodes);
}

inline void timings(Records& r, const SolveDiagnostics& d) {
  for (const auto& t : d.times) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", t.seconds);
    r.add(t.stage, "seconds", buf);
  }
}

// Text output: one "stage.metric: value" line per record.
inline std::string text(const Records& r) {
  std::string out;
  for (const auto& row : r.rows()) out += row[0] + "." + row[1] + ": " + row[2] + "\n";
  return out;
}

inline void emit(const RunConfig& rc, const Records& main, const Records& timing, std::ostream& out) {
  if (rc.format == "kv") {
    out << main.kv();
  } else {
    out << text(main) << text(timing);
  }
  if (!rc.stats_path.empty()) {
    std::ofstream st(rc.stats_path);
    if (!st) throw ConfigError("cannot write stats to '" + rc.stats_path + "'");
    st << main.kv() << timing.kv();
  }
}

inline std::pair<int, int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("bad range '" + s + "', expected A..B");
  }
}

inline LabeledCnf load_cnf(const std::string& path) { return parse_cnf(read_file(path)); }

// ---- subcommands ----

inline int cmd_solve(const RunConfig& rc, std::ostream& out) {
  const Program p = parse_program(read_file(rc.input));
  const TaskKind task = task_of(rc);
  const Instance inst = build_instance(p, task);
  const SolveResult res = solve_cnf(inst.cnf(), solve_options(rc));
  Records r, t;
  r.add("input", "task", std::string(to_token(task)));
  r.add("input", "mode", rc.mode);
  r.add("input", "variables", static_cast<std::size_t>(inst.cnf().num_vars));
  r.add("input", "clauses", inst.cnf().clauses.size());
  diagnostics(r, res.diag, inst.cnf());
  r.add("result", "value", format_named(res.value, inst.cnf()));
  timings(t, res.diag);
  emit(rc, r, t, out);
  return kOk;
}

inline int cmd_compile(const RunConfig& rc, std::ostream& out) {
  const LabeledCnf cnf = load_cnf(rc.input);
  SolveDiagnostics d;
  SolveOptions o = solve_options(rc);
  const Circuit smoothed = compile_cnf(cnf, o, d);
  std::string text_out;
  if (rc.smooth) {
    text_out = emit_nnf(smoothed);
  } else {
    // Recompile without smoothing for the size-faithful circuit.
    CompileConfig cfg;
    cfg.mode = o.mode;
    cfg.cache_budget = o.cache_budget;
    cfg.defined = d.defined;
    DecomposeOptions dopt{o.seed, o.restarts};
    if (o.mode == CompileMode::Free)
      cfg.order = order_from_td(decompose(primal_graph(cnf), dopt));
    else
      cfg.order = constrain_and_root(cnf, cnf.outer_vars, o.mode == CompileMode::XDFirst ? d.defined : VarSet{}, dopt)
                      .order;
    text_out = emit_nnf(compile(cnf, cfg).circuit);
  }
  if (rc.output.empty()) {
    out << text_out;
  } else {
    std::ofstream f(rc.output);
    if (!f) throw ConfigError("cannot write '" + rc.output + "'");
    f << text_out;
    Records r, t;
    diagnostics(r, d, cnf);
    timings(t, d);
    emit(rc, r, t, out);
  }
  return kOk;
}

inline void check_matching(const Circuit& c, const LabeledCnf& cnf) {
  if (c.num_vars != cnf.num_vars)
    throw ConfigError("circuit has " + std::to_string(c.num_vars) + " variables but the CNF has " +
                      std::to_string(cnf.num_vars));
}

inline int cmd_eval(const RunConfig& rc, std::ostream& out) {
  const Circuit c = parse_nnf(read_file(rc.input));
  const LabeledCnf cnf = load_cnf(rc.second_input);
  check_matching(c, cnf);
  const auto d = defined_vars(cnf, cnf.outer_vars).defined;
  const auto rep = verify_circuit(c, cnf, d, VerifyOptions{-1});
  if (!rep.decomposable || !rep.deterministic)
    throw PreconditionError("circuit is not a d-DNNF; refusing to evaluate");
  if (!cnf.outer_vars.empty() && !rep.x_first && !rep.xd_first)
    throw PreconditionError("circuit is neither X-first nor X/D-first for the CNF's outer variables");
  const Circuit s = smooth(c, cnf.variables(), SmoothPartition{cnf.outer_vars, set_union(cnf.outer_vars, d)});
  EvaluationStats es;
  const Value v = evaluate_2amc(s, cnf, &es);
  Records r, t;
  r.add("evaluate", "boundary_nodes", es.boundary_nodes);
  r.add("result", "value", format_named(v, cnf));
  emit(rc, r, t, out);
  return kOk;
}

inline int cmd_verify(const RunConfig& rc, std::ostream& out) {
  const Circuit c = parse_nnf(read_file(rc.input));
  const LabeledCnf cnf = load_cnf(rc.second_input);
  check_matching(c, cnf);
  const auto d = defined_vars(cnf, cnf.outer_vars).defined;
  const auto rep = verify_circuit(c, cnf, d);
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  Records r, t;
  r.add("verify", "decomposable", b(rep.decomposable));
  r.add("verify", "deterministic", b(rep.deterministic));
  r.add("verify", "smooth", b(rep.smooth));
  r.add("verify", "x_first", b(rep.x_first));
  r.add("verify", "xd_first", b(rep.xd_first));
  r.add("verify", "xd_flagged", rep.xd_flagged);
  r.add("verify", "equivalent", rep.equivalent ? b(*rep.equivalent) : "unchecked");
  for (const auto& p : rep.problems) r.add("verify", "problem", "\"" + p + "\"");
  emit(rc, r, t, out);
  return kOk;
}

inline int cmd_defined(const RunConfig& rc, std::ostream& out) {
  const LabeledCnf cnf = load_cnf(rc.input);
  VarSet base = rc.base_given ? make_varset(rc.base) : cnf.outer_vars;
  for (int v : base)
    if (v < 1 || v > cnf.num_vars) throw ConfigError("base variable " + std::to_string(v) + " out of range");
  const auto rep = defined_vars(cnf, base);
  Records r, t;
  r.add("definability", "base", named_set(rep.base, cnf));
  r.add("definability", "defined", named_set(rep.defined, cnf));
  r.add("definability", "queries", static_cast<std::size_t>(rep.query_count));
  emit(rc, r, t, out);
  return kOk;
}

inline int cmd_oracle(const RunConfig& rc, std::ostream& out) {
  const std::string text = read_file(rc.input);
  Records r, t;
  if (looks_like_cnf(text)) {
    const LabeledCnf cnf = parse_cnf(text);
    r.add("oracle", "variables", static_cast<std::size_t>(cnf.variables().size()));
    r.add("result", "value", format_named(brute_force_2amc(cnf, rc.max_oracle_vars), cnf));
  } else {
    const TaskKind task = task_of(rc);
    const Instance inst = build_instance(parse_program(text), task);
    r.add("input", "task", std::string(to_token(task)));
    r.add("oracle", "variables", static_cast<std::size_t>(inst.cnf().variables().size()));
    r.add("result", "value", format_named(brute_force_2amc(inst.cnf(), rc.max_oracle_vars), inst.cnf()));
  }
  emit(rc, r, t, out);
  return kOk;
}

inline int cmd_separation(const RunConfig& rc, std::ostream& out) {
  const auto [lo, hi] = parse_range(rc.n_range);
  if (lo < 1 || hi < lo || hi > 20) throw ConfigError("separation range must satisfy 1 <= A <= B <= 20");
  Records r, t;
  if (rc.format != "kv") out << "n\tx_nodes\tx_boundary\txd_nodes\txd_nodes_per_n\n";
  for (int n = lo; n <= hi; ++n) {
    const LabeledCnf theory = equivalence_theory(n);
    const auto d = defined_vars(theory, theory.outer_vars).defined;
    const auto row = separation_row(n, d);
    const std::string k = "n" + std::to_string(n);
    r.add("separation", k + ".x_nodes", row.x_nodes);
    r.add("separation", k + ".x_boundary", row.x_boundary);
    r.add("separation", k + ".xd_nodes", row.xd_nodes);
    if (rc.format != "kv") {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(row.xd_nodes) / n);
      out << n << '\t' << row.x_nodes << '\t' << row.x_boundary << '\t' << row.xd_nodes << '\t' << buf << '\n';
    }
  }
  if (rc.format == "kv") out << r.kv();
  if (!rc.stats_path.empty()) {
    std::ofstream st(rc.stats_path);
    st << r.kv();
  }
  return kOk;
}

}  // namespace detail

// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"twoamc: second-level algebraic model counting"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--mode", rc.mode, "compilation mode")->check(CLI::IsMember({"free", "x", "xd"}));
    sub->add_option("--seed", rc.seed, "seed for decomposition tie-breaking");
    sub->add_option("--cache-mb", rc.cache_mb, "compilation memory budget in MiB");
    sub->add_option("--format", rc.format, "output format")->check(CLI::IsMember({"text", "kv"}));
    sub->add_option("--stats", rc.stats_path, "write key-value records with timings to PATH");
  };
  auto task_opt = [&](CLI::App* sub) {
    sub->add_option("--task", rc.task, "task")->check(CLI::IsMember({"succ", "map", "meu", "smp"}));
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve a task on a ground program");
  solve_cmd->add_option("program", rc.input)->required();
  task_opt(solve_cmd);
  common(solve_cmd);

  auto* compile_cmd = app.add_subcommand("compile", "compile a labeled CNF to NNF");
  compile_cmd->add_option("cnf", rc.input)->required();
  compile_cmd->add_option("-o,--output", rc.output, "NNF output file (stdout if absent)");
  compile_cmd->add_flag("--smooth", rc.smooth, "emit the smoothed circuit");
  common(compile_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate an NNF against a labeled CNF");
  eval_cmd->add_option("nnf", rc.input)->required();
  eval_cmd->add_option("cnf", rc.second_input)->required();
  common(eval_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "check circuit properties against a labeled CNF");
  verify_cmd->add_option("nnf", rc.input)->required();
  verify_cmd->add_option("cnf", rc.second_input)->required();
  common(verify_cmd);

  auto* defined_cmd = app.add_subcommand("defined", "variables defined by the outer variables");
  defined_cmd->add_option("cnf", rc.input)->required();
  defined_cmd->add_option("--base", rc.base, "base variables (default: outer variables)");
  common(defined_cmd);

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force value of a CNF or program");
  oracle_cmd->add_option("input", rc.input)->required();
  oracle_cmd->add_option("--max-oracle-vars", rc.max_oracle_vars, "enumeration guard");
  task_opt(oracle_cmd);
  common(oracle_cmd);

  auto* sep_cmd = app.add_subcommand("separation", "X-first vs X/D-first sizes on the equivalence theory");
  sep_cmd->add_option("--n", rc.n_range, "range A..B");
  common(sep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kOk : kInputError;
  }
  rc.base_given = defined_cmd->count("--base") > 0;

  try {
    if (*solve_cmd) return detail::cmd_solve(rc, out);
    if (*compile_cmd) return detail::cmd_compile(rc, out);
    if (*eval_cmd) return detail::cmd_eval(rc, out);
    if (*verify_cmd) return detail::cmd_verify(rc, out);
    if (*defined_cmd) return detail::cmd_defined(rc, out);
    if (*oracle_cmd) return detail::cmd_oracle(rc, out);
    if (*sep_cmd) return detail::cmd_separation(rc, out);
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kCapacityError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace twoamc::cli
