#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "twoamc/error.hpp"
#include "twoamc/graph.hpp"
#include "twoamc/semiring.hpp"

namespace twoamc {

using Clause = std::vector<int>;

inline int var_of(int lit) { return std::abs(lit); }

// Sorts literals, merges duplicates; returns nullopt for a tautology.
inline std::optional<Clause> normalize_clause(Clause c) {
  std::sort(c.begin(), c.end(), literal_less);
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] == -c[i - 1]) return std::nullopt;
  return c;
}

// A consistent set of literals.
class PartialAssignment {
 public:
  PartialAssignment() = default;

  explicit PartialAssignment(std::vector<int> lits) : lits_(make_litset(std::move(lits))) {
    for (std::size_t i = 0; i < lits_.size(); ++i) {
      if (lits_[i] == 0) throw PreconditionError("literal 0 in assignment");
      if (i > 0 && var_of(lits_[i]) == var_of(lits_[i - 1]))
        throw PreconditionError("assignment contains both polarities of variable " + std::to_string(var_of(lits_[i])));
    }
  }

  const std::vector<int>& literals() const { return lits_; }
  bool empty() const { return lits_.empty(); }

  std::optional<bool> value(int var) const {
    auto it = std::lower_bound(lits_.begin(), lits_.end(), -var, literal_less);
    if (it != lits_.end() && var_of(*it) == var) return *it > 0;
    return std::nullopt;
  }

  bool satisfies(int lit) const {
    auto v = value(var_of(lit));
    return v && *v == (lit > 0);
  }

  bool falsifies(int lit) const {
    auto v = value(var_of(lit));
    return v && *v != (lit > 0);
  }

  VarSet variables() const {
    VarSet out;
    for (int l : lits_) out.push_back(var_of(l));
    return out;
  }

 private:
  std::vector<int> lits_;
};

// CNF over variables 1..num_vars with an inner/outer partition and per-literal
// labels for each side. Variables listed in `eliminated` were removed by
// conditioning and no longer belong to the theory.
struct LabeledCnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
  VarSet outer_vars;
  VarSet eliminated;
  SemiringId inner_sr = SemiringId::Probability;
  SemiringId outer_sr = SemiringId::Probability;
  TransformId transform = TransformId::Identity;
  std::map<int, Value> inner_labels;
  std::map<int, Value> outer_labels;
  std::map<int, std::string> names;

  bool is_outer(int var) const { return contains(outer_vars, var); }

  VarSet variables() const {
    VarSet all;
    all.reserve(num_vars);
    for (int v = 1; v <= num_vars; ++v) all.push_back(v);
    return eliminated.empty() ? all : set_difference(all, eliminated);
  }

  VarSet inner_vars() const { return set_difference(variables(), outer_vars); }

  Value inner_label(int lit) const {
    auto it = inner_labels.find(lit);
    return it != inner_labels.end() ? it->second : one(inner_sr);
  }

  Value outer_label(int lit) const {
    auto it = outer_labels.find(lit);
    return it != outer_labels.end() ? it->second : one(outer_sr);
  }

  // Label of a literal on whichever side its variable lives.
  Value label(int lit) const { return is_outer(var_of(lit)) ? outer_label(lit) : inner_label(lit); }

  std::string name(int var) const {
    auto it = names.find(var);
    return it != names.end() ? it->second : std::to_string(var);
  }

  std::string literal_name(int lit) const { return (lit < 0 ? "-" : "") + name(var_of(lit)); }

  // Throws PreconditionError when an invariant of the data model is broken.
  void check() const {
    if (num_vars < 0) throw PreconditionError("negative variable count");
    auto in_range = [&](int v) { return v >= 1 && v <= num_vars && !contains(eliminated, v); };
    for (const auto& c : clauses)
      for (int l : c)
        if (l == 0 || !in_range(var_of(l)))
          throw PreconditionError("clause literal " + std::to_string(l) + " out of range");
    for (int v : outer_vars)
      if (!in_range(v)) throw PreconditionError("outer variable " + std::to_string(v) + " out of range");
    for (const auto& [lit, val] : inner_labels) {
      if (!in_range(var_of(lit)) || is_outer(var_of(lit)))
        throw PreconditionError("inner label on literal " + std::to_string(lit) + " which is not an inner literal");
      validate(inner_sr, val);
    }
    for (const auto& [lit, val] : outer_labels) {
      if (!in_range(var_of(lit)) || !is_outer(var_of(lit)))
        throw PreconditionError("outer label on literal " + std::to_string(lit) + " which is not an outer literal");
      validate(outer_sr, val);
    }
    if (!transform_accepts(transform, inner_sr, outer_sr))
      throw PreconditionError("transform '" + std::string(to_token(transform)) + "' does not map '" +
                              std::string(to_token(inner_sr)) + "' to '" + std::string(to_token(outer_sr)) + "'");
  }
};

// ---------------------------------------------------------------------------
// Labeled DIMACS I/O

namespace detail {

inline double parse_real(const std::string& tok, std::size_t line) {
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    double d = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return d;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a real number, got '" + tok + "'");
  }
}

inline long long parse_int(const std::string& tok, std::size_t line) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected an integer, got '" + tok + "'");
  }
}

inline BigNat parse_nat(const std::string& tok, std::size_t line) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    throw ParseError(line, "expected a natural number, got '" + tok + "'");
  return BigNat(tok);
}

// Builds a label value from its numeric fields. Argmax labels carry their own
// literal as witness.
inline Value label_from_fields(SemiringId sr, int lit, const std::vector<std::string>& f, std::size_t line) {
  switch (sr) {
    case SemiringId::Probability:
    case SemiringId::MaxTimes: return parse_real(f[0], line);
    case SemiringId::MaxPlus: {
      double d = parse_real(f[0], line);
      return std::isinf(d) && d < 0 ? ExtReal::neg_inf() : ExtReal(d);
    }
    case SemiringId::ExpectedUtility: return EuPair{parse_real(f[0], line), parse_real(f[1], line)};
    case SemiringId::NatPair: return NatPair{parse_nat(f[0], line), parse_nat(f[1], line)};
    case SemiringId::MapArgmax: return MapValue{parse_real(f[0], line), {lit}};
    case SemiringId::MeuArgmax: {
      double d = parse_real(f[0], line);
      return MeuValue{std::isinf(d) && d < 0 ? ExtReal::neg_inf() : ExtReal(d), {lit}};
    }
  }
  throw ParseError(line, "unknown semiring");
}

inline std::string label_fields(const Value& v) {
  struct Fmt {
    std::string operator()(double x) const { return num(x); }
    std::string operator()(ExtReal x) const { return x.is_neg_inf() ? "-inf" : num(x.value()); }
    std::string operator()(const EuPair& e) const { return num(e.p) + " " + num(e.eu); }
    std::string operator()(const NatPair& n) const { return n.n1.str() + " " + n.n2.str(); }
    std::string operator()(const MapValue& m) const { return num(m.score); }
    std::string operator()(const MeuValue& m) const { return (*this)(m.score); }
    static std::string num(double x) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return buf;
    }
  };
  return std::visit(Fmt{}, v);
}

}  // namespace detail

// Parses the labeled DIMACS format:
//   p cnf <nvars> <nclauses>
//   c s <inner_sr> <outer_sr> <transform>
//   c o <v1> ... <vk> 0
//   c wi <lit> <f1> [<f2>] 0      (inner label)
//   c wo <lit> <f1> [<f2>] 0      (outer label)
//   c v <var> <name>              (symbol table)
//   c x <v1> ... <vk> 0           (variables eliminated by conditioning)
// Other comment lines are ignored. Tautological clauses are dropped.
inline LabeledCnf parse_cnf(std::istream& in) {
  LabeledCnf cnf;
  bool have_header = false;
  bool have_sr = false;
  bool have_labels = false;
  long long declared_clauses = 0;
  long long read_clauses = 0;
  Clause pending;
  std::size_t pending_line = 0;
  struct LabelLine {
    bool inner;
    int lit;
    std::size_t line;
  };
  std::vector<LabelLine> label_lines;

  auto check_lit = [&](long long l, std::size_t line) {
    if (l == 0 || std::llabs(l) > cnf.num_vars)
      throw ParseError(line, "literal " + std::to_string(l) + " out of range 1.." + std::to_string(cnf.num_vars));
    return static_cast<int>(l);
  };

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "c") {
      if (tok.size() < 2) continue;
      const std::string& kind = tok[1];
      if (kind == "s") {
        if (tok.size() != 5) throw ParseError(lineno, "semiring header needs <inner> <outer> <transform>");
        if (have_sr) throw ParseError(lineno, "duplicate semiring header");
        if (have_labels) throw ParseError(lineno, "semiring header after labels");
        auto in_sr = semiring_from_token(tok[2]);
        auto out_sr = semiring_from_token(tok[3]);
        auto tr = transform_from_token(tok[4]);
        if (!in_sr || !out_sr || !tr) throw ParseError(lineno, "unknown semiring or transform token");
        cnf.inner_sr = *in_sr;
        cnf.outer_sr = *out_sr;
        cnf.transform = *tr;
        if (!transform_accepts(cnf.transform, cnf.inner_sr, cnf.outer_sr))
          throw ParseError(lineno, "transform '" + tok[4] + "' does not map '" + tok[2] + "' to '" + tok[3] + "'");
        have_sr = true;
      } else if (kind == "o" || kind == "x") {
        if (!have_header) throw ParseError(lineno, "'c " + kind + "' before problem line");
        if (tok.back() != "0") throw ParseError(lineno, "variable list must end with 0");
        for (std::size_t i = 2; i + 1 < tok.size(); ++i) {
          long long v = detail::parse_int(tok[i], lineno);
          if (v <= 0 || v > cnf.num_vars) throw ParseError(lineno, "variable " + tok[i] + " out of range");
          (kind == "o" ? cnf.outer_vars : cnf.eliminated).push_back(static_cast<int>(v));
        }
      } else if (kind == "wi" || kind == "wo") {
        if (!have_header) throw ParseError(lineno, "label before problem line");
        const bool inner = kind == "wi";
        const SemiringId sr = inner ? cnf.inner_sr : cnf.outer_sr;
        const int arity = label_arity(sr);
        if (tok.size() < 4 || tok.back() != "0") throw ParseError(lineno, "label line must end with 0");
        const int lit = check_lit(detail::parse_int(tok[2], lineno), lineno);
        std::vector<std::string> fields(tok.begin() + 3, tok.end() - 1);
        if (static_cast<int>(fields.size()) != arity)
          throw ParseError(lineno, "semiring '" + std::string(to_token(sr)) + "' labels take " +
                                       std::to_string(arity) + " field(s), got " + std::to_string(fields.size()));
        auto& labels = inner ? cnf.inner_labels : cnf.outer_labels;
        if (labels.count(lit)) throw ParseError(lineno, "duplicate label for literal " + std::to_string(lit));
        Value v = detail::label_from_fields(sr, lit, fields, lineno);
        try {
          validate(sr, v);
        } catch (const InvalidValue& e) {
          throw ParseError(lineno, e.what());
        }
        labels.emplace(lit, std::move(v));
        label_lines.push_back({inner, lit, lineno});
        have_labels = true;
      } else if (kind == "v") {
        if (!have_header) throw ParseError(lineno, "symbol before problem line");
        if (tok.size() != 4) throw ParseError(lineno, "symbol line needs <var> <name>");
        long long v = detail::parse_int(tok[2], lineno);
        if (v <= 0 || v > cnf.num_vars) throw ParseError(lineno, "variable " + tok[2] + " out of range");
        cnf.names[static_cast<int>(v)] = tok[3];
      }
      continue;
    }

    if (tok[0] == "p") {
      if (have_header) throw ParseError(lineno, "duplicate problem line");
      if (tok.size() != 4 || tok[1] != "cnf") throw ParseError(lineno, "malformed header, expected 'p cnf <vars> <clauses>'");
      long long nv = detail::parse_int(tok[2], lineno);
      declared_clauses = detail::parse_int(tok[3], lineno);
      if (nv < 0 || declared_clauses < 0) throw ParseError(lineno, "malformed header, negative count");
      cnf.num_vars = static_cast<int>(nv);
      have_header = true;
      continue;
    }

    if (!have_header) throw ParseError(lineno, "clause before problem line");
    for (const auto& t : tok) {
      long long l = detail::parse_int(t, lineno);
      if (pending.empty()) pending_line = lineno;
      if (l == 0) {
        ++read_clauses;
        if (auto c = normalize_clause(std::move(pending))) cnf.clauses.push_back(std::move(*c));
        pending.clear();
      } else {
        pending.push_back(check_lit(l, lineno));
      }
    }
  }
  if (!have_header) throw ParseError(lineno, "missing problem line");
  if (!pending.empty()) throw ParseError(pending_line, "clause not terminated by 0");
  if (read_clauses != declared_clauses)
    throw ParseError(lineno, "header declares " + std::to_string(declared_clauses) + " clauses, found " +
                                 std::to_string(read_clauses));

  cnf.outer_vars = make_varset(std::move(cnf.outer_vars));
  cnf.eliminated = make_varset(std::move(cnf.eliminated));
  for (const auto& ll : label_lines) {
    const bool outer = cnf.is_outer(var_of(ll.lit));
    if (ll.inner && outer) throw ParseError(ll.line, "inner label on outer variable " + std::to_string(var_of(ll.lit)));
    if (!ll.inner && !outer) throw ParseError(ll.line, "outer label on inner variable " + std::to_string(var_of(ll.lit)));
  }
  try {
    cnf.check();
  } catch (const PreconditionError& e) {
    throw ParseError(lineno, e.what());
  }
  return cnf;
}

inline LabeledCnf parse_cnf(const std::string& text) {
  std::istringstream in(text);
  return parse_cnf(in);
}

inline std::string emit_cnf(const LabeledCnf& cnf) {
  std::ostringstream out;
  out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
  out << "c s " << to_token(cnf.inner_sr) << " " << to_token(cnf.outer_sr) << " " << to_token(cnf.transform) << "\n";
  auto var_list = [&](const char* kind, const VarSet& vs) {
    if (vs.empty()) return;
    out << "c " << kind;
    for (int v : vs) out << " " << v;
    out << " 0\n";
  };
  var_list("o", cnf.outer_vars);
  var_list("x", cnf.eliminated);
  for (const auto& [v, name] : cnf.names) out << "c v " << v << " " << name << "\n";
  for (const auto& [lit, val] : cnf.inner_labels) out << "c wi " << lit << " " << detail::label_fields(val) << " 0\n";
  for (const auto& [lit, val] : cnf.outer_labels) out << "c wo " << lit << " " << detail::label_fields(val) << " 0\n";
  for (const auto& c : cnf.clauses) {
    for (int l : c) out << l << " ";
    out << "0\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Operations on theories

// T conditioned on y: satisfied clauses vanish, falsified literals are
// removed (possibly leaving an empty clause), assigned variables leave the
// theory along with their labels.
inline LabeledCnf condition(const LabeledCnf& cnf, const PartialAssignment& y) {
  LabeledCnf out = cnf;
  if (y.empty()) return out;
  out.clauses.clear();
  for (const auto& c : cnf.clauses) {
    Clause kept;
    bool sat = false;
    for (int l : c) {
      if (y.satisfies(l)) {
        sat = true;
        break;
      }
      if (!y.falsifies(l)) kept.push_back(l);
    }
    if (!sat) out.clauses.push_back(std::move(kept));
  }
  const VarSet assigned = y.variables();
  out.eliminated = set_union(out.eliminated, assigned);
  out.outer_vars = set_difference(out.outer_vars, assigned);
  std::erase_if(out.inner_labels, [&](const auto& kv) { return contains(assigned, var_of(kv.first)); });
  std::erase_if(out.outer_labels, [&](const auto& kv) { return contains(assigned, var_of(kv.first)); });
  return out;
}

inline Graph primal_graph(const LabeledCnf& cnf) {
  Graph g;
  for (int v : cnf.variables()) g.add_vertex(v);
  for (const auto& c : cnf.clauses)
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) g.add_edge(var_of(c[i]), var_of(c[j]));
  return g;
}

inline constexpr int kDefaultEnumerationLimit = 30;

namespace detail {

// Clause as bit masks over positions in a variable list.
struct MaskClause {
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

inline std::vector<MaskClause> mask_clauses(const std::vector<Clause>& clauses, const VarSet& vars) {
  std::vector<MaskClause> out;
  out.reserve(clauses.size());
  for (const auto& c : clauses) {
    MaskClause m;
    for (int l : c) {
      auto it = std::lower_bound(vars.begin(), vars.end(), var_of(l));
      const auto bit = std::uint64_t{1} << (it - vars.begin());
      (l > 0 ? m.pos : m.neg) |= bit;
    }
    out.push_back(m);
  }
  return out;
}

inline bool satisfies_all(const std::vector<MaskClause>& cs, std::uint64_t truth) {
  for (const auto& c : cs)
    if (((c.pos & truth) | (c.neg & ~truth)) == 0) return false;
  return true;
}

}  // namespace detail

// Calls visit(model) for every satisfying total assignment over
// cnf.variables(). Models are literal lists in increasing variable order and
// arrive lexicographically with `true` before `false` for each variable.
inline void for_each_model(const LabeledCnf& cnf, const std::function<void(const std::vector<int>&)>& visit,
                           int max_vars = kDefaultEnumerationLimit) {
  const VarSet vars = cnf.variables();
  const int n = static_cast<int>(vars.size());
  if (n > max_vars || n > 62)
    throw CapacityError("model enumeration over " + std::to_string(n) + " variables exceeds the limit of " +
                        std::to_string(std::min(max_vars, 62)));
  const auto masks = detail::mask_clauses(cnf.clauses, vars);
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<int> model(n);
  for (std::uint64_t k = 0; k < total; ++k) {
    // Bit i of `falses` is the variable at position n-1-i; 0 means true.
    const std::uint64_t falses = k;
    std::uint64_t truth = 0;
    for (int i = 0; i < n; ++i)
      if (!((falses >> (n - 1 - i)) & 1)) truth |= std::uint64_t{1} << i;
    if (!detail::satisfies_all(masks, truth)) continue;
    for (int i = 0; i < n; ++i) model[i] = ((truth >> i) & 1) ? vars[i] : -vars[i];
    visit(model);
  }
}

inline std::vector<std::vector<int>> enumerate_models(const LabeledCnf& cnf, int max_vars = kDefaultEnumerationLimit) {
  std::vector<std::vector<int>> out;
  for_each_model(cnf, [&](const std::vector<int>& m) { out.push_back(m); }, max_vars);
  return out;
}

}  // namespace twoamc
