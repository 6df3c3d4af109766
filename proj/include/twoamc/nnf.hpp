#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "twoamc/cnf.hpp"
#include "twoamc/error.hpp"
#include "twoamc/graph.hpp"
#include "twoamc/semiring.hpp"

namespace twoamc {

enum class NodeKind { Literal, True, False, And, Or };

struct Node {
  NodeKind kind = NodeKind::True;
  int lit = 0;       // Literal only
  int decision = 0;  // Or only; 0 if none
  std::vector<int> children;
  friend bool operator==(const Node&, const Node&) = default;
};

// Rooted DAG in topological order: every child index is smaller than its
// parent's. make_* intern nodes so structurally equal nodes share one index;
// push() appends verbatim (used by the parser to keep files round-trippable).
class Circuit {
 public:
  int num_vars = 0;

  int push(Node n) {
    for (int c : n.children)
      if (c < 0 || c >= size()) throw PreconditionError("child index " + std::to_string(c) + " is not an earlier node");
    if (n.kind == NodeKind::Literal) num_vars = std::max(num_vars, var_of(n.lit));
    if (n.kind == NodeKind::Or) num_vars = std::max(num_vars, n.decision);
    nodes_.push_back(std::move(n));
    vars_valid_ = false;
    root_ = size() - 1;
    return root_;
  }

  int make_literal(int lit) { return intern({NodeKind::Literal, lit, 0, {}}); }
  int make_true() { return intern({NodeKind::True, 0, 0, {}}); }
  int make_false() { return intern({NodeKind::False, 0, 0, {}}); }

  // True children are dropped, a False child absorbs, single-child
  // conjunctions collapse to the child; nested ands stay nested.
  int make_and(std::vector<int> children) {
    std::erase_if(children, [&](int ch) { return nodes_[ch].kind == NodeKind::True; });
    for (int ch : children)
      if (nodes_[ch].kind == NodeKind::False) return make_false();
    if (children.empty()) return make_true();
    if (children.size() == 1) return children[0];
    std::sort(children.begin(), children.end());
    return intern({NodeKind::And, 0, 0, std::move(children)});
  }

  int make_or(int decision, std::vector<int> children) {
    if (children.empty()) return make_false();
    if (children.size() == 1) return children[0];
    return intern({NodeKind::Or, 0, decision, std::move(children)});
  }

  const Node& node(int i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return root_; }
  void set_root(int r) {
    if (r < 0 || r >= size()) throw PreconditionError("root index out of range");
    root_ = r;
  }

  std::size_t num_edges() const {
    std::size_t e = 0;
    for (const auto& n : nodes_) e += n.children.size();
    return e;
  }

  // Vars(n) for every node, computed once per modification.
  const std::vector<VarSet>& vars() const {
    if (!vars_valid_) {
      vars_.assign(nodes_.size(), {});
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.kind == NodeKind::Literal) {
          vars_[i] = {var_of(n.lit)};
        } else {
          VarSet acc;
          for (int c : n.children) acc = set_union(acc, vars_[c]);
          vars_[i] = std::move(acc);
        }
      }
      vars_valid_ = true;
    }
    return vars_;
  }

  const VarSet& vars(int i) const { return vars()[i]; }

  // Nodes reachable from the root.
  std::vector<char> reachable() const {
    std::vector<char> r(nodes_.size(), 0);
    if (nodes_.empty()) return r;
    r[root_] = 1;
    for (int i = root_; i >= 0; --i)
      if (r[i])
        for (int c : nodes_[i].children) r[c] = 1;
    return r;
  }

  // Number of nodes and edges reachable from the root.
  std::pair<std::size_t, std::size_t> live_size() const {
    const auto r = reachable();
    std::size_t nodes = 0, edges = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (r[i]) {
        ++nodes;
        edges += nodes_[i].children.size();
      }
    return {nodes, edges};
  }

  // Copy holding only nodes reachable from the root, renumbered in order.
  Circuit compact() const {
    Circuit out;
    out.num_vars = num_vars;
    if (nodes_.empty()) return out;
    const auto r = reachable();
    std::vector<int> remap(nodes_.size(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!r[i]) continue;
      Node n = nodes_[i];
      for (int& c : n.children) c = remap[c];
      remap[i] = out.push(std::move(n));
    }
    out.root_ = remap[root_];
    out.num_vars = num_vars;
    return out;
  }

 private:
  struct NodeHash {
    std::size_t operator()(const Node& n) const {
      std::size_t h = static_cast<std::size_t>(n.kind) * 0x9e3779b97f4a7c15ULL;
      auto mix = [&](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
      mix(static_cast<std::size_t>(n.lit));
      mix(static_cast<std::size_t>(n.decision));
      for (int c : n.children) mix(static_cast<std::size_t>(c));
      return h;
    }
  };

  int intern(Node n) {
    auto it = unique_.find(n);
    if (it != unique_.end()) {
      root_ = it->second;
      return it->second;
    }
    const int id = push(n);
    unique_.emplace(std::move(n), id);
    return id;
  }

  std::vector<Node> nodes_;
  int root_ = -1;
  std::unordered_map<Node, int, NodeHash> unique_;
  mutable std::vector<VarSet> vars_;
  mutable bool vars_valid_ = false;
};

// ---------------------------------------------------------------------------
// Exchange format
//   nnf <nodes> <edges> <vars>
//   L <lit> | A <k> <c...> | O <j> <k> <c...>
// Node ids are zero-based line positions; the last node is the root.

inline Circuit parse_nnf(std::istream& in) {
  Circuit c;
  std::string raw;
  std::size_t line = 0;
  bool header = false;
  long long declared_nodes = 0, declared_edges = 0, declared_vars = 0;
  auto read_int = [&](std::istringstream& ls, const char* what) {
    long long x;
    if (!(ls >> x)) throw ParseError(line, std::string("expected ") + what);
    return x;
  };
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    if (!header) {
      if (tag != "nnf") throw ParseError(line, "expected 'nnf' header");
      declared_nodes = read_int(ls, "node count");
      declared_edges = read_int(ls, "edge count");
      declared_vars = read_int(ls, "variable count");
      if (declared_nodes < 0 || declared_edges < 0 || declared_vars < 0)
        throw ParseError(line, "negative count in header");
      header = true;
      continue;
    }
    Node n;
    if (tag == "L") {
      n.kind = NodeKind::Literal;
      n.lit = static_cast<int>(read_int(ls, "literal"));
      if (n.lit == 0 || std::abs(n.lit) > declared_vars) throw ParseError(line, "literal out of range");
    } else if (tag == "A" || tag == "O") {
      if (tag == "O") {
        n.decision = static_cast<int>(read_int(ls, "decision variable"));
        if (n.decision < 0 || n.decision > declared_vars) throw ParseError(line, "decision variable out of range");
      }
      const long long k = read_int(ls, "child count");
      if (k < 0) throw ParseError(line, "negative child count");
      for (long long i = 0; i < k; ++i) {
        const long long ch = read_int(ls, "child index");
        if (ch < 0 || ch >= c.size()) throw ParseError(line, "child " + std::to_string(ch) + " is not an earlier node");
        n.children.push_back(static_cast<int>(ch));
      }
      if (tag == "A")
        n.kind = k == 0 ? NodeKind::True : NodeKind::And;
      else
        n.kind = k == 0 ? NodeKind::False : NodeKind::Or;
    } else {
      throw ParseError(line, "unknown node tag '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) throw ParseError(line, "trailing tokens");
    c.push(std::move(n));
  }
  if (!header) throw ParseError(line, "missing 'nnf' header");
  if (c.size() != declared_nodes) throw ParseError(line, "node count does not match header");
  if (static_cast<long long>(c.num_edges()) != declared_edges) throw ParseError(line, "edge count does not match header");
  if (c.size() == 0) throw ParseError(line, "circuit has no nodes");
  c.num_vars = static_cast<int>(declared_vars);
  return c;
}

inline Circuit parse_nnf(const std::string& text) {
  std::istringstream is(text);
  return parse_nnf(is);
}

// The root must be the last node for the file to round-trip; compact() first.
inline std::string emit_nnf(const Circuit& c) {
  const Circuit& k = c;
  if (k.size() > 0 && k.root() != k.size() - 1) return emit_nnf(c.compact());
  std::ostringstream os;
  os << "nnf " << k.size() << ' ' << k.num_edges() << ' ' << k.num_vars << '\n';
  for (const Node& n : k.nodes()) {
    switch (n.kind) {
      case NodeKind::Literal: os << "L " << n.lit; break;
      case NodeKind::True: os << "A 0"; break;
      case NodeKind::False: os << "O 0 0"; break;
      case NodeKind::And:
        os << "A " << n.children.size();
        for (int ch : n.children) os << ' ' << ch;
        break;
      case NodeKind::Or:
        os << "O " << n.decision << ' ' << n.children.size();
        for (int ch : n.children) os << ' ' << ch;
        break;
    }
    os << '\n';
  }
  return os.str();
}

// Truth value of the circuit under a total assignment (truth[v] for v >= 1).
inline bool evaluate_bool(const Circuit& c, const std::vector<char>& truth) {
  std::vector<char> val(c.size(), 0);
  for (int i = 0; i < c.size(); ++i) {
    const Node& n = c.node(i);
    switch (n.kind) {
      case NodeKind::Literal: val[i] = (truth[var_of(n.lit)] != 0) == (n.lit > 0); break;
      case NodeKind::True: val[i] = 1; break;
      case NodeKind::False: val[i] = 0; break;
      case NodeKind::And: {
        char v = 1;
        for (int ch : n.children) v = v && val[ch];
        val[i] = v;
        break;
      }
      case NodeKind::Or: {
        char v = 0;
        for (int ch : n.children) v = v || val[ch];
        val[i] = v;
        break;
      }
    }
  }
  return val[c.root()];
}

// Model count over `universe` of a decomposable, deterministic circuit.
inline BigNat count_models(const Circuit& c, const VarSet& universe) {
  const auto& vars = c.vars();
  std::vector<BigNat> cnt(c.size());
  auto pow2 = [](std::size_t k) { return BigNat(1) << static_cast<unsigned>(k); };
  for (int i = 0; i < c.size(); ++i) {
    const Node& n = c.node(i);
    switch (n.kind) {
      case NodeKind::Literal:
      case NodeKind::True: cnt[i] = 1; break;
      case NodeKind::False: cnt[i] = 0; break;
      case NodeKind::And:
        cnt[i] = 1;
        for (int ch : n.children) cnt[i] *= cnt[ch];
        break;
      case NodeKind::Or:
        cnt[i] = 0;
        for (int ch : n.children) cnt[i] += cnt[ch] * pow2(vars[i].size() - vars[ch].size());
        break;
    }
  }
  const VarSet& rv = vars[c.root()];
  if (!is_subset(rv, universe)) throw PreconditionError("circuit mentions variables outside the universe");
  return cnt[c.root()] * pow2(universe.size() - rv.size());
}

// ---------------------------------------------------------------------------
// 2AMC evaluation

struct EvaluationStats {
  std::size_t boundary_nodes = 0;  // inner-tagged children of outer-tagged and-nodes
  std::size_t transforms = 0;
};

// Bottom-up pass. A node is Inner when Vars(node) is a subset of the inner
// variables and is then valued in the inner semiring, otherwise it is Outer.
// At an Outer and-node the Inner children are multiplied in the inner
// semiring and transformed once. An Inner root is transformed at the end.
inline Value evaluate_2amc(const Circuit& c, const LabeledCnf& inst, EvaluationStats* stats = nullptr) {
  if (c.size() == 0) throw PreconditionError("empty circuit");
  inst.check();
  const SemiringId si = inst.inner_sr, so = inst.outer_sr;
  const TransformId t = inst.transform;
  const auto& vars = c.vars();
  const VarSet all = inst.variables();
  if (c.node(c.root()).kind == NodeKind::False) return zero(so);  // unsatisfiable theory
  if (vars[c.root()] != all)
    throw PreconditionError("circuit root does not mention exactly the theory's variables; smooth it first");

  auto inner_set = [&](const VarSet& vs) {
    for (int v : vs)
      if (inst.is_outer(v)) return false;
    return true;
  };
  const auto live = c.reachable();
  std::vector<char> inner(c.size(), 0);
  std::vector<Value> val(c.size());
  std::size_t transforms = 0, boundary = 0;
  for (int i = 0; i < c.size(); ++i) {
    if (!live[i]) continue;
    const Node& n = c.node(i);
    inner[i] = inner_set(vars[i]);
    const SemiringId sr = inner[i] ? si : so;
    switch (n.kind) {
      case NodeKind::Literal: val[i] = inner[i] ? inst.inner_label(n.lit) : inst.outer_label(n.lit); break;
      case NodeKind::True: val[i] = one(sr); break;
      case NodeKind::False: val[i] = zero(sr); break;
      case NodeKind::Or: {
        Value acc = zero(sr);
        for (int ch : n.children) {
          if (inner[ch] != inner[i])
            throw PreconditionError("or-node " + std::to_string(i) + " mixes inner and outer children; not smooth");
          acc = add(sr, acc, val[ch]);
        }
        val[i] = std::move(acc);
        break;
      }
      case NodeKind::And: {
        if (inner[i]) {
          Value acc = one(si);
          for (int ch : n.children) acc = mul(si, acc, val[ch]);
          val[i] = std::move(acc);
          break;
        }
        Value in_acc = one(si);
        Value out_acc = one(so);
        bool any_inner = false;
        for (int ch : n.children) {
          if (inner[ch]) {
            in_acc = mul(si, in_acc, val[ch]);
            any_inner = true;
            ++boundary;
          } else {
            out_acc = mul(so, out_acc, val[ch]);
          }
        }
        if (any_inner) {
          out_acc = mul(so, out_acc, transform(t, in_acc, so));
          ++transforms;
        }
        val[i] = std::move(out_acc);
        break;
      }
    }
  }
  Value result = val[c.root()];
  if (inner[c.root()]) {
    result = transform(t, result, so);
    ++transforms;
  }
  if (stats) {
    stats->boundary_nodes = boundary;
    stats->transforms = transforms;
  }
  return result;
}

inline constexpr int kDefaultOracleLimit = 24;

// The 2AMC definition taken literally: outer sum over assignments of X_O, each weighted by
// the outer labels and t of the inner sum over models of T conditioned on it.
inline Value brute_force_2amc(const LabeledCnf& inst, int max_vars = kDefaultOracleLimit) {
  inst.check();
  const VarSet all = inst.variables();
  if (static_cast<int>(all.size()) > max_vars)
    throw CapacityError("oracle over " + std::to_string(all.size()) + " variables exceeds the limit of " +
                        std::to_string(max_vars));
  const SemiringId si = inst.inner_sr, so = inst.outer_sr;
  const VarSet& xo = inst.outer_vars;
  const std::size_t k = xo.size();
  Value total = zero(so);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) {
    std::vector<int> lits;
    Value w = one(so);
    for (std::size_t i = 0; i < k; ++i) {
      // true before false, first variable most significant
      const bool val = !((m >> (k - 1 - i)) & 1);
      const int lit = val ? xo[i] : -xo[i];
      lits.push_back(lit);
      w = mul(so, w, inst.outer_label(lit));
    }
    const LabeledCnf residual = condition(inst, PartialAssignment(lits));
    Value inner_sum = zero(si);
    for_each_model(
        residual,
        [&](const std::vector<int>& model) {
          Value p = one(si);
          for (int l : model) p = mul(si, p, inst.inner_label(l));
          inner_sum = add(si, inner_sum, p);
        },
        max_vars);
    total = add(so, total, mul(so, w, transform(inst.transform, inner_sum, so)));
  }
  return total;
}

// Plain AMC: sum over models of the product of labels, in one semiring.
inline Value brute_force_amc(const LabeledCnf& cnf, SemiringId sr, const std::function<Value(int)>& label,
                             int max_vars = kDefaultOracleLimit) {
  Value total = zero(sr);
  for_each_model(
      cnf,
      [&](const std::vector<int>& model) {
        Value p = one(sr);
        for (int l : model) p = mul(sr, p, label(l));
        total = add(sr, total, p);
      },
      max_vars);
  return total;
}

}  // namespace twoamc
