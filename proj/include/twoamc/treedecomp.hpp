#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twoamc/cnf.hpp"
#include "twoamc/error.hpp"
#include "twoamc/graph.hpp"

namespace twoamc {

struct TreeDecomposition {
  std::vector<VarSet> bags;
  std::vector<std::vector<int>> adj;  // tree edges between bag indices
  int root = 0;

  int add_bag(VarSet bag) {
    bags.push_back(std::move(bag));
    adj.emplace_back();
    return static_cast<int>(bags.size()) - 1;
  }

  void add_edge(int a, int b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  std::size_t size() const { return bags.size(); }

  // Largest bag size minus one; an edgeless or empty graph gives 0.
  int width() const {
    std::size_t m = 0;
    for (const auto& b : bags) m = std::max(m, b.size());
    return m == 0 ? 0 : static_cast<int>(m) - 1;
  }
};

struct VariableOrder {
  std::vector<int> sequence;
  std::size_t boundary_index = 0;  // sequence[0, boundary_index) is the separator
};

struct DecomposeOptions {
  std::uint64_t seed = 0;
  int restarts = 8;
};

namespace detail {

// One run of min-fill elimination with random tie-breaking.
inline std::vector<int> min_fill_order(const Graph& g, std::mt19937_64& rng) {
  const VarSet verts = g.vertices();
  const int bound = g.id_bound();
  std::vector<std::vector<int>> adj(bound);
  for (int v : verts) adj[v] = g.neighbors(v);
  std::vector<char> alive(bound, 0);
  for (int v : verts) alive[v] = 1;

  auto fill_of = [&](int v) {
    const auto& nb = adj[v];
    long long missing = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (!std::binary_search(adj[nb[i]].begin(), adj[nb[i]].end(), nb[j])) ++missing;
    return missing;
  };
  auto insert_sorted = [](std::vector<int>& v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };

  std::vector<int> order;
  order.reserve(verts.size());
  for (std::size_t step = 0; step < verts.size(); ++step) {
    long long best = std::numeric_limits<long long>::max();
    std::vector<int> ties;
    for (int v : verts) {
      if (!alive[v]) continue;
      const long long f = fill_of(v);
      if (f < best) {
        best = f;
        ties.assign(1, v);
      } else if (f == best) {
        ties.push_back(v);
      }
    }
    const int v = ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
    const auto nb = adj[v];
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        insert_sorted(adj[nb[i]], nb[j]);
        insert_sorted(adj[nb[j]], nb[i]);
      }
    for (int u : nb) {
      auto& au = adj[u];
      au.erase(std::lower_bound(au.begin(), au.end(), v));
    }
    adj[v].clear();
    alive[v] = 0;
    order.push_back(v);
  }
  return order;
}

// Bags from an elimination order: bag(v) = v plus its later neighbours in the
// filled graph, attached to the bag of the earliest-eliminated such neighbour.
inline TreeDecomposition td_from_order(const Graph& g, const std::vector<int>& order) {
  TreeDecomposition td;
  if (order.empty()) {
    td.add_bag({});
    return td;
  }
  const int bound = g.id_bound();
  std::vector<int> pos(bound, -1);
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
  std::vector<VarSet> higher(bound);
  for (int v : order)
    for (int u : g.neighbors(v))
      if (pos[u] > pos[v]) higher[v].push_back(u);
  std::vector<int> bag_of(bound, -1);
  for (int v : order) {
    auto& h = higher[v];
    h = make_varset(h);
    // Fill edges: later neighbours of v become pairwise adjacent.
    if (!h.empty()) {
      int first = h[0];
      for (int u : h)
        if (pos[u] < pos[first]) first = u;
      for (int u : h)
        if (u != first) higher[first].push_back(u);
    }
    VarSet bag = h;
    bag.push_back(v);
    bag_of[v] = td.add_bag(make_varset(std::move(bag)));
  }
  // Parent links, processed in elimination order so parents exist.
  std::vector<int> roots;
  for (int v : order) {
    const auto& h = higher[v];
    if (h.empty()) {
      roots.push_back(bag_of[v]);
      continue;
    }
    int first = h[0];
    for (int u : h)
      if (pos[u] < pos[first]) first = u;
    td.add_edge(bag_of[v], bag_of[first]);
  }
  for (std::size_t i = 1; i < roots.size(); ++i) td.add_edge(roots[i - 1], roots[i]);
  td.root = roots.back();
  return td;
}

}  // namespace detail

// Min-fill tree decomposition; the best width over the restarts wins, ties
// keep the earliest run. Fully determined by the seed.
inline TreeDecomposition decompose(const Graph& g, const DecomposeOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  std::optional<TreeDecomposition> best;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    auto td = detail::td_from_order(g, detail::min_fill_order(g, rng));
    if (!best || td.width() < best->width()) best = std::move(td);
  }
  return std::move(*best);
}

inline bool validate_td(const Graph& g, const TreeDecomposition& td) {
  const std::size_t n = td.bags.size();
  if (n == 0 || td.adj.size() != n || td.root < 0 || static_cast<std::size_t>(td.root) >= n) return false;
  // Tree: connected with n-1 edges.
  std::size_t edges = 0;
  for (const auto& a : td.adj) {
    for (int b : a)
      if (b < 0 || static_cast<std::size_t>(b) >= n) return false;
    edges += a.size();
  }
  if (edges != 2 * (n - 1)) return false;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{td.root};
  seen[td.root] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : td.adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  if (reached != n) return false;

  // (i) vertex coverage and (iii) connectedness of each vertex's bags.
  for (int v : g.vertices()) {
    std::vector<char> has(n, 0);
    int start = -1;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (contains(td.bags[i], v)) {
        has[i] = 1;
        start = static_cast<int>(i);
        ++count;
      }
    if (count == 0) return false;
    std::vector<char> vis(n, 0);
    std::vector<int> st{start};
    vis[start] = 1;
    std::size_t got = 1;
    while (!st.empty()) {
      int u = st.back();
      st.pop_back();
      for (int w : td.adj[u])
        if (has[w] && !vis[w]) {
          vis[w] = 1;
          ++got;
          st.push_back(w);
        }
    }
    if (got != count) return false;
  }
  // (ii) edge coverage.
  for (auto [u, v] : g.edges()) {
    bool covered = false;
    for (const auto& b : td.bags)
      if (contains(b, u) && contains(b, v)) {
        covered = true;
        break;
      }
    if (!covered) return false;
  }
  return true;
}

inline constexpr int kDefaultFlowBound = 64;

// Minimum vertex cut between x and every vertex outside `allowed`, where only
// vertices of `allowed` may be cut. Node splitting turns it into an edge cut;
// augmenting paths are found by BFS. Past `flow_bound` units of flow, the
// frontier of `allowed` (its vertices adjacent to the outside) is returned.
inline VarSet find_separator(const Graph& g, const VarSet& x, const VarSet& allowed,
                             int flow_bound = kDefaultFlowBound) {
  const VarSet verts = g.vertices();
  const VarSet target = set_difference(verts, allowed);
  const VarSet sources = set_intersection(x, verts);
  if (target.empty() || sources.empty()) return {};
  if (!set_intersection(sources, target).empty())
    throw PreconditionError("a base vertex lies outside the allowed set and cannot be separated");

  const int bound = g.id_bound();
  // Node ids: 2v = v_in, 2v+1 = v_out, S = 2*bound, T = 2*bound+1.
  const int S = 2 * bound, T = 2 * bound + 1, N = 2 * bound + 2;
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  struct Arc {
    int to, cap, rev;
  };
  std::vector<std::vector<Arc>> net(N);
  auto arc = [&](int a, int b, int cap) {
    net[a].push_back({b, cap, static_cast<int>(net[b].size())});
    net[b].push_back({a, 0, static_cast<int>(net[a].size()) - 1});
  };
  for (int v : verts) {
    arc(2 * v, 2 * v + 1, contains(allowed, v) ? 1 : kInf);
    for (int u : g.neighbors(v)) arc(2 * v + 1, 2 * u, kInf);
  }
  for (int s : sources) arc(S, 2 * s, kInf);
  for (int t : target) arc(2 * t + 1, T, kInf);

  auto frontier = [&] {
    VarSet f;
    for (int v : allowed)
      if (g.has_vertex(v))
        for (int u : g.neighbors(v))
          if (!contains(allowed, u)) {
            f.push_back(v);
            break;
          }
    return f;
  };

  int flow = 0;
  std::vector<std::pair<int, int>> parent(N);
  for (;;) {
    std::fill(parent.begin(), parent.end(), std::pair<int, int>{-1, -1});
    parent[S] = {S, -1};
    std::deque<int> q{S};
    while (!q.empty() && parent[T].first < 0) {
      int u = q.front();
      q.pop_front();
      for (int i = 0; i < static_cast<int>(net[u].size()); ++i) {
        const Arc& a = net[u][i];
        if (a.cap > 0 && parent[a.to].first < 0) {
          parent[a.to] = {u, i};
          q.push_back(a.to);
        }
      }
    }
    if (parent[T].first < 0) break;
    int aug = kInf;
    for (int v = T; v != S; v = parent[v].first) aug = std::min(aug, net[parent[v].first][parent[v].second].cap);
    for (int v = T; v != S; v = parent[v].first) {
      Arc& a = net[parent[v].first][parent[v].second];
      a.cap -= aug;
      net[v][a.rev].cap += aug;
    }
    flow += aug;
    if (flow > flow_bound) return frontier();
  }
  // Residual reachability from S; cut vertices have v_in reached, v_out not.
  std::vector<char> reach(N, 0);
  std::vector<int> st{S};
  reach[S] = 1;
  while (!st.empty()) {
    int u = st.back();
    st.pop_back();
    for (const Arc& a : net[u])
      if (a.cap > 0 && !reach[a.to]) {
        reach[a.to] = 1;
        st.push_back(a.to);
      }
  }
  VarSet cut;
  for (int v : verts)
    if (reach[2 * v] && !reach[2 * v + 1]) cut.push_back(v);
  return cut;
}

struct ConstrainedDecomposition {
  TreeDecomposition td;
  VariableOrder order;
  VarSet separator;
};

// Order by first occurrence in a depth-first walk from the root; children are
// visited smallest subtree first, bag members in increasing id.
inline VariableOrder order_from_td(const TreeDecomposition& td, std::size_t boundary = 0) {
  const std::size_t n = td.bags.size();
  std::vector<int> parent(n, -1), sub(n, 1), pre;
  std::vector<char> seen(n, 0);
  std::vector<int> st{td.root};
  seen[td.root] = 1;
  while (!st.empty()) {
    int u = st.back();
    st.pop_back();
    pre.push_back(u);
    for (int w : td.adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        parent[w] = u;
        st.push_back(w);
      }
  }
  for (auto it = pre.rbegin(); it != pre.rend(); ++it)
    if (parent[*it] >= 0) sub[parent[*it]] += sub[*it];

  VariableOrder out;
  out.boundary_index = boundary;
  std::vector<char> emitted;
  auto emit = [&](int v) {
    if (v >= static_cast<int>(emitted.size())) emitted.resize(v + 1, 0);
    if (!emitted[v]) {
      emitted[v] = 1;
      out.sequence.push_back(v);
    }
  };
  std::vector<int> walk{td.root};
  while (!walk.empty()) {
    int u = walk.back();
    walk.pop_back();
    for (int v : td.bags[u]) emit(v);
    std::vector<int> kids;
    for (int w : td.adj[u])
      if (w != parent[u]) kids.push_back(w);
    std::sort(kids.begin(), kids.end(), [&](int a, int b) { return sub[a] != sub[b] ? sub[a] < sub[b] : a < b; });
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) walk.push_back(*it);
  }
  return out;
}

// Decomposes primal(T) + Clique(S) for a separator S between x and the
// variables outside x u d, and roots the decomposition at a bag equal to S.
inline ConstrainedDecomposition constrain_and_root(const LabeledCnf& cnf, const VarSet& x, const VarSet& d,
                                                   const DecomposeOptions& opt = {},
                                                   int flow_bound = kDefaultFlowBound) {
  Graph g = primal_graph(cnf);
  const VarSet allowed = set_union(x, d);
  ConstrainedDecomposition out;
  out.separator = find_separator(g, x, allowed, flow_bound);
  const VarSet& S = out.separator;
  g.add_clique(S);
  TreeDecomposition td = decompose(g, opt);

  int host = -1;
  for (std::size_t i = 0; i < td.bags.size(); ++i)
    if (is_subset(S, td.bags[i])) {
      host = static_cast<int>(i);
      break;
    }
  if (host < 0) throw Error("no bag holds the separator clique");
  int root = host;
  if (td.bags[host] != S) {
    root = td.add_bag(S);
    td.add_edge(root, host);
  }
  td.root = root;
  out.td = std::move(td);
  out.order = order_from_td(out.td, S.size());
  return out;
}

// PACE-style text: "s td <bags> <width+1> <vertices>", "b <id> <v...>", "<a> <b>".
inline std::string emit_td(const TreeDecomposition& td, std::size_t num_vertices) {
  std::ostringstream os;
  os << "s td " << td.bags.size() << ' ' << td.width() + 1 << ' ' << num_vertices << '\n';
  for (std::size_t i = 0; i < td.bags.size(); ++i) {
    os << "b " << i + 1;
    for (int v : td.bags[i]) os << ' ' << v;
    os << '\n';
  }
  for (std::size_t i = 0; i < td.adj.size(); ++i)
    for (int j : td.adj[i])
      if (static_cast<int>(i) < j) os << i + 1 << ' ' << j + 1 << '\n';
  return os.str();
}

}  // namespace twoamc
