#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace twoamc {

// Sorted, duplicate-free list of variable (vertex) indices.
using VarSet = std::vector<int>;

inline VarSet make_varset(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool contains(const VarSet& s, int v) { return std::binary_search(s.begin(), s.end(), v); }

inline bool is_subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

inline VarSet set_union(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VarSet set_difference(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline VarSet set_intersection(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Simple undirected graph over positive integer vertex ids. Vertex ids need
// not be contiguous; adjacency lists are kept sorted.
class Graph {
 public:
  Graph() = default;

  void add_vertex(int v) {
    grow(v);
    if (!present_[v]) {
      present_[v] = 1;
      ++num_vertices_;
    }
  }

  // Self-loops are ignored.
  void add_edge(int u, int v) {
    if (u == v) return;
    add_vertex(u);
    add_vertex(v);
    auto& nu = adj_[u];
    auto it = std::lower_bound(nu.begin(), nu.end(), v);
    if (it != nu.end() && *it == v) return;
    nu.insert(it, v);
    auto& nv = adj_[v];
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    ++num_edges_;
  }

  void add_clique(const VarSet& vs) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      add_vertex(vs[i]);
      for (std::size_t j = i + 1; j < vs.size(); ++j) add_edge(vs[i], vs[j]);
    }
  }

  bool has_vertex(int v) const { return v >= 0 && v < static_cast<int>(present_.size()) && present_[v]; }

  bool has_edge(int u, int v) const {
    if (!has_vertex(u) || !has_vertex(v)) return false;
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }

  const std::vector<int>& neighbors(int v) const { return adj_[v]; }

  VarSet vertices() const {
    VarSet out;
    out.reserve(num_vertices_);
    for (int v = 0; v < static_cast<int>(present_.size()); ++v)
      if (present_[v]) out.push_back(v);
    return out;
  }

  std::size_t num_vertices() const { return num_vertices_; }
  std::size_t num_edges() const { return num_edges_; }
  // One past the largest vertex id.
  int id_bound() const { return static_cast<int>(present_.size()); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < id_bound(); ++u)
      for (int v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  // Vertices reachable from `from` without entering `blocked`.
  std::vector<char> reachable(const VarSet& from, const VarSet& blocked) const {
    std::vector<char> seen(present_.size(), 0);
    std::vector<int> stack;
    for (int s : from)
      if (has_vertex(s) && !contains(blocked, s) && !seen[s]) {
        seen[s] = 1;
        stack.push_back(s);
      }
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : adj_[u])
        if (!seen[w] && !contains(blocked, w)) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    return seen;
  }

 private:
  void grow(int v) {
    if (v >= static_cast<int>(present_.size())) {
      present_.resize(v + 1, 0);
      adj_.resize(v + 1);
    }
  }

  std::vector<char> present_;
  std::vector<std::vector<int>> adj_;
  std::size_t num_vertices_ = 0;
  std::size_t num_edges_ = 0;
};

// True iff every path from `from` to `to` uses a vertex of `sep`. Vertices of
// `from` or `to` inside `sep` count as cut.
inline bool separates(const Graph& g, const VarSet& sep, const VarSet& from, const VarSet& to) {
  const auto seen = g.reachable(from, sep);
  for (int t : to)
    if (t < static_cast<int>(seen.size()) && seen[t] && !contains(sep, t)) return false;
  return true;
}

}  // namespace twoamc
