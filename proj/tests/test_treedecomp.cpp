#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace twoamc;
using namespace twoamc::testing;

namespace {

Graph random_graph(std::mt19937_64& rng, int max_n, double p) {
  Graph g;
  const int n = 1 + static_cast<int>(rng() % max_n);
  std::bernoulli_distribution e(p);
  for (int v = 1; v <= n; ++v) g.add_vertex(v);
  for (int u = 1; u <= n; ++u)
    for (int v = u + 1; v <= n; ++v)
      if (e(rng)) g.add_edge(u, v);
  return g;
}

}  // namespace

TEST(TreeDecomp, WidthExamples) {
  EXPECT_EQ(decompose(primal_graph(clark_completion(parse_program(kLex)).cnf)).width(), 1);
  Graph k5;
  k5.add_clique({1, 2, 3, 4, 5});
  EXPECT_EQ(decompose(k5).width(), 4);
  EXPECT_EQ(decompose(Graph{}).width(), 0);
  Graph path;
  for (int v = 1; v < 8; ++v) path.add_edge(v, v + 1);
  EXPECT_EQ(decompose(path).width(), 1);
  Graph cycle = path;
  cycle.add_edge(8, 1);
  EXPECT_EQ(decompose(cycle).width(), 2);
}

TEST(TreeDecomp, RandomGraphsGiveValidDecompositions) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const Graph g = random_graph(rng, 20, 0.25);
    DecomposeOptions o;
    o.seed = trial;
    const auto td = decompose(g, o);
    ASSERT_TRUE(validate_td(g, td));
    EXPECT_LT(td.width(), static_cast<int>(g.num_vertices()));
  }
}

TEST(TreeDecomp, ValidateRejectsBrokenDecompositions) {
  Graph g;
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  TreeDecomposition td;
  td.add_bag({1, 2});
  td.add_bag({3});
  td.add_edge(0, 1);
  EXPECT_FALSE(validate_td(g, td));  // edge 2-3 uncovered
  TreeDecomposition split;
  split.add_bag({1, 2});
  split.add_bag({3});
  split.add_bag({2, 3});
  split.add_edge(0, 1);
  split.add_edge(1, 2);
  EXPECT_FALSE(validate_td(g, split));  // bags with 2 are not connected
}

TEST(TreeDecomp, DeterministicForSeed) {
  std::mt19937_64 rng(22);
  const Graph g = random_graph(rng, 25, 0.2);
  DecomposeOptions o;
  o.seed = 5;
  EXPECT_EQ(decompose(g, o).bags, decompose(g, o).bags);
}

TEST(TreeDecomp, SeparatorExamples) {
  Graph star;
  for (int leaf = 1; leaf <= 4; ++leaf) star.add_edge(leaf, 5);
  star.add_edge(5, 6);
  // Leaves outer, s=5 allowed, t=6 outside.
  EXPECT_EQ(find_separator(star, {1, 2, 3, 4}, {1, 2, 3, 4, 5}), (VarSet{5}));

  Graph two;
  two.add_edge(1, 2);
  two.add_edge(2, 3);
  two.add_edge(1, 4);
  two.add_edge(4, 3);
  EXPECT_EQ(find_separator(two, {1, 2}, {1, 2, 4}).size(), 2u);
  EXPECT_EQ(find_separator(two, {1}, {1}), (VarSet{1}));
  EXPECT_TRUE(find_separator(two, {1}, {1, 2, 3, 4}).empty());
  EXPECT_THROW(find_separator(two, {1, 3}, {1, 2}), PreconditionError);
}

TEST(TreeDecomp, SeparatorIsMinimalOnRandomGraphs) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const Graph g = random_graph(rng, 12, 0.3);
    const VarSet all = g.vertices();
    const VarSet x = random_subset(rng, all, 0.3);
    const VarSet allowed = set_union(x, random_subset(rng, all, 0.3));
    const VarSet out = set_difference(all, allowed);
    const VarSet s = find_separator(g, x, allowed);
    ASSERT_TRUE(is_subset(s, allowed));
    EXPECT_TRUE(separates(g, s, x, out));
    // No smaller cut exists: brute force over subsets of allowed.
    if (allowed.size() <= 10 && !x.empty() && !out.empty()) {
      std::size_t best = allowed.size();
      for (std::uint32_t m = 0; m < (1u << allowed.size()); ++m) {
        VarSet c;
        for (std::size_t i = 0; i < allowed.size(); ++i)
          if ((m >> i) & 1) c.push_back(allowed[i]);
        if (c.size() < best && separates(g, c, x, out)) best = c.size();
      }
      EXPECT_EQ(s.size(), best);
    }
  }
}

TEST(TreeDecomp, ConstrainedRootOnLex) {
  const LabeledCnf t = clark_completion(parse_program(kLex)).cnf;
  const auto cd = constrain_and_root(t, {3}, {1});
  EXPECT_TRUE(is_subset(cd.separator, VarSet{1, 3}));
  EXPECT_EQ(cd.td.bags[cd.td.root], cd.separator);
  EXPECT_TRUE(validate_td(primal_graph(t), cd.td));
  EXPECT_EQ(cd.order.sequence.size(), 4u);
  EXPECT_TRUE(separates(primal_graph(t), cd.separator, {3}, {2, 4}));
}

TEST(TreeDecomp, EquivalenceTheoryNeedsNoSeparator) {
  const LabeledCnf t = equivalence_theory(3);
  const auto cd = constrain_and_root(t, t.outer_vars, {4, 5, 6});
  EXPECT_TRUE(cd.separator.empty());
  EXPECT_EQ(cd.td.width(), 1);
}

TEST(TreeDecomp, ConstrainedDecompositionProperties) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const LabeledCnf t = random_cnf(rng, 14, 25);
    const VarSet x = random_subset(rng, t.variables(), 0.3);
    const VarSet d = set_difference(random_subset(rng, t.variables(), 0.2), x);
    const auto cd = constrain_and_root(t, x, d);
    Graph g = primal_graph(t);
    const VarSet outside = set_difference(t.variables(), set_union(x, d));
    EXPECT_TRUE(is_subset(cd.separator, set_union(x, d)));
    EXPECT_TRUE(separates(g, cd.separator, x, outside));
    EXPECT_EQ(cd.td.bags[cd.td.root], cd.separator);
    g.add_clique(cd.separator);
    EXPECT_TRUE(validate_td(g, cd.td));
    // The order is a permutation of the graph's vertices starting with S.
    VarSet seq = make_varset(cd.order.sequence);
    EXPECT_EQ(seq.size(), cd.order.sequence.size());
    EXPECT_EQ(seq, g.vertices());
    EXPECT_EQ(make_varset({cd.order.sequence.begin(), cd.order.sequence.begin() + cd.separator.size()}),
              cd.separator);
  }
}

TEST(TreeDecomp, EmitFormat) {
  TreeDecomposition td;
  td.add_bag({1, 2});
  td.add_bag({2, 3});
  td.add_edge(0, 1);
  EXPECT_EQ(emit_td(td, 3), "s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n");
}
