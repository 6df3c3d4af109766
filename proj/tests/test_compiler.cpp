#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"

using namespace twoamc;
using namespace twoamc::testing;

namespace {

CompileConfig config(std::vector<int> order, CompileMode mode, VarSet defined = {}) {
  CompileConfig cfg;
  cfg.order.sequence = std::move(order);
  cfg.mode = mode;
  cfg.defined = std::move(defined);
  return cfg;
}

std::vector<int> shuffled_vars(const LabeledCnf& t, std::mt19937_64& rng) {
  std::vector<int> o = t.variables();
  std::shuffle(o.begin(), o.end(), rng);
  return o;
}

// Outer variables first, then the rest; both blocks shuffled.
std::vector<int> outer_first(const LabeledCnf& t, const VarSet& front, std::mt19937_64& rng) {
  std::vector<int> a = front, b = set_difference(t.variables(), front);
  std::shuffle(a.begin(), a.end(), rng);
  std::shuffle(b.begin(), b.end(), rng);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

LabeledCnf lex() { return clark_completion(parse_program(kLex)).cnf; }

}  // namespace

TEST(Compiler, ContradictionGivesFalse) {
  LabeledCnf t;
  t.num_vars = 1;
  t.clauses = {{1}, {-1}};
  const auto r = compile(t, config({1}, CompileMode::Free));
  EXPECT_EQ(r.circuit.node(r.circuit.root()).kind, NodeKind::False);
  EXPECT_EQ(r.circuit.live_size().first, 1u);
}

TEST(Compiler, OrderMustCoverVariables) {
  EXPECT_THROW(compile(lex(), config({1, 2, 3}, CompileMode::Free)), PreconditionError);
  EXPECT_THROW(compile(lex(), config({1, 2, 3, 3}, CompileMode::Free)), PreconditionError);
}

TEST(Compiler, LexDecidingCFirst) {
  LabeledCnf t = lex();
  t.outer_vars = {3};
  const auto r = compile(t, config({3, 1, 2, 4}, CompileMode::XDFirst, {1}));
  const auto rep = verify_circuit(r.circuit, t, {1});
  EXPECT_TRUE(rep.decomposable);
  EXPECT_TRUE(rep.deterministic);
  EXPECT_TRUE(rep.xd_first);
  EXPECT_EQ(rep.equivalent, true);
  // {a,c} and {b,d} are independent components under the root.
  EXPECT_EQ(r.circuit.node(r.circuit.root()).kind, NodeKind::And);
}

TEST(Compiler, LexFactsFirstIsXFirst) {
  LabeledCnf t = lex();
  t.outer_vars = {1, 2};
  const auto r = compile(t, config({1, 2, 3, 4}, CompileMode::XFirst));
  const auto rep = verify_circuit(r.circuit, t, {});
  EXPECT_TRUE(rep.x_first);
  EXPECT_EQ(rep.equivalent, true);
}

TEST(Compiler, HandBuiltLexCircuitsVerify) {
  LabeledCnf t = lex();
  t.outer_vars = {1, 2};
  const auto left = verify_circuit(lex_left_circuit(), t, {3, 4});
  EXPECT_TRUE(left.sd_dnnf());
  EXPECT_TRUE(left.x_first);
  EXPECT_EQ(left.equivalent, true);
  const auto right = verify_circuit(lex_right_circuit(), t, {3, 4});
  EXPECT_TRUE(right.sd_dnnf());
  EXPECT_FALSE(right.x_first);
  EXPECT_TRUE(right.xd_first);
  EXPECT_EQ(right.equivalent, true);
}

TEST(Compiler, VerifierCatchesBrokenCircuits) {
  LabeledCnf t = lex();
  Circuit raw;
  raw.num_vars = 4;
  const int a = raw.make_literal(1), c = raw.make_literal(3);
  const int x = raw.push({NodeKind::And, 0, 0, {a, c}});
  const int y = raw.push({NodeKind::And, 0, 0, {a, c}});
  raw.set_root(raw.push({NodeKind::Or, 0, 0, {x, y}}));
  EXPECT_FALSE(verify_circuit(raw, t, {}).deterministic);

  Circuit shared;
  shared.num_vars = 4;
  const int s1 = shared.make_literal(1), s2 = shared.make_literal(-1);
  shared.set_root(shared.push({NodeKind::And, 0, 0, {s1, s2}}));
  EXPECT_FALSE(verify_circuit(shared, t, {}).decomposable);

  Circuit unsmooth;
  unsmooth.num_vars = 4;
  unsmooth.set_root(unsmooth.make_or(1, {unsmooth.make_and({unsmooth.make_literal(1), unsmooth.make_literal(3)}),
                                         unsmooth.make_literal(-1)}));
  const auto rep = verify_circuit(unsmooth, t, {});
  EXPECT_FALSE(rep.smooth);
  EXPECT_EQ(rep.equivalent, false);
}

TEST(Compiler, RandomCnfsModelEquivalent) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const LabeledCnf t = random_cnf(rng, 14, 40);
    const auto r = compile(t, config(shuffled_vars(t, rng), CompileMode::Free));
    const auto rep = verify_circuit(r.circuit, t, {});
    ASSERT_EQ(rep.equivalent, true) << emit_cnf(t);
    EXPECT_TRUE(rep.decomposable);
    EXPECT_TRUE(rep.deterministic);
    EXPECT_EQ(rep.sat_determinism_checks, 0u);  // every or-node is a decision node
    const Circuit s = smooth(r.circuit, t.variables());
    const auto srep = verify_circuit(s, t, {});
    EXPECT_TRUE(srep.sd_dnnf());
    EXPECT_EQ(srep.equivalent, true);
  }
}

TEST(Compiler, FirstnessOnRandomPartitions) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    LabeledCnf t = random_cnf(rng, 12, 30);
    t.outer_vars = random_subset(rng, t.variables(), 0.4);
    const VarSet d = defined_vars(t, t.outer_vars).defined;

    const auto xf = compile(t, config(outer_first(t, t.outer_vars, rng), CompileMode::XFirst));
    const Circuit xs = smooth(xf.circuit, t.variables(), SmoothPartition{t.outer_vars, t.outer_vars});
    for (const Circuit* c : {&xf.circuit, &xs}) {
      const auto rep = verify_circuit(*c, t, d);
      ASSERT_TRUE(rep.x_first) << emit_cnf(t);
      EXPECT_EQ(rep.equivalent, true);
    }
    EXPECT_TRUE(verify_circuit(xs, t, d).smooth);

    const VarSet front = set_union(t.outer_vars, d);
    const auto xd = compile(t, config(shuffled_vars(t, rng), CompileMode::XDFirst, d));
    const Circuit ds = smooth(xd.circuit, t.variables(), SmoothPartition{t.outer_vars, front});
    for (const Circuit* c : {&xd.circuit, &ds}) {
      const auto rep = verify_circuit(*c, t, d);
      ASSERT_TRUE(rep.xd_first) << emit_cnf(t);
      EXPECT_EQ(rep.equivalent, true);
    }
    EXPECT_TRUE(verify_circuit(ds, t, d).sd_dnnf());
  }
}

TEST(Compiler, PropagationModesAgree) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    LabeledCnf t = random_cnf(rng, 12, 30);
    t.outer_vars = random_subset(rng, t.variables(), 0.4);
    const auto order = outer_first(t, t.outer_vars, rng);
    CompileConfig off = config(order, CompileMode::XFirst);
    off.unit_propagation = false;
    const auto a = compile(t, off);
    const auto b = compile(t, config(order, CompileMode::XDFirst, defined_vars(t, t.outer_vars).defined));
    const VarSet u = t.variables();
    EXPECT_EQ(count_models(a.circuit, u), count_models(b.circuit, u));
    EXPECT_EQ(verify_circuit(a.circuit, t, {}).equivalent, true);
    EXPECT_EQ(verify_circuit(b.circuit, t, {}).equivalent, true);
  }
}

TEST(Compiler, SeparationExperiment) {
  for (int n = 2; n <= 10; ++n) {
    const LabeledCnf t = equivalence_theory(n);
    const VarSet d = defined_vars(t, t.outer_vars).defined;
    const auto row = separation_row(n, d);
    EXPECT_GE(row.x_boundary, std::size_t{1} << n) << n;
    EXPECT_LE(row.xd_nodes, static_cast<std::size_t>(32 * n)) << n;
  }
}

TEST(Compiler, WidthBoundOnRandomSuite) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    LabeledCnf t = random_cnf(rng, 14, 40);
    t.outer_vars = random_subset(rng, t.variables(), 0.3);
    for (auto mode : {CompileMode::Free, CompileMode::XFirst, CompileMode::XDFirst}) {
      SolveOptions o;
      o.mode = mode;
      SolveDiagnostics dg;
      compile_cnf(t, o, dg);
      const double bound = std::ldexp(1.0, dg.td_width + 1) * static_cast<double>(t.clauses.size() + t.num_vars);
      EXPECT_LE(static_cast<double>(dg.compile.nodes), bound) << emit_cnf(t);
    }
  }
}

TEST(Compiler, SmoothIsIdempotent) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const LabeledCnf t = random_cnf(rng, 12, 30);
    const auto r = compile(t, config(shuffled_vars(t, rng), CompileMode::Free));
    const Circuit once = smooth(r.circuit, t.variables());
    const Circuit twice = smooth(once, t.variables());
    EXPECT_EQ(once.live_size(), twice.live_size());
    EXPECT_EQ(count_models(once, t.variables()), count_models(r.circuit, t.variables()));
  }
}

TEST(Compiler, SmoothPadsMissingVariable) {
  Circuit c;
  c.num_vars = 2;
  // (a & b) | -a: the second branch omits b.
  c.set_root(c.make_or(1, {c.make_and({c.make_literal(1), c.make_literal(2)}), c.make_literal(-1)}));
  const Circuit s = smooth(c, {1, 2});
  const auto& root = s.node(s.root());
  for (int ch : root.children) EXPECT_EQ(s.vars(ch), (VarSet{1, 2}));
  EXPECT_EQ(count_models(s, {1, 2}), 3);
}

TEST(Compiler, CacheBudgetExhaustion) {
  const LabeledCnf t = equivalence_theory(10);
  CompileConfig cfg = config({}, CompileMode::XFirst);
  for (int v = 1; v <= 20; ++v) cfg.order.sequence.push_back(v);
  cfg.unit_propagation = false;
  cfg.cache_budget = 96 * 50;
  try {
    compile(t, cfg);
    FAIL();
  } catch (const CompileCapacityError& e) {
    EXPECT_GT(e.stats.nodes, 0u);
  }
}

TEST(Compiler, ModeTokens) {
  EXPECT_EQ(compile_mode_from_token("xd"), CompileMode::XDFirst);
  EXPECT_EQ(compile_mode_from_token("x"), CompileMode::XFirst);
  EXPECT_EQ(compile_mode_from_token("free"), CompileMode::Free);
  EXPECT_FALSE(compile_mode_from_token("y"));
}
