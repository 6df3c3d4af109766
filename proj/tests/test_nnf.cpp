#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace twoamc;
using namespace twoamc::testing;

namespace {

std::vector<std::vector<int>> circuit_models(const Circuit& c, int n) {
  std::vector<std::vector<int>> out;
  std::vector<char> truth(n + 1, 0);
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    std::vector<int> lits;
    for (int v = 1; v <= n; ++v) {
      truth[v] = !((m >> (n - v)) & 1);
      lits.push_back(truth[v] ? v : -v);
    }
    if (evaluate_bool(c, truth)) out.push_back(lits);
  }
  return out;
}

// Rebuilds the circuit verbatim with every child list shuffled.
Circuit shuffled(const Circuit& c, std::mt19937_64& rng) {
  Circuit out;
  out.num_vars = c.num_vars;
  for (Node n : c.nodes()) {
    std::shuffle(n.children.begin(), n.children.end(), rng);
    out.push(n);
  }
  out.set_root(c.root());
  return out;
}

LabeledCnf lex_map() { return build_instance(parse_program(std::string(kLex) + " map(c)."), TaskKind::Map).cnf(); }

}  // namespace

TEST(Nnf, ParseTautology) {
  const Circuit c = parse_nnf("nnf 3 2 2\nL 1\nL -1\nO 1 2 0 1\n");
  EXPECT_EQ(c.size(), 3);
  EXPECT_EQ(c.root(), 2);
  EXPECT_EQ(c.node(2).kind, NodeKind::Or);
  EXPECT_EQ(c.node(2).decision, 1);
  EXPECT_EQ(count_models(c, {1, 2}), 4);
  EXPECT_EQ(emit_nnf(c), "nnf 3 2 2\nL 1\nL -1\nO 1 2 0 1\n");
}

TEST(Nnf, ConstantsRoundTrip) {
  EXPECT_EQ(parse_nnf("nnf 1 0 0\nA 0\n").node(0).kind, NodeKind::True);
  EXPECT_EQ(parse_nnf("nnf 1 0 0\nO 0 0\n").node(0).kind, NodeKind::False);
  EXPECT_EQ(count_models(parse_nnf("nnf 1 0 3\nO 0 0\n"), {1, 2, 3}), 0);
}

TEST(Nnf, ParseErrors) {
  EXPECT_THROW(parse_nnf("nnf 2 1 1\nA 1 1\nL 1\n"), ParseError);  // forward reference
  EXPECT_THROW(parse_nnf("nnf 1 1 1\nA 1 0\n"), ParseError);       // self reference
  EXPECT_THROW(parse_nnf("nnf 1 0 1\nL 2\n"), ParseError);         // literal out of range
  EXPECT_THROW(parse_nnf("nnf 2 0 1\nL 1\n"), ParseError);         // node count mismatch
  EXPECT_THROW(parse_nnf("nnf 1 0 1\nX 1\n"), ParseError);
  try {
    parse_nnf("nnf 3 2 2\nL 1\nL -1\nO 1 2 0 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Nnf, HandBuiltLexCircuitsRoundTrip) {
  const LabeledCnf t = clark_completion(parse_program(kLex)).cnf;
  for (const Circuit& c : {lex_left_circuit(), lex_right_circuit()}) {
    const Circuit r = parse_nnf(emit_nnf(c));
    EXPECT_EQ(emit_nnf(r), emit_nnf(c));
    auto want = enumerate_models(t);
    auto got = circuit_models(r, 4);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want);
    EXPECT_EQ(count_models(r, t.variables()), 4);
  }
}

TEST(Nnf, EvaluateMapOnRightCircuit) {
  const LabeledCnf inst = lex_map();
  const Value v = evaluate_2amc(lex_right_circuit(), inst);
  const auto& m = std::get<MapValue>(v);
  EXPECT_DOUBLE_EQ(m.score, 0.6);
  EXPECT_EQ(m.witness, (LitSet{-3}));
  EXPECT_TRUE(equal(inst.outer_sr, v, brute_force_2amc(inst)));
}

TEST(Nnf, GoldenValuesThroughPipeline) {
  struct Case {
    const char* prog;
    TaskKind task;
    double score;
  };
  const Case cases[] = {{kLex, TaskKind::Succ, 0.4},
                        {"0.4::a. 0.6::b. c :- a. d :- b. map(c).", TaskKind::Map, 0.6},
                        {kLeu, TaskKind::Meu, 48},
                        {kLsm, TaskKind::SuccSm, 0.5}};
  for (const auto& k : cases) {
    const LabeledCnf inst = build_instance(parse_program(k.prog), k.task).cnf();
    for (auto mode : {CompileMode::XFirst, CompileMode::XDFirst}) {
      const Value v = pipeline(inst, mode).value;
      EXPECT_NEAR(score_of(v), k.score, 1e-9) << k.prog;
      EXPECT_TRUE(equal(inst.outer_sr, v, brute_force_2amc(inst)));
    }
  }
  const auto meu = std::get<MeuValue>(
      pipeline(build_instance(parse_program(kLeu), TaskKind::Meu).cnf(), CompileMode::XDFirst).value);
  EXPECT_EQ(meu.witness, (LitSet{1}));
}

TEST(Nnf, BruteForceTrivialAndGuard) {
  LabeledCnf empty;
  EXPECT_DOUBLE_EQ(std::get<double>(brute_force_2amc(empty)), 1.0);
  LabeledCnf big;
  big.num_vars = 25;
  EXPECT_THROW(brute_force_2amc(big), CapacityError);
}

TEST(Nnf, EvaluationRequiresSmoothRoot) {
  const LabeledCnf inst = lex_map();
  Circuit c;
  c.num_vars = 4;
  c.set_root(c.make_literal(1));
  EXPECT_THROW(evaluate_2amc(c, inst), PreconditionError);
}

TEST(Nnf, ChildShuffleInvariance) {
  std::mt19937_64 rng(31);
  for (auto fam : {Family::Map, Family::Meu, Family::SuccSm}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Instance inst = random_instance(rng, fam, 12, 30);
      const SolveResult r = pipeline(inst.cnf(), CompileMode::XDFirst);
      const Value v = evaluate_2amc(shuffled(r.circuit, rng), inst.cnf());
      EXPECT_TRUE(scores_agree(v, r.value, 1e-9));
    }
  }
}

TEST(Nnf, AmcEquivalenceWithoutOuterVariables) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> w(0.05, 0.95);
  for (int trial = 0; trial < 100; ++trial) {
    LabeledCnf t = random_cnf(rng, 10, 20);
    for (int v = 1; v <= t.num_vars; ++v) {
      const double p = w(rng);
      t.inner_labels[v] = p;
      t.inner_labels[-v] = 1 - p;
    }
    const Value got = pipeline(t, CompileMode::Free).value;
    const Value want = brute_force_amc(t, SemiringId::Probability, [&](int l) { return t.inner_label(l); });
    EXPECT_TRUE(approx_equal(std::get<double>(got), std::get<double>(want), 1e-9, 1e-12));
  }
}

TEST(Nnf, SmoothCircuitsHaveNoMixedTagOrNodes) {
  // evaluate_2amc asserts coherence; any mismatch would throw.
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = random_instance(rng, Family::Map);
    EXPECT_NO_THROW(pipeline(inst.cnf(), CompileMode::XFirst));
  }
}
