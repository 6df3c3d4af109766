#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"
#include "twoamc/cli.hpp"

using namespace twoamc;
using namespace twoamc::testing;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "twoamc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string prog(const char* name) { return programs_dir() + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("twoamc_cli_" + name);
  std::ofstream(path) << content;
  return path.string();
}

std::string lex_map_cnf() {
  return temp_file("lexmap.cnf", emit_cnf(build_instance(parse_program(read_program("lex.pl")), TaskKind::Map).cnf()));
}

bool has(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, SolveGoldenValues) {
  EXPECT_TRUE(has(run({"solve", prog("lex.pl"), "--task", "succ"}).out, "result.value: 0.4\n"));
  EXPECT_TRUE(has(run({"solve", prog("lex.pl"), "--task", "map"}).out, "result.value: 0.6 {\\+c}\n"));
  EXPECT_TRUE(has(run({"solve", prog("leu.pl"), "--task", "meu", "--format", "kv"}).out, "result value 48 {a}\n"));
  const CliRun sm = run({"solve", prog("lsm.pl"), "--task", "smp", "--mode", "x"});
  EXPECT_EQ(sm.code, 0);
  EXPECT_TRUE(has(sm.out, "result.value: 0.5\n"));
}

TEST(Cli, KvOutputIsDeterministicPerSeed) {
  const auto a = run({"solve", prog("lsm.pl"), "--task", "smp", "--format", "kv", "--seed", "3"});
  const auto b = run({"solve", prog("lsm.pl"), "--task", "smp", "--format", "kv", "--seed", "3"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(has(a.out, "seconds"));
}

TEST(Cli, StatsFileHasTimings) {
  const auto path = std::filesystem::temp_directory_path() / "twoamc_cli_stats.txt";
  ASSERT_EQ(run({"solve", prog("lex.pl"), "--task", "succ", "--stats", path.string()}).code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_TRUE(has(ss.str(), "compile seconds "));
  EXPECT_TRUE(has(ss.str(), "result value 0.4\n"));
}

TEST(Cli, CompileEvalVerifyRoundTrip) {
  const std::string cnf = lex_map_cnf();
  const auto nnf = std::filesystem::temp_directory_path() / "twoamc_cli_lex.nnf";
  ASSERT_EQ(run({"compile", cnf, "-o", nnf.string(), "--mode", "xd", "--smooth"}).code, 0);
  const CliRun e = run({"eval", nnf.string(), cnf});
  EXPECT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(has(e.out, "0.6 {\\+c}"));
  const CliRun v = run({"verify", nnf.string(), cnf, "--format", "kv"});
  EXPECT_EQ(v.code, 0);
  EXPECT_TRUE(has(v.out, "verify smooth true\n"));
  EXPECT_TRUE(has(v.out, "verify equivalent true\n"));
}

TEST(Cli, CompileToStdout) {
  const CliRun r = run({"compile", lex_map_cnf()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NO_THROW(parse_nnf(r.out));
}

TEST(Cli, EvalRejectsMismatchedVariableCounts) {
  const std::string nnf = temp_file("taut.nnf", "nnf 3 2 2\nL 1\nL -1\nO 1 2 0 1\n");
  const CliRun r = run({"eval", nnf, lex_map_cnf()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, DefinedAndOracle) {
  const CliRun d = run({"defined", lex_map_cnf(), "--format", "kv"});
  EXPECT_EQ(d.code, 0);
  EXPECT_TRUE(has(d.out, "definability defined {a}\n"));
  const CliRun b = run({"defined", lex_map_cnf(), "--base", "1", "2", "--format", "kv"});
  EXPECT_TRUE(has(b.out, "definability defined {c,d}\n")) << b.out;
  EXPECT_TRUE(has(run({"oracle", prog("lex.pl"), "--task", "map"}).out, "0.6 {\\+c}"));
  EXPECT_TRUE(has(run({"oracle", lex_map_cnf()}).out, "0.6"));
}

TEST(Cli, Separation) {
  const CliRun r = run({"separation", "--n", "2..4", "--format", "kv"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "x_boundary 16"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"solve", "/nonexistent.pl", "--task", "succ"}).code, 1);
  EXPECT_EQ(run({"solve", temp_file("bad.pl", "p :- p."), "--task", "succ"}).code, 1);
  EXPECT_EQ(run({"solve", prog("lex.pl"), "--task", "meu"}).code, 1);
  EXPECT_EQ(run({"solve", prog("lex.pl"), "--task", "bogus"}).code, 1);
  EXPECT_EQ(run({"solve", prog("lsm.pl"), "--task", "smp", "--cache-mb", "0"}).code, 2);
  EXPECT_EQ(run({}).code, 1);
}
