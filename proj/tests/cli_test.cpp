#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace ymimo::cli {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ymimo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, DofCheckMemberExitsZero) {
  const auto r = invoke({"dof", "check", "--k", "4", "--n", "6", "--dof", "all=1"});
  EXPECT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["member"], true);
  EXPECT_EQ(j["tight"].size(), 24u);
}

TEST(Cli, DofCheckViolationExitsOneWithWitness) {
  const auto r = invoke({"dof", "check", "--k", "4", "--n", "6", "--dof", "1_2=7"});
  EXPECT_EQ(r.code, kExitViolation);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["member"], false);
  EXPECT_EQ(j["witness"], nlohmann::json({1, 2, 3, 4}));
  EXPECT_NE(r.err.find("(1,2,3,4)"), std::string::npos);
  EXPECT_TRUE(invoke({"dof", "check", "--dof", "1_2=7", "--quiet"}).err.empty());
}

TEST(Cli, PlanInfeasibleExitsOne) {
  const auto r = invoke({"plan", "--k", "4", "--n", "6", "--dof", "1_2=7"});
  EXPECT_EQ(r.code, kExitViolation);
  EXPECT_NE(r.err.find("excess 1"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sweep", "--trials", "many"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sweep", "--trials", "0"}).code, kExitUsage);
  EXPECT_EQ(invoke({"dof", "check", "--dof", "1_1=1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"plan", "--out", "xml"}).code, kExitUsage);
  EXPECT_EQ(invoke({"simulate", "--k", "2"}).code, kExitUsage);
  EXPECT_EQ(invoke({"sweep", "--config", "/nonexistent.toml"}).code, kExitUsage);
  EXPECT_EQ(invoke({"dof", "gap", "--k", "5"}).code, kExitUsage);
  EXPECT_EQ(invoke({"dof"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST(Cli, MppiCheck) {
  const auto r = invoke({"mppi-check", "--k", "3", "--m", "4", "--n", "2", "--seed", "7"});
  EXPECT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["ok"], true);
  EXPECT_EQ(j["users"].size(), 3u);
  const auto csv = invoke({"mppi-check", "--out", "csv"});
  EXPECT_EQ(csv.out.rfind("user,alpha,beta,", 0), 0u);
}

TEST(Cli, SimulateNoiseless) {
  const auto r = invoke({"simulate", "--noise", "off", "--power-db", "20"});
  EXPECT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["streams"].size(), 12u);
  for (const auto& s : j["streams"]) EXPECT_LE(s["relative_error"].get<double>(), 1e-8);
}

TEST(Cli, DofSubcommands) {
  const auto sum = nlohmann::json::parse(invoke({"dof", "sumdof", "--k", "4", "--n", "6"}).out);
  EXPECT_EQ(sum["sum_dof"], "12");
  EXPECT_EQ(sum["certificate_verified"], true);

  const auto gap = nlohmann::json::parse(invoke({"dof", "gap", "--k", "4", "--n", "6"}).out);
  EXPECT_EQ(gap["found"], true);
  EXPECT_EQ(gap["witness"]["member"], true);
  const auto none = nlohmann::json::parse(invoke({"dof", "gap", "--pairs", "1_2"}).out);
  EXPECT_EQ(none["found"], false);

  const auto v = invoke({"dof", "vertices-k3", "--n", "1", "--out", "csv"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_EQ(v.out.rfind("d_1_2,d_1_3,d_2_1,d_2_3,d_3_1,d_3_2\n0,0,0,0,0,0\n", 0), 0u);
}

TEST(Cli, ConfigFileThenFlagOverrides) {
  const std::string path = testing::TempDir() + "ymimo_cli_test.toml";
  {
    std::ofstream f(path);
    f << "k = 3\nm = 2\nn = 2\ndof = \"1_2=1,2_3=1\"\nsweep_db = 10:10:30\ntrials = 2\nseed = 4\n";
  }
  const auto a = invoke({"sweep", "--config", path});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("# config=k=3 m=2 n=2 dof=1_2=1,2_3=1 sweep_db=10,20,30 trials=2 seed=4"), std::string::npos);
  const auto b = invoke({"sweep", "--config", path, "--seed", "5", "--mode", "raw"});
  EXPECT_NE(b.out.find("trials=2 seed=5 mode=raw"), std::string::npos);
}

TEST(Cli, RepeatedInvocationsAreByteIdentical) {
  const std::vector<std::vector<std::string>> cmds{
      {"sweep", "--sweep-db", "30:10:50", "--trials", "4", "--seed", "11"},
      {"sweep", "--sweep-db", "30:10:50", "--trials", "4", "--seed", "11", "--out", "json", "--mode", "raw"},
      {"dof", "check", "--dof", "1_2=3,2_3=3,3_1=3"},
      {"dof", "sumdof", "--k", "3", "--n", "4"},
      {"dof", "gap", "--k", "3", "--n", "2"},
      {"dof", "vertices-k3", "--n", "2"},
  };
  for (const auto& c : cmds) {
    const auto a = invoke(c);
    const auto b = invoke(c);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out) << c[0];
  }
}

TEST(Cli, SweepMatchesGoldenFile) {
  const auto r = invoke({"sweep", "--k", "4", "--m", "6", "--n", "6", "--dof", "all=1", "--sweep-db", "30:10:60",
                         "--trials", "8", "--seed", "2024"});
  ASSERT_EQ(r.code, kExitOk);
  const std::string golden = read_file(std::string(YMIMO_GOLDEN_DIR) + "/sweep_k4_n6_seed2024.csv");
  ASSERT_FALSE(golden.empty()) << "golden file missing";
  EXPECT_EQ(r.out, golden);
}

}  // namespace
}  // namespace ymimo::cli
