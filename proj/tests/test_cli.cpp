#include "etdgt/cli.hpp"
#include "etdgt/errors.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace etdgt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "etdgt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("etdgt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string case1() const { return fixture::data_path("case1.json").string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesTracesAndSummary) {
  const auto r = cli({"run", "--scenario", case1(), "-K", "200", "--alg", "etdgt", "--alg",
                      "ddgt", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "case1_etdgt.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "case1_ddgt.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "case1_oracle.json"));
  const auto summary = nlohmann::json::parse(slurp(dir_ / "case1_summary.json"));
  const double ratio = summary.at("ratio").get<double>();
  EXPECT_GT(ratio, 0.0);
  EXPECT_LT(ratio, 1.0);
  EXPECT_TRUE(summary.at("runs").contains("etdgt"));
  EXPECT_TRUE(summary.at("bounds").contains("theorem2"));
  EXPECT_NE(r.out.find("ratio"), std::string::npos);
}

TEST_F(CliTest, ZeroThresholdMatchesPeriodic) {
  const auto a = cli({"run", "--scenario", case1(), "-K", "300", "--alg", "etdgt",
                      "--threshold-E", "0", "--out", (dir_ / "et").string()});
  const auto b = cli({"run", "--scenario", case1(), "-K", "300", "--alg", "ddgt", "--out",
                      (dir_ / "dd").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(dir_ / "et" / "case1_etdgt.csv"), slurp(dir_ / "dd" / "case1_ddgt.csv"));
}

TEST_F(CliTest, DeterministicBytes) {
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(cli({"run", "--scenario", case1(), "-K", "250", "--out", (dir_ / sub).string()}).code,
              0);
  }
  EXPECT_EQ(slurp(dir_ / "a" / "case1_etdgt.csv"), slurp(dir_ / "b" / "case1_etdgt.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "case1_summary.json"), slurp(dir_ / "b" / "case1_summary.json"));
}

TEST_F(CliTest, BoundsReportListsConstants) {
  const auto r = cli({"bounds", "--scenario", case1()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"lemma5", "theorem1", "theorem2", "inputs"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const std::string text = j.dump();
  for (const char* name : {"c0", "c5", "b1", "b4", "d1", "d13", "h1", "h8", "gamma", "lambda",
                           "nu", "beta", "k0", "Psi_lower"}) {
    EXPECT_NE(text.find(std::string("\"") + name + "\""), std::string::npos) << name;
  }
}

TEST_F(CliTest, OracleSubcommand) {
  const auto r = cli({"oracle", "--scenario", case1(), "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("W_star").at(0).at(0).get<double>(), 76.7398, 1e-3);
}

TEST_F(CliTest, GenWritesScenario) {
  const auto r = cli({"gen", "-n", "20", "--seed", "3", "--out", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto path = dir_ / "gen_n20_s3.json";
  ASSERT_TRUE(fs::exists(path));
  EXPECT_EQ(load_scenario(path), gen_large_scenario(20, 54.0 / 118.0, 3));
}

TEST_F(CliTest, ExitCodes) {
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << "{ \"name\": \"x\", ";
  EXPECT_EQ(cli({"run", "--scenario", bad.string()}).code, 2);
  EXPECT_EQ(cli({"run", "--scenario", (dir_ / "missing.json").string()}).code, 2);
  EXPECT_EQ(cli({"run", "--scenario", case1(), "--alg", "nope"}).code, 2);
  EXPECT_EQ(cli({"run"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"run", "--scenario", case1(), "--alpha", "-1", "--out", dir_.string()}).code, 2);
  EXPECT_EQ(exit_code_for(NonConvergence("x")), 3);
  EXPECT_EQ(exit_code_for(InvalidScenario("x")), 2);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}
