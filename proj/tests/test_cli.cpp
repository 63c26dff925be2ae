#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(WISQ_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(WISQ_CONFIG_DIR) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() / ("wisq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string out_dir() const { return "--out-dir " + dir.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_F(Cli, VerifyPassingSuiteExitsZero) {
  const CliResult r = run("--config " + config("quick.json") + " " + out_dir() + " verify lemA lem31");
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / "lemA.json"));
  EXPECT_EQ(j.at("status"), "pass");
  EXPECT_TRUE(fs::exists(dir / "lem31.json"));
}

TEST_F(Cli, RefusedSuiteExitsNonZero) {
  const CliResult r = run("--config " + config("linear_weight_refused.json") + " " + out_dir() + " verify thm1");
  EXPECT_NE(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "thm1.json"));
  EXPECT_EQ(j.at("status"), "refused");
}

TEST_F(Cli, LambdaAtThresholdRefused) {
  const CliResult r = run("--config " + config("lambda_at_threshold.json") + " " + out_dir() + " verify thm3");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("refused"), std::string::npos) << r.out;
}

TEST_F(Cli, CsvFormatAndReportSummary) {
  CliResult r = run("--config " + config("quick.json") + " " + out_dir() + " --format csv verify lemA");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "lemA.csv"));
  EXPECT_TRUE(fs::exists(dir / "lemA_rows.csv"));
  r = run("--config " + config("quick.json") + " " + out_dir() + " verify lem31");
  ASSERT_EQ(r.code, 0) << r.out;
  r = run(out_dir() + " report");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("lem31"), std::string::npos);
}

TEST_F(Cli, SeedFlagChangesHash) {
  ASSERT_EQ(run("--config " + config("quick.json") + " " + out_dir() + " verify lem31").code, 0);
  const auto a = nlohmann::json::parse(slurp(dir / "lem31.json")).at("config_hash");
  ASSERT_EQ(run("--config " + config("quick.json") + " --seed 9 " + out_dir() + " verify lem31").code, 0);
  const auto b = nlohmann::json::parse(slurp(dir / "lem31.json")).at("config_hash");
  EXPECT_NE(a, b);
}

TEST_F(Cli, ApConstPrintsJson) {
  const CliResult r = run("--config " + config("inverse_sqrt_weight.json") + " apconst --p 2 3");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.at("a1_pass").get<bool>());
  EXPECT_EQ(j.at("critical_index").get<double>(), 1.0);
  EXPECT_EQ(j.at("ap_constant").size(), 2u);
}

TEST_F(Cli, AtomGenThenCheck) {
  CliResult r = run("--config " + config("quick.json") + " " + out_dir() + " atom gen");
  ASSERT_EQ(r.code, 0) << r.out;
  std::string files;
  for (const auto& e : fs::directory_iterator(dir)) files += " " + e.path().string();
  r = run("--config " + config("quick.json") + " atom check" + files);
  EXPECT_EQ(r.code, 0) << r.out;
  // A doubled atom violates the norm bound.
  const fs::path first = dir / "atom_0000.csv";
  std::ifstream in(first);
  std::string header, cols, line;
  std::getline(in, header);
  std::getline(in, cols);
  std::ofstream out(dir / "doubled.csv");
  out << header << '\n' << cols << '\n';
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    out << line.substr(0, comma + 1) << 2.0 * std::stod(line.substr(comma + 1)) << '\n';
  }
  out.close();
  r = run("--config " + config("quick.json") + " atom check " + (dir / "doubled.csv").string());
  EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, SquareFunctionCsv) {
  const CliResult r = run("--config " + config("quick.json") + " " + out_dir() + " sq gstar --atom 1 --lambda 6");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j.at("weak_norm").get<double>(), 0.0);
  const std::string csv = slurp(dir / "sq_gstar_atom1.csv");
  EXPECT_EQ(csv.rfind("x,value\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 129);
}

TEST_F(Cli, PlaneConfigRuns) {
  const CliResult r = run("--config " + config("plane.json") + " " + out_dir() + " sq s --atom 0");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, BadInvocations) {
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("verify thm9").code, 0);
  EXPECT_NE(run("--format xml verify lemA").code, 0);
  EXPECT_NE(run("--config /nonexistent.json verify lemA").code, 0);
  EXPECT_NE(run("--config " + config("quick.json") + " sq g --atom 99").code, 0);
}
