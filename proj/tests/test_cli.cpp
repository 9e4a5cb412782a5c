#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

Outcome run_cli(const std::string& args) {
  const auto err_file = fs::temp_directory_path() / "bcall_cli_err.txt";
  const std::string cmd = std::string(BCALL_CLI_PATH) + " " + args + " > /dev/null 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_file);
  std::stringstream ss;
  ss << in.rdbuf();
  o.err = ss.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, StdpWritesCurveAndManifest) {
  const auto out = scratch("bcall_cli_stdp");
  const auto o = run_cli("stdp --step-ms 2 --out " + out.string());
  ASSERT_EQ(o.code, 0) << o.err;
  std::ifstream in(out / "curve.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 61);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m.at("subcommand"), "stdp");
  EXPECT_TRUE(m.at("config").contains("theta_w"));
}

TEST(Cli, ConfigErrorIsOneJsonLineWithField) {
  const auto o = run_cli("stdp --theta-w 1.5 --out " + scratch("bcall_cli_bad").string());
  EXPECT_EQ(o.code, 2);
  const auto j = nlohmann::json::parse(o.err);
  EXPECT_EQ(j.at("error"), "config");
  EXPECT_EQ(j.at("field"), "theta_w");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  const auto o = run_cli("stdp --step-ms");
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(nlohmann::json::parse(o.err).at("error"), "usage");
}

TEST(Cli, RuntimeErrorExitsWithOne) {
  const auto o = run_cli("analyze --metric sync --input /nonexistent.csv --out " + scratch("bcall_cli_rt").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_TRUE(nlohmann::json::parse(o.err).contains("message"));
}

TEST(Cli, ManifestRerunReproducesOutputs) {
  const auto a = scratch("bcall_cli_pair_a");
  const auto b = scratch("bcall_cli_pair_b");
  ASSERT_EQ(run_cli("pair --duration-s 0.3 --seed 5 --out " + a.string()).code, 0);
  ASSERT_EQ(run_cli("pair --config " + (a / "manifest.json").string() + " --out " + b.string()).code, 0);
  for (const char* f : {"curve.csv", "spikes_pre.csv", "spikes_post.csv", "manifest.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
