#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hslopes/cli.hpp"

using hslopes::cli::run;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hslopes_test_" + name);
}

}  // namespace

TEST(Cli, FormulaByAlias) {
  const auto r = call({"formulas", "--name", "mango", "--mu", "1", "--h", "1", "--alpha", "0.5"});
  ASSERT_EQ(r.code, hslopes::cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("value").get<double>(), 0.34816, 1e-5);
  EXPECT_TRUE(j.at("domain_ok").get<bool>());
  EXPECT_EQ(j.at("schema").get<int>(), 1);
  EXPECT_TRUE(j.contains("params"));
}

TEST(Cli, FormulaListAndDomainError) {
  const auto list = call({"formulas", "--list"});
  EXPECT_EQ(list.code, 0);
  EXPECT_NE(list.out.find("laplace_cycle"), std::string::npos);
  const auto bad = call({"formulas", "--name", "laplace_cycle", "--alpha", "-5", "--no-timestamp"});
  EXPECT_EQ(bad.code, hslopes::cli::kExitCheckFailed);
  EXPECT_FALSE(json::parse(bad.out).at("domain_ok").get<bool>());
  EXPECT_EQ(call({"formulas", "--name", "no_such_formula"}).code, hslopes::cli::kExitConfigError);
}

TEST(Cli, UnknownFlagIsAConfigError) {
  const auto r = call({"verify", "--no-such-flag", "3"});
  EXPECT_EQ(r.code, hslopes::cli::kExitConfigError);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(call({}).code, hslopes::cli::kExitConfigError);
  EXPECT_EQ(call({"verify", "--h", "-1"}).code, hslopes::cli::kExitConfigError);
}

TEST(Cli, ExtractConstantSeriesGivesHeaderOnly) {
  std::string csv = "t,value\n";
  for (int k = 0; k < 100; ++k) csv += std::to_string(k) + ",1.5\n";
  const auto r = call({"extract", "--h", "1"}, csv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "t,value,kind\n");
}

TEST(Cli, ExtractZigZag) {
  const auto r = call({"extract", "--h", "1"}, "0,0\n1,2\n2,0\n3,2\n4,0\n");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows[0], "t,value,kind");
  // The first confirmation is the start of the series, not an h-extremum.
  EXPECT_NE(rows[1].find("max"), std::string::npos);
  EXPECT_NE(rows[2].find("min"), std::string::npos);
}

TEST(Cli, ExtractRejectsMalformedInput) {
  EXPECT_EQ(call({"extract", "--h", "1"}, "0,0\n1,abc\n").code, hslopes::cli::kExitConfigError);
  EXPECT_EQ(call({"extract", "--h", "1"}, "0,0\n0,1\n").code, hslopes::cli::kExitConfigError);
}

TEST(Cli, VerifyPassesAtDefaults) {
  const auto r = call({"verify", "--mu", "1", "--h", "1", "--seed", "7", "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("command").get<std::string>(), "verify");
  EXPECT_FALSE(j.contains("generated_at"));
  std::set<std::string> names;
  for (const auto& c : j.at("checks")) names.insert(c.at("name").get<std::string>());
  for (const char* n : {"mean_excess_up", "mean_excess_down", "mean_len_up", "mean_len_down", "mean_cycle",
                        "prob_cover_up", "laplace_cycle", "laplace_len_up"})
    EXPECT_TRUE(names.count(n)) << n;
  EXPECT_EQ(j.at("ks").size(), 2u);
}

TEST(Cli, SameSeedSameReport) {
  const std::vector<std::string> args{"verify", "--dt", "1e-3", "--replicas", "4", "--horizon-cycles", "50",
                                      "--seed", "3", "--no-timestamp"};
  const auto a = call(args), b = call(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
  const auto with_time = call({"formulas", "--name", "mango"});
  EXPECT_TRUE(json::parse(with_time.out).contains("generated_at"));
}

TEST(Cli, ReportEmbedsResolvedConfig) {
  const auto r = call({"verify", "--dt", "1e-3", "--replicas", "3", "--horizon-cycles", "50", "--seed", "19",
                       "--no-timestamp"});
  const auto cfg = json::parse(r.out).at("config");
  EXPECT_EQ(cfg.at("replicas").get<int>(), 3);
  EXPECT_EQ(cfg.at("seed").get<std::uint64_t>(), 19u);
  EXPECT_DOUBLE_EQ(cfg.at("dt").get<double>(), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.at("mu").get<double>(), 1.0);
}

TEST(Cli, ConfigFileAndEnvironmentSeed) {
  const auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << R"({"dt": 0.001, "replicas": 2, "horizon-cycles": 50, "seed": 23})";
  }
  const auto r = call({"verify", "--config", path.string(), "--no-timestamp"});
  ASSERT_NE(r.code, hslopes::cli::kExitConfigError) << r.err;
  const auto cfg = json::parse(r.out).at("config");
  EXPECT_EQ(cfg.at("seed").get<std::uint64_t>(), 23u);
  EXPECT_EQ(cfg.at("replicas").get<int>(), 2);
  // Command-line flags win over the file.
  const auto o = call({"verify", "--config", path.string(), "--seed", "29", "--no-timestamp"});
  EXPECT_EQ(json::parse(o.out).at("config").at("seed").get<std::uint64_t>(), 29u);
  std::filesystem::remove(path);

  ::setenv("HSLOPES_SEED", "31", 1);
  const auto e = call({"verify", "--dt", "1e-3", "--replicas", "2", "--horizon-cycles", "50", "--no-timestamp"});
  ::unsetenv("HSLOPES_SEED");
  EXPECT_EQ(json::parse(e.out).at("config").at("seed").get<std::uint64_t>(), 31u);
}

TEST(Cli, OutputFile) {
  const auto path = temp_file("report.json");
  const auto r = call({"formulas", "--name", "mean_cycle", "--output", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(path);
  const auto j = json::parse(f);
  EXPECT_NEAR(j.at("value").get<double>(), 2.76220, 1e-5);
  std::filesystem::remove(path);
}

TEST(Cli, SmallSdeAndPalmRuns) {
  const auto s = call({"sde", "--dt", "1e-3", "--eps", "0.2", "--n-paths", "300", "--no-timestamp"});
  EXPECT_NE(s.code, hslopes::cli::kExitConfigError) << s.err;
  EXPECT_TRUE(json::parse(s.out).at("config").contains("eps"));
  const auto p = call({"palm", "--dt", "1e-2", "--pool-size", "1000", "--direct-replicas", "100", "--stationary",
                       "100", "--no-timestamp"});
  EXPECT_NE(p.code, hslopes::cli::kExitConfigError) << p.err;
  EXPECT_EQ(call({"palm", "--pool-size", "10"}).code, hslopes::cli::kExitConfigError);
  EXPECT_EQ(call({"sde", "--eps", "1.5"}).code, hslopes::cli::kExitConfigError);
}

TEST(Cli, SinaiRun) {
  const auto r = call({"sinai", "--n-sites", "200000", "--no-timestamp"});
  EXPECT_NE(r.code, hslopes::cli::kExitConfigError) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j.contains("pass"));
  EXPECT_EQ(call({"sinai", "--delta", "0"}).code, hslopes::cli::kExitConfigError);
}
