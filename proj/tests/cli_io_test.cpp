// Copyright 2026 The rtgs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rtgs/io/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace rtgs::io {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("rtgs_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "rtgs_sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), err);
  if (err_text) *err_text = err.str();
  return rc;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

const char* kSmallSweep =
    "n_banks = 3\n"
    "day_length = 150\n"
    "grid_max = 6\n"
    "exploration_days = 30\n"
    "max_days = 300\n"
    "kappas = 0.5, 8\n"
    "plays_per_point = 2\n"
    "comparison_days = 5\n"
    "ladder_days = 5\n";

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  int i = 0;
  while (std::getline(in, line))
    if (i++ >= 2) out.push_back(line);
  return out;
}

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config_text("");
  EXPECT_EQ(c.play.n_banks, 15);
  EXPECT_EQ(c.play.costs.day_length, 10000);
  EXPECT_EQ(c.play.costs.lambda, 1);
  EXPECT_EQ(c.play.grid.max_level(), 80);
  EXPECT_EQ(c.play.grid.step(), 2);
  EXPECT_EQ(c.play.grid.size(), 41);
  EXPECT_EQ(c.play.convergence_window, 10);
  EXPECT_EQ(c.play.exploration_days, 500);
  EXPECT_EQ(c.play.max_days, 5000);
  EXPECT_EQ(c.play.costs.throughput_threshold, 1000);
  EXPECT_EQ(c.play.costs.throughput_penalty, 64);
  EXPECT_EQ(c.kappas, default_kappas());
  EXPECT_EQ(c.plays_per_point, 5);
}

TEST(Config, SingleBankRejectedNamingField) {
  try {
    parse_config_text("n_banks = 1\n");
    FAIL() << "expected InvalidConfiguration";
  } catch (const InvalidConfiguration& e) {
    EXPECT_EQ(e.field(), "n_banks");
    EXPECT_NE(std::string(e.what()).find("n_banks"), std::string::npos);
  }
}

TEST(Config, UnknownDuplicateAndMalformed) {
  EXPECT_THROW(parse_config_text("colour = blue\n"), InvalidConfiguration);
  EXPECT_THROW(parse_config_text("seed = 1\nseed = 2\n"), InvalidConfiguration);
  EXPECT_THROW(parse_config_text("seed\n"), InvalidConfiguration);
  EXPECT_THROW(parse_config_text("n_banks = fifteen\n"), InvalidConfiguration);
  EXPECT_THROW(parse_config_text("kappas =\n"), InvalidConfiguration);
  EXPECT_THROW(parse_config_file("/nonexistent/rtgs.cfg"), InvalidConfiguration);
}

TEST(Config, CommentsAndThresholdDefault) {
  const RunConfig c = parse_config_text("# header\nday_length = 500  # half a day\n\nkappas = 8\n");
  EXPECT_EQ(c.play.costs.day_length, 500);
  EXPECT_EQ(c.play.costs.throughput_threshold, 50);
  EXPECT_EQ(c.kappas, std::vector<double>{8});
}

TEST(Config, RoundTrip) {
  const RunConfig a = parse_config_text(
      "n_banks = 7\nkappas = 0.1, 3.3333333333333335, 1e-7\nkappa = 0.30000000000000004\n"
      "scenario = incident\nthroughput_penalty_mode = per_bank\nseed = 18446744073709551615\nfixed_levels = 2\nsizes = 4, 9\n");
  const RunConfig b = parse_config_text(emit_config(a));
  EXPECT_EQ(a, b);
  EXPECT_EQ(parse_config_text(emit_config(RunConfig{})), RunConfig{});
}

TEST(Config, RealsRoundTripExactly) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, static_cast<int>(gen() % 20) - 10);
    EXPECT_EQ(std::strtod(format_real(v).c_str(), nullptr), v);
  }
}

TEST(Emit, CsvHasSchemaRowAndRejectsShortRows) {
  Csv csv("demo", {"a", "b"});
  csv.cell(1).cell(0.5);
  csv.end_row();
  EXPECT_EQ(csv.str(), "# rtgs-sim demo schema v1\na,b\n1,0.5\n");
  csv.cell(1);
  EXPECT_THROW(csv.end_row(), std::logic_error);
}

TEST(Emit, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Emit, UncommittedOutputIsRemoved) {
  TempDir dir;
  {
    OutputSet out(dir.path());
    out.write("a.csv", "x\n");
    EXPECT_TRUE(fs::exists(dir.path() / "a.csv"));
  }
  EXPECT_FALSE(fs::exists(dir.path() / "a.csv"));
}

TEST(Emit, ZeroDayPlayHasHeaderOnlyTrajectory) {
  PlayConfig c;
  c.n_banks = 2;
  c.max_days = 0;
  const auto csv = play_trajectory_csv(run_play(c), 2);
  EXPECT_EQ(csv,
            "# rtgs-sim play_trajectory schema v1\n"
            "day,total_liquidity,mean_delay,action_0,action_1,payoff_0,payoff_1\n");
}

TEST(Cli, UsageErrorsExitTwo) {
  std::string err;
  EXPECT_EQ(cli({}, &err), 2);
  EXPECT_EQ(cli({"frobnicate"}), 2);
  EXPECT_EQ(cli({"sweep", "--scenario", "weekend"}), 2);
  EXPECT_EQ(cli({"sweep", "--plays", "0"}), 2);
  EXPECT_EQ(cli({"sweep", "--config", "/nonexistent.cfg"}), 2);
  EXPECT_EQ(cli({"sweep", "--seed", "-3"}), 2);
}

TEST(Cli, InvalidConfigExitsTwoWithFieldName) {
  TempDir dir;
  const auto cfg = write_file(dir.path() / "bad.cfg", "n_banks = 1\n");
  std::string err;
  EXPECT_EQ(cli({"play", "--config", cfg.string(), "--out", (dir.path() / "o").string()}, &err), 2);
  EXPECT_NE(err.find("n_banks"), std::string::npos);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(cli({"--help"}), 0); }

TEST(Cli, RuntimeFailureExitsOne) {
  TempDir dir;
  const auto blocker = write_file(dir.path() / "file", "not a directory");
  const auto cfg = write_file(dir.path() / "c.cfg", "n_banks = 2\nmax_days = 0\n");
  EXPECT_EQ(cli({"play", "--config", cfg.string(), "--out", (blocker / "sub").string()}), 1);
}

TEST(Cli, SweepIsByteIdenticalAcrossRuns) {
  TempDir dir;
  const auto cfg = write_file(dir.path() / "s.cfg", kSmallSweep);
  for (const char* name : {"r1", "r2"})
    ASSERT_EQ(cli({"sweep", "--config", cfg.string(), "--seed", "42", "--out", (dir.path() / name).string()}), 0);
  const auto m1 = nlohmann::json::parse(slurp(dir.path() / "r1" / "manifest.json"));
  const auto m2 = nlohmann::json::parse(slurp(dir.path() / "r2" / "manifest.json"));
  EXPECT_EQ(m1["files"], m2["files"]);
  EXPECT_EQ(m1["seed"], 42);
  for (const auto& [name, sum] : m1["files"].items()) {
    const std::string a = slurp(dir.path() / "r1" / name);
    EXPECT_EQ(a, slurp(dir.path() / "r2" / name)) << name;
    EXPECT_EQ(sha256_hex(a), sum.get<std::string>()) << name;
  }
  const auto demand = slurp(dir.path() / "r1" / "demand_curve.csv");
  EXPECT_EQ(data_lines(demand).size(), 2u);
  EXPECT_FALSE(fs::exists(dir.path() / "r1" / "scenario_delta.csv"));
  EXPECT_FALSE(fs::exists(dir.path() / "r1" / "manifest.json.tmp"));
}

TEST(Cli, ManifestReproducesRun) {
  TempDir dir;
  const auto cfg = write_file(dir.path() / "s.cfg", kSmallSweep);
  ASSERT_EQ(cli({"play", "--config", cfg.string(), "--seed", "5", "--out", (dir.path() / "a").string()}), 0);
  // config.txt carries every field, so it alone reproduces the run.
  ASSERT_EQ(cli({"play", "--config", (dir.path() / "a" / "config.txt").string(), "--out",
                 (dir.path() / "b").string()}),
            0);
  EXPECT_EQ(slurp(dir.path() / "a" / "trajectory.csv"), slurp(dir.path() / "b" / "trajectory.csv"));
}

TEST(Cli, DefaultSweepHasSevenDemandRows) {
  RunConfig c = parse_config_text("n_banks = 3\nday_length = 100\ngrid_max = 4\nexploration_days = 20\n"
                                  "max_days = 100\nplays_per_point = 1\n");
  const auto sweep = run_sweep(c.play, c.kappas, c.plays_per_point);
  EXPECT_EQ(data_lines(demand_curve_csv(demand_curve(sweep), 3)).size(), 7u);
}

TEST(Cli, IncidentSweepEmitsDeltaColumns) {
  TempDir dir;
  const auto cfg = write_file(dir.path() / "s.cfg", kSmallSweep);
  ASSERT_EQ(cli({"sweep", "--config", cfg.string(), "--scenario", "incident", "--out", dir.path().string()}), 0);
  const std::string delta = slurp(dir.path() / "scenario_delta.csv");
  EXPECT_NE(delta.find("liquidity_delta"), std::string::npos);
  EXPECT_NE(delta.find("liquidity_delta_pct"), std::string::npos);
  EXPECT_EQ(data_lines(delta).size(), 2u);
  EXPECT_TRUE(fs::exists(dir.path() / "base_demand_curve.csv"));
}

TEST(Cli, PlayWithZeroDaysWritesHeaderOnlyTrajectory) {
  TempDir dir;
  const auto cfg = write_file(dir.path() / "c.cfg", "n_banks = 2\nmax_days = 0\n");
  ASSERT_EQ(cli({"play", "--config", cfg.string(), "--out", dir.path().string()}), 0);
  EXPECT_TRUE(data_lines(slurp(dir.path() / "trajectory.csv")).empty());
}

TEST(Cli, OtherSubcommandsProduceOutputs) {
  TempDir dir;
  const auto cfg = write_file(dir.path() / "c.cfg",
                              "n_banks = 3\nday_length = 100\ngrid_max = 4\nexploration_days = 20\n"
                              "max_days = 200\nkappas = 8\nplays_per_point = 1\nsizes = 2, 3\n"
                              "fixed_levels = 2\nfixed_days = 5\nnash_samples = 5\n");
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"fixed", {"fixed.csv", "fixed.json"}},
      {"size-study", {"size_study.csv", "plays.csv", "size_study.json"}},
      {"nash-check", {"nash.csv", "nash.json"}},
      {"day-trace", {"trace.log", "day.csv"}},
  };
  for (const auto& [sub, files] : cases) {
    const auto out = dir.path() / sub;
    ASSERT_EQ(cli({sub, "--config", cfg.string(), "--out", out.string()}), 0) << sub;
    for (const auto& f : files) EXPECT_TRUE(fs::exists(out / f)) << sub << "/" << f;
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
    EXPECT_TRUE(fs::exists(out / "config.txt"));
  }
  const auto size = slurp(dir.path() / "size-study" / "size_study.csv");
  EXPECT_EQ(data_lines(size).size(), 2u);
}

TEST(Cli, DayTraceMatchesGoldenFixture) {
  TempDir dir;
  const fs::path fixtures = RTGS_FIXTURE_DIR;
  ASSERT_EQ(cli({"day-trace", "--config", (fixtures / "day_trace.cfg").string(), "--seed", "7", "--out",
                 dir.path().string()}),
            0);
  EXPECT_EQ(slurp(dir.path() / "trace.log"), slurp(fixtures / "day_trace_seed7.log"));
}

}  // namespace
}  // namespace rtgs::io
