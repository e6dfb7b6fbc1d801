/* Copyright 2026 The AFD-Sizing Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "afd/cli/commands.h"
#include "afd/cli/config.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace afd::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kCoeffs =
    "coeffs.alpha_A = 0.00165\n"
    "coeffs.beta_A = 50\n"
    "coeffs.alpha_F = 0.083\n"
    "coeffs.beta_F = 100\n"
    "coeffs.alpha_C = 0.022\n"
    "coeffs.beta_C = 20\n";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome RunAfd(std::vector<std::string> args) {
  args.insert(args.begin(), "afd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = Main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("afd_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string Write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string Path(const std::string& name) const { return (path_ / name).string(); }
  static std::string Read(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  fs::path path_;
};

KeyValueConfig ParseText(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::Parse(in);
}

ExperimentConfig Build(const std::string& text) {
  return BuildExperimentConfig(ParseText(text));
}

TEST(ConfigTest, RoundTrip) {
  const std::string text = std::string("# comment\n") + kCoeffs +
                           "workload.mu_P = 100   # trailing\n"
                           "workload.mu_D = 500\n\n"
                           "sweep.r = 1, 2, 4\n"
                           "seed = 18446744073709551615\n";
  const auto kv = ParseText(text);
  const auto again = ParseText(kv.Serialize());
  EXPECT_EQ(kv, again);
  EXPECT_EQ(again.Get("sweep.r").value(), "1, 2, 4");
  EXPECT_EQ(again.Get("seed").value(), "18446744073709551615");
  EXPECT_EQ(again.entries().size(), 10u);
}

TEST(ConfigTest, RejectsUnknownAndDuplicateKeys) {
  EXPECT_THROW(ParseText("workload.mu_X = 3\n"), ConfigError);
  EXPECT_THROW(ParseText("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(ParseText("just words\n"), ConfigError);
}

TEST(ConfigTest, MissingCoefficientNamesKey) {
  try {
    Build("coeffs.alpha_A = 1\ncoeffs.beta_A = 1\n"
          "coeffs.alpha_F = 1\ncoeffs.beta_F = 1\ncoeffs.alpha_C = 1\n")
        .RequireCoeffs();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "coeffs.beta_C");
  }
}

TEST(ConfigTest, BadValuesNameTheirKey) {
  for (const char* text : {"workload.mu_P = -1\n", "workload.N = 1.5\n",
                           "bundle.B = 0\n", "sweep.r = 1, x\n", "seed = -4\n",
                           "run.stop = sometimes\n", "workload.p = 1\n",
                           "analytic.mode = eventually\n"}) {
    try {
      Build(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(std::string(text).substr(0, e.key().size()), e.key()) << text;
    }
  }
}

TEST(ConfigTest, PAndMuDAreExclusive) {
  EXPECT_THROW(Build("workload.p = 0.1\nworkload.mu_D = 9\n"), ConfigError);
  EXPECT_DOUBLE_EQ(Build("workload.p = 0.1\n").workload.p, 0.1);
  EXPECT_DOUBLE_EQ(Build("workload.mu_D = 9\n").workload.p, 0.1);
}

TEST(ConfigTest, EmptySeedListIsAnError) {
  try {
    Build("sweep.seeds =\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sweep.seeds");
  }
}

TEST(ConfigTest, SweepAxesDefaultToSingleValues) {
  const auto cfg = Build(std::string(kCoeffs) +
                         "workload.mu_P = 100\nworkload.mu_D = 500\n"
                         "bundle.r = 3\nbundle.B = 64\nseed = 7\n");
  EXPECT_EQ(cfg.sweep.r, std::vector<int>{3});
  EXPECT_EQ(cfg.sweep.B, std::vector<int>{64});
  EXPECT_EQ(cfg.sweep.mu_P, std::vector<double>{100});
  EXPECT_EQ(cfg.sweep.mu_D, std::vector<double>{500});
  EXPECT_EQ(cfg.seeds, std::vector<std::uint64_t>{7});
  ASSERT_TRUE(cfg.coeffs.has_value());
  EXPECT_EQ(*cfg.coeffs, LatencyCoefficients::Reference());
}

TEST(ConfigTest, CoefficientFileAndInlineOverride) {
  TempDir dir;
  dir.Write("coeffs.cfg", kCoeffs);
  const auto main = dir.Write("main.cfg", "coeffs.file = coeffs.cfg\ncoeffs.beta_F = 90\n");
  const auto cfg = BuildExperimentConfig(KeyValueConfig::ParseFile(main));
  ASSERT_TRUE(cfg.coeffs.has_value());
  EXPECT_EQ(cfg.coeffs->beta_F(), 90);
  EXPECT_EQ(cfg.coeffs->alpha_A(), 0.00165);
  const auto missing = dir.Write("bad.cfg", "coeffs.file = nowhere.cfg\n");
  try {
    BuildExperimentConfig(KeyValueConfig::ParseFile(missing));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "coeffs.file");
  }
}

TEST(ConfigTest, StreamSeedIgnoresGridShape) {
  const auto s = DeriveStreamSeed(1, 100, 500, PrefillDist::kConstant);
  EXPECT_EQ(s, DeriveStreamSeed(1, 100, 500, PrefillDist::kConstant));
  EXPECT_NE(s, DeriveStreamSeed(2, 100, 500, PrefillDist::kConstant));
  EXPECT_NE(s, DeriveStreamSeed(1, 101, 500, PrefillDist::kConstant));
  EXPECT_NE(s, DeriveStreamSeed(1, 100, 501, PrefillDist::kConstant));
  EXPECT_NE(s, DeriveStreamSeed(1, 100, 500, PrefillDist::kUniformBounded));
}

TEST(ExpandGridTest, NestingOrder) {
  const auto cfg = Build(std::string(kCoeffs) +
                         "sweep.B = 8, 16\nsweep.r = 1, 2\nsweep.seeds = 5, 6\n"
                         "workload.mu_P = 10\nworkload.mu_D = 10\n");
  const auto g = ExpandGrid(cfg);
  ASSERT_EQ(g.size(), 8u);
  EXPECT_EQ(g[0].B, 8);
  EXPECT_EQ(g[0].r, 1);
  EXPECT_EQ(g[0].seed, 5u);
  EXPECT_EQ(g[1].seed, 6u);
  EXPECT_EQ(g[2].r, 2);
  EXPECT_EQ(g[4].B, 16);
}

// ---- subcommands through Main ----------------------------------------------

TEST(MainTest, OptimizeBaseline) {
  TempDir dir;
  const auto cfg = dir.Write("b.cfg", std::string(kCoeffs) +
                                          "workload.mu_P = 100\nworkload.mu_D = 500\n"
                                          "workload.N = 10000\nbundle.B = 256\n");
  const auto res = RunAfd({"--config", cfg, "optimize"});
  ASSERT_EQ(res.code, kExitOk) << res.err;
  EXPECT_NE(res.out.find("r_star         = 9.32"), std::string::npos) << res.out;
  EXPECT_NE(res.out.find("regime         = AttentionBottleneck"), std::string::npos);

  const auto ffn = RunAfd({"--config", cfg, "--workload.mu_D", "100", "optimize"});
  ASSERT_EQ(ffn.code, kExitOk) << ffn.err;
  EXPECT_NE(ffn.out.find("r_star         = 2.169"), std::string::npos) << ffn.out;
  EXPECT_NE(ffn.out.find("regime         = FfnBottleneck"), std::string::npos);

  const auto curve_path = dir.Path("curve.csv");
  const auto curve = RunAfd({"--config", cfg, "--out", curve_path, "optimize",
                          "--r-min", "1", "--r-max", "4", "--r-step", "1"});
  ASSERT_EQ(curve.code, kExitOk) << curve.err;
  const auto text = TempDir::Read(curve_path);
  EXPECT_EQ(text.rfind("r,theory_throughput\n1,", 0), 0u) << text;
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(MainTest, MissingCoefficientIsConfigError) {
  const auto res = RunAfd({"--workload.mu_P", "100", "--workload.mu_D", "500",
                        "--bundle.B", "256", "--coeffs.alpha_A", "0.00165",
                        "optimize"});
  EXPECT_EQ(res.code, kExitConfigError);
  EXPECT_NE(res.err.find("coeffs.beta_A"), std::string::npos) << res.err;
}

TEST(MainTest, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(RunAfd({}).code, kExitConfigError);
  EXPECT_EQ(RunAfd({"frobnicate"}).code, kExitConfigError);
  EXPECT_EQ(RunAfd({"--config", "/nonexistent/afd.cfg", "optimize"}).code,
            kExitConfigError);
  EXPECT_EQ(RunAfd({"--help"}).code, kExitOk);
}

TEST(MainTest, SimulateIsByteStableAndWritesTrace) {
  TempDir dir;
  const auto cfg = dir.Write("s.cfg", std::string(kCoeffs) +
                                          "workload.mu_P = 100\nworkload.mu_D = 50\n"
                                          "workload.N = 200\nbundle.r = 2\nbundle.B = 16\n"
                                          "seed = 3\n");
  const auto a = RunAfd({"--config", cfg, "simulate"});
  const auto b = RunAfd({"--config", cfg, "simulate"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind(std::string(kSimulateHeader) + "\n2,16,100,50,3,", 0), 0u) << a.out;

  const auto trace = dir.Path("trace.csv");
  const auto c = RunAfd({"--config", cfg, "--output.trace", trace, "--trace", "simulate"});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_EQ(c.out, a.out);
  EXPECT_EQ(TempDir::Read(trace).rfind("time,kind,wave,instance\n0,attention_start,0,0\n", 0), 0u);

  const auto d = RunAfd({"--config", cfg, "--seed", "4", "simulate"});
  EXPECT_NE(d.out, a.out);
}

TEST(MainTest, RuntimeFailureHasItsOwnExitCode) {
  TempDir dir;
  const auto cfg = dir.Write("s.cfg", std::string(kCoeffs) +
                                          "workload.mu_P = 100\nworkload.mu_D = 50\n"
                                          "workload.N = 10\nbundle.r = 2\nbundle.B = 16\n");
  const auto res = RunAfd({"--config", cfg, "simulate"});
  EXPECT_EQ(res.code, kExitRuntimeError);
  EXPECT_NE(res.code, kExitConfigError);
  EXPECT_NE(res.err.find("cannot fill both waves"), std::string::npos) << res.err;
}

TEST(MainTest, SweepOrderIndependentOfJobsAndGrid) {
  TempDir dir;
  const auto cfg = dir.Write("w.cfg", std::string(kCoeffs) +
                                          "workload.mu_P = 100\nworkload.mu_D = 50\n"
                                          "workload.N = 100\nbundle.B = 8\n"
                                          "sweep.r = 1, 2, 4\nsweep.seeds = 1, 2\n");
  const auto one = RunAfd({"--config", cfg, "--jobs", "1", "sweep"});
  const auto four = RunAfd({"--config", cfg, "--jobs", "4", "sweep"});
  ASSERT_EQ(one.code, kExitOk) << one.err;
  EXPECT_EQ(one.out, four.out);
  EXPECT_EQ(one.out.rfind(std::string(kSweepHeader) + "\n1,8,100,50,1,", 0), 0u) << one.out;
  EXPECT_EQ(std::count(one.out.begin(), one.out.end(), '\n'), 7);

  // Adding grid points leaves existing rows untouched.
  const auto wider = RunAfd({"--config", cfg, "--sweep.r", "1, 2, 3, 4", "sweep"});
  std::istringstream narrow_rows(one.out);
  std::string line;
  while (std::getline(narrow_rows, line)) {
    EXPECT_NE(wider.out.find(line + "\n"), std::string::npos) << line;
  }
}

TEST(MainTest, SweepRecordsPerRowFailures) {
  TempDir dir;
  const auto cfg = dir.Write("w.cfg", std::string(kCoeffs) +
                                          "workload.mu_P = 100\nworkload.mu_D = 50\n"
                                          "workload.N = 20\nbundle.r = 2\n"
                                          "sweep.B = 4, 16\n");
  const auto res = RunAfd({"--config", cfg, "sweep"});
  EXPECT_EQ(res.code, kExitRuntimeError);
  std::istringstream in(res.out);
  const auto rows = ReadSweepCsv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].error, "");
  EXPECT_GT(rows[0].metrics.throughput_80, 0);
  EXPECT_NE(rows[1].error.find("cannot fill"), std::string::npos);
}

TEST(MainTest, SweepNeedsSeeds) {
  const auto res = RunAfd({"--sweep.seeds", "", "sweep"});
  EXPECT_EQ(res.code, kExitConfigError);
  EXPECT_NE(res.err.find("sweep.seeds"), std::string::npos) << res.err;
}

TEST(MainTest, CalibrateWritesConfigSchema) {
  TempDir dir;
  const auto ffn = dir.Write("ffn.csv", "load,latency\n0,100\n1000,183\n");
  const auto att = dir.Write("att.csv", "load,latency\n0,50\n10000,66.5\n100000,215\n");
  const auto res = RunAfd({"calibrate", "--ffn", ffn, "--attention", att});
  ASSERT_EQ(res.code, kExitOk) << res.err;
  const auto kv = ParseText(res.out);
  EXPECT_NEAR(std::stod(*kv.Get("coeffs.alpha_F")), 0.083, 1e-15);
  EXPECT_NEAR(std::stod(*kv.Get("coeffs.beta_F")), 100, 1e-12);
  EXPECT_NEAR(std::stod(*kv.Get("coeffs.alpha_A")), 0.00165, 1e-15);
  EXPECT_NEAR(std::stod(*kv.Get("coeffs.beta_A")), 50, 1e-10);
  EXPECT_NE(res.err.find("R^2=1"), std::string::npos) << res.err;

  const auto bad = dir.Write("bad.csv", "load,latency\n0,100\nfoo,1\n");
  const auto fail = RunAfd({"calibrate", "--comm", bad});
  EXPECT_EQ(fail.code, kExitRuntimeError);
  EXPECT_NE(fail.err.find("line 3"), std::string::npos) << fail.err;
  EXPECT_EQ(RunAfd({"calibrate"}).code, kExitConfigError);
}

SweepRow Row(int r, std::uint64_t seed, double sim, double theory, double r_star) {
  SweepRow row;
  row.r = r;
  row.B = 256;
  row.mu_P = 100;
  row.mu_D = 500;
  row.seed = seed;
  row.metrics.throughput_80 = sim;
  row.theory_throughput = theory;
  row.r_star = r_star;
  return row;
}

TEST(ReportTest, AveragesSeedsAndFindsVertex) {
  // Symmetric parabola around r = 9: f(8) == f(10) < f(9).
  const std::vector<SweepRow> rows{Row(8, 1, 0.70, 0.76, 9.3), Row(8, 2, 0.72, 0.76, 9.3),
                                   Row(9, 1, 0.75, 0.77, 9.3), Row(10, 1, 0.71, 0.74, 9.3),
                                   Row(32, 1, 0.27, 0.318, 9.3)};
  const auto groups = BuildReport(rows);
  ASSERT_EQ(groups.size(), 1u);
  const auto& g = groups[0];
  ASSERT_EQ(g.points.size(), 4u);
  EXPECT_EQ(g.points[0].seeds, 2);
  EXPECT_DOUBLE_EQ(g.points[0].sim_throughput, 0.71);
  EXPECT_EQ(g.r_sim_opt, 9);
  EXPECT_NEAR(g.r_sim_interp, 9.0, 1e-12);
  EXPECT_NEAR(g.r_gap, 0.3 / 9.3, 1e-12);
  EXPECT_FALSE(g.flagged);
  EXPECT_NEAR(g.points[3].theory_gap, (0.318 - 0.27) / 0.318, 1e-12);
}

TEST(ReportTest, FlagsLargeGapAndSurvivesSingleRow) {
  const auto flagged = BuildReport(std::vector<SweepRow>{Row(4, 1, 0.5, 0.6, 9.3)});
  ASSERT_EQ(flagged.size(), 1u);
  EXPECT_EQ(flagged[0].r_sim_opt, 4);
  EXPECT_TRUE(flagged[0].flagged);
  std::ostringstream text;
  WriteReportText(text, flagged);
  EXPECT_NE(text.str().find("EXCEEDS 10%"), std::string::npos);
}

TEST(ReportTest, CsvRoundTripAndMissingColumn) {
  const std::vector<SweepRow> rows{Row(1, 1, 0.3, 0.6, 9.3), Row(2, 1, 0.4, 0.7, 9.3)};
  std::ostringstream out;
  WriteSweepCsv(out, rows);
  std::istringstream in(out.str());
  const auto back = ReadSweepCsv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].r, 2);
  EXPECT_EQ(back[1].metrics.throughput_80, 0.4);
  EXPECT_EQ(back[1].theory_throughput, 0.7);

  std::istringstream missing("r,B,mu_P,mu_D,seed,throughput_80\n1,2,3,4,5,6\n");
  try {
    ReadSweepCsv(missing);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("theory_throughput"), std::string::npos);
  }
}

TEST(MainTest, ReportSubcommand) {
  TempDir dir;
  const std::vector<SweepRow> rows{Row(8, 1, 0.70, 0.76, 9.3), Row(9, 1, 0.75, 0.77, 9.3),
                                   Row(10, 1, 0.71, 0.74, 9.3)};
  std::ostringstream csv;
  WriteSweepCsv(csv, rows);
  const auto in = dir.Write("sweep.csv", csv.str());
  const auto out = dir.Path("report.csv");
  const auto res = RunAfd({"--out", out, "report", in});
  ASSERT_EQ(res.code, kExitOk) << res.err;
  EXPECT_NE(res.out.find("r_sim_opt=9"), std::string::npos) << res.out;
  EXPECT_EQ(TempDir::Read(out).rfind("B,mu_P,mu_D,r,seeds,", 0), 0u);

  const auto bad = dir.Write("bad.csv", "r,B\n1,2\n");
  EXPECT_EQ(RunAfd({"report", bad}).code, kExitRuntimeError);
  EXPECT_EQ(RunAfd({"report", dir.Path("absent.csv")}).code, kExitConfigError);
}

}  // namespace
}  // namespace afd::cli
