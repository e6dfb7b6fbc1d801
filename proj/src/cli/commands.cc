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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace afd::cli {
namespace {

void RequireOneOf(const ExperimentConfig& cfg, const std::string& preferred,
                  const std::string& alternative) {
  const auto has = [&](const std::string& k) {
    return std::binary_search(cfg.present.begin(), cfg.present.end(), k);
  };
  if (!has(preferred) && !has(alternative)) {
    throw ConfigError(preferred, "required key is missing");
  }
}

void RequireWorkload(const ExperimentConfig& cfg) {
  cfg.Require("workload.mu_P");
  if (!std::binary_search(cfg.present.begin(), cfg.present.end(),
                          std::string("workload.p"))) {
    cfg.Require("workload.mu_D");
  }
}

std::string CsvField(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += (c == '\n' || c == '\r') ? ' ' : c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

const char* const kSweepHeader =
    "r,B,mu_P,mu_D,seed,throughput_80,tpot,eta_A,eta_F,theory_throughput,"
    "r_star,error";

const char* const kSimulateHeader =
    "r,B,mu_P,mu_D,seed,throughput_80,tpot,eta_A,eta_F,T_80,"
    "completions_counted,theory_throughput,r_star";

RegimeReport CmdOptimize(const ExperimentConfig& cfg, std::ostream& out,
                         std::ostream* curve, const RGrid& grid) {
  const LatencyCoefficients& coeffs = cfg.RequireCoeffs();
  const int B = cfg.bundle.B;
  const RegimeReport rep = OptimalRatio(coeffs, cfg.workload, B, cfg.mode);
  fmt::print(out, "B              = {}\n", B);
  fmt::print(out, "mu_P           = {}\n", cfg.workload.mu_P);
  fmt::print(out, "mu_D           = {:.6g}\n", cfg.workload.mu_D());
  fmt::print(out, "N              = {}\n", cfg.workload.N);
  fmt::print(out, "mode           = {}\n", ToString(cfg.mode));
  fmt::print(out, "T_bar          = {:.6f}\n", rep.T_bar);
  fmt::print(out, "t_bar_A        = {:.6f}\n", rep.t_bar_A);
  fmt::print(out, "t_bar_C        = {:.6f}\n", rep.t_bar_C);
  fmt::print(out, "r_A            = {:.6f}\n", rep.r_A);
  fmt::print(out, "r_C            = {:.6f}\n", rep.r_C);
  fmt::print(out, "r_crit         = {:.6f}\n", rep.r_crit);
  fmt::print(out, "r_peak         = {:.6f}\n", rep.r_peak);
  fmt::print(out, "r_star         = {:.6f}\n", rep.r_star);
  fmt::print(out, "regime         = {}\n", ToString(rep.regime));
  fmt::print(out, "throughput     = {:.6f}\n", rep.predicted_throughput_at_r_star);
  const double lo = std::floor(rep.r_star);
  for (double r : {lo, lo + 1.0}) {
    if (r <= 0.0) continue;
    fmt::print(out, "integer r={:<4} throughput = {:.6f}\n", r,
               PredictedThroughput(coeffs, B, rep.T_bar, r));
  }
  if (curve) {
    if (!(grid.step > 0.0) || !(grid.min > 0.0) || grid.max < grid.min) {
      throw ConfigError("", "invalid r grid");
    }
    *curve << "r,theory_throughput\n";
    const auto steps =
        static_cast<std::int64_t>(std::floor((grid.max - grid.min) / grid.step + 1e-9));
    for (std::int64_t i = 0; i <= steps; ++i) {
      const double r = grid.min + static_cast<double>(i) * grid.step;
      fmt::print(*curve, "{},{}\n", r,
                 PredictedThroughput(coeffs, B, rep.T_bar, r));
    }
  }
  return rep;
}

SweepRow SimulatePoint(const ExperimentConfig& cfg, const GridPoint& point,
                       const RunOptions& options) {
  const LatencyCoefficients& coeffs = cfg.RequireCoeffs();
  SweepRow row;
  row.r = point.r;
  row.B = point.B;
  row.mu_P = point.mu_P;
  row.mu_D = point.mu_D;
  row.seed = point.seed;

  WorkloadSpec spec = cfg.workload;
  spec.mu_P = point.mu_P;
  spec.p = WorkloadSpec::PFromMuD(point.mu_D);
  spec.seed = DeriveStreamSeed(point.seed, point.mu_P, point.mu_D,
                               spec.prefill_dist);
  const BundleConfig bundle{point.r, point.B};
  const std::int64_t total = static_cast<std::int64_t>(point.r) * spec.N;
  const StopRule stop = cfg.stop_completions
                            ? StopRule::TotalCompletions(*cfg.stop_completions)
                            : StopRule::Drain();
  const SimResult result =
      RunBundle(bundle, coeffs, BuildWorkload(spec, bundle, total), stop, options);
  row.metrics = ComputeMetrics(result, point.r, spec.N);

  const RegimeReport rep = OptimalRatio(coeffs, spec, point.B, cfg.mode);
  row.r_star = rep.r_star;
  row.theory_throughput = PredictedThroughput(coeffs, point.B, rep.T_bar, point.r);
  return row;
}

std::vector<GridPoint> ExpandGrid(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("sweep.seeds", "list must not be empty");
  std::vector<GridPoint> grid;
  for (int B : cfg.sweep.B) {
    for (double mu_P : cfg.sweep.mu_P) {
      for (double mu_D : cfg.sweep.mu_D) {
        for (int r : cfg.sweep.r) {
          for (std::uint64_t seed : cfg.seeds) {
            grid.push_back(GridPoint{r, B, mu_P, mu_D, seed});
          }
        }
      }
    }
  }
  return grid;
}

std::vector<SweepRow> RunSweep(const ExperimentConfig& cfg, int jobs) {
  cfg.RequireCoeffs();
  const std::vector<GridPoint> grid = ExpandGrid(cfg);
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        rows[i] = SimulatePoint(cfg, grid[i]);
      } catch (const std::exception& e) {
        SweepRow failed;
        failed.r = grid[i].r;
        failed.B = grid[i].B;
        failed.mu_P = grid[i].mu_P;
        failed.mu_D = grid[i].mu_D;
        failed.seed = grid[i].seed;
        failed.error = e.what();
        rows[i] = std::move(failed);
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(grid.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& row : rows) {
    if (!row.error.empty()) {
      fmt::print(out, "{},{},{},{},{},,,,,,,{}\n", row.r, row.B, row.mu_P,
                 row.mu_D, row.seed, CsvField(row.error));
      continue;
    }
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},\n", row.r, row.B,
               row.mu_P, row.mu_D, row.seed, row.metrics.throughput_80,
               row.metrics.tpot, row.metrics.eta_A, row.metrics.eta_F,
               row.theory_throughput, row.r_star);
  }
}

void WriteSimulateCsv(std::ostream& out, const SweepRow& row) {
  out << kSimulateHeader << '\n';
  fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", row.r, row.B,
             row.mu_P, row.mu_D, row.seed, row.metrics.throughput_80,
             row.metrics.tpot, row.metrics.eta_A, row.metrics.eta_F,
             row.metrics.T_80, row.metrics.completions_counted,
             row.theory_throughput, row.r_star);
}

std::vector<SweepRow> ReadSweepCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("sweep CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitCsvLine(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"r", "B", "mu_P", "mu_D", "seed", "throughput_80",
                           "theory_throughput", "r_star"}) {
    if (!col.contains(name)) {
      throw std::runtime_error(std::string("sweep CSV is missing column '") +
                               name + "'");
    }
  }
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("sweep CSV line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields");
    }
    const auto get = [&](const char* name) -> const std::string& {
      return f[col.at(name)];
    };
    SweepRow row;
    try {
      row.r = std::stoi(get("r"));
      row.B = std::stoi(get("B"));
      row.mu_P = std::stod(get("mu_P"));
      row.mu_D = std::stod(get("mu_D"));
      row.seed = std::stoull(get("seed"));
      if (col.contains("error")) row.error = get("error");
      if (row.error.empty()) {
        row.metrics.throughput_80 = std::stod(get("throughput_80"));
        row.theory_throughput = std::stod(get("theory_throughput"));
        row.r_star = std::stod(get("r_star"));
        const auto optional = [&](const char* name, double& dst) {
          if (col.contains(name) && !get(name).empty()) dst = std::stod(get(name));
        };
        optional("tpot", row.metrics.tpot);
        optional("eta_A", row.metrics.eta_A);
        optional("eta_F", row.metrics.eta_F);
      }
    } catch (const std::logic_error&) {
      throw std::runtime_error("sweep CSV line " + std::to_string(line_no) +
                               ": malformed number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void CmdCalibrate(const CalibrationInputs& inputs, std::ostream& out,
                  std::ostream& log) {
  if (!inputs.attention && !inputs.ffn && !inputs.comm) {
    throw ConfigError("", "calibrate needs at least one of --attention, --ffn, --comm");
  }
  const auto fit = [&](const std::optional<std::string>& path,
                       const char* stage, const char* suffix) {
    if (!path) return;
    std::ifstream in(*path);
    if (!in) throw std::runtime_error("cannot open trace '" + *path + "'");
    const auto samples = ReadTraceCsv(in);
    const LinearFit f = FitLinear(samples);
    fmt::print(log, "{}: n={} alpha={} beta={} R^2={:.6f}\n", stage,
               samples.size(), f.alpha, f.beta, f.r_squared);
    fmt::print(out, "coeffs.alpha_{} = {}\n", suffix, f.alpha);
    fmt::print(out, "coeffs.beta_{} = {}\n", suffix, f.beta);
  };
  fit(inputs.attention, "attention", "A");
  fit(inputs.ffn, "ffn", "F");
  fit(inputs.comm, "comm", "C");
}

std::vector<ReportGroup> BuildReport(std::span<const SweepRow> rows) {
  struct Acc {
    double sum = 0.0;
    int n = 0;
    double theory = 0.0;
  };
  std::vector<ReportGroup> groups;
  std::vector<std::map<int, Acc>> accs;
  for (const SweepRow& row : rows) {
    if (!row.error.empty()) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ReportGroup& g) {
      return g.B == row.B && g.mu_P == row.mu_P && g.mu_D == row.mu_D;
    });
    if (it == groups.end()) {
      ReportGroup group;
      group.B = row.B;
      group.mu_P = row.mu_P;
      group.mu_D = row.mu_D;
      group.r_star = row.r_star;
      groups.push_back(std::move(group));
      accs.emplace_back();
      it = groups.end() - 1;
    }
    Acc& acc = accs[static_cast<std::size_t>(it - groups.begin())][row.r];
    acc.sum += row.metrics.throughput_80;
    acc.theory = row.theory_throughput;
    ++acc.n;
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ReportGroup& group = groups[g];
    for (const auto& [r, acc] : accs[g]) {
      ReportPoint pt;
      pt.r = r;
      pt.seeds = acc.n;
      pt.sim_throughput = acc.sum / acc.n;
      pt.theory_throughput = acc.theory;
      pt.theory_gap = acc.theory > 0.0
                          ? (acc.theory - pt.sim_throughput) / acc.theory
                          : 0.0;
      group.points.push_back(pt);
    }
    const auto best = std::max_element(
        group.points.begin(), group.points.end(),
        [](const ReportPoint& a, const ReportPoint& b) {
          return a.sim_throughput < b.sim_throughput;
        });
    group.r_sim_opt = best->r;
    group.r_sim_interp = best->r;
    if (best != group.points.begin() && best + 1 != group.points.end()) {
      const double x1 = (best - 1)->r, f1 = (best - 1)->sim_throughput;
      const double x2 = best->r, f2 = best->sim_throughput;
      const double x3 = (best + 1)->r, f3 = (best + 1)->sim_throughput;
      const double num = (x2 - x1) * (x2 - x1) * (f2 - f3) -
                         (x2 - x3) * (x2 - x3) * (f2 - f1);
      const double den = (x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1);
      if (den != 0.0) {
        group.r_sim_interp = std::clamp(x2 - 0.5 * num / den, x1, x3);
      }
    }
    group.r_gap = group.r_star > 0.0
                      ? std::abs(group.r_sim_opt - group.r_star) / group.r_star
                      : 0.0;
    group.flagged = group.r_gap > 0.10;
  }
  return groups;
}

void WriteReportText(std::ostream& out, std::span<const ReportGroup> groups) {
  for (const ReportGroup& g : groups) {
    fmt::print(out,
               "B={} mu_P={} mu_D={}: r_sim_opt={} (interp {:.2f}) r_star={:.3f} "
               "gap={:.1f}%{}\n",
               g.B, g.mu_P, g.mu_D, g.r_sim_opt, g.r_sim_interp, g.r_star,
               100.0 * g.r_gap, g.flagged ? "  [EXCEEDS 10%]" : "");
    fmt::print(out, "  {:>4}  {:>12}  {:>12}  {:>8}\n", "r", "sim", "theory",
               "gap");
    for (const ReportPoint& p : g.points) {
      fmt::print(out, "  {:>4}  {:>12.6f}  {:>12.6f}  {:>7.2f}%\n", p.r,
                 p.sim_throughput, p.theory_throughput, 100.0 * p.theory_gap);
    }
  }
}

void WriteReportCsv(std::ostream& out, std::span<const ReportGroup> groups) {
  out << "B,mu_P,mu_D,r,seeds,sim_throughput,theory_throughput,theory_gap,"
         "r_sim_opt,r_sim_interp,r_star,r_gap,flag\n";
  for (const ReportGroup& g : groups) {
    for (const ReportPoint& p : g.points) {
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", g.B, g.mu_P,
                 g.mu_D, p.r, p.seeds, p.sim_throughput, p.theory_throughput,
                 p.theory_gap, g.r_sim_opt, g.r_sim_interp, g.r_star, g.r_gap,
                 g.flagged ? 1 : 0);
    }
  }
}

int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Attention/FFN disaggregation sizing toolkit"};
  app.name("afd");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  int jobs = 1;
  bool trace = false;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--jobs", jobs, "parallel simulations for sweep")
      ->check(CLI::PositiveNumber);
  app.add_flag("--trace", trace, "write a per-event CSV trace (simulate)");
  app.add_option("--seed", seed, "base RNG seed");

  std::map<std::string, std::string> overrides;
  for (const std::string& key : KnownKeys()) {
    if (key == "seed") continue;  // covered by --seed
    app.add_option("--" + key, overrides[key], "override " + key)
        ->group("Configuration overrides");
  }

  auto* optimize = app.add_subcommand("optimize", "closed-form optimal A/F ratio");
  RGrid grid;
  optimize->add_option("--r-min", grid.min, "curve grid start");
  optimize->add_option("--r-max", grid.max, "curve grid end");
  optimize->add_option("--r-step", grid.step, "curve grid step");
  auto* simulate = app.add_subcommand("simulate", "simulate one bundle");
  auto* sweep = app.add_subcommand("sweep", "simulate a parameter grid");
  auto* calibrate = app.add_subcommand("calibrate", "fit latency coefficients");
  CalibrationInputs cal;
  calibrate->add_option("--attention", cal.attention, "attention trace CSV");
  calibrate->add_option("--ffn", cal.ffn, "FFN trace CSV");
  calibrate->add_option("--comm", cal.comm, "communication trace CSV");
  auto* report = app.add_subcommand("report", "compare sweep results with theory");
  std::string sweep_csv;
  report->add_option("sweep_csv", sweep_csv, "CSV written by 'afd sweep'")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    KeyValueConfig kv;
    if (!config_path.empty()) kv = KeyValueConfig::ParseFile(config_path);
    for (const auto& [key, value] : overrides) {
      if (app.count("--" + key) > 0) kv.Set(key, value);
    }
    if (seed) kv.Set("seed", std::to_string(*seed));
    if (!out_path.empty()) kv.Set("output.path", out_path);
    const ExperimentConfig cfg = BuildExperimentConfig(kv);

    std::ofstream file;
    std::ostream* sink = &out;
    const auto open_sink = [&] {
      if (!cfg.output_path.empty()) {
        file = OpenOutput(cfg.output_path);
        sink = &file;
      }
    };

    if (optimize->parsed()) {
      RequireWorkload(cfg);
      cfg.Require("bundle.B");
      std::ofstream curve;
      if (!cfg.output_path.empty()) curve = OpenOutput(cfg.output_path);
      CmdOptimize(cfg, out, cfg.output_path.empty() ? nullptr : &curve, grid);
    } else if (simulate->parsed()) {
      RequireWorkload(cfg);
      cfg.Require("bundle.r");
      cfg.Require("bundle.B");
      cfg.RequireCoeffs();
      std::ofstream trace_file;
      RunOptions options;
      if (trace) {
        trace_file = OpenOutput(cfg.trace_path);
        options.trace = &trace_file;
      }
      const SweepRow row = SimulatePoint(
          cfg,
          GridPoint{cfg.bundle.r_sim, cfg.bundle.B, cfg.workload.mu_P,
                    cfg.sweep.mu_D.front(), cfg.workload.seed},
          options);
      open_sink();
      WriteSimulateCsv(*sink, row);
    } else if (sweep->parsed()) {
      RequireOneOf(cfg, "sweep.r", "bundle.r");
      RequireOneOf(cfg, "sweep.B", "bundle.B");
      RequireOneOf(cfg, "sweep.mu_P", "workload.mu_P");
      if (!std::binary_search(cfg.present.begin(), cfg.present.end(),
                              std::string("workload.p"))) {
        RequireOneOf(cfg, "sweep.mu_D", "workload.mu_D");
      }
      const auto rows = RunSweep(cfg, jobs);
      open_sink();
      WriteSweepCsv(*sink, rows);
      const auto failed = std::count_if(rows.begin(), rows.end(),
                                        [](const SweepRow& r) { return !r.error.empty(); });
      if (failed > 0) {
        fmt::print(err, "afd: {} of {} sweep points failed\n", failed, rows.size());
        return kExitRuntimeError;
      }
    } else if (calibrate->parsed()) {
      open_sink();
      CmdCalibrate(cal, *sink, err);
    } else if (report->parsed()) {
      std::ifstream in(sweep_csv);
      if (!in) throw ConfigError("", "cannot open sweep CSV '" + sweep_csv + "'");
      const auto groups = BuildReport(ReadSweepCsv(in));
      WriteReportText(out, groups);
      if (!cfg.output_path.empty()) {
        file = OpenOutput(cfg.output_path);
        WriteReportCsv(file, groups);
      }
    }
  } catch (const ConfigError& e) {
    fmt::print(err, "afd: config error: {}\n", e.what());
    return kExitConfigError;
  } catch (const DeadlockError& e) {
    fmt::print(err, "afd: simulation deadlock: {}\n", e.what());
    return kExitRuntimeError;
  } catch (const std::exception& e) {
    fmt::print(err, "afd: error: {}\n", e.what());
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace afd::cli
