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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afd/analytic.h"
#include "afd/calibrate.h"
#include "afd/cli/config.h"
#include "afd/metrics.h"

namespace afd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

// ---- optimize -------------------------------------------------------------

struct RGrid {
  double min = 0.5;
  double max = 32.0;
  double step = 0.5;
};

// Prints the sizing report for cfg's workload and bundle.B. When curve is
// non-null, also writes "r,theory_throughput" over grid.
RegimeReport CmdOptimize(const ExperimentConfig& cfg, std::ostream& out,
                         std::ostream* curve, const RGrid& grid = {});

// ---- simulate / sweep -----------------------------------------------------

// One grid point of a sweep. Column order of the sweep CSV:
//   r,B,mu_P,mu_D,seed,throughput_80,tpot,eta_A,eta_F,theory_throughput,
//   r_star,error
struct SweepRow {
  int r = 0;
  int B = 0;
  double mu_P = 0.0;
  double mu_D = 0.0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  double theory_throughput = 0.0;
  double r_star = 0.0;
  std::string error;  // empty on success
};

struct GridPoint {
  int r = 0;
  int B = 0;
  double mu_P = 0.0;
  double mu_D = 0.0;
  std::uint64_t seed = 0;
};

// Simulates one point. Errors propagate as exceptions.
SweepRow SimulatePoint(const ExperimentConfig& cfg, const GridPoint& point,
                       const RunOptions& options = {});

// Cartesian product B x mu_P x mu_D x r x seeds, in that nesting order.
std::vector<GridPoint> ExpandGrid(const ExperimentConfig& cfg);

// Runs every grid point on up to `jobs` threads; rows come back in grid
// order. A failing point yields a row with `error` set.
std::vector<SweepRow> RunSweep(const ExperimentConfig& cfg, int jobs);

extern const char* const kSweepHeader;
void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows);
std::vector<SweepRow> ReadSweepCsv(std::istream& in);

extern const char* const kSimulateHeader;
void WriteSimulateCsv(std::ostream& out, const SweepRow& row);

// ---- calibrate ------------------------------------------------------------

struct CalibrationInputs {
  std::optional<std::string> attention;
  std::optional<std::string> ffn;
  std::optional<std::string> comm;
};

// Fits each provided trace, prints R^2 per stage to log, and writes the
// fitted coeffs.* keys to out in the configuration schema.
void CmdCalibrate(const CalibrationInputs& inputs, std::ostream& out,
                  std::ostream& log);

// ---- report ---------------------------------------------------------------

struct ReportPoint {
  int r = 0;
  int seeds = 0;
  double sim_throughput = 0.0;  // mean over seeds
  double theory_throughput = 0.0;
  double theory_gap = 0.0;      // (theory - sim) / theory
};

struct ReportGroup {
  int B = 0;
  double mu_P = 0.0;
  double mu_D = 0.0;
  std::vector<ReportPoint> points;  // ascending r
  int r_sim_opt = 0;
  double r_sim_interp = 0.0;  // vertex of the parabola through the argmax
  double r_star = 0.0;
  double r_gap = 0.0;  // |r_sim_opt - r_star| / r_star
  bool flagged = false;
};

std::vector<ReportGroup> BuildReport(std::span<const SweepRow> rows);
void WriteReportText(std::ostream& out, std::span<const ReportGroup> groups);
void WriteReportCsv(std::ostream& out, std::span<const ReportGroup> groups);

// ---- entry point ----------------------------------------------------------

// Parses argv and dispatches; returns the process exit code.
int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err);

}  // namespace afd::cli
