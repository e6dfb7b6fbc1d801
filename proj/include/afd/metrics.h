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
#include <span>

#include "afd/simulator.h"

namespace afd {

struct MetricsReport {
  double throughput_80 = 0.0;  // tokens per cycle per instance
  double tpot = 0.0;           // cycles per token
  double eta_A = 0.0;
  double eta_F = 0.0;
  double T_80 = 0.0;
  std::int64_t completions_counted = 0;
};

struct StableThroughput {
  double throughput = 0.0;
  double T_80 = 0.0;
  std::int64_t counted = 0;
};

// ceil(0.8 * r * N), computed exactly in integers.
std::int64_t StableWindowCount(int r, std::int64_t N_per_instance);

// Throughput over the first ceil(0.8 r N) completions, ordered by
// (completion_time, arrival_index):
//   (1/(r+1)) * sum(D_i) / T_80
// where T_80 is the completion time of the last counted request.
// Throws std::invalid_argument when the log is too short.
StableThroughput ComputeStableThroughput(std::span<const CompletedRequest> log,
                                         int r, std::int64_t N_per_instance);

// Mean over requests of (completion - start_decode) / tokens. Not
// token-weighted. Returns 0 for an empty log.
double ComputeTpot(std::span<const CompletedRequest> log);

struct IdleRatios {
  double eta_A = 0.0;
  double eta_F = 0.0;
};

// eta_A = mean_i idle_A[i] / T_total, eta_F = idle_F / T_total.
IdleRatios ComputeIdleRatios(const IdleAccumulators& acc, double T_total,
                             int r);

// All three metrics over the stable window: TPOT averages the counted
// requests and the idle ratios use T_80 as the wall time.
MetricsReport ComputeMetrics(const SimResult& result, int r,
                             std::int64_t N_per_instance);

}  // namespace afd
