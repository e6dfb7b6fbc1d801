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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace afd {

// One (load, latency) observation from an execution trace.
struct TraceSample {
  double load = 0.0;     // tokens or requests
  double latency = 0.0;  // cycles
};

struct LinearFit {
  double alpha = 0.0;  // slope
  double beta = 0.0;   // intercept
  double r_squared = 0.0;
  double alpha_stderr = 0.0;  // 0 when fewer than three samples
  double beta_stderr = 0.0;
};

// Ordinary least squares latency = alpha * load + beta. Needs at least two
// samples and two distinct loads; throws std::invalid_argument otherwise.
LinearFit FitLinear(std::span<const TraceSample> samples);

// Reads a two-column "load,latency" CSV with a one-line header. Malformed
// rows raise std::runtime_error naming the 1-based line number.
std::vector<TraceSample> ReadTraceCsv(std::istream& in);

// First-principles hardware description. Bandwidths are bytes per cycle,
// compute throughput is FLOPs per cycle.
struct HardwareParams {
  double pi_peak = 0.0;
  double beta_HBM = 0.0;
  double eta_mem = 1.0;
  double eta_compute = 1.0;
  double beta_net = 0.0;  // effective A<->F network bandwidth
  double N_expert = 256;
  double N_expert_per_card = 1;
  double k_route = 8;
  int mtp_depth = 1;
  double H = 7168;         // hidden size
  double d_expert = 2048;  // expert intermediate size
  double d_kv = 576;       // compressed KV width, d_c + d_rope

  void Validate() const;
};

// k (1 + mtp) / N_expert: experts touched per request token, per expert.
double BatchMappingFactor(const HardwareParams& hw);

// BF16 KV read per token over effective HBM bandwidth.
double DeriveAttentionSlope(const HardwareParams& hw);

// Compute-bound SwiGLU experts (6 H d_expert FLOPs per expert-token).
double DeriveFfnSlope(const HardwareParams& hw);

// 3 H bytes per routed token (INT8 in, BF16 out) over beta_net.
double DeriveCommSlope(const HardwareParams& hw);

}  // namespace afd
