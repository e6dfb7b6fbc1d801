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

#include <string_view>

#include "afd/model.h"

namespace afd {

// Closed-form sizing of an rA-1F bundle. Everything here is real-valued in
// r; a ratio of 3.5 stands for a 7A-2F deployment.

enum class HorizonMode { kFiniteN, kAsymptotic };
enum class Regime { kAttentionBottleneck, kCommBottleneck, kFfnBottleneck };

std::string_view ToString(HorizonMode mode);
std::string_view ToString(Regime regime);
HorizonMode ParseHorizonMode(std::string_view text);

// E[P_k] = B * mu_P, independent of the step index.
double ExpectedPrefillLoad(int B, double mu_P);

// E[D_k] = B (1-p)/p (1 - (1-p)^k). Zero at k = 0, saturates at B * mu_D.
double ExpectedDecodeLoad(int B, double p, double k);

double ExpectedTokenLoad(int B, double mu_P, double p, double k);

// Average of E[T_k] over the K = N / (B p) steps needed to serve N requests.
// FiniteN keeps the -(1-p)/p * B^2/N correction; Asymptotic is the N -> inf
// limit B (mu_P + (1-p)/p). Throws std::invalid_argument if the finite-N
// load is not positive.
double HorizonAverageLoad(int B, double mu_P, double p, std::int64_t N,
                          HorizonMode mode);

struct RegimeBoundaries {
  double r_A = 0.0;     // attention / FFN balance point
  double r_C = 0.0;     // communication / FFN balance point
  double r_crit = 0.0;  // onset of the FFN-bound regime
  double r_peak = 0.0;  // interior maximizer of the FFN-bound throughput
};

// Negative r_A or r_C are legal and mean that regime is empty.
RegimeBoundaries ComputeRegimeBoundaries(const LatencyCoefficients& coeffs,
                                         int B, double T_bar);

// Per-instance throughput (1/(r+1)) rB / tau with
// tau = max(t_A(T_bar), t_C(B), t_F(rB)). Requires r > 0.
double PredictedThroughput(const LatencyCoefficients& coeffs, int B,
                           double T_bar, double r);

struct RegimeReport {
  double r_A = 0.0;
  double r_C = 0.0;
  double r_crit = 0.0;
  double r_peak = 0.0;
  double r_star = 0.0;
  Regime regime = Regime::kFfnBottleneck;
  double t_bar_A = 0.0;
  double t_bar_C = 0.0;
  double T_bar = 0.0;
  double predicted_throughput_at_r_star = 0.0;
};

// r* = max(r_A, r_C, r_peak). Regime ties resolve Attention > Comm > FFN.
RegimeReport OptimalRatio(const LatencyCoefficients& coeffs,
                          const WorkloadSpec& workload, int B,
                          HorizonMode mode = HorizonMode::kFiniteN);

}  // namespace afd
