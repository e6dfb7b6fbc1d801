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
#include <string>
#include <string_view>

namespace afd {

// Linear latency coefficients for the three stages of one decode step.
// alpha_A and alpha_F are strictly positive; alpha_C and the intercepts are
// non-negative (a zero transfer slope models a latency-only link).
// Instances can only be obtained through Create(), which validates.
class LatencyCoefficients {
 public:
  static LatencyCoefficients Create(double alpha_A, double beta_A,
                                    double alpha_F, double beta_F,
                                    double alpha_C, double beta_C);

  // Reference coefficients for a large MoE decoder, in cycles.
  static LatencyCoefficients Reference();

  double alpha_A() const { return alpha_A_; }
  double beta_A() const { return beta_A_; }
  double alpha_F() const { return alpha_F_; }
  double beta_F() const { return beta_F_; }
  double alpha_C() const { return alpha_C_; }
  double beta_C() const { return beta_C_; }

  bool operator==(const LatencyCoefficients&) const = default;

 private:
  LatencyCoefficients() = default;

  double alpha_A_ = 0.0;
  double beta_A_ = 0.0;
  double alpha_F_ = 0.0;
  double beta_F_ = 0.0;
  double alpha_C_ = 0.0;
  double beta_C_ = 0.0;
};

enum class PrefillDist { kConstant, kUniformBounded };

std::string_view ToString(PrefillDist dist);
PrefillDist ParsePrefillDist(std::string_view text);

// Request-length statistics of the decode workload.
struct WorkloadSpec {
  double mu_P = 100.0;        // mean prefill length, tokens
  double p = 1.0 / 501.0;     // per-step termination probability
  std::int64_t N = 10000;     // requests per Attention instance
  std::uint64_t seed = 0;
  PrefillDist prefill_dist = PrefillDist::kConstant;

  // Mean decode length (1 - p) / p.
  double mu_D() const { return (1.0 - p) / p; }

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;

  static double PFromMuD(double mu_D) { return 1.0 / (mu_D + 1.0); }
};

struct BundleConfig {
  int r_sim = 1;  // Attention instances feeding the FFN server
  int B = 1;      // microbatch size per Attention instance

  void Validate() const;
};

// t_A(T) = alpha_A * T + beta_A for total token load T.
double AttentionLatency(const LatencyCoefficients& coeffs, double token_load);

// t_F(rB) = alpha_F * rB + beta_F; the aggregated batch may be fractional.
double FfnLatency(const LatencyCoefficients& coeffs, double aggregated_batch);

// Round-trip A<->F transfer, t_C(B) = alpha_C * B + beta_C.
double CommLatency(const LatencyCoefficients& coeffs, double microbatch);

}  // namespace afd
