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

#include "afd/analytic.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afd {

std::string_view ToString(HorizonMode mode) {
  return mode == HorizonMode::kFiniteN ? "finite" : "asymptotic";
}

std::string_view ToString(Regime regime) {
  switch (regime) {
    case Regime::kAttentionBottleneck:
      return "AttentionBottleneck";
    case Regime::kCommBottleneck:
      return "CommBottleneck";
    case Regime::kFfnBottleneck:
      return "FfnBottleneck";
  }
  return "unknown";
}

HorizonMode ParseHorizonMode(std::string_view text) {
  if (text == "finite") return HorizonMode::kFiniteN;
  if (text == "asymptotic") return HorizonMode::kAsymptotic;
  throw std::invalid_argument("unknown horizon mode '" + std::string(text) +
                              "' (expected finite|asymptotic)");
}

double ExpectedPrefillLoad(int B, double mu_P) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  if (!(mu_P > 0.0)) throw std::invalid_argument("mu_P must be > 0");
  return B * mu_P;
}

double ExpectedDecodeLoad(int B, double p, double k) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must be in (0,1)");
  if (!(k >= 0.0)) throw std::invalid_argument("k must be >= 0");
  const double mu_D = (1.0 - p) / p;
  if (std::isinf(k)) return B * mu_D;
  // 1 - (1-p)^k without cancellation for small p.
  return B * mu_D * -std::expm1(k * std::log1p(-p));
}

double ExpectedTokenLoad(int B, double mu_P, double p, double k) {
  return ExpectedPrefillLoad(B, mu_P) + ExpectedDecodeLoad(B, p, k);
}

double HorizonAverageLoad(int B, double mu_P, double p, std::int64_t N,
                          HorizonMode mode) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  if (!(mu_P > 0.0)) throw std::invalid_argument("mu_P must be > 0");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must be in (0,1)");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  const double mu_D = (1.0 - p) / p;
  const double Bd = static_cast<double>(B);
  const double asymptotic = Bd * (mu_P + mu_D);
  if (mode == HorizonMode::kAsymptotic) return asymptotic;
  const double load = asymptotic - mu_D * Bd * Bd / static_cast<double>(N);
  if (!(load > 0.0)) {
    throw std::invalid_argument(
        "finite-N horizon load is not positive; N must exceed B*mu_D/(mu_P+mu_D)");
  }
  return load;
}

RegimeBoundaries ComputeRegimeBoundaries(const LatencyCoefficients& coeffs,
                                         int B, double T_bar) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  const double t_A = AttentionLatency(coeffs, T_bar);
  const double t_C = CommLatency(coeffs, B);
  const double ffn_slope = coeffs.alpha_F() * B;
  RegimeBoundaries out;
  out.r_A = (t_A - coeffs.beta_F()) / ffn_slope;
  out.r_C = (t_C - coeffs.beta_F()) / ffn_slope;
  out.r_crit = (std::max(t_A, t_C) - coeffs.beta_F()) / ffn_slope;
  out.r_peak = std::sqrt(coeffs.beta_F() / ffn_slope);
  return out;
}

double PredictedThroughput(const LatencyCoefficients& coeffs, int B,
                           double T_bar, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("r must be > 0");
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  const double batch = r * B;
  const double tau =
      std::max({AttentionLatency(coeffs, T_bar), CommLatency(coeffs, B),
                FfnLatency(coeffs, batch)});
  return batch / ((r + 1.0) * tau);
}

RegimeReport OptimalRatio(const LatencyCoefficients& coeffs,
                          const WorkloadSpec& workload, int B,
                          HorizonMode mode) {
  workload.Validate();
  RegimeReport rep;
  rep.T_bar = HorizonAverageLoad(B, workload.mu_P, workload.p, workload.N, mode);
  rep.t_bar_A = AttentionLatency(coeffs, rep.T_bar);
  rep.t_bar_C = CommLatency(coeffs, B);
  const RegimeBoundaries b = ComputeRegimeBoundaries(coeffs, B, rep.T_bar);
  rep.r_A = b.r_A;
  rep.r_C = b.r_C;
  rep.r_crit = b.r_crit;
  rep.r_peak = b.r_peak;
  rep.r_star = std::max({b.r_A, b.r_C, b.r_peak});
  if (b.r_A == rep.r_star) {
    rep.regime = Regime::kAttentionBottleneck;
  } else if (b.r_C == rep.r_star) {
    rep.regime = Regime::kCommBottleneck;
  } else {
    rep.regime = Regime::kFfnBottleneck;
  }
  rep.predicted_throughput_at_r_star =
      PredictedThroughput(coeffs, B, rep.T_bar, rep.r_star);
  return rep;
}

}  // namespace afd
