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

#include "afd/model.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace afd {
namespace {

void RequireSlope(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw std::invalid_argument(std::string(name) +
                                " must be finite and > 0, got " +
                                std::to_string(value));
  }
}

void RequireIntercept(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::invalid_argument(std::string(name) +
                                " must be finite and >= 0, got " +
                                std::to_string(value));
  }
}

void RequireLoad(double load, const char* what) {
  if (std::isnan(load) || load < 0.0) {
    throw std::invalid_argument(std::string(what) + " must be >= 0");
  }
}

}  // namespace

LatencyCoefficients LatencyCoefficients::Create(double alpha_A, double beta_A,
                                                double alpha_F, double beta_F,
                                                double alpha_C, double beta_C) {
  RequireSlope(alpha_A, "alpha_A");
  RequireIntercept(beta_A, "beta_A");
  RequireSlope(alpha_F, "alpha_F");
  RequireIntercept(beta_F, "beta_F");
  RequireIntercept(alpha_C, "alpha_C");
  RequireIntercept(beta_C, "beta_C");
  LatencyCoefficients c;
  c.alpha_A_ = alpha_A;
  c.beta_A_ = beta_A;
  c.alpha_F_ = alpha_F;
  c.beta_F_ = beta_F;
  c.alpha_C_ = alpha_C;
  c.beta_C_ = beta_C;
  return c;
}

LatencyCoefficients LatencyCoefficients::Reference() {
  return Create(0.00165, 50.0, 0.083, 100.0, 0.022, 20.0);
}

std::string_view ToString(PrefillDist dist) {
  switch (dist) {
    case PrefillDist::kConstant:
      return "constant";
    case PrefillDist::kUniformBounded:
      return "uniform";
  }
  return "unknown";
}

PrefillDist ParsePrefillDist(std::string_view text) {
  if (text == "constant") return PrefillDist::kConstant;
  if (text == "uniform") return PrefillDist::kUniformBounded;
  throw std::invalid_argument("unknown prefill distribution '" +
                              std::string(text) +
                              "' (expected constant|uniform)");
}

void WorkloadSpec::Validate() const {
  if (!std::isfinite(mu_P) || mu_P <= 0.0) {
    throw std::invalid_argument("mu_P must be finite and > 0");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("p must lie in (0, 1)");
  }
  if (N < 1) throw std::invalid_argument("N must be >= 1");
}

void BundleConfig::Validate() const {
  if (r_sim < 1) throw std::invalid_argument("r must be >= 1");
  if (B < 1) throw std::invalid_argument("B must be >= 1");
}

double AttentionLatency(const LatencyCoefficients& coeffs, double token_load) {
  RequireLoad(token_load, "token load");
  return coeffs.alpha_A() * token_load + coeffs.beta_A();
}

double FfnLatency(const LatencyCoefficients& coeffs, double aggregated_batch) {
  RequireLoad(aggregated_batch, "aggregated batch");
  return coeffs.alpha_F() * aggregated_batch + coeffs.beta_F();
}

double CommLatency(const LatencyCoefficients& coeffs, double microbatch) {
  RequireLoad(microbatch, "microbatch size");
  return coeffs.alpha_C() * microbatch + coeffs.beta_C();
}

}  // namespace afd
