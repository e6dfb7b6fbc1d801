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
#include <limits>
#include <random>
#include <vector>

#include "afd/model.h"

namespace afd {

struct Request {
  std::int64_t id = 0;
  std::int64_t prefill_len = 0;    // s, tokens
  std::int64_t decode_budget = 1;  // output tokens this request emits, >= 1
  std::int64_t arrival_index = 0;  // FCFS position
  double start_decode_time = std::numeric_limits<double>::quiet_NaN();
  double completion_time = std::numeric_limits<double>::quiet_NaN();
  std::int64_t tokens_emitted = 0;
};

// Bit-reproducible sampler for request lengths. Built on mt19937_64 (whose
// output sequence is fixed by the standard) plus explicit inversion, so
// streams do not depend on the standard library's distribution classes.
class RequestSampler {
 public:
  explicit RequestSampler(const WorkloadSpec& spec);

  // 1 + Geometric(p) on {0, 1, ...}; mean 1/p = mu_D + 1.
  std::int64_t DecodeBudget();

  // Constant: floor/ceil of mu_P mixed to keep the mean exact (every draw
  // equals mu_P when it is integral). UniformBounded: uniform on
  // [1, 2m - 1] around such a draw m.
  std::int64_t PrefillLength();

 private:
  double UnitOpenLow();  // uniform on (0, 1]

  WorkloadSpec spec_;
  std::mt19937_64 engine_;
  double log_continue_;  // log(1 - p)
};

// Draws total_requests requests in FCFS order from spec.seed.
std::vector<Request> BuildWorkload(const WorkloadSpec& spec,
                                   std::int64_t total_requests);

// Same, additionally checking that the stream can fill both waves of the
// given bundle at clock 0.
std::vector<Request> BuildWorkload(const WorkloadSpec& spec,
                                   const BundleConfig& config,
                                   std::int64_t total_requests);

}  // namespace afd
