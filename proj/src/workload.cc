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

#include "afd/workload.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afd {

RequestSampler::RequestSampler(const WorkloadSpec& spec)
    : spec_(spec), engine_(spec.seed), log_continue_(std::log1p(-spec.p)) {
  spec_.Validate();
}

double RequestSampler::UnitOpenLow() {
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

std::int64_t RequestSampler::DecodeBudget() {
  const double failures = std::floor(std::log(UnitOpenLow()) / log_continue_);
  if (failures >= 4.0e18) return std::numeric_limits<std::int64_t>::max() / 2;
  return 1 + static_cast<std::int64_t>(failures);
}

std::int64_t RequestSampler::PrefillLength() {
  const double lo = std::floor(spec_.mu_P);
  const double frac = spec_.mu_P - lo;
  std::int64_t mean_draw = static_cast<std::int64_t>(lo);
  if (frac > 0.0 && UnitOpenLow() <= frac) ++mean_draw;
  mean_draw = std::max<std::int64_t>(mean_draw, 1);
  if (spec_.prefill_dist == PrefillDist::kConstant) return mean_draw;
  const auto span = static_cast<std::uint64_t>(2 * mean_draw - 1);
  // Multiply-shift keeps the draw unbiased enough for spans far below 2^32
  // and, unlike uniform_int_distribution, portable.
  const auto hi = static_cast<unsigned __int128>(engine_()) * span;
  return 1 + static_cast<std::int64_t>(hi >> 64);
}

std::vector<Request> BuildWorkload(const WorkloadSpec& spec,
                                   std::int64_t total_requests) {
  if (total_requests < 1) {
    throw std::invalid_argument("total_requests must be >= 1");
  }
  RequestSampler sampler(spec);
  std::vector<Request> out(static_cast<std::size_t>(total_requests));
  for (std::int64_t i = 0; i < total_requests; ++i) {
    Request& req = out[static_cast<std::size_t>(i)];
    req.id = i;
    req.arrival_index = i;
    req.prefill_len = sampler.PrefillLength();
    req.decode_budget = sampler.DecodeBudget();
  }
  return out;
}

std::vector<Request> BuildWorkload(const WorkloadSpec& spec,
                                   const BundleConfig& config,
                                   std::int64_t total_requests) {
  config.Validate();
  const std::int64_t needed =
      2 * static_cast<std::int64_t>(config.r_sim) * config.B;
  if (total_requests < needed) {
    throw std::invalid_argument(
        "workload of " + std::to_string(total_requests) +
        " requests cannot fill both waves (need " + std::to_string(needed) +
        ")");
  }
  return BuildWorkload(spec, total_requests);
}

}  // namespace afd
