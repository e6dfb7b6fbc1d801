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

#include "afd/metrics.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace afd {
namespace {

std::vector<CompletedRequest> FirstCompleted(
    std::span<const CompletedRequest> log, std::int64_t count) {
  std::vector<CompletedRequest> sorted(log.begin(), log.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const CompletedRequest& a, const CompletedRequest& b) {
                     if (a.completion_time != b.completion_time) {
                       return a.completion_time < b.completion_time;
                     }
                     return a.arrival_index < b.arrival_index;
                   });
  sorted.resize(static_cast<std::size_t>(count));
  return sorted;
}

}  // namespace

std::int64_t StableWindowCount(int r, std::int64_t N_per_instance) {
  if (r < 1 || N_per_instance < 1) {
    throw std::invalid_argument("r and N must be >= 1");
  }
  const std::int64_t total = static_cast<std::int64_t>(r) * N_per_instance;
  return (8 * total + 9) / 10;
}

StableThroughput ComputeStableThroughput(std::span<const CompletedRequest> log,
                                         int r, std::int64_t N_per_instance) {
  const std::int64_t count = StableWindowCount(r, N_per_instance);
  if (static_cast<std::int64_t>(log.size()) < count) {
    throw std::invalid_argument(
        "insufficient completions: need " + std::to_string(count) + ", have " +
        std::to_string(log.size()));
  }
  const auto window = FirstCompleted(log, count);
  double tokens = 0.0;
  for (const auto& c : window) tokens += static_cast<double>(c.tokens_emitted);
  StableThroughput out;
  out.counted = count;
  out.T_80 = window.back().completion_time;
  if (!(out.T_80 > 0.0)) throw std::invalid_argument("T_80 must be > 0");
  out.throughput = tokens / out.T_80 / (r + 1.0);
  return out;
}

double ComputeTpot(std::span<const CompletedRequest> log) {
  if (log.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : log) {
    sum += (c.completion_time - c.start_decode_time) /
           static_cast<double>(c.tokens_emitted);
  }
  return sum / static_cast<double>(log.size());
}

IdleRatios ComputeIdleRatios(const IdleAccumulators& acc, double T_total,
                             int r) {
  if (!(T_total > 0.0)) throw std::invalid_argument("T_total must be > 0");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  IdleRatios out;
  const double attention_idle =
      std::accumulate(acc.attention.begin(), acc.attention.end(), 0.0);
  out.eta_A = attention_idle / r / T_total;
  out.eta_F = acc.ffn / T_total;
  return out;
}

MetricsReport ComputeMetrics(const SimResult& result, int r,
                             std::int64_t N_per_instance) {
  const StableThroughput st =
      ComputeStableThroughput(result.completions, r, N_per_instance);
  const auto window = FirstCompleted(result.completions, st.counted);
  const IdleRatios idle = ComputeIdleRatios(result.IdleAt(st.T_80), st.T_80, r);
  MetricsReport rep;
  rep.throughput_80 = st.throughput;
  rep.T_80 = st.T_80;
  rep.completions_counted = st.counted;
  rep.tpot = ComputeTpot(window);
  rep.eta_A = idle.eta_A;
  rep.eta_F = idle.eta_F;
  return rep;
}

}  // namespace afd
