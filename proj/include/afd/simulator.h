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
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "afd/model.h"
#include "afd/workload.h"

namespace afd {

// Discrete-event model of one rA-1F bundle. Two waves (batches) are kept in
// flight; each wave owns B slots on every Attention instance and cycles
//
//   Attention -> A2F -> WaitingForFfn -> Ffn -> F2A -> WaitingForAttention
//
// The FFN server starts a wave only after all r A2F transfers of that wave
// have arrived (the straggler barrier), and serves one wave at a time.
// Each Attention instance runs at most one wave at a time. A token is emitted
// by every active slot at the end of its Attention phase; finished requests
// are replaced from a global FCFS buffer at that instant.

enum class WavePhase {
  kAttention,
  kA2F,
  kWaitingForFfn,
  kFfn,
  kF2A,
  kWaitingForAttention,
  kRetired,
};

std::string_view ToString(WavePhase phase);

class StopRule {
 public:
  static StopRule TotalCompletions(std::int64_t n) { return StopRule(n); }
  // Run until every request in the workload has completed.
  static StopRule Drain() { return StopRule(-1); }

  bool is_drain() const { return completions_ < 0; }
  std::int64_t completions() const { return completions_; }

 private:
  explicit StopRule(std::int64_t n) : completions_(n) {}
  std::int64_t completions_;
};

struct CompletedRequest {
  std::int64_t id = 0;
  std::int64_t arrival_index = 0;
  std::int64_t prefill_len = 0;
  std::int64_t decode_budget = 0;
  std::int64_t tokens_emitted = 0;
  double start_decode_time = 0.0;
  double completion_time = 0.0;
  int instance = 0;
  int wave = 0;
  int slot = 0;
};

struct BusyInterval {
  double start = 0.0;
  double end = 0.0;
  int wave = 0;
};

// Busy intervals of one sequential resource, in start order.
class ResourceTimeline {
 public:
  void Add(double start, double end, int wave);

  std::span<const BusyInterval> intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  double first_dispatch() const;

  // Busy time inside [0, t].
  double BusyBefore(double t) const;
  // Idle time inside [first_dispatch, t]; time before the first dispatch is
  // not counted as idle.
  double IdleBefore(double t) const;

 private:
  std::vector<BusyInterval> intervals_;
  std::vector<double> busy_prefix_;  // busy_prefix_[i] = sum of lengths < i
};

struct IdleAccumulators {
  std::vector<double> attention;  // per Attention instance
  double ffn = 0.0;
};

struct FfnDispatch {
  int wave = 0;
  double last_a2f_arrival = 0.0;
  double start = 0.0;
  double end = 0.0;
  std::int64_t batch = 0;  // active slots across the wave
};

// Snapshot handed to RunOptions::on_attention_start.
struct AttentionStart {
  double time = 0.0;
  int wave = 0;
  int instance = 0;
  std::int64_t step = 0;  // Attention phases this (wave, instance) completed
  std::int64_t active_slots = 0;
  std::int64_t token_load = 0;             // incrementally maintained
  std::int64_t recomputed_token_load = 0;  // sum over active slots of s + i
  std::int64_t prefill_load = 0;
  std::int64_t decode_load = 0;
};

struct RunOptions {
  // CSV rows "time,kind,wave,instance" when non-null.
  std::ostream* trace = nullptr;
  std::function<void(const AttentionStart&)> on_attention_start;
};

struct SimResult {
  // Sorted by completion_time; ties by (instance, slot, wave).
  std::vector<CompletedRequest> completions;
  std::vector<ResourceTimeline> attention;  // per instance
  ResourceTimeline ffn;
  std::vector<FfnDispatch> ffn_dispatches;
  double final_clock = 0.0;
  std::int64_t events_processed = 0;
  std::int64_t requests_total = 0;

  IdleAccumulators IdleAt(double t) const;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The event queue ran dry before the stop rule fired.
class DeadlockError : public SimulationError {
 public:
  DeadlockError(const std::string& what, std::string snapshot)
      : SimulationError(what + "\n" + snapshot),
        snapshot_(std::move(snapshot)) {}
  const std::string& snapshot() const { return snapshot_; }

 private:
  std::string snapshot_;
};

// Runs the bundle over an explicit FCFS workload. The first 2*r*B requests
// populate wave 0 then wave 1 (instance-major, slot-minor) at clock 0.
SimResult RunBundle(const BundleConfig& config,
                    const LatencyCoefficients& coeffs,
                    std::vector<Request> workload, StopRule stop,
                    const RunOptions& options = {});

// Draws r * N requests from spec and drains them.
SimResult RunBundle(const BundleConfig& config,
                    const LatencyCoefficients& coeffs,
                    const WorkloadSpec& spec, const RunOptions& options = {});

}  // namespace afd
