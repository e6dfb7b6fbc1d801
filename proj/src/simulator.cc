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

#include "afd/simulator.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <queue>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace afd {
namespace {

// Ordering of simultaneous events: A2F < FFN < F2A < Attention.
enum class EventKind : int {
  kA2FArrive = 0,
  kFfnDone = 1,
  kF2AArrive = 2,
  kAttentionDone = 3,
};

struct Event {
  double time;
  EventKind kind;
  int wave;
  int instance;
  std::uint64_t seq;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.wave != b.wave) return a.wave > b.wave;
    if (a.instance != b.instance) return a.instance > b.instance;
    return a.seq > b.seq;
  }
};

struct Slot {
  std::int64_t request = -1;  // index into the workload, -1 when inactive
  std::int64_t decode_index = 0;
};

struct Lane {  // one wave on one Attention instance
  WavePhase phase = WavePhase::kWaitingForAttention;
  std::int64_t token_load = 0;
  std::int64_t active = 0;
  std::int64_t steps = 0;
};

struct WaveState {
  int a2f_pending = 0;
  double last_a2f = 0.0;
  bool retired = false;
};

struct Instance {
  bool busy = false;
  std::deque<int> ready;  // waves waiting for this instance, FIFO
};

constexpr int kWaves = 2;

class BundleSimulator {
 public:
  BundleSimulator(const BundleConfig& config, const LatencyCoefficients& coeffs,
                  std::vector<Request> workload, StopRule stop,
                  const RunOptions& options)
      : config_(config),
        coeffs_(coeffs),
        requests_(std::move(workload)),
        stop_(stop),
        options_(options),
        r_(config.r_sim),
        B_(config.B),
        half_comm_(CommLatency(coeffs, config.B) / 2.0),
        slots_(static_cast<std::size_t>(kWaves) * r_ * B_),
        lanes_(static_cast<std::size_t>(kWaves) * r_),
        instances_(static_cast<std::size_t>(r_)) {
    result_.attention.resize(static_cast<std::size_t>(r_));
    result_.requests_total = static_cast<std::int64_t>(requests_.size());
    for (auto& ws : waves_) ws.a2f_pending = r_;
  }

  SimResult Run() {
    if (options_.trace) *options_.trace << "time,kind,wave,instance\n";
    Populate();
    for (int i = 0; i < r_; ++i) {
      for (int w = 0; w < kWaves; ++w) instances_[i].ready.push_back(w);
      TryStartAttention(i);
    }
    while (!StopReached()) {
      if (queue_.empty()) {
        throw DeadlockError(
            fmt::format("event queue empty at t={} with {} of {} requests "
                        "completed",
                        clock_, completed_, requests_.size()),
            Snapshot());
      }
      const Event ev = queue_.top();
      queue_.pop();
      clock_ = ev.time;
      ++result_.events_processed;
      switch (ev.kind) {
        case EventKind::kAttentionDone:
          OnAttentionDone(ev.wave, ev.instance);
          break;
        case EventKind::kA2FArrive:
          OnA2FArrive(ev.wave, ev.instance);
          break;
        case EventKind::kFfnDone:
          OnFfnDone(ev.wave);
          break;
        case EventKind::kF2AArrive:
          OnF2AArrive(ev.wave, ev.instance);
          break;
      }
    }
    result_.final_clock = clock_;
    std::stable_sort(result_.completions.begin(), result_.completions.end(),
                     [](const CompletedRequest& a, const CompletedRequest& b) {
                       if (a.completion_time != b.completion_time) {
                         return a.completion_time < b.completion_time;
                       }
                       if (a.instance != b.instance) return a.instance < b.instance;
                       if (a.slot != b.slot) return a.slot < b.slot;
                       return a.wave < b.wave;
                     });
    return std::move(result_);
  }

 private:
  Slot& SlotAt(int wave, int inst, int b) {
    return slots_[(static_cast<std::size_t>(wave) * r_ + inst) * B_ + b];
  }
  Lane& LaneAt(int wave, int inst) {
    return lanes_[static_cast<std::size_t>(wave) * r_ + inst];
  }

  bool StopReached() const {
    if (stop_.is_drain()) {
      return completed_ == static_cast<std::int64_t>(requests_.size());
    }
    return completed_ >= stop_.completions();
  }

  void Push(double time, EventKind kind, int wave, int inst) {
    queue_.push(Event{time, kind, wave, inst, seq_++});
  }

  void Trace(std::string_view kind, int wave, int inst) {
    if (options_.trace) {
      fmt::print(*options_.trace, "{},{},{},{}\n", clock_, kind, wave, inst);
    }
  }

  void Fill(int wave, int inst, int b) {
    Slot& slot = SlotAt(wave, inst, b);
    Lane& lane = LaneAt(wave, inst);
    if (next_request_ >= static_cast<std::int64_t>(requests_.size())) {
      slot.request = -1;
      slot.decode_index = 0;
      return;
    }
    Request& req = requests_[static_cast<std::size_t>(next_request_)];
    req.start_decode_time = clock_;
    slot.request = next_request_++;
    slot.decode_index = 0;
    lane.token_load += req.prefill_len;
    ++lane.active;
  }

  void Populate() {
    for (int w = 0; w < kWaves; ++w) {
      for (int i = 0; i < r_; ++i) {
        for (int b = 0; b < B_; ++b) Fill(w, i, b);
      }
    }
  }

  void Expect(int wave, int inst, WavePhase expected, std::string_view event) {
    const WavePhase actual = LaneAt(wave, inst).phase;
    if (actual != expected) {
      throw SimulationError(fmt::format(
          "invalid FSM transition: {} for wave {} instance {} in state {}",
          event, wave, inst, ToString(actual)));
    }
  }

  void TryStartAttention(int inst) {
    Instance& in = instances_[static_cast<std::size_t>(inst)];
    if (in.busy || in.ready.empty()) return;
    const int wave = in.ready.front();
    in.ready.pop_front();
    Expect(wave, inst, WavePhase::kWaitingForAttention, "attention start");
    Lane& lane = LaneAt(wave, inst);
    lane.phase = WavePhase::kAttention;
    in.busy = true;
    const double duration =
        AttentionLatency(coeffs_, static_cast<double>(lane.token_load));
    result_.attention[static_cast<std::size_t>(inst)].Add(
        clock_, clock_ + duration, wave);
    if (options_.on_attention_start) {
      AttentionStart info;
      info.time = clock_;
      info.wave = wave;
      info.instance = inst;
      info.step = lane.steps;
      info.active_slots = lane.active;
      info.token_load = lane.token_load;
      for (int b = 0; b < B_; ++b) {
        const Slot& slot = SlotAt(wave, inst, b);
        if (slot.request < 0) continue;
        info.prefill_load +=
            requests_[static_cast<std::size_t>(slot.request)].prefill_len;
        info.decode_load += slot.decode_index;
      }
      info.recomputed_token_load = info.prefill_load + info.decode_load;
      options_.on_attention_start(info);
    }
    Trace("attention_start", wave, inst);
    Push(clock_ + duration, EventKind::kAttentionDone, wave, inst);
  }

  void OnAttentionDone(int wave, int inst) {
    Expect(wave, inst, WavePhase::kAttention, "attention done");
    Trace("attention_end", wave, inst);
    Lane& lane = LaneAt(wave, inst);
    for (int b = 0; b < B_; ++b) {
      Slot& slot = SlotAt(wave, inst, b);
      if (slot.request < 0) continue;
      Request& req = requests_[static_cast<std::size_t>(slot.request)];
      ++req.tokens_emitted;
      ++slot.decode_index;
      ++lane.token_load;
      if (req.tokens_emitted < req.decode_budget) continue;
      req.completion_time = clock_;
      ++completed_;
      result_.completions.push_back(CompletedRequest{
          req.id, req.arrival_index, req.prefill_len, req.decode_budget,
          req.tokens_emitted, req.start_decode_time, req.completion_time,
          inst, wave, b});
      lane.token_load -= req.prefill_len + slot.decode_index;
      --lane.active;
      Fill(wave, inst, b);
    }
    ++lane.steps;
    lane.phase = WavePhase::kA2F;
    instances_[static_cast<std::size_t>(inst)].busy = false;
    Push(clock_ + half_comm_, EventKind::kA2FArrive, wave, inst);
    TryStartAttention(inst);
  }

  std::int64_t WaveActive(int wave) {
    std::int64_t active = 0;
    for (int i = 0; i < r_; ++i) active += LaneAt(wave, i).active;
    return active;
  }

  void OnA2FArrive(int wave, int inst) {
    Expect(wave, inst, WavePhase::kA2F, "A2F arrival");
    Trace("a2f_arrive", wave, inst);
    LaneAt(wave, inst).phase = WavePhase::kWaitingForFfn;
    WaveState& ws = waves_[wave];
    ws.last_a2f = clock_;
    if (--ws.a2f_pending > 0) return;
    if (WaveActive(wave) == 0) {
      ws.retired = true;
      for (int i = 0; i < r_; ++i) LaneAt(wave, i).phase = WavePhase::kRetired;
      Trace("retire", wave, -1);
      return;
    }
    ffn_queue_.push_back(wave);
    TryStartFfn();
  }

  void TryStartFfn() {
    if (ffn_busy_ || ffn_queue_.empty()) return;
    const int wave = ffn_queue_.front();
    ffn_queue_.pop_front();
    for (int i = 0; i < r_; ++i) {
      Expect(wave, i, WavePhase::kWaitingForFfn, "FFN start");
      LaneAt(wave, i).phase = WavePhase::kFfn;
    }
    const std::int64_t batch = WaveActive(wave);
    const double duration = FfnLatency(coeffs_, static_cast<double>(batch));
    ffn_busy_ = true;
    result_.ffn.Add(clock_, clock_ + duration, wave);
    result_.ffn_dispatches.push_back(FfnDispatch{
        wave, waves_[wave].last_a2f, clock_, clock_ + duration, batch});
    Trace("ffn_start", wave, -1);
    Push(clock_ + duration, EventKind::kFfnDone, wave, -1);
  }

  void OnFfnDone(int wave) {
    Trace("ffn_end", wave, -1);
    ffn_busy_ = false;
    for (int i = 0; i < r_; ++i) {
      Expect(wave, i, WavePhase::kFfn, "FFN done");
      LaneAt(wave, i).phase = WavePhase::kF2A;
      Push(clock_ + half_comm_, EventKind::kF2AArrive, wave, i);
    }
    waves_[wave].a2f_pending = r_;
    TryStartFfn();
  }

  void OnF2AArrive(int wave, int inst) {
    Expect(wave, inst, WavePhase::kF2A, "F2A arrival");
    Trace("f2a_arrive", wave, inst);
    LaneAt(wave, inst).phase = WavePhase::kWaitingForAttention;
    instances_[static_cast<std::size_t>(inst)].ready.push_back(wave);
    TryStartAttention(inst);
  }

  std::string Snapshot() {
    std::ostringstream out;
    fmt::print(out, "clock={} completed={} buffer_remaining={} ffn_busy={}\n",
               clock_, completed_,
               static_cast<std::int64_t>(requests_.size()) - next_request_,
               ffn_busy_);
    for (int w = 0; w < kWaves; ++w) {
      fmt::print(out, "wave {}: retired={} a2f_pending={} active={}\n", w,
                 waves_[w].retired, waves_[w].a2f_pending, WaveActive(w));
      for (int i = 0; i < r_; ++i) {
        const Lane& lane = LaneAt(w, i);
        fmt::print(out, "  instance {}: state={} steps={} load={}\n", i,
                   ToString(lane.phase), lane.steps, lane.token_load);
      }
    }
    return out.str();
  }

  BundleConfig config_;
  LatencyCoefficients coeffs_;
  std::vector<Request> requests_;
  StopRule stop_;
  const RunOptions& options_;
  int r_;
  int B_;
  double half_comm_;

  std::vector<Slot> slots_;
  std::vector<Lane> lanes_;
  std::vector<Instance> instances_;
  WaveState waves_[kWaves];
  std::deque<int> ffn_queue_;
  bool ffn_busy_ = false;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  double clock_ = 0.0;
  std::int64_t next_request_ = 0;
  std::int64_t completed_ = 0;
  SimResult result_;
};

}  // namespace

std::string_view ToString(WavePhase phase) {
  switch (phase) {
    case WavePhase::kAttention:
      return "Attention";
    case WavePhase::kA2F:
      return "A2F";
    case WavePhase::kWaitingForFfn:
      return "WaitingForFfn";
    case WavePhase::kFfn:
      return "Ffn";
    case WavePhase::kF2A:
      return "F2A";
    case WavePhase::kWaitingForAttention:
      return "WaitingForAttention";
    case WavePhase::kRetired:
      return "Retired";
  }
  return "unknown";
}

void ResourceTimeline::Add(double start, double end, int wave) {
  busy_prefix_.push_back(busy_prefix_.empty()
                             ? 0.0
                             : busy_prefix_.back() + (intervals_.back().end -
                                                      intervals_.back().start));
  intervals_.push_back(BusyInterval{start, end, wave});
}

double ResourceTimeline::first_dispatch() const {
  return intervals_.empty() ? 0.0 : intervals_.front().start;
}

double ResourceTimeline::BusyBefore(double t) const {
  // First interval starting at or after t contributes nothing.
  const auto it = std::lower_bound(
      intervals_.begin(), intervals_.end(), t,
      [](const BusyInterval& iv, double value) { return iv.start < value; });
  if (it == intervals_.begin()) return 0.0;
  const std::size_t idx =
      static_cast<std::size_t>(std::distance(intervals_.begin(), it)) - 1;
  const BusyInterval& last = intervals_[idx];
  return busy_prefix_[idx] + (std::min(t, last.end) - last.start);
}

double ResourceTimeline::IdleBefore(double t) const {
  if (intervals_.empty() || t <= first_dispatch()) return 0.0;
  return std::max(0.0, (t - first_dispatch()) - BusyBefore(t));
}

IdleAccumulators SimResult::IdleAt(double t) const {
  IdleAccumulators acc;
  acc.attention.reserve(attention.size());
  for (const auto& tl : attention) acc.attention.push_back(tl.IdleBefore(t));
  acc.ffn = ffn.IdleBefore(t);
  return acc;
}

SimResult RunBundle(const BundleConfig& config,
                    const LatencyCoefficients& coeffs,
                    std::vector<Request> workload, StopRule stop,
                    const RunOptions& options) {
  config.Validate();
  const std::int64_t needed =
      2 * static_cast<std::int64_t>(config.r_sim) * config.B;
  if (static_cast<std::int64_t>(workload.size()) < needed) {
    throw std::invalid_argument(fmt::format(
        "workload of {} requests cannot fill both waves (need {})",
        workload.size(), needed));
  }
  if (!stop.is_drain() && stop.completions() < 1) {
    throw std::invalid_argument("stop rule needs at least one completion");
  }
  BundleSimulator sim(config, coeffs, std::move(workload), stop, options);
  return sim.Run();
}

SimResult RunBundle(const BundleConfig& config,
                    const LatencyCoefficients& coeffs,
                    const WorkloadSpec& spec, const RunOptions& options) {
  config.Validate();
  spec.Validate();
  const std::int64_t total = static_cast<std::int64_t>(config.r_sim) * spec.N;
  return RunBundle(config, coeffs, BuildWorkload(spec, config, total),
                   StopRule::Drain(), options);
}

}  // namespace afd
