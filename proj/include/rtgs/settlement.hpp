// Copyright 2026 The rtgs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtgs/errors.hpp"
#include "rtgs/rng.hpp"
#include "rtgs/scenario.hpp"

namespace rtgs {

using BankIndex = int;

// One unit-value payment order.
struct PaymentInstruction {
  BankIndex sender = 0;
  BankIndex receiver = 0;
  double arrival_time = 0.0;

  friend bool operator==(const PaymentInstruction&, const PaymentInstruction&) = default;
};

// How the throughput penalty is charged for payments delayed beyond the
// threshold: a flat amount per late payment, an amount per full day of
// lateness beyond the threshold, or once per bank with any late payment.
enum class PenaltyMode { kPerPayment, kPerDelayUnit, kPerBank };

inline std::string_view to_string(PenaltyMode m) {
  switch (m) {
    case PenaltyMode::kPerPayment: return "per_payment";
    case PenaltyMode::kPerDelayUnit: return "per_delay_unit";
    case PenaltyMode::kPerBank: return "per_bank";
  }
  return "per_payment";
}

inline std::optional<PenaltyMode> parse_penalty_mode(std::string_view s) {
  if (s == "per_payment") return PenaltyMode::kPerPayment;
  if (s == "per_delay_unit") return PenaltyMode::kPerDelayUnit;
  if (s == "per_bank") return PenaltyMode::kPerBank;
  return std::nullopt;
}

struct CostParams {
  double lambda = 1.0;               // liquidity cost per unit per day
  double kappa = 1.0;                // delay cost for a full-day delay
  double throughput_penalty = 64.0;
  PenaltyMode penalty_mode = PenaltyMode::kPerPayment;
  double throughput_threshold = 1000.0;
  double day_length = 10000.0;

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(lambda) || lambda <= 0) throw InvalidConfiguration("lambda", "must be finite and > 0");
    if (!finite(kappa) || kappa < 0) throw InvalidConfiguration("kappa", "must be finite and >= 0");
    if (!finite(throughput_penalty) || throughput_penalty < 0)
      throw InvalidConfiguration("throughput_penalty", "must be finite and >= 0");
    if (!finite(day_length) || day_length <= 0)
      throw InvalidConfiguration("day_length", "must be finite and > 0");
    if (!finite(throughput_threshold) || throughput_threshold <= 0 ||
        throughput_threshold > day_length)
      throw InvalidConfiguration("throughput_threshold", "must lie in (0, day_length]");
  }

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

// Per-bank cost decomposition of one settled day. All vectors have one entry
// per bank.
struct DayOutcome {
  std::vector<double> liquidity_cost;
  std::vector<double> delay_cost;
  std::vector<double> penalty_cost;
  std::vector<double> payoff;  // -(liquidity + delay + penalty)
  std::vector<int> sent_count;
  std::vector<int> received_count;  // settled incoming payments
  std::vector<int> settled_count;   // settled outgoing payments
  std::vector<double> total_delay_fraction;
  std::vector<int> end_balance;

  std::size_t n_banks() const { return payoff.size(); }

  friend bool operator==(const DayOutcome&, const DayOutcome&) = default;
};

enum class TraceKind { kArrive, kSettle, kRelease, kUnsettled };

inline std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::kArrive: return "arrive";
    case TraceKind::kSettle: return "settle";
    case TraceKind::kRelease: return "release";
    case TraceKind::kUnsettled: return "unsettled";
  }
  return "?";
}

// One settlement event. For kRelease, sender is the released bank and
// receiver and instruction are -1. `instruction` indexes the day's
// instruction sequence and is not part of the text record.
struct TraceEvent {
  double time = 0.0;
  TraceKind kind = TraceKind::kArrive;
  BankIndex sender = 0;
  BankIndex receiver = 0;
  std::int64_t instruction = -1;
};

// Line-delimited record: "<time> <kind> <sender> <receiver>", time with
// round-trip precision.
inline void write_trace(std::ostream& os, std::span<const TraceEvent> events) {
  char buf[64];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%.17g", e.time);
    os << buf << ' ' << to_string(e.kind) << ' ' << e.sender << ' ' << e.receiver << '\n';
  }
}

// Poisson arrivals with rate 1 per time unit over [0, day_length]; sender
// uniform over banks, receiver uniform over the others. Sorted by time.
inline std::vector<PaymentInstruction> sample_instructions(Rng& rng, int n_banks,
                                                           double day_length) {
  if (n_banks < 2) throw InvalidConfiguration("n_banks", "need at least 2 banks");
  if (!(day_length >= 0)) throw InvalidConfiguration("day_length", "must be >= 0");
  std::vector<PaymentInstruction> out;
  out.reserve(static_cast<std::size_t>(day_length + 4 * std::sqrt(day_length) + 8));
  const auto n = static_cast<std::uint64_t>(n_banks);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(1.0);
    if (t > day_length) break;
    const auto sender = static_cast<BankIndex>(rng.below(n));
    auto receiver = static_cast<BankIndex>(rng.below(n - 1));
    if (receiver >= sender) ++receiver;
    out.push_back({sender, receiver, t});
  }
  return out;
}

inline BankIndex select_incident_victim(Rng& rng, int n_banks) {
  if (n_banks < 1) throw InvalidConfiguration("n_banks", "need at least 1 bank");
  return static_cast<BankIndex>(rng.below(static_cast<std::uint64_t>(n_banks)));
}

// Event-driven settlement of one day. Holds scratch buffers so a play can
// reuse one engine across days without reallocating; the result depends only
// on the arguments of run().
class SettlementEngine {
 public:
  DayOutcome run(std::span<const int> actions,
                 std::span<const PaymentInstruction> instructions,
                 const CostParams& costs, const ScenarioConfig& scenario,
                 std::optional<BankIndex> victim = std::nullopt,
                 std::vector<TraceEvent>* trace = nullptr) {
    const int n = static_cast<int>(actions.size());
    check_inputs(actions, instructions, costs, scenario, victim);
    const double day = costs.day_length;
    const double gate_end = scenario.incident() ? scenario.incident_gate_fraction * day
                                                : -std::numeric_limits<double>::infinity();
    const BankIndex gated_bank = victim.value_or(-1);
    trace_ = trace;
    if (trace_) trace_->clear();

    reset(n, instructions.size());
    for (int i = 0; i < n; ++i) liquidity_[i] = actions[i];
    instructions_ = instructions;
    throughput_ = scenario.throughput();
    threshold_ = costs.throughput_threshold;

    bool released = !scenario.incident();
    for (std::size_t k = 0; k < instructions.size(); ++k) {
      const auto& ins = instructions[k];
      if (!released && ins.arrival_time >= gate_end) {
        released = true;
        gated_ = -1;
        emit(gate_end, TraceKind::kRelease, gated_bank, -1);
        schedule(gated_bank);
        cascade(gate_end);
      }
      gated_ = released ? -1 : gated_bank;
      ++sent_[ins.sender];
      emit(ins.arrival_time, TraceKind::kArrive, ins.sender, ins.receiver, static_cast<std::int64_t>(k));
      enqueue(static_cast<std::uint32_t>(k));
      schedule(ins.sender);
      cascade(ins.arrival_time);
    }
    if (!released && gate_end <= day) {
      gated_ = -1;
      emit(gate_end, TraceKind::kRelease, gated_bank, -1);
      schedule(gated_bank);
      cascade(gate_end);
    }

    // Still-queued instructions are charged as if settled at day end; no
    // balances move.
    for (int b = 0; b < n; ++b) {
      for (auto k = head_[b]; k != kNone; k = next_[k]) {
        const auto& ins = instructions[k];
        emit(day, TraceKind::kUnsettled, ins.sender, ins.receiver, k);
        charge(ins.sender, day - ins.arrival_time);
      }
    }

    DayOutcome out;
    out.liquidity_cost.resize(n);
    out.delay_cost.resize(n);
    out.penalty_cost.resize(n);
    out.payoff.resize(n);
    out.total_delay_fraction.resize(n);
    out.sent_count.assign(sent_.begin(), sent_.end());
    out.received_count.assign(received_.begin(), received_.end());
    out.settled_count.assign(settled_.begin(), settled_.end());
    out.end_balance.assign(liquidity_.begin(), liquidity_.end());
    for (int i = 0; i < n; ++i) {
      out.total_delay_fraction[i] = delay_sum_[i] / day;
      out.liquidity_cost[i] = costs.lambda * actions[i];
      out.delay_cost[i] = costs.kappa * out.total_delay_fraction[i];
      out.penalty_cost[i] = throughput_ ? penalty(costs, i) : 0.0;
      out.payoff[i] = -(out.liquidity_cost[i] + out.delay_cost[i] + out.penalty_cost[i]);
    }
    trace_ = nullptr;
    return out;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  static void check_inputs(std::span<const int> actions,
                           std::span<const PaymentInstruction> instructions,
                           const CostParams& costs, const ScenarioConfig& scenario,
                           std::optional<BankIndex> victim) {
    const int n = static_cast<int>(actions.size());
    if (n < 2) throw InvalidConfiguration("actions", "need at least 2 banks");
    for (int a : actions)
      if (a < 0) throw InvalidConfiguration("actions", "liquidity must be >= 0");
    costs.validate();
    if (scenario.incident() != victim.has_value())
      throw ContractViolation("victim must be given exactly when the scenario is incident");
    if (victim && (*victim < 0 || *victim >= n))
      throw ContractViolation("victim index out of range");
    double prev = 0.0;
    for (const auto& ins : instructions) {
      if (ins.arrival_time < prev) throw ContractViolation("instructions not sorted by arrival_time");
      if (ins.arrival_time > costs.day_length)
        throw ContractViolation("instruction arrives after day end");
      if (ins.sender < 0 || ins.sender >= n || ins.receiver < 0 || ins.receiver >= n ||
          ins.sender == ins.receiver)
        throw ContractViolation("instruction has invalid sender/receiver");
      prev = ins.arrival_time;
    }
  }

  void reset(int n, std::size_t n_instructions) {
    liquidity_.assign(n, 0);
    head_.assign(n, kNone);
    tail_.assign(n, kNone);
    pending_.assign(n, 0);
    sent_.assign(n, 0);
    received_.assign(n, 0);
    settled_.assign(n, 0);
    late_.assign(n, 0);
    late_excess_.assign(n, 0.0);
    delay_sum_.assign(n, 0.0);
    next_.assign(n_instructions, kNone);
    work_.clear();
  }

  void emit(double t, TraceKind kind, BankIndex s, BankIndex r, std::int64_t k = -1) {
    if (trace_) trace_->push_back({t, kind, s, r, k});
  }

  void enqueue(std::uint32_t k) {
    const BankIndex b = instructions_[k].sender;
    if (tail_[b] == kNone) {
      head_[b] = k;
    } else {
      next_[tail_[b]] = k;
    }
    tail_[b] = k;
  }

  void schedule(BankIndex b) {
    if (!pending_[b]) {
      pending_[b] = 1;
      work_.push_back(b);
    }
  }

  void charge(BankIndex sender, double delay) {
    delay_sum_[sender] += delay;
    if (throughput_ && delay > threshold_) {
      ++late_[sender];
      late_excess_[sender] += delay - threshold_;
    }
  }

  double penalty(const CostParams& costs, int i) const {
    switch (costs.penalty_mode) {
      case PenaltyMode::kPerPayment: return costs.throughput_penalty * late_[i];
      case PenaltyMode::kPerDelayUnit: return costs.throughput_penalty * late_excess_[i] / costs.day_length;
      case PenaltyMode::kPerBank: return late_[i] > 0 ? costs.throughput_penalty : 0.0;
    }
    return 0.0;
  }

  // Settles from the work queue until no scheduled bank can pay. Every
  // settlement in the cascade carries timestamp t.
  void cascade(double t) {
    for (std::size_t rd = 0; rd < work_.size(); ++rd) {
      const BankIndex b = work_[rd];
      pending_[b] = 0;
      if (b == gated_) continue;
      while (liquidity_[b] >= 1 && head_[b] != kNone) {
        const auto k = head_[b];
        head_[b] = next_[k];
        if (head_[b] == kNone) tail_[b] = kNone;
        const auto& ins = instructions_[k];
        --liquidity_[b];
        ++liquidity_[ins.receiver];
        assert(liquidity_[b] >= 0);
        ++settled_[b];
        ++received_[ins.receiver];
        charge(b, t - ins.arrival_time);
        emit(t, TraceKind::kSettle, b, ins.receiver, k);
        schedule(ins.receiver);
      }
    }
    work_.clear();
  }

  std::span<const PaymentInstruction> instructions_;
  std::vector<TraceEvent>* trace_ = nullptr;
  bool throughput_ = false;
  double threshold_ = 0.0;
  BankIndex gated_ = -1;

  std::vector<int> liquidity_;
  std::vector<std::uint32_t> head_, tail_, next_;
  std::vector<char> pending_;
  std::vector<BankIndex> work_;
  std::vector<int> sent_, received_, settled_, late_;
  std::vector<double> late_excess_;
  std::vector<double> delay_sum_;
};

inline DayOutcome run_day(std::span<const int> actions,
                          std::span<const PaymentInstruction> instructions,
                          const CostParams& costs, const ScenarioConfig& scenario,
                          std::optional<BankIndex> victim = std::nullopt,
                          std::vector<TraceEvent>* trace = nullptr) {
  SettlementEngine engine;
  return engine.run(actions, instructions, costs, scenario, victim, trace);
}

}  // namespace rtgs
