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
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "rtgs/errors.hpp"
#include "rtgs/learning.hpp"
#include "rtgs/rng.hpp"
#include "rtgs/scenario.hpp"
#include "rtgs/settlement.hpp"

namespace rtgs {

struct PlayConfig {
  int n_banks = 15;
  ActionGrid grid{80, 2};
  CostParams costs{};
  ScenarioConfig scenario{};
  int exploration_days = 500;
  int convergence_window = 10;
  int max_days = 5000;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_banks < 2) throw InvalidConfiguration("n_banks", "must be >= 2");
    if (exploration_days < 0) throw InvalidConfiguration("exploration_days", "must be >= 0");
    if (convergence_window < 1) throw InvalidConfiguration("convergence_window", "must be >= 1");
    if (max_days < 0) throw InvalidConfiguration("max_days", "must be >= 0");
    if (scenario.incident() &&
        !(scenario.incident_gate_fraction >= 0 && scenario.incident_gate_fraction <= 1))
      throw InvalidConfiguration("incident_gate_fraction", "must lie in [0, 1]");
    costs.validate();
  }

  friend bool operator==(const PlayConfig&, const PlayConfig&) = default;
};

struct PlayResult {
  bool converged = false;
  int days_run = 0;
  std::vector<int> final_profile;                     // levels, one per bank
  std::vector<int> total_liquidity_trajectory;        // per day
  std::vector<std::vector<int>> profile_trajectory;   // per day, per bank levels
  std::vector<std::vector<double>> payoff_trajectory; // per day, per bank
  std::vector<double> mean_delay_trajectory;          // per day, mean total_delay_fraction

  int final_total_liquidity() const {
    return std::accumulate(final_profile.begin(), final_profile.end(), 0);
  }

  // Mean per-bank payoff over the last `window` days.
  double tail_mean_payoff(int window) const {
    const int from = std::max(0, days_run - window);
    double s = 0.0;
    std::size_t n = 0;
    for (int d = from; d < days_run; ++d) {
      for (double p : payoff_trajectory[static_cast<std::size_t>(d)]) s += p;
      n += payoff_trajectory[static_cast<std::size_t>(d)].size();
    }
    return n ? s / static_cast<double>(n) : 0.0;
  }

  // Mean of the per-day mean delay fraction over the last `window` days.
  double tail_mean_delay(int window) const {
    const int from = std::max(0, days_run - window);
    double s = 0.0;
    for (int d = from; d < days_run; ++d) s += mean_delay_trajectory[static_cast<std::size_t>(d)];
    return days_run > from ? s / (days_run - from) : 0.0;
  }

  friend bool operator==(const PlayResult&, const PlayResult&) = default;
};

// True iff the last `window` profiles exist and are identical.
inline bool has_converged(std::span<const std::vector<int>> history, int window) {
  if (window < 1) throw ContractViolation("window must be >= 1");
  const auto w = static_cast<std::size_t>(window);
  if (history.size() < w) return false;
  const auto& last = history.back();
  for (std::size_t k = history.size() - w; k < history.size(); ++k)
    if (history[k] != last) return false;
  return true;
}

// Per-day, per-purpose sub-seeds of a play.
inline std::uint64_t day_seed(std::uint64_t play_seed, StreamPurpose purpose, int day) {
  return mix_seed(play_seed, {static_cast<std::uint64_t>(purpose), static_cast<std::uint64_t>(day)});
}

inline std::uint64_t choice_seed(std::uint64_t play_seed, int day, int bank) {
  return mix_seed(play_seed, {static_cast<std::uint64_t>(StreamPurpose::kChoice),
                              static_cast<std::uint64_t>(day), static_cast<std::uint64_t>(bank)});
}

// Instructions and (for the incident scenario) victim of a given day.
struct DayDraw {
  std::vector<PaymentInstruction> instructions;
  std::optional<BankIndex> victim;
};

inline DayDraw draw_day(std::uint64_t play_seed, int day, int n_banks, const CostParams& costs,
                        const ScenarioConfig& scenario) {
  DayDraw d;
  Rng ins_rng(day_seed(play_seed, StreamPurpose::kInstructions, day));
  d.instructions = sample_instructions(ins_rng, n_banks, costs.day_length);
  if (scenario.incident()) {
    Rng victim_rng(day_seed(play_seed, StreamPurpose::kVictim, day));
    d.victim = select_incident_victim(victim_rng, n_banks);
  }
  return d;
}

// Runs days until no bank changes its level for convergence_window
// consecutive informed days, or max_days is reached. Exploration days do not
// count towards convergence.
inline PlayResult run_play(const PlayConfig& config) {
  config.validate();
  const int n = config.n_banks;
  const int l = config.grid.size();
  std::vector<BeliefState> beliefs(static_cast<std::size_t>(n), BeliefState(l, config.exploration_days));
  std::vector<int> choice(static_cast<std::size_t>(n));
  std::vector<int> levels(static_cast<std::size_t>(n));
  SettlementEngine engine;
  PlayResult result;
  int streak = 0;

  for (int day = 0; day < config.max_days; ++day) {
    for (int i = 0; i < n; ++i) {
      Rng rng(choice_seed(config.seed, day, i));
      choice[static_cast<std::size_t>(i)] = choose_action(beliefs[static_cast<std::size_t>(i)], rng);
      levels[static_cast<std::size_t>(i)] = config.grid.level(choice[static_cast<std::size_t>(i)]);
    }
    const DayDraw draw = draw_day(config.seed, day, n, config.costs, config.scenario);
    const DayOutcome out = engine.run(levels, draw.instructions, config.costs, config.scenario, draw.victim);
    double delay = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      update_beliefs(beliefs[k], choice[k], bin_of_others_average(levels, i, config.grid), out.payoff[k]);
      delay += out.total_delay_fraction[k];
    }

    const bool informed = day >= config.exploration_days;
    if (informed && !result.profile_trajectory.empty() &&
        day - 1 >= config.exploration_days && result.profile_trajectory.back() == levels) {
      ++streak;
    } else {
      streak = informed ? 1 : 0;
    }
    result.profile_trajectory.push_back(levels);
    result.total_liquidity_trajectory.push_back(std::accumulate(levels.begin(), levels.end(), 0));
    result.payoff_trajectory.push_back(out.payoff);
    result.mean_delay_trajectory.push_back(delay / n);
    result.days_run = day + 1;
    result.final_profile = levels;
    if (streak >= config.convergence_window) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace rtgs
