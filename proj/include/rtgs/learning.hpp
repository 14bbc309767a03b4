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
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rtgs/errors.hpp"
#include "rtgs/rng.hpp"

namespace rtgs {

// The common action set: liquidity levels 0, step, 2*step, ...
class ActionGrid {
 public:
  ActionGrid() : ActionGrid(80, 2) {}

  ActionGrid(int max_level, int step) : step_(step) {
    if (step <= 0) throw InvalidConfiguration("grid_step", "must be > 0");
    if (max_level < 0) throw InvalidConfiguration("grid_max", "must be >= 0");
    for (int v = 0; v <= max_level; v += step) levels_.push_back(v);
  }

  // Explicit level list; must start at 0 and be evenly spaced.
  static ActionGrid from_levels(std::vector<int> levels, int step_if_single = 2) {
    if (levels.empty() || levels.front() != 0)
      throw InvalidConfiguration("grid", "levels must start at 0");
    const int step = levels.size() > 1 ? levels[1] - levels[0] : step_if_single;
    for (std::size_t k = 1; k < levels.size(); ++k)
      if (levels[k] - levels[k - 1] != step || step <= 0)
        throw InvalidConfiguration("grid", "levels must be strictly increasing and evenly spaced");
    ActionGrid g(0, step);
    g.levels_ = std::move(levels);
    return g;
  }

  int size() const { return static_cast<int>(levels_.size()); }
  int step() const { return step_; }
  int level(int index) const { return levels_.at(static_cast<std::size_t>(index)); }
  int max_level() const { return levels_.back(); }
  const std::vector<int>& levels() const { return levels_; }

  // Index of a level, or nullopt when off-grid.
  std::optional<int> index_of(int level) const {
    if (level < 0 || level % step_ != 0 || level / step_ >= size()) return std::nullopt;
    return level / step_;
  }

  friend bool operator==(const ActionGrid&, const ActionGrid&) = default;

 private:
  int step_;
  std::vector<int> levels_;
};

// Nearest grid index to the mean of the other banks' levels; exact midpoints
// round up. Integer arithmetic, so ties are detected exactly.
inline int bin_of_others_average(std::span<const int> actions, int self, const ActionGrid& grid) {
  const auto n = static_cast<std::int64_t>(actions.size());
  if (n < 2) throw ContractViolation("profile needs at least 2 banks");
  if (self < 0 || self >= n) throw ContractViolation("self index out of range");
  std::int64_t sum = 0;
  for (std::int64_t i = 0; i < n; ++i)
    if (i != self) sum += actions[static_cast<std::size_t>(i)];
  const std::int64_t m = n - 1;
  const std::int64_t step = grid.step();
  // floor(sum / m / step + 1/2)
  const std::int64_t idx = (2 * sum + step * m) / (2 * step * m);
  return static_cast<int>(std::min<std::int64_t>(idx, grid.size() - 1));
}

// One bank's accumulated information: payoff estimates per (own action,
// opponent-average bin) cell, and opponent-average bin frequencies.
struct BeliefState {
  int grid_size = 0;
  std::vector<double> payoff_sum;            // grid_size x grid_size, row = own action
  std::vector<std::int64_t> payoff_count;    // same layout
  std::vector<std::int64_t> bin_count;       // grid_size
  std::vector<std::uint8_t> forced_tried;    // cells already chosen by forced exploration
  std::int64_t days_observed = 0;
  std::int64_t exploration_remaining = 0;

  BeliefState() = default;
  BeliefState(int grid_size, std::int64_t exploration_days)
      : grid_size(grid_size),
        payoff_sum(cells(grid_size), 0.0),
        payoff_count(cells(grid_size), 0),
        bin_count(static_cast<std::size_t>(grid_size), 0),
        forced_tried(cells(grid_size), 0),
        exploration_remaining(exploration_days) {
    if (grid_size < 1) throw InvalidConfiguration("grid", "needs at least one level");
    if (exploration_days < 0) throw InvalidConfiguration("exploration_days", "must be >= 0");
  }

  std::size_t cell(int action, int bin) const {
    return static_cast<std::size_t>(action) * static_cast<std::size_t>(grid_size) +
           static_cast<std::size_t>(bin);
  }

  std::int64_t count(int action, int bin) const { return payoff_count[cell(action, bin)]; }

  // Sample mean of payoffs observed in a cell; nullopt when never observed.
  std::optional<double> estimate(int action, int bin) const {
    const auto c = cell(action, bin);
    if (payoff_count[c] == 0) return std::nullopt;
    return payoff_sum[c] / static_cast<double>(payoff_count[c]);
  }

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  static std::size_t cells(int l) {
    return l > 0 ? static_cast<std::size_t>(l) * static_cast<std::size_t>(l) : 0;
  }
};

inline void update_beliefs(BeliefState& b, int own_action, int observed_bin, double payoff) {
  if (own_action < 0 || own_action >= b.grid_size || observed_bin < 0 ||
      observed_bin >= b.grid_size)
    throw ContractViolation("belief update index out of range");
  const auto c = b.cell(own_action, observed_bin);
  b.payoff_sum[c] += payoff;
  ++b.payoff_count[c];
  ++b.bin_count[static_cast<std::size_t>(observed_bin)];
  ++b.days_observed;
}

// Fictitious-play frequency with a uniform prior: (1 + count) / (t + L).
inline double estimate_probability(const BeliefState& b, int bin) {
  if (bin < 0 || bin >= b.grid_size) throw ContractViolation("bin out of range");
  return (1.0 + static_cast<double>(b.bin_count[static_cast<std::size_t>(bin)])) /
         (static_cast<double>(b.days_observed) + b.grid_size);
}

// Most frequently observed bin; ties to the lower bin.
inline int modal_bin(const BeliefState& b) {
  int best = 0;
  for (int k = 1; k < b.grid_size; ++k)
    if (b.bin_count[static_cast<std::size_t>(k)] > b.bin_count[static_cast<std::size_t>(best)])
      best = k;
  return best;
}

// Expected payoff of each own action under the current beliefs. Unobserved
// cells fall back to the mean of the action's observed cells, then to the
// mean of every observed payoff.
inline std::vector<double> expected_payoffs(const BeliefState& b) {
  const int l = b.grid_size;
  double global_sum = 0.0;
  std::int64_t global_count = 0;
  for (std::size_t c = 0; c < b.payoff_sum.size(); ++c) {
    global_sum += b.payoff_sum[c];
    global_count += b.payoff_count[c];
  }
  const double global_mean = global_count > 0 ? global_sum / static_cast<double>(global_count) : 0.0;

  std::vector<double> prob(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) prob[static_cast<std::size_t>(k)] = estimate_probability(b, k);

  std::vector<double> out(static_cast<std::size_t>(l));
  std::vector<double> means(static_cast<std::size_t>(l));
  for (int a = 0; a < l; ++a) {
    double row_sum = 0.0;
    int row_cells = 0;
    for (int k = 0; k < l; ++k) {
      const auto c = b.cell(a, k);
      if (b.payoff_count[c] > 0) {
        means[static_cast<std::size_t>(k)] = b.payoff_sum[c] / static_cast<double>(b.payoff_count[c]);
        row_sum += means[static_cast<std::size_t>(k)];
        ++row_cells;
      }
    }
    const double fallback = row_cells > 0 ? row_sum / row_cells : global_mean;
    double e = 0.0;
    for (int k = 0; k < l; ++k) {
      const double f = b.payoff_count[b.cell(a, k)] > 0 ? means[static_cast<std::size_t>(k)] : fallback;
      e += f * prob[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(a)] = e;
  }
  return out;
}

enum class ChoiceRule { kExplore, kForced, kInformed };

struct Choice {
  int action = 0;
  ChoiceRule rule = ChoiceRule::kInformed;
};

// Picks an action index:
//   1. while exploration days remain, uniformly at random;
//   2. else, if some action was never tried against the modal opponent bin,
//      the least-sampled such action (each cell is forced at most once);
//   3. else the action maximizing expected payoff, ties to the lower level.
inline Choice choose_action_detailed(BeliefState& b, Rng& rng) {
  const int l = b.grid_size;
  if (b.exploration_remaining > 0) {
    --b.exploration_remaining;
    return {static_cast<int>(rng.below(static_cast<std::uint64_t>(l))), ChoiceRule::kExplore};
  }

  const int mode = modal_bin(b);
  int forced = -1;
  std::int64_t forced_row = std::numeric_limits<std::int64_t>::max();
  for (int a = 0; a < l; ++a) {
    const auto c = b.cell(a, mode);
    if (b.payoff_count[c] != 0 || b.forced_tried[c]) continue;
    std::int64_t row = 0;
    for (int k = 0; k < l; ++k) row += b.payoff_count[b.cell(a, k)];
    if (row < forced_row) {
      forced_row = row;
      forced = a;
    }
  }
  if (forced >= 0) {
    b.forced_tried[b.cell(forced, mode)] = 1;
    return {forced, ChoiceRule::kForced};
  }

  const auto expected = expected_payoffs(b);
  int best = 0;
  for (int a = 1; a < l; ++a)
    if (expected[static_cast<std::size_t>(a)] > expected[static_cast<std::size_t>(best)]) best = a;
  return {best, ChoiceRule::kInformed};
}

inline int choose_action(BeliefState& b, Rng& rng) { return choose_action_detailed(b, rng).action; }

}  // namespace rtgs
