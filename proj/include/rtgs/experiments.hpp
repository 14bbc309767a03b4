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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rtgs/errors.hpp"
#include "rtgs/play.hpp"
#include "rtgs/rng.hpp"
#include "rtgs/scenario.hpp"
#include "rtgs/settlement.hpp"

namespace rtgs {

// Worker count: RTGS_WORKERS if set and positive, else hardware concurrency.
inline int default_worker_count() {
  if (const char* env = std::getenv("RTGS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Calls task(i) for i in [0, count) on up to `workers` threads. Tasks must
// write only to their own output slot. The first exception is rethrown.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task,
                         int workers = default_worker_count()) {
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct PlaySummary {
  double kappa = 0.0;
  int play_index = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  int days_run = 0;
  int total_liquidity = 0;
  double mean_payoff = 0.0;  // per bank, over the convergence window
  double mean_delay = 0.0;   // per-bank total_delay_fraction, over the convergence window
  std::vector<int> final_profile;
  std::vector<int> total_liquidity_trajectory;

  friend bool operator==(const PlaySummary&, const PlaySummary&) = default;
};

inline PlaySummary summarize(const PlayResult& r, double kappa, int play_index, std::uint64_t seed,
                             int window, bool keep_trajectory = true) {
  PlaySummary s;
  s.kappa = kappa;
  s.play_index = play_index;
  s.seed = seed;
  s.converged = r.converged;
  s.days_run = r.days_run;
  s.total_liquidity = r.final_total_liquidity();
  s.mean_payoff = r.tail_mean_payoff(window);
  s.mean_delay = r.tail_mean_delay(window);
  s.final_profile = r.final_profile;
  if (keep_trajectory) s.total_liquidity_trajectory = r.total_liquidity_trajectory;
  return s;
}

// Aggregates over the converged plays of one kappa value.
struct SweepPoint {
  double kappa = 0.0;
  std::vector<PlaySummary> plays;
  int n_converged = 0;
  double mean_total_liquidity = std::numeric_limits<double>::quiet_NaN();
  int min_total_liquidity = 0;
  int max_total_liquidity = 0;
  double mean_payoff = std::numeric_limits<double>::quiet_NaN();
  double mean_delay = std::numeric_limits<double>::quiet_NaN();

  friend bool operator==(const SweepPoint& a, const SweepPoint& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return a.kappa == b.kappa && a.plays == b.plays && a.n_converged == b.n_converged &&
           same(a.mean_total_liquidity, b.mean_total_liquidity) &&
           a.min_total_liquidity == b.min_total_liquidity &&
           a.max_total_liquidity == b.max_total_liquidity && same(a.mean_payoff, b.mean_payoff) &&
           same(a.mean_delay, b.mean_delay);
  }
};

// Pure fold over the member plays; non-converged plays are excluded.
inline SweepPoint aggregate(double kappa, std::vector<PlaySummary> plays) {
  SweepPoint p;
  p.kappa = kappa;
  p.plays = std::move(plays);
  double liq = 0.0, pay = 0.0, del = 0.0;
  for (const auto& s : p.plays) {
    if (!s.converged) continue;
    if (p.n_converged == 0) {
      p.min_total_liquidity = p.max_total_liquidity = s.total_liquidity;
    } else {
      p.min_total_liquidity = std::min(p.min_total_liquidity, s.total_liquidity);
      p.max_total_liquidity = std::max(p.max_total_liquidity, s.total_liquidity);
    }
    ++p.n_converged;
    liq += s.total_liquidity;
    pay += s.mean_payoff;
    del += s.mean_delay;
  }
  if (p.n_converged > 0) {
    p.mean_total_liquidity = liq / p.n_converged;
    p.mean_payoff = pay / p.n_converged;
    p.mean_delay = del / p.n_converged;
  }
  return p;
}

struct SweepResult {
  PlayConfig base;
  int plays_per_point = 0;
  std::vector<SweepPoint> points;  // in the order of the requested kappas

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

inline std::uint64_t sweep_play_seed(std::uint64_t base_seed, std::size_t kappa_index, int play_index) {
  return mix_seed(base_seed, {static_cast<std::uint64_t>(StreamPurpose::kPlay),
                              static_cast<std::uint64_t>(kappa_index),
                              static_cast<std::uint64_t>(play_index)});
}

// The seven-point kappa grid 1/8 ... 512 in multiples of 4.
inline std::vector<double> default_kappas() { return {0.125, 0.5, 2, 8, 32, 128, 512}; }

inline SweepResult run_sweep(const PlayConfig& base, std::span<const double> kappas, int plays_per_point,
                             bool keep_trajectories = true, int workers = default_worker_count()) {
  if (kappas.empty()) throw InvalidConfiguration("kappas", "must be nonempty");
  if (plays_per_point < 1) throw InvalidConfiguration("plays_per_point", "must be >= 1");
  base.validate();
  const std::size_t n_plays = kappas.size() * static_cast<std::size_t>(plays_per_point);
  std::vector<PlaySummary> slots(n_plays);
  parallel_for(
      n_plays,
      [&](std::size_t job) {
        const std::size_t k = job / static_cast<std::size_t>(plays_per_point);
        const int p = static_cast<int>(job % static_cast<std::size_t>(plays_per_point));
        PlayConfig cfg = base;
        cfg.costs.kappa = kappas[k];
        cfg.seed = sweep_play_seed(base.seed, k, p);
        cfg.validate();
        slots[job] = summarize(run_play(cfg), kappas[k], p, cfg.seed, cfg.convergence_window,
                               keep_trajectories);
      },
      workers);

  SweepResult out;
  out.base = base;
  out.plays_per_point = plays_per_point;
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    const auto first = slots.begin() + static_cast<std::ptrdiff_t>(k * static_cast<std::size_t>(plays_per_point));
    out.points.push_back(aggregate(kappas[k], {first, first + plays_per_point}));
  }
  return out;
}

struct FixedProfileResult {
  std::vector<double> mean_payoff;  // per bank
  std::vector<double> mean_delay;   // per bank total_delay_fraction
  double mean_bank_payoff = 0.0;    // averaged over banks
  double mean_total_delay = 0.0;    // sum over banks, averaged over days
  double payoff_std_error = 0.0;    // of the day-averaged per-bank mean payoff
};

// Settles `days` days with frozen actions (no learning) and averages.
inline FixedProfileResult run_fixed_profile(std::span<const int> actions, int days, const CostParams& costs,
                                            const ScenarioConfig& scenario, std::uint64_t seed) {
  if (days < 1) throw InvalidConfiguration("days", "must be >= 1");
  const int n = static_cast<int>(actions.size());
  if (n < 2) throw InvalidConfiguration("actions", "need at least 2 banks");
  FixedProfileResult r;
  r.mean_payoff.assign(static_cast<std::size_t>(n), 0.0);
  r.mean_delay.assign(static_cast<std::size_t>(n), 0.0);
  SettlementEngine engine;
  double sum = 0.0, sum_sq = 0.0;
  for (int d = 0; d < days; ++d) {
    const DayDraw draw = draw_day(seed, d, n, costs, scenario);
    const DayOutcome out = engine.run(actions, draw.instructions, costs, scenario, draw.victim);
    double day_mean = 0.0, day_delay = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      r.mean_payoff[k] += out.payoff[k];
      r.mean_delay[k] += out.total_delay_fraction[k];
      day_mean += out.payoff[k];
      day_delay += out.total_delay_fraction[k];
    }
    day_mean /= n;
    sum += day_mean;
    sum_sq += day_mean * day_mean;
    r.mean_total_delay += day_delay;
  }
  for (auto& v : r.mean_payoff) v /= days;
  for (auto& v : r.mean_delay) v /= days;
  r.mean_bank_payoff = sum / days;
  r.mean_total_delay /= days;
  if (days > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / days) / (days - 1));
    r.payoff_std_error = std::sqrt(var / days);
  }
  return r;
}

struct DeviationGain {
  int alternative_level = 0;
  double gain = 0.0;      // mean payoff(alternative) - mean payoff(profile level)
  double std_error = 0.0; // of the paired difference
};

struct BankDeviationReport {
  int bank = 0;
  int level = 0;
  std::vector<DeviationGain> gains;  // one per alternative level
  DeviationGain best;                // largest raw gain
};

struct NashReport {
  std::vector<BankDeviationReport> banks;
  double max_gain = 0.0;        // max over banks and alternatives of the raw gain
  double epsilon = 0.0;
  double z = 2.0;               // confidence multiplier on the standard error
  bool epsilon_nash = true;     // every gain <= epsilon + z * std_error
  int samples = 0;
};

// Monte-Carlo best-response check with common random numbers: every
// alternative for every bank is evaluated on the same sampled days as the
// profile itself, and gains are paired differences.
inline NashReport best_response_check(std::span<const int> profile, const PlayConfig& config, int samples,
                                      double epsilon = 0.0, double z = 2.0) {
  if (samples < 1) throw InvalidConfiguration("samples", "must be >= 1");
  config.validate();
  const int n = static_cast<int>(profile.size());
  if (n != config.n_banks) throw InvalidConfiguration("profile", "length must equal n_banks");
  const auto& levels = config.grid.levels();
  const std::size_t n_alt = levels.size();

  // diff_sum[i][a], diff_sq[i][a]
  std::vector<double> diff_sum(static_cast<std::size_t>(n) * n_alt, 0.0);
  std::vector<double> diff_sq(static_cast<std::size_t>(n) * n_alt, 0.0);
  SettlementEngine engine;
  std::vector<int> deviated(profile.begin(), profile.end());
  for (int s = 0; s < samples; ++s) {
    const DayDraw draw = draw_day(config.seed, s, n, config.costs, config.scenario);
    const DayOutcome base = engine.run(profile, draw.instructions, config.costs, config.scenario, draw.victim);
    for (int i = 0; i < n; ++i) {
      const auto bi = static_cast<std::size_t>(i);
      for (std::size_t a = 0; a < n_alt; ++a) {
        double d = 0.0;
        if (levels[a] != profile[bi]) {
          deviated[bi] = levels[a];
          const DayOutcome alt = engine.run(deviated, draw.instructions, config.costs, config.scenario, draw.victim);
          deviated[bi] = profile[bi];
          d = alt.payoff[bi] - base.payoff[bi];
        }
        diff_sum[bi * n_alt + a] += d;
        diff_sq[bi * n_alt + a] += d * d;
      }
    }
  }

  NashReport report;
  report.epsilon = epsilon;
  report.z = z;
  report.samples = samples;
  report.max_gain = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto bi = static_cast<std::size_t>(i);
    BankDeviationReport br;
    br.bank = i;
    br.level = profile[bi];
    br.best.gain = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n_alt; ++a) {
      DeviationGain g;
      g.alternative_level = levels[a];
      const double sum = diff_sum[bi * n_alt + a];
      g.gain = sum / samples;
      if (samples > 1) {
        const double var = std::max(0.0, (diff_sq[bi * n_alt + a] - sum * sum / samples) / (samples - 1));
        g.std_error = std::sqrt(var / samples);
      }
      if (g.gain > epsilon + z * g.std_error) report.epsilon_nash = false;
      if (g.gain > br.best.gain) br.best = g;
      br.gains.push_back(g);
    }
    report.max_gain = std::max(report.max_gain, br.best.gain);
    report.banks.push_back(std::move(br));
  }
  return report;
}

// Expected per-bank payoffs of every profile in grid^N, estimated on a common
// set of sampled days. Exhaustive; only for small instances.
struct PayoffTable {
  int n_banks = 0;
  std::vector<int> levels;
  std::vector<std::vector<int>> profiles;    // level profiles, lexicographic in grid index
  std::vector<std::vector<double>> mean;     // per profile, per bank
  std::vector<std::vector<double>> std_error;

  std::size_t index_of(std::span<const int> profile_levels) const {
    std::size_t idx = 0;
    for (int v : profile_levels) {
      const auto it = std::find(levels.begin(), levels.end(), v);
      if (it == levels.end()) throw ContractViolation("profile level not on grid");
      idx = idx * levels.size() + static_cast<std::size_t>(it - levels.begin());
    }
    return idx;
  }
};

inline PayoffTable payoff_table(const PlayConfig& config, int samples) {
  if (samples < 2) throw InvalidConfiguration("samples", "must be >= 2");
  config.validate();
  const int n = config.n_banks;
  const auto& levels = config.grid.levels();
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) {
    count *= levels.size();
    if (count > 100000) throw InvalidConfiguration("n_banks", "profile space too large for an exhaustive table");
  }
  PayoffTable t;
  t.n_banks = n;
  t.levels = levels;
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<int> prof(static_cast<std::size_t>(n));
    std::size_t rem = p;
    for (int i = n - 1; i >= 0; --i) {
      prof[static_cast<std::size_t>(i)] = levels[rem % levels.size()];
      rem /= levels.size();
    }
    t.profiles.push_back(std::move(prof));
  }
  std::vector<std::vector<double>> sum(count, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  auto sq = sum;
  SettlementEngine engine;
  for (int s = 0; s < samples; ++s) {
    const DayDraw draw = draw_day(config.seed, s, n, config.costs, config.scenario);
    for (std::size_t p = 0; p < count; ++p) {
      const DayOutcome out = engine.run(t.profiles[p], draw.instructions, config.costs, config.scenario, draw.victim);
      for (int i = 0; i < n; ++i) {
        const auto bi = static_cast<std::size_t>(i);
        sum[p][bi] += out.payoff[bi];
        sq[p][bi] += out.payoff[bi] * out.payoff[bi];
      }
    }
  }
  t.mean = sum;
  t.std_error = sum;
  for (std::size_t p = 0; p < count; ++p) {
    for (int i = 0; i < n; ++i) {
      const auto bi = static_cast<std::size_t>(i);
      t.mean[p][bi] = sum[p][bi] / samples;
      const double var = std::max(0.0, (sq[p][bi] - sum[p][bi] * sum[p][bi] / samples) / (samples - 1));
      t.std_error[p][bi] = std::sqrt(var / samples);
    }
  }
  return t;
}

// Largest gain any bank could get by deviating from `profile`, read from the
// table; `passes` when every gain is within z combined standard errors.
struct TableNashCheck {
  double max_gain = 0.0;
  bool passes = true;
};

inline TableNashCheck check_against_table(const PayoffTable& table, std::span<const int> profile, double z = 2.0) {
  TableNashCheck c;
  c.max_gain = -std::numeric_limits<double>::infinity();
  const std::size_t here = table.index_of(profile);
  std::vector<int> dev(profile.begin(), profile.end());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    for (int alt : table.levels) {
      if (alt == profile[i]) continue;
      dev[i] = alt;
      const std::size_t there = table.index_of(dev);
      dev[i] = profile[i];
      const double gain = table.mean[there][i] - table.mean[here][i];
      const double se = std::hypot(table.std_error[there][i], table.std_error[here][i]);
      c.max_gain = std::max(c.max_gain, gain);
      if (gain > z * se) c.passes = false;
    }
  }
  return c;
}

struct SizeStudyEntry {
  int n_banks = 0;
  SweepResult sweep;
};

// Demand curves for several system sizes; day length (and so the expected
// number of payments) is held fixed.
inline std::vector<SizeStudyEntry> run_size_study(std::span<const int> sizes, const PlayConfig& base,
                                                  std::span<const double> kappas, int plays_per_point,
                                                  bool keep_trajectories = true,
                                                  int workers = default_worker_count()) {
  if (sizes.empty()) throw InvalidConfiguration("sizes", "must be nonempty");
  for (int s : sizes)
    if (s < 2) throw InvalidConfiguration("sizes", "every size must be >= 2");
  std::vector<SizeStudyEntry> out;
  for (int s : sizes) {
    PlayConfig cfg = base;
    cfg.n_banks = s;
    out.push_back({s, run_sweep(cfg, kappas, plays_per_point, keep_trajectories, workers)});
  }
  return out;
}

struct DemandRow {
  double kappa = 0.0;
  double mean_total_liquidity = 0.0;
  int min_total_liquidity = 0;
  int max_total_liquidity = 0;
  double netting_ratio = 0.0;  // mean total liquidity / expected daily payments
  int n_converged = 0;
};

inline std::vector<DemandRow> demand_curve(const SweepResult& sweep) {
  if (sweep.points.empty()) throw InvalidConfiguration("sweep", "must be nonempty");
  std::vector<DemandRow> rows;
  for (const auto& p : sweep.points) {
    rows.push_back({p.kappa, p.mean_total_liquidity, p.min_total_liquidity, p.max_total_liquidity,
                    p.mean_total_liquidity / sweep.base.costs.day_length, p.n_converged});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const DemandRow& a, const DemandRow& b) { return a.kappa < b.kappa; });
  return rows;
}

// Adaptive outcome against the two fixed baselines: (a) nobody commits
// liquidity, (b) every bank commits what it learned at the highest kappa.
struct ComparisonRow {
  double kappa = 0.0;
  double adaptive_payoff = 0.0;
  double min_liquidity_payoff = 0.0;  // baseline (a)
  double min_delay_payoff = 0.0;      // baseline (b)
};

// Profile of the first converged play at the sweep's highest kappa.
inline std::optional<std::vector<int>> prompt_payment_profile(const SweepResult& sweep) {
  const SweepPoint* top = nullptr;
  for (const auto& p : sweep.points)
    if (!top || p.kappa > top->kappa) top = &p;
  if (!top) return std::nullopt;
  for (const auto& s : top->plays)
    if (s.converged) return s.final_profile;
  return std::nullopt;
}

inline std::vector<ComparisonRow> compare_strategies(const SweepResult& sweep, int days,
                                                     int workers = default_worker_count()) {
  const auto& base = sweep.base;
  const auto prompt = prompt_payment_profile(sweep);
  std::vector<ComparisonRow> rows(sweep.points.size());
  parallel_for(
      sweep.points.size(),
      [&](std::size_t k) {
        const auto& p = sweep.points[k];
        CostParams costs = base.costs;
        costs.kappa = p.kappa;
        const std::uint64_t seed = mix_seed(base.seed, {0xC0FFEEULL, k});
        ComparisonRow row;
        row.kappa = p.kappa;
        double adaptive = 0.0;
        int m = 0;
        for (const auto& s : p.plays) {
          if (!s.converged) continue;
          adaptive += run_fixed_profile(s.final_profile, days, costs, base.scenario, seed).mean_bank_payoff;
          ++m;
        }
        row.adaptive_payoff = m ? adaptive / m : std::numeric_limits<double>::quiet_NaN();
        const std::vector<int> zeros(static_cast<std::size_t>(base.n_banks), 0);
        row.min_liquidity_payoff = run_fixed_profile(zeros, days, costs, base.scenario, seed).mean_bank_payoff;
        row.min_delay_payoff = prompt ? run_fixed_profile(*prompt, days, costs, base.scenario, seed).mean_bank_payoff
                                      : std::numeric_limits<double>::quiet_NaN();
        rows[k] = row;
      },
      workers);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.kappa < b.kappa; });
  return rows;
}

struct DelayRow {
  int level = 0;            // per-bank liquidity
  int total_liquidity = 0;
  double mean_total_delay = 0.0;  // summed delay fractions across banks, per day
};

// Symmetric-profile ladder: every bank holds the same level. All rungs share
// the same sampled days.
inline std::vector<DelayRow> delay_ladder(int n_banks, std::span<const int> levels, int days,
                                          const CostParams& costs, const ScenarioConfig& scenario,
                                          std::uint64_t seed, int workers = default_worker_count()) {
  std::vector<DelayRow> rows(levels.size());
  parallel_for(
      levels.size(),
      [&](std::size_t k) {
        const std::vector<int> prof(static_cast<std::size_t>(n_banks), levels[k]);
        const auto r = run_fixed_profile(prof, days, costs, scenario, seed);
        rows[k] = {levels[k], levels[k] * n_banks, r.mean_total_delay};
      },
      workers);
  return rows;
}

// Per-kappa differences between a scenario sweep and the base sweep.
struct ScenarioDeltaRow {
  double kappa = 0.0;
  double base_liquidity = 0.0;
  double scenario_liquidity = 0.0;
  double liquidity_delta = 0.0;
  double liquidity_delta_pct = 0.0;
  double base_cost = 0.0;      // mean per-bank cost (= -payoff)
  double scenario_cost = 0.0;
  double cost_increase_pct = 0.0;
  double base_delay = 0.0;
  double scenario_delay = 0.0;
};

inline std::vector<ScenarioDeltaRow> scenario_deltas(const SweepResult& base, const SweepResult& scenario) {
  std::vector<ScenarioDeltaRow> rows;
  for (const auto& s : scenario.points) {
    const auto it = std::find_if(base.points.begin(), base.points.end(),
                                 [&](const SweepPoint& b) { return b.kappa == s.kappa; });
    if (it == base.points.end()) throw ContractViolation("scenario kappa missing from base sweep");
    ScenarioDeltaRow r;
    r.kappa = s.kappa;
    r.base_liquidity = it->mean_total_liquidity;
    r.scenario_liquidity = s.mean_total_liquidity;
    r.liquidity_delta = r.scenario_liquidity - r.base_liquidity;
    r.liquidity_delta_pct = 100.0 * r.liquidity_delta / r.base_liquidity;
    r.base_cost = -it->mean_payoff;
    r.scenario_cost = -s.mean_payoff;
    r.cost_increase_pct = 100.0 * (r.scenario_cost - r.base_cost) / r.base_cost;
    r.base_delay = it->mean_delay;
    r.scenario_delay = s.mean_delay;
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.kappa < b.kappa; });
  return rows;
}

}  // namespace rtgs
