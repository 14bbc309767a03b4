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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rtgs/experiments.hpp"
#include "rtgs/io/config.hpp"
#include "rtgs/io/emit.hpp"
#include "rtgs/play.hpp"
#include "rtgs/settlement.hpp"

namespace rtgs::io {

struct CliOptions {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "rtgs_out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scenario;
  std::optional<int> plays;
  bool paper_scale = false;
};

inline constexpr int kPaperScalePlays = 30;

// Config file, then command-line overrides.
inline RunConfig resolve_config(const CliOptions& opt) {
  RunConfig c = opt.config_path.empty() ? parse_config_text("") : parse_config_file(opt.config_path);
  if (opt.seed) c.play.seed = *opt.seed;
  if (opt.scenario) {
    const auto kind = parse_scenario_kind(*opt.scenario);
    if (!kind) throw InvalidConfiguration("--scenario", "expected base, throughput or incident");
    c.play.scenario.kind = *kind;
  }
  if (opt.paper_scale) c.plays_per_point = kPaperScalePlays;
  if (opt.plays) c.plays_per_point = *opt.plays;
  c.validate();
  return c;
}

namespace detail {

inline void emit_sweep_tables(OutputSet& out, const RunConfig& c, const SweepResult& sweep, const std::string& prefix) {
  const auto plays = all_plays(sweep);
  out.write(prefix + "plays.csv", plays_csv(plays, sweep.base.n_banks));
  out.write(prefix + "trajectories.csv", trajectories_csv(sweep));
  out.write(prefix + "demand_curve.csv", demand_curve_csv(demand_curve(sweep), sweep.base.n_banks));
  out.write(prefix + "comparison.csv", comparison_csv(compare_strategies(sweep, c.comparison_days)));
  out.write(prefix + "sweep.json", to_json(sweep).dump(2) + "\n");
}

inline void cmd_sweep(OutputSet& out, const RunConfig& c) {
  const SweepResult sweep = run_sweep(c.play, c.kappas, c.plays_per_point);
  emit_sweep_tables(out, c, sweep, "");
  CostParams costs = c.play.costs;
  costs.kappa = c.kappa;
  out.write("delay_curve.csv",
            delay_curve_csv(delay_ladder(c.play.n_banks, c.play.grid.levels(), c.ladder_days, costs,
                                         c.play.scenario, c.play.seed)));
  if (c.play.scenario.kind != ScenarioKind::kBase) {
    PlayConfig base_cfg = c.play;
    base_cfg.scenario.kind = ScenarioKind::kBase;
    const SweepResult base = run_sweep(base_cfg, c.kappas, c.plays_per_point);
    emit_sweep_tables(out, c, base, "base_");
    out.write("scenario_delta.csv", scenario_delta_csv(scenario_deltas(base, sweep)));
  }
}

inline void cmd_play(OutputSet& out, const RunConfig& c) {
  const PlayConfig cfg = c.single_point();
  const PlayResult r = run_play(cfg);
  out.write("trajectory.csv", play_trajectory_csv(r, cfg.n_banks));
  const auto s = summarize(r, cfg.costs.kappa, 0, cfg.seed, cfg.convergence_window, false);
  out.write("play.json", to_json(s).dump(2) + "\n");
}

inline void cmd_fixed(OutputSet& out, const RunConfig& c) {
  const PlayConfig cfg = c.single_point();
  const auto profile = c.fixed_profile();
  const auto r = run_fixed_profile(profile, c.fixed_days, cfg.costs, cfg.scenario, cfg.seed);
  Csv csv("fixed", {"bank", "level", "mean_payoff", "mean_delay"});
  for (std::size_t i = 0; i < profile.size(); ++i) {
    csv.cell(static_cast<int>(i)).cell(profile[i]).cell(r.mean_payoff[i]).cell(r.mean_delay[i]);
    csv.end_row();
  }
  out.write("fixed.csv", csv.str());
  nlohmann::json j{{"kappa", cfg.costs.kappa},
                   {"days", c.fixed_days},
                   {"profile", profile},
                   {"mean_bank_payoff", r.mean_bank_payoff},
                   {"payoff_std_error", r.payoff_std_error},
                   {"mean_total_delay", r.mean_total_delay}};
  out.write("fixed.json", j.dump(2) + "\n");
}

inline void cmd_size_study(OutputSet& out, const RunConfig& c) {
  const auto study = run_size_study(c.sizes, c.play, c.kappas, c.plays_per_point);
  std::string demand, plays;
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t k = 0; k < study.size(); ++k) {
    const auto& e = study[k];
    std::string d = demand_curve_csv(demand_curve(e.sweep), e.n_banks);
    std::string p = plays_csv(all_plays(e.sweep), e.n_banks);
    if (k > 0) {  // drop repeated schema + header lines
      d = d.substr(d.find('\n', d.find('\n') + 1) + 1);
      p = p.substr(p.find('\n', p.find('\n') + 1) + 1);
    }
    demand += d;
    plays += p;
    j.push_back(to_json(e.sweep));
  }
  out.write("size_study.csv", demand);
  out.write("plays.csv", plays);
  out.write("size_study.json", j.dump(2) + "\n");
}

inline void cmd_nash_check(OutputSet& out, const RunConfig& c) {
  const PlayConfig cfg = c.single_point();
  std::vector<int> profile;
  bool from_play = false;
  if (c.fixed_levels.empty()) {
    profile = run_play(cfg).final_profile;
    from_play = true;
  } else {
    profile = c.fixed_profile();
  }
  if (profile.empty()) throw InvalidConfiguration("max_days", "play produced no profile to check");
  PlayConfig check_cfg = cfg;
  check_cfg.seed = mix_seed(cfg.seed, {0x4E415348ULL});
  const NashReport rep = best_response_check(profile, check_cfg, c.nash_samples, c.nash_epsilon);
  Csv csv("nash", {"bank", "level", "alternative", "gain", "std_error"});
  for (const auto& b : rep.banks)
    for (const auto& g : b.gains) {
      csv.cell(b.bank).cell(b.level).cell(g.alternative_level).cell(g.gain).cell(g.std_error);
      csv.end_row();
    }
  out.write("nash.csv", csv.str());
  nlohmann::json j{{"profile", profile},
                   {"profile_from_play", from_play},
                   {"samples", rep.samples},
                   {"epsilon", rep.epsilon},
                   {"z", rep.z},
                   {"max_gain", rep.max_gain},
                   {"epsilon_nash", rep.epsilon_nash}};
  out.write("nash.json", j.dump(2) + "\n");
}

inline void cmd_day_trace(OutputSet& out, const RunConfig& c) {
  const PlayConfig cfg = c.single_point();
  const auto profile = c.fixed_profile();
  const DayDraw draw = draw_day(cfg.seed, 0, cfg.n_banks, cfg.costs, cfg.scenario);
  std::vector<TraceEvent> trace;
  const DayOutcome o = run_day(profile, draw.instructions, cfg.costs, cfg.scenario, draw.victim, &trace);
  std::ostringstream log;
  write_trace(log, trace);
  out.write("trace.log", log.str());
  out.write("day.csv", day_outcome_csv(o, profile));
}

}  // namespace detail

inline void run_subcommand(const CliOptions& opt, const RunConfig& c) {
  const auto start = std::chrono::system_clock::now();
  OutputSet out(opt.out_dir);
  if (opt.subcommand == "sweep") detail::cmd_sweep(out, c);
  else if (opt.subcommand == "play") detail::cmd_play(out, c);
  else if (opt.subcommand == "fixed") detail::cmd_fixed(out, c);
  else if (opt.subcommand == "size-study") detail::cmd_size_study(out, c);
  else if (opt.subcommand == "nash-check") detail::cmd_nash_check(out, c);
  else if (opt.subcommand == "day-trace") detail::cmd_day_trace(out, c);
  else throw std::logic_error("unknown subcommand " + opt.subcommand);
  out.write("config.txt", emit_config(c));
  out.commit(make_manifest(c, opt.subcommand, out.checksums(), start, std::chrono::system_clock::now()));
}

// Exit status: 0 success, 1 runtime failure, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Interbank RTGS settlement simulator with adaptive liquidity choice"};
  app.require_subcommand(1, 1);
  CliOptions opt;
  app.add_option("--config", opt.config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--seed", opt.seed, "Master seed");
  app.add_option("--scenario", opt.scenario, "base | throughput | incident")
      ->check(CLI::IsMember({"base", "throughput", "incident"}));
  app.add_option("--plays", opt.plays, "Plays per kappa value")->check(CLI::PositiveNumber);
  app.add_flag("--paper-scale", opt.paper_scale, "Use 30 plays per kappa value");
  for (const char* name : {"sweep", "play", "fixed", "size-study", "nash-check", "day-trace"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  opt.subcommand = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    config = resolve_config(opt);
  } catch (const InvalidConfiguration& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return 2;
  }
  try {
    run_subcommand(opt, config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace rtgs::io
