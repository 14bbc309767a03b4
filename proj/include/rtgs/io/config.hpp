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

// Flat "key = value" configuration files. One key per line, '#' starts a
// comment, lists are comma-separated. Every key is optional; unknown keys
// are rejected.

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rtgs/errors.hpp"
#include "rtgs/experiments.hpp"
#include "rtgs/play.hpp"

namespace rtgs::io {

// A PlayConfig plus the knobs of every experiment subcommand.
struct RunConfig {
  PlayConfig play{};
  std::vector<double> kappas = default_kappas();
  double kappa = 8.0;  // single-point runs (play, fixed, nash-check, day-trace)
  int plays_per_point = 5;
  std::vector<int> sizes{15, 50};
  std::vector<int> fixed_levels;  // one per bank, or one value for all; empty = all zero
  int fixed_days = 200;
  int nash_samples = 200;
  double nash_epsilon = 0.0;
  int comparison_days = 50;
  int ladder_days = 100;

  void validate() const {
    PlayConfig p = play;
    p.costs.kappa = kappa;
    p.validate();
    if (kappas.empty()) throw InvalidConfiguration("kappas", "must be nonempty");
    for (double k : kappas)
      if (!std::isfinite(k) || k < 0) throw InvalidConfiguration("kappas", "values must be finite and >= 0");
    if (plays_per_point < 1) throw InvalidConfiguration("plays_per_point", "must be >= 1");
    if (sizes.empty()) throw InvalidConfiguration("sizes", "must be nonempty");
    for (int s : sizes)
      if (s < 2) throw InvalidConfiguration("sizes", "values must be >= 2");
    for (int v : fixed_levels)
      if (v < 0) throw InvalidConfiguration("fixed_levels", "values must be >= 0");
    if (fixed_levels.size() > 1 && static_cast<int>(fixed_levels.size()) != play.n_banks)
      throw InvalidConfiguration("fixed_levels", "must list one value or one per bank");
    if (fixed_days < 1) throw InvalidConfiguration("fixed_days", "must be >= 1");
    if (nash_samples < 1) throw InvalidConfiguration("nash_samples", "must be >= 1");
    if (!std::isfinite(nash_epsilon) || nash_epsilon < 0)
      throw InvalidConfiguration("nash_epsilon", "must be finite and >= 0");
    if (comparison_days < 1) throw InvalidConfiguration("comparison_days", "must be >= 1");
    if (ladder_days < 1) throw InvalidConfiguration("ladder_days", "must be >= 1");
  }

  // PlayConfig for single-point runs.
  PlayConfig single_point() const {
    PlayConfig p = play;
    p.costs.kappa = kappa;
    return p;
  }

  // Per-bank levels for fixed-profile runs.
  std::vector<int> fixed_profile() const {
    const auto n = static_cast<std::size_t>(play.n_banks);
    if (fixed_levels.empty()) return std::vector<int>(n, 0);
    if (fixed_levels.size() == 1) return std::vector<int>(n, fixed_levels.front());
    return fixed_levels;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw InvalidConfiguration(std::string(key), "expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline double parse_real(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw InvalidConfiguration(std::string(key), "expected a real number, got '" + s + "'");
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

}  // namespace detail

// Parses configuration text. Unset fields keep their defaults; the throughput
// threshold defaults to a tenth of the day.
inline RunConfig parse_config_text(std::string_view text) {
  using namespace detail;
  RunConfig c;
  std::optional<double> threshold;
  std::optional<int> grid_max, grid_step;
  std::map<std::string, int, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InvalidConfiguration("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view v = trim(line.substr(eq + 1));
    if (seen.count(key)) throw InvalidConfiguration(key, "duplicate key on line " + std::to_string(line_no));
    seen[key] = line_no;

    if (key == "n_banks") c.play.n_banks = parse_int<int>(key, v);
    else if (key == "day_length") c.play.costs.day_length = parse_real(key, v);
    else if (key == "lambda") c.play.costs.lambda = parse_real(key, v);
    else if (key == "kappa") c.kappa = parse_real(key, v);
    else if (key == "kappas") {
      c.kappas.clear();
      for (auto item : split_list(v)) c.kappas.push_back(parse_real(key, item));
    }
    else if (key == "grid_max") grid_max = parse_int<int>(key, v);
    else if (key == "grid_step") grid_step = parse_int<int>(key, v);
    else if (key == "exploration_days") c.play.exploration_days = parse_int<int>(key, v);
    else if (key == "convergence_window") c.play.convergence_window = parse_int<int>(key, v);
    else if (key == "max_days") c.play.max_days = parse_int<int>(key, v);
    else if (key == "seed") c.play.seed = parse_int<std::uint64_t>(key, v);
    else if (key == "scenario") {
      const auto kind = parse_scenario_kind(v);
      if (!kind) throw InvalidConfiguration(key, "expected base, throughput or incident");
      c.play.scenario.kind = *kind;
    }
    else if (key == "throughput_penalty") c.play.costs.throughput_penalty = parse_real(key, v);
    else if (key == "throughput_penalty_mode") {
      const auto mode = parse_penalty_mode(v);
      if (!mode) throw InvalidConfiguration(key, "expected per_payment, per_delay_unit or per_bank");
      c.play.costs.penalty_mode = *mode;
    }
    else if (key == "throughput_threshold") threshold = parse_real(key, v);
    else if (key == "incident_gate_fraction") c.play.scenario.incident_gate_fraction = parse_real(key, v);
    else if (key == "plays_per_point") c.plays_per_point = parse_int<int>(key, v);
    else if (key == "sizes") {
      c.sizes.clear();
      for (auto item : split_list(v)) c.sizes.push_back(parse_int<int>(key, item));
    }
    else if (key == "fixed_levels") {
      c.fixed_levels.clear();
      for (auto item : split_list(v)) c.fixed_levels.push_back(parse_int<int>(key, item));
    }
    else if (key == "fixed_days") c.fixed_days = parse_int<int>(key, v);
    else if (key == "nash_samples") c.nash_samples = parse_int<int>(key, v);
    else if (key == "nash_epsilon") c.nash_epsilon = parse_real(key, v);
    else if (key == "comparison_days") c.comparison_days = parse_int<int>(key, v);
    else if (key == "ladder_days") c.ladder_days = parse_int<int>(key, v);
    else throw InvalidConfiguration(key, "unknown key on line " + std::to_string(line_no));
  }
  c.play.grid = ActionGrid(grid_max.value_or(80), grid_step.value_or(2));
  c.play.costs.throughput_threshold = threshold.value_or(c.play.costs.day_length / 10.0);
  c.validate();
  return c;
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfiguration("config", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Every field as ordered (key, value) pairs, in the file syntax.
inline std::vector<std::pair<std::string, std::string>> config_fields(const RunConfig& c) {
  using detail::join;
  auto real = [](double v) { return format_real(v); };
  auto integer = [](int v) { return std::to_string(v); };
  const auto& p = c.play;
  return {
      {"n_banks", std::to_string(p.n_banks)},
      {"day_length", real(p.costs.day_length)},
      {"lambda", real(p.costs.lambda)},
      {"kappa", real(c.kappa)},
      {"kappas", join(c.kappas, real)},
      {"grid_max", std::to_string(p.grid.max_level())},
      {"grid_step", std::to_string(p.grid.step())},
      {"exploration_days", std::to_string(p.exploration_days)},
      {"convergence_window", std::to_string(p.convergence_window)},
      {"max_days", std::to_string(p.max_days)},
      {"seed", std::to_string(p.seed)},
      {"scenario", std::string(to_string(p.scenario.kind))},
      {"throughput_penalty", real(p.costs.throughput_penalty)},
      {"throughput_penalty_mode", std::string(to_string(p.costs.penalty_mode))},
      {"throughput_threshold", real(p.costs.throughput_threshold)},
      {"incident_gate_fraction", real(p.scenario.incident_gate_fraction)},
      {"plays_per_point", std::to_string(c.plays_per_point)},
      {"sizes", join(c.sizes, integer)},
      {"fixed_levels", join(c.fixed_levels, integer)},
      {"fixed_days", std::to_string(c.fixed_days)},
      {"nash_samples", std::to_string(c.nash_samples)},
      {"nash_epsilon", real(c.nash_epsilon)},
      {"comparison_days", std::to_string(c.comparison_days)},
      {"ladder_days", std::to_string(c.ladder_days)},
  };
}

inline std::string emit_config(const RunConfig& c) {
  std::string out = "# rtgs-sim config\n";
  for (const auto& [k, v] : config_fields(c)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace rtgs::io
