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

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtgs/experiments.hpp"
#include "rtgs/io/config.hpp"
#include "rtgs/play.hpp"

namespace rtgs::io {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

// Row-oriented CSV builder. The first line is a schema comment.
class Csv {
 public:
  Csv(std::string_view name, std::vector<std::string> columns) : columns_(columns.size()) {
    out_ << "# rtgs-sim " << name << " schema v" << kCsvSchemaVersion << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  Csv& cell(double v) { return raw(format_real(v)); }
  Csv& cell(int v) { return raw(std::to_string(v)); }
  Csv& cell(long v) { return raw(std::to_string(v)); }
  Csv& cell(std::uint64_t v) { return raw(std::to_string(v)); }
  Csv& cell(bool v) { return raw(v ? "1" : "0"); }
  Csv& cell(std::string_view v) { return raw(v); }

  void end_row() {
    if (filled_ != columns_) throw std::logic_error("csv row has wrong number of cells");
    out_ << '\n';
    filled_ = 0;
  }

  std::string str() const { return out_.str(); }

 private:
  Csv& raw(std::string_view v) {
    out_ << (filled_++ ? "," : "") << v;
    return *this;
  }

  std::size_t columns_;
  std::size_t filled_ = 0;
  std::ostringstream out_;
};

// Writes result files into one directory and records their checksums. If the
// run fails before commit(), every file written so far is removed.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [name, sum] : checksums_) std::filesystem::remove(dir_ / name, ec);
  }

  void write(const std::string& name, std::string_view content) {
    const auto path = dir_ / name;
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    }
    checksums_[name] = sha256_hex(content);
  }

  const std::map<std::string, std::string>& checksums() const { return checksums_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Writes the manifest atomically (temp file + rename) and keeps all outputs.
  void commit(const nlohmann::json& manifest) {
    const auto tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write manifest");
      out << manifest.dump(2) << '\n';
      if (!out) throw std::runtime_error("manifest write failed");
    }
    std::filesystem::rename(tmp, dir_ / "manifest.json");
    committed_ = true;
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> checksums_;
  bool committed_ = false;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config_fields(c)) j[k] = v;
  return j;
}

inline nlohmann::json make_manifest(const RunConfig& c, std::string_view subcommand,
                                    const std::map<std::string, std::string>& checksums,
                                    std::chrono::system_clock::time_point start,
                                    std::chrono::system_clock::time_point end) {
  nlohmann::json m;
  m["tool"] = "rtgs-sim";
  m["version"] = kToolVersion;
  m["subcommand"] = subcommand;
  m["seed"] = c.play.seed;
  m["config"] = config_json(c);
  m["start_time"] = utc_timestamp(start);
  m["end_time"] = utc_timestamp(end);
  m["files"] = checksums;
  return m;
}

// ---------------------------------------------------------------------------
// Tables

inline std::string plays_csv(std::span<const PlaySummary> plays, int n_banks = 0) {
  Csv csv("plays", {"n_banks", "kappa", "play", "seed", "converged", "days_run", "total_liquidity",
                    "mean_payoff", "mean_delay"});
  for (const auto& p : plays) {
    csv.cell(n_banks).cell(p.kappa).cell(p.play_index).cell(p.seed).cell(p.converged).cell(p.days_run)
        .cell(p.total_liquidity).cell(p.mean_payoff).cell(p.mean_delay);
    csv.end_row();
  }
  return csv.str();
}

inline std::vector<PlaySummary> all_plays(const SweepResult& s) {
  std::vector<PlaySummary> out;
  for (const auto& p : s.points) out.insert(out.end(), p.plays.begin(), p.plays.end());
  return out;
}

inline std::string trajectories_csv(const SweepResult& s) {
  Csv csv("trajectories", {"kappa", "play", "day", "total_liquidity"});
  for (const auto& pt : s.points)
    for (const auto& p : pt.plays)
      for (std::size_t d = 0; d < p.total_liquidity_trajectory.size(); ++d) {
        csv.cell(p.kappa).cell(p.play_index).cell(static_cast<int>(d)).cell(p.total_liquidity_trajectory[d]);
        csv.end_row();
      }
  return csv.str();
}

inline std::string demand_curve_csv(std::span<const DemandRow> rows, int n_banks) {
  Csv csv("demand_curve", {"n_banks", "kappa", "mean_total_liquidity", "min_total_liquidity",
                           "max_total_liquidity", "netting_ratio", "n_converged"});
  for (const auto& r : rows) {
    csv.cell(n_banks).cell(r.kappa).cell(r.mean_total_liquidity).cell(r.min_total_liquidity)
        .cell(r.max_total_liquidity).cell(r.netting_ratio).cell(r.n_converged);
    csv.end_row();
  }
  return csv.str();
}

inline std::string comparison_csv(std::span<const ComparisonRow> rows) {
  Csv csv("comparison", {"kappa", "adaptive_payoff", "min_liquidity_payoff", "min_delay_payoff"});
  for (const auto& r : rows) {
    csv.cell(r.kappa).cell(r.adaptive_payoff).cell(r.min_liquidity_payoff).cell(r.min_delay_payoff);
    csv.end_row();
  }
  return csv.str();
}

inline std::string delay_curve_csv(std::span<const DelayRow> rows) {
  Csv csv("delay_curve", {"level", "total_liquidity", "mean_total_delay"});
  for (const auto& r : rows) {
    csv.cell(r.level).cell(r.total_liquidity).cell(r.mean_total_delay);
    csv.end_row();
  }
  return csv.str();
}

inline std::string scenario_delta_csv(std::span<const ScenarioDeltaRow> rows) {
  Csv csv("scenario_delta", {"kappa", "base_liquidity", "scenario_liquidity", "liquidity_delta",
                             "liquidity_delta_pct", "base_cost", "scenario_cost", "cost_increase_pct",
                             "base_delay", "scenario_delay"});
  for (const auto& r : rows) {
    csv.cell(r.kappa).cell(r.base_liquidity).cell(r.scenario_liquidity).cell(r.liquidity_delta)
        .cell(r.liquidity_delta_pct).cell(r.base_cost).cell(r.scenario_cost).cell(r.cost_increase_pct)
        .cell(r.base_delay).cell(r.scenario_delay);
    csv.end_row();
  }
  return csv.str();
}

// Per-day rows: day, totals, then one action and one payoff column per bank.
inline std::string play_trajectory_csv(const PlayResult& r, int n_banks) {
  std::vector<std::string> cols{"day", "total_liquidity", "mean_delay"};
  for (int i = 0; i < n_banks; ++i) cols.push_back("action_" + std::to_string(i));
  for (int i = 0; i < n_banks; ++i) cols.push_back("payoff_" + std::to_string(i));
  Csv csv("play_trajectory", cols);
  for (int d = 0; d < r.days_run; ++d) {
    const auto k = static_cast<std::size_t>(d);
    csv.cell(d).cell(r.total_liquidity_trajectory[k]).cell(r.mean_delay_trajectory[k]);
    for (int v : r.profile_trajectory[k]) csv.cell(v);
    for (double v : r.payoff_trajectory[k]) csv.cell(v);
    csv.end_row();
  }
  return csv.str();
}

inline std::string day_outcome_csv(const DayOutcome& o, std::span<const int> actions) {
  Csv csv("day_outcome", {"bank", "action", "liquidity_cost", "delay_cost", "penalty_cost", "payoff",
                          "sent_count", "received_count", "settled_count", "total_delay_fraction",
                          "end_balance"});
  for (std::size_t i = 0; i < o.n_banks(); ++i) {
    csv.cell(static_cast<int>(i)).cell(actions[i]).cell(o.liquidity_cost[i]).cell(o.delay_cost[i])
        .cell(o.penalty_cost[i]).cell(o.payoff[i]).cell(o.sent_count[i]).cell(o.received_count[i])
        .cell(o.settled_count[i]).cell(o.total_delay_fraction[i]).cell(o.end_balance[i]);
    csv.end_row();
  }
  return csv.str();
}

// ---------------------------------------------------------------------------
// JSON documents

inline nlohmann::json to_json(const PlaySummary& p) {
  return {{"kappa", p.kappa},
          {"play", p.play_index},
          {"seed", p.seed},
          {"converged", p.converged},
          {"days_run", p.days_run},
          {"total_liquidity", p.total_liquidity},
          {"mean_payoff", p.mean_payoff},
          {"mean_delay", p.mean_delay},
          {"final_profile", p.final_profile}};
}

// NaN aggregates (no converged plays) serialize as null.
inline nlohmann::json real_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : s.points) {
    nlohmann::json plays = nlohmann::json::array();
    for (const auto& pl : p.plays) plays.push_back(to_json(pl));
    points.push_back({{"kappa", p.kappa},
                      {"n_converged", p.n_converged},
                      {"mean_total_liquidity", real_or_null(p.mean_total_liquidity)},
                      {"min_total_liquidity", p.min_total_liquidity},
                      {"max_total_liquidity", p.max_total_liquidity},
                      {"mean_payoff", real_or_null(p.mean_payoff)},
                      {"mean_delay", real_or_null(p.mean_delay)},
                      {"plays", plays}});
  }
  return {{"scenario", std::string(to_string(s.base.scenario.kind))},
          {"n_banks", s.base.n_banks},
          {"day_length", s.base.costs.day_length},
          {"plays_per_point", s.plays_per_point},
          {"points", points}};
}

}  // namespace rtgs::io
