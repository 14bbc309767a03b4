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

// JSON snapshot of a BeliefState, for checkpoints and test fixtures.

#include <string>

#include "json.hpp"
#include "rtgs/errors.hpp"
#include "rtgs/learning.hpp"

namespace rtgs {

inline void to_json(nlohmann::json& j, const BeliefState& b) {
  j = nlohmann::json{{"format", "rtgs-belief-v1"},
                     {"grid_size", b.grid_size},
                     {"days_observed", b.days_observed},
                     {"exploration_remaining", b.exploration_remaining},
                     {"payoff_sum", b.payoff_sum},
                     {"payoff_count", b.payoff_count},
                     {"bin_count", b.bin_count},
                     {"forced_tried", b.forced_tried}};
}

inline void from_json(const nlohmann::json& j, BeliefState& b) {
  if (j.value("format", "") != "rtgs-belief-v1") throw InvalidConfiguration("belief", "unknown snapshot format");
  BeliefState out;
  j.at("grid_size").get_to(out.grid_size);
  j.at("days_observed").get_to(out.days_observed);
  j.at("exploration_remaining").get_to(out.exploration_remaining);
  j.at("payoff_sum").get_to(out.payoff_sum);
  j.at("payoff_count").get_to(out.payoff_count);
  j.at("bin_count").get_to(out.bin_count);
  j.at("forced_tried").get_to(out.forced_tried);
  const auto l = static_cast<std::size_t>(out.grid_size);
  if (out.grid_size < 1 || out.payoff_sum.size() != l * l || out.payoff_count.size() != l * l ||
      out.forced_tried.size() != l * l || out.bin_count.size() != l)
    throw InvalidConfiguration("belief", "table sizes do not match grid_size");
  b = std::move(out);
}

inline std::string belief_snapshot(const BeliefState& b) { return nlohmann::json(b).dump(); }

inline BeliefState parse_belief_snapshot(const std::string& text) {
  return nlohmann::json::parse(text).get<BeliefState>();
}

}  // namespace rtgs
