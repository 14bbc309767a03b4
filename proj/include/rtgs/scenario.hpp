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

#include <optional>
#include <string>
#include <string_view>

#include "rtgs/errors.hpp"

namespace rtgs {

enum class ScenarioKind { kBase, kThroughput, kIncident };

inline std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kBase: return "base";
    case ScenarioKind::kThroughput: return "throughput";
    case ScenarioKind::kIncident: return "incident";
  }
  return "base";
}

inline std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  if (s == "base") return ScenarioKind::kBase;
  if (s == "throughput") return ScenarioKind::kThroughput;
  if (s == "incident") return ScenarioKind::kIncident;
  return std::nullopt;
}

// Which rule set a settlement day runs under. The throughput penalty and
// deadline live in CostParams and are only charged for kThroughput; the
// incident gate only applies for kIncident.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kBase;
  // The victim cannot settle before incident_gate_fraction * T.
  double incident_gate_fraction = 0.5;

  bool throughput() const { return kind == ScenarioKind::kThroughput; }
  bool incident() const { return kind == ScenarioKind::kIncident; }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

}  // namespace rtgs
