// Copyright 2026 the compsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compsim/types.hpp"

namespace compsim {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::InH4GHz: return "inh4ghz";
    case ScenarioKind::DU4GHz: return "du4ghz";
    case ScenarioKind::InH30GHz: return "inh30ghz";
    case ScenarioKind::DU30GHz: return "du30ghz";
  }
  throw ConfigError("unknown scenario kind");
}

std::string to_string(SchemeMode mode) {
  switch (mode) {
    case SchemeMode::Baseline: return "baseline";
    case SchemeMode::DPS: return "dps";
    case SchemeMode::NCJT: return "ncjt";
  }
  throw ConfigError("unknown scheme mode");
}

std::string to_string(LayoutScale scale) {
  switch (scale) {
    case LayoutScale::Full: return "full";
    case LayoutScale::Desk: return "desk";
  }
  throw ConfigError("unknown layout scale");
}

ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "inh4ghz") return ScenarioKind::InH4GHz;
  if (s == "du4ghz") return ScenarioKind::DU4GHz;
  if (s == "inh30ghz") return ScenarioKind::InH30GHz;
  if (s == "du30ghz") return ScenarioKind::DU30GHz;
  throw ConfigError("unknown scenario kind: " + s);
}

SchemeMode scheme_from_string(const std::string& s) {
  if (s == "baseline") return SchemeMode::Baseline;
  if (s == "dps") return SchemeMode::DPS;
  if (s == "ncjt") return SchemeMode::NCJT;
  throw ConfigError("unknown scheme mode: " + s);
}

LayoutScale scale_from_string(const std::string& s) {
  if (s == "full") return LayoutScale::Full;
  if (s == "desk") return LayoutScale::Desk;
  throw ConfigError("unknown layout scale: " + s);
}

}  // namespace compsim
