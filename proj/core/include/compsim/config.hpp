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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compsim/channel.hpp"
#include "compsim/scenario.hpp"
#include "compsim/scheduler.hpp"
#include "compsim/traffic.hpp"
#include "compsim/types.hpp"

namespace compsim {

struct EngineParams {
  double tti_s = 1e-3;
  double bandwidth_hz = 20e6;
  double tx_power_dbm = 24.0;
  double noise_figure_db = 9.0;
  double se_cap = kSeCapDefault;
  int warmup_ttis = 2000;
  int min_measure_ttis = 20000;    // measurement runs until both minimums are met
  int min_samples = 500;
  int max_ttis = 120000;           // hard stop, counted after warm-up
  bool require_samples = true;     // zero measured completions is a run failure
  int max_active_ues = 512;        // overload guard; exceeding it ends measurement early
  bool sched_log = false;

  double noise_power_w() const;
  double trp_power_w() const;
};

struct Config {
  ScenarioKind scenario = ScenarioKind::InH4GHz;
  SchemeMode scheme = SchemeMode::Baseline;
  LayoutScale scale = LayoutScale::Full;
  int n_tx = 2;
  double target_ru = 0.1;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = "out";

  GeometryParams geometry;
  ChannelParams channel;
  TrafficParams traffic;
  SchedulerParams scheduler;
  EngineParams engine;
};

/// Scenario preset: every parameter at its scenario default.
Config default_config(ScenarioKind kind);

/// Violated-field messages; empty means valid.
std::vector<std::string> validate(const Config& cfg);

/// Throws ConfigError listing every violation.
void validate_or_throw(const Config& cfg);

std::string to_json_string(const Config& cfg);
Config config_from_json_string(const std::string& text);
Config load_config(const std::string& path);
void save_config(const Config& cfg, const std::string& path);

/// Applies "dotted.key=value" to the config (e.g. "channel.ricean_k_db=6").
/// Top-level enum fields accept their string names. Unknown keys or
/// malformed values throw ConfigError.
void apply_override(Config& cfg, const std::string& key, const std::string& value);

/// FNV-1a hash of the canonical serialized form, hex-encoded; embedded in
/// every output artifact for provenance.
std::string config_digest(const Config& cfg);

}  // namespace compsim
