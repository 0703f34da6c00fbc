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

#include <string>

#include "compsim/engine.hpp"
#include "compsim/metrics.hpp"

namespace compsim {

/// Writes via a temp file in the target directory, then renames, so partial
/// writes are never observable under the final name.
void atomic_write(const std::string& path, const std::string& content);

/// Per-transfer CSV: ue_id, arrival_tti, completion_tti, upt_bps,
/// serving_cluster, scheme. Provenance comment header first.
std::string transfers_csv(const RunResult& result, const std::string& digest);

/// Scheduling decision CSV: tti, cluster, trp, ue, mode_tag, rank, pf_value.
std::string sched_log_csv(const RunResult& result, const std::string& digest);

/// Run summary as a JSON object with the fields: scenario, scheme, n_tx,
/// target_ru, achieved_ru, lambda, mean_upt_bps, edge_upt_bps, n_samples,
/// seed, plus config_digest.
std::string summary_json(const RunSummary& summary, const std::string& digest);
RunSummary summary_from_json(const std::string& text);

std::string calibration_json(const CalibrationRecord& record);
CalibrationRecord calibration_from_json(const std::string& text);

}  // namespace compsim
