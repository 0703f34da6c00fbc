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

#include <cstddef>
#include <string>
#include <vector>

#include "compsim/types.hpp"

namespace compsim {

/// Linear interpolation between order statistics at rank p * (n - 1),
/// zero-indexed. p = 0.05 is the cell-edge convention.
double percentile(std::vector<double> samples, double p);

/// One (scenario, scheme, n_tx, load point) cell with samples pooled by
/// concatenation across seeds before computing mean and percentile.
struct PooledCell {
  ScenarioKind scenario = ScenarioKind::InH4GHz;
  SchemeMode scheme = SchemeMode::Baseline;
  int n_tx = 2;
  double target_ru = 0.0;
  double achieved_ru = 0.0;  // seed-averaged
  double mean_upt_bps = 0.0;
  double edge_upt_bps = 0.0; // 5th percentile of the pooled samples
  std::size_t n_samples = 0;
  int n_seeds = 0;
};

PooledCell pool_samples(ScenarioKind scenario, SchemeMode scheme, int n_tx, double target_ru,
                        const std::vector<std::vector<double>>& per_seed_upt,
                        const std::vector<double>& per_seed_ru);

/// Relative (mean, edge) gain in percent of a candidate cell over the
/// baseline cell at the same (scenario, n_tx, target_ru).
std::pair<double, double> gains(const PooledCell& candidate, const PooledCell& baseline);

struct ReportRow {
  PooledCell cell;
  double mean_gain_pct = 0.0;
  double edge_gain_pct = 0.0;
};

/// Joins every cell against its baseline; cells without a baseline are a
/// contract violation. Row order: scenario, n_tx, target_ru, scheme.
std::vector<ReportRow> build_report(const std::vector<PooledCell>& cells);

/// CSV with exactly the columns: scenario, scheme, n_tx, target_ru,
/// achieved_ru, mean_upt_bps, edge_upt_bps, mean_gain_pct, edge_gain_pct,
/// n_samples, n_seeds.
std::string report_csv(const std::vector<ReportRow>& rows);

/// Aligned human-readable table of the same rows.
std::string report_text(const std::vector<ReportRow>& rows);

}  // namespace compsim
