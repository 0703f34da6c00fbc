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

#include "compsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace compsim {

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw RunError("percentile of an empty sample set");
  if (p < 0.0 || p > 1.0) throw RunError("percentile fraction outside [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double rank = p * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return samples[lo] + frac * (samples[hi] - samples[lo]);
}

PooledCell pool_samples(ScenarioKind scenario, SchemeMode scheme, int n_tx, double target_ru,
                        const std::vector<std::vector<double>>& per_seed_upt,
                        const std::vector<double>& per_seed_ru) {
  PooledCell cell;
  cell.scenario = scenario;
  cell.scheme = scheme;
  cell.n_tx = n_tx;
  cell.target_ru = target_ru;
  cell.n_seeds = static_cast<int>(per_seed_upt.size());

  std::vector<double> pooled;
  for (const auto& seed_samples : per_seed_upt) {
    pooled.insert(pooled.end(), seed_samples.begin(), seed_samples.end());
  }
  if (pooled.empty()) throw RunError("pooling requires at least one throughput sample");
  cell.n_samples = pooled.size();
  cell.mean_upt_bps = std::accumulate(pooled.begin(), pooled.end(), 0.0) / pooled.size();
  cell.edge_upt_bps = percentile(pooled, 0.05);
  cell.achieved_ru =
      per_seed_ru.empty()
          ? 0.0
          : std::accumulate(per_seed_ru.begin(), per_seed_ru.end(), 0.0) / per_seed_ru.size();
  return cell;
}

std::pair<double, double> gains(const PooledCell& candidate, const PooledCell& baseline) {
  if (baseline.mean_upt_bps <= 0.0 || baseline.edge_upt_bps <= 0.0) {
    throw RunError("gains against a non-positive baseline");
  }
  return {100.0 * (candidate.mean_upt_bps / baseline.mean_upt_bps - 1.0),
          100.0 * (candidate.edge_upt_bps / baseline.edge_upt_bps - 1.0)};
}

std::vector<ReportRow> build_report(const std::vector<PooledCell>& cells) {
  using Key = std::tuple<int, int, double>;  // scenario, n_tx, target_ru
  std::map<Key, const PooledCell*> baselines;
  for (const PooledCell& c : cells) {
    if (c.scheme == SchemeMode::Baseline) {
      baselines[{static_cast<int>(c.scenario), c.n_tx, c.target_ru}] = &c;
    }
  }
  std::vector<ReportRow> rows;
  for (const PooledCell& c : cells) {
    const auto it = baselines.find({static_cast<int>(c.scenario), c.n_tx, c.target_ru});
    if (it == baselines.end()) {
      throw RunError("no baseline cell for " + to_string(c.scenario) + " n_tx=" +
                     std::to_string(c.n_tx) + " ru=" + std::to_string(c.target_ru));
    }
    ReportRow row;
    row.cell = c;
    std::tie(row.mean_gain_pct, row.edge_gain_pct) = gains(c, *it->second);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    const auto key = [](const ReportRow& r) {
      return std::make_tuple(static_cast<int>(r.cell.scenario), r.cell.n_tx, r.cell.target_ru,
                             static_cast<int>(r.cell.scheme));
    };
    return key(a) < key(b);
  });
  return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "scenario,scheme,n_tx,target_ru,achieved_ru,mean_upt_bps,edge_upt_bps,"
        "mean_gain_pct,edge_gain_pct,n_samples,n_seeds\n";
  os << std::setprecision(10);
  for (const ReportRow& r : rows) {
    os << to_string(r.cell.scenario) << ',' << to_string(r.cell.scheme) << ',' << r.cell.n_tx
       << ',' << r.cell.target_ru << ',' << r.cell.achieved_ru << ',' << r.cell.mean_upt_bps
       << ',' << r.cell.edge_upt_bps << ',' << r.mean_gain_pct << ',' << r.edge_gain_pct << ','
       << r.cell.n_samples << ',' << r.cell.n_seeds << '\n';
  }
  return os.str();
}

std::string report_text(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "scenario" << std::setw(10) << "scheme" << std::right
     << std::setw(6) << "n_tx" << std::setw(10) << "tgt_ru" << std::setw(10) << "ru"
     << std::setw(16) << "mean_upt_mbps" << std::setw(16) << "edge_upt_mbps" << std::setw(12)
     << "mean_gain%" << std::setw(12) << "edge_gain%" << std::setw(10) << "samples"
     << std::setw(8) << "seeds" << '\n';
  for (const ReportRow& r : rows) {
    os << std::left << std::setw(10) << to_string(r.cell.scenario) << std::setw(10)
       << to_string(r.cell.scheme) << std::right << std::setw(6) << r.cell.n_tx << std::fixed
       << std::setprecision(2) << std::setw(10) << r.cell.target_ru << std::setw(10)
       << r.cell.achieved_ru << std::setw(16) << r.cell.mean_upt_bps / 1e6 << std::setw(16)
       << r.cell.edge_upt_bps / 1e6 << std::setw(12) << r.mean_gain_pct << std::setw(12)
       << r.edge_gain_pct << std::setw(10) << r.cell.n_samples << std::setw(8) << r.cell.n_seeds
       << '\n';
    os.unsetf(std::ios::fixed);
  }
  return os.str();
}

}  // namespace compsim
