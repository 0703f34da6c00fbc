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

#include "compsim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace compsim {

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw RunError("write failure: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string transfers_csv(const RunResult& result, const std::string& digest) {
  std::ostringstream os;
  os << "# config_digest=" << digest << " seed=" << result.summary.seed << "\n";
  os << "ue_id,arrival_tti,completion_tti,upt_bps,serving_cluster,scheme\n";
  os << std::setprecision(10);
  for (const auto& t : result.transfers) {
    if (!t.measured) continue;  // warm-up completions are bookkeeping, not results
    os << t.ue_id << ',' << t.arrival_tti << ',' << t.completion_tti << ',' << t.upt_bps << ','
       << t.serving_cluster << ',' << to_string(t.scheme) << "\n";
  }
  return os.str();
}

std::string sched_log_csv(const RunResult& result, const std::string& digest) {
  std::ostringstream os;
  os << "# config_digest=" << digest << " seed=" << result.summary.seed << "\n";
  os << "tti,cluster,trp,ue,mode_tag,rank,pf_value\n";
  os << std::setprecision(10);
  for (const auto& row : result.sched_log) {
    os << row.tti << ',' << row.cluster << ',' << row.trp << ',' << row.ue << ','
       << to_string(row.tag) << ',' << row.rank << ',' << row.pf_value << "\n";
  }
  return os.str();
}

std::string summary_json(const RunSummary& summary, const std::string& digest) {
  nlohmann::json j;
  j["scenario"] = to_string(summary.scenario);
  j["scheme"] = to_string(summary.scheme);
  j["n_tx"] = summary.n_tx;
  j["target_ru"] = summary.target_ru;
  j["achieved_ru"] = summary.achieved_ru;
  j["lambda"] = summary.lambda_per_s;
  j["mean_upt_bps"] = summary.mean_upt_bps;
  j["edge_upt_bps"] = summary.edge_upt_bps;
  j["n_samples"] = summary.n_samples;
  j["seed"] = summary.seed;
  j["config_digest"] = digest;
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunSummary s;
    s.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    s.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    j.at("n_tx").get_to(s.n_tx);
    j.at("target_ru").get_to(s.target_ru);
    j.at("achieved_ru").get_to(s.achieved_ru);
    j.at("lambda").get_to(s.lambda_per_s);
    j.at("mean_upt_bps").get_to(s.mean_upt_bps);
    j.at("edge_upt_bps").get_to(s.edge_upt_bps);
    j.at("n_samples").get_to(s.n_samples);
    j.at("seed").get_to(s.seed);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw RunError(std::string("summary parse failure: ") + e.what());
  }
}

std::string calibration_json(const CalibrationRecord& record) {
  nlohmann::json j;
  j["scenario"] = to_string(record.scenario);
  j["scale"] = to_string(record.scale);
  j["n_tx"] = record.n_tx;
  j["target_ru"] = record.target_ru;
  j["lambda_per_s"] = record.lambda_per_s;
  j["achieved_ru"] = record.achieved_ru;
  j["seeds"] = record.seeds;
  j["config_digest"] = record.config_digest;
  return j.dump(2) + "\n";
}

CalibrationRecord calibration_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CalibrationRecord r;
    r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    r.scale = scale_from_string(j.at("scale").get<std::string>());
    j.at("n_tx").get_to(r.n_tx);
    j.at("target_ru").get_to(r.target_ru);
    j.at("lambda_per_s").get_to(r.lambda_per_s);
    j.at("achieved_ru").get_to(r.achieved_ru);
    j.at("seeds").get_to(r.seeds);
    j.at("config_digest").get_to(r.config_digest);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw RunError(std::string("calibration parse failure: ") + e.what());
  }
}

}  // namespace compsim
