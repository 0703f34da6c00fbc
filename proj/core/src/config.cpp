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

#include "compsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace compsim {
namespace {

using nlohmann::json;

json geometry_to_json(const GeometryParams& g) {
  return json{{"inh_hall_x_m", g.inh_hall_x_m},
              {"inh_hall_y_m", g.inh_hall_y_m},
              {"inh_rows", g.inh_rows},
              {"inh_cols", g.inh_cols},
              {"inh_spacing_m", g.inh_spacing_m},
              {"inh_col_offset_m", g.inh_col_offset_m},
              {"inh_row_offset_m", g.inh_row_offset_m},
              {"inh_trp_height_m", g.inh_trp_height_m},
              {"inh_desk_cols", g.inh_desk_cols},
              {"du_isd_m", g.du_isd_m},
              {"du_rings", g.du_rings},
              {"du_rings_desk", g.du_rings_desk},
              {"du_trp_height_m", g.du_trp_height_m},
              {"du_min_drop_dist_m", g.du_min_drop_dist_m},
              {"du_sector_az_deg", g.du_sector_az_deg},
              {"wraparound", g.wraparound},
              {"ue_height_m", g.ue_height_m}};
}

GeometryParams geometry_from_json(const json& j) {
  GeometryParams g;
  j.at("inh_hall_x_m").get_to(g.inh_hall_x_m);
  j.at("inh_hall_y_m").get_to(g.inh_hall_y_m);
  j.at("inh_rows").get_to(g.inh_rows);
  j.at("inh_cols").get_to(g.inh_cols);
  j.at("inh_spacing_m").get_to(g.inh_spacing_m);
  j.at("inh_col_offset_m").get_to(g.inh_col_offset_m);
  j.at("inh_row_offset_m").get_to(g.inh_row_offset_m);
  j.at("inh_trp_height_m").get_to(g.inh_trp_height_m);
  j.at("inh_desk_cols").get_to(g.inh_desk_cols);
  j.at("du_isd_m").get_to(g.du_isd_m);
  j.at("du_rings").get_to(g.du_rings);
  j.at("du_rings_desk").get_to(g.du_rings_desk);
  j.at("du_trp_height_m").get_to(g.du_trp_height_m);
  j.at("du_min_drop_dist_m").get_to(g.du_min_drop_dist_m);
  j.at("du_sector_az_deg").get_to(g.du_sector_az_deg);
  j.at("wraparound").get_to(g.wraparound);
  j.at("ue_height_m").get_to(g.ue_height_m);
  return g;
}

json channel_to_json(const ChannelParams& c) {
  return json{{"pl_intercept_db", c.pl_intercept_db},
              {"pl_exp_los", c.pl_exp_los},
              {"pl_exp_nlos", c.pl_exp_nlos},
              {"shadow_sigma_los_db", c.shadow_sigma_los_db},
              {"shadow_sigma_nlos_db", c.shadow_sigma_nlos_db},
              {"ricean_k_db", c.ricean_k_db},
              {"fading_rho", c.fading_rho},
              {"sector_pattern", c.sector_pattern},
              {"sector_theta3db_deg", c.sector_theta3db_deg},
              {"sector_ftb_db", c.sector_ftb_db},
              {"sector_peak_gain_db", c.sector_peak_gain_db},
              {"trp_beams", c.trp_beams},
              {"trp_beam_span_deg", c.trp_beam_span_deg},
              {"trp_theta3db_deg", c.trp_theta3db_deg},
              {"trp_peak_gain_db", c.trp_peak_gain_db},
              {"trp_ftb_db", c.trp_ftb_db},
              {"ue_beams_per_panel", c.ue_beams_per_panel},
              {"ue_beam_span_deg", c.ue_beam_span_deg},
              {"ue_theta3db_deg", c.ue_theta3db_deg},
              {"ue_peak_gain_db", c.ue_peak_gain_db},
              {"ue_ftb_db", c.ue_ftb_db}};
}

ChannelParams channel_from_json(const json& j) {
  ChannelParams c;
  j.at("pl_intercept_db").get_to(c.pl_intercept_db);
  j.at("pl_exp_los").get_to(c.pl_exp_los);
  j.at("pl_exp_nlos").get_to(c.pl_exp_nlos);
  j.at("shadow_sigma_los_db").get_to(c.shadow_sigma_los_db);
  j.at("shadow_sigma_nlos_db").get_to(c.shadow_sigma_nlos_db);
  j.at("ricean_k_db").get_to(c.ricean_k_db);
  j.at("fading_rho").get_to(c.fading_rho);
  j.at("sector_pattern").get_to(c.sector_pattern);
  j.at("sector_theta3db_deg").get_to(c.sector_theta3db_deg);
  j.at("sector_ftb_db").get_to(c.sector_ftb_db);
  j.at("sector_peak_gain_db").get_to(c.sector_peak_gain_db);
  j.at("trp_beams").get_to(c.trp_beams);
  j.at("trp_beam_span_deg").get_to(c.trp_beam_span_deg);
  j.at("trp_theta3db_deg").get_to(c.trp_theta3db_deg);
  j.at("trp_peak_gain_db").get_to(c.trp_peak_gain_db);
  j.at("trp_ftb_db").get_to(c.trp_ftb_db);
  j.at("ue_beams_per_panel").get_to(c.ue_beams_per_panel);
  j.at("ue_beam_span_deg").get_to(c.ue_beam_span_deg);
  j.at("ue_theta3db_deg").get_to(c.ue_theta3db_deg);
  j.at("ue_peak_gain_db").get_to(c.ue_peak_gain_db);
  j.at("ue_ftb_db").get_to(c.ue_ftb_db);
  return c;
}

json config_to_json(const Config& cfg) {
  json j;
  j["scenario"] = to_string(cfg.scenario);
  j["scheme"] = to_string(cfg.scheme);
  j["scale"] = to_string(cfg.scale);
  j["n_tx"] = cfg.n_tx;
  j["target_ru"] = cfg.target_ru;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["geometry"] = geometry_to_json(cfg.geometry);
  j["channel"] = channel_to_json(cfg.channel);
  j["traffic"] = json{{"lambda_per_s", cfg.traffic.lambda_per_s},
                      {"file_size_bits", cfg.traffic.file_size_bits}};
  j["scheduler"] = json{{"pf_beta", cfg.scheduler.pf_beta},
                        {"pf_floor_bps", cfg.scheduler.pf_floor_bps},
                        {"prune_top", cfg.scheduler.prune_top},
                        {"allow_third_trp", cfg.scheduler.allow_third_trp}};
  j["engine"] = json{{"tti_s", cfg.engine.tti_s},
                     {"bandwidth_hz", cfg.engine.bandwidth_hz},
                     {"tx_power_dbm", cfg.engine.tx_power_dbm},
                     {"noise_figure_db", cfg.engine.noise_figure_db},
                     {"se_cap", cfg.engine.se_cap},
                     {"warmup_ttis", cfg.engine.warmup_ttis},
                     {"min_measure_ttis", cfg.engine.min_measure_ttis},
                     {"min_samples", cfg.engine.min_samples},
                     {"max_ttis", cfg.engine.max_ttis},
                     {"require_samples", cfg.engine.require_samples},
                     {"max_active_ues", cfg.engine.max_active_ues},
                     {"sched_log", cfg.engine.sched_log}};
  return j;
}

Config config_from_json(const json& j) {
  Config cfg;
  cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  cfg.scale = scale_from_string(j.at("scale").get<std::string>());
  j.at("n_tx").get_to(cfg.n_tx);
  j.at("target_ru").get_to(cfg.target_ru);
  j.at("seeds").get_to(cfg.seeds);
  j.at("out_dir").get_to(cfg.out_dir);
  cfg.geometry = geometry_from_json(j.at("geometry"));
  cfg.channel = channel_from_json(j.at("channel"));
  const json& t = j.at("traffic");
  t.at("lambda_per_s").get_to(cfg.traffic.lambda_per_s);
  t.at("file_size_bits").get_to(cfg.traffic.file_size_bits);
  const json& s = j.at("scheduler");
  s.at("pf_beta").get_to(cfg.scheduler.pf_beta);
  s.at("pf_floor_bps").get_to(cfg.scheduler.pf_floor_bps);
  s.at("prune_top").get_to(cfg.scheduler.prune_top);
  s.at("allow_third_trp").get_to(cfg.scheduler.allow_third_trp);
  const json& e = j.at("engine");
  e.at("tti_s").get_to(cfg.engine.tti_s);
  e.at("bandwidth_hz").get_to(cfg.engine.bandwidth_hz);
  e.at("tx_power_dbm").get_to(cfg.engine.tx_power_dbm);
  e.at("noise_figure_db").get_to(cfg.engine.noise_figure_db);
  e.at("se_cap").get_to(cfg.engine.se_cap);
  e.at("warmup_ttis").get_to(cfg.engine.warmup_ttis);
  e.at("min_measure_ttis").get_to(cfg.engine.min_measure_ttis);
  e.at("min_samples").get_to(cfg.engine.min_samples);
  e.at("max_ttis").get_to(cfg.engine.max_ttis);
  e.at("require_samples").get_to(cfg.engine.require_samples);
  e.at("max_active_ues").get_to(cfg.engine.max_active_ues);
  e.at("sched_log").get_to(cfg.engine.sched_log);
  return cfg;
}

}  // namespace

double EngineParams::noise_power_w() const {
  return dbm_to_watts(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

double EngineParams::trp_power_w() const { return dbm_to_watts(tx_power_dbm); }

Config default_config(ScenarioKind kind) {
  Config cfg;
  cfg.scenario = kind;
  cfg.n_tx = 2;
  cfg.geometry = default_geometry(kind);
  cfg.channel = default_channel_params(kind);
  cfg.engine.bandwidth_hz = is_mmwave(kind) ? 80e6 : 20e6;
  switch (kind) {
    case ScenarioKind::InH4GHz: cfg.engine.tx_power_dbm = 24.0; break;
    case ScenarioKind::DU4GHz: cfg.engine.tx_power_dbm = 44.0; break;
    case ScenarioKind::InH30GHz: cfg.engine.tx_power_dbm = 23.0; break;
    case ScenarioKind::DU30GHz: cfg.engine.tx_power_dbm = 40.0; break;
  }
  return cfg;
}

std::vector<std::string> validate(const Config& cfg) {
  std::vector<std::string> bad;
  if (is_mmwave(cfg.scenario)) {
    if (cfg.n_tx != 2) bad.push_back("n_tx: fixed at 2 ports per analog beam for 30 GHz scenarios");
  } else if (cfg.n_tx != 2 && cfg.n_tx != 4) {
    bad.push_back("n_tx: must be 2 or 4 for 4 GHz scenarios");
  }
  if (!(cfg.target_ru > 0.0 && cfg.target_ru <= 0.7)) {
    bad.push_back("target_ru: must lie in (0, 0.7]");
  }
  if (cfg.seeds.empty()) bad.push_back("seeds: at least one seed required");
  if (cfg.traffic.lambda_per_s < 0.0) bad.push_back("traffic.lambda_per_s: must be >= 0");
  if (cfg.traffic.file_size_bits == 0) bad.push_back("traffic.file_size_bits: must be positive");
  if (cfg.engine.tti_s <= 0.0) bad.push_back("engine.tti_s: must be positive");
  if (cfg.engine.bandwidth_hz <= 0.0) bad.push_back("engine.bandwidth_hz: must be positive");
  if (cfg.engine.se_cap <= 0.0) bad.push_back("engine.se_cap: must be positive");
  if (cfg.engine.warmup_ttis < 0) bad.push_back("engine.warmup_ttis: must be >= 0");
  if (cfg.engine.min_measure_ttis <= 0) bad.push_back("engine.min_measure_ttis: must be positive");
  if (cfg.engine.max_ttis < cfg.engine.min_measure_ttis) {
    bad.push_back("engine.max_ttis: must be >= engine.min_measure_ttis");
  }
  if (cfg.engine.max_active_ues <= 0) bad.push_back("engine.max_active_ues: must be positive");
  if (!(cfg.scheduler.pf_beta > 0.0 && cfg.scheduler.pf_beta < 1.0)) {
    bad.push_back("scheduler.pf_beta: must lie in (0, 1)");
  }
  if (cfg.scheduler.pf_floor_bps <= 0.0) bad.push_back("scheduler.pf_floor_bps: must be positive");
  if (cfg.scheduler.prune_top < 0) bad.push_back("scheduler.prune_top: must be >= 0");
  if (!(cfg.channel.fading_rho >= 0.0 && cfg.channel.fading_rho < 1.0)) {
    bad.push_back("channel.fading_rho: must lie in [0, 1)");
  }
  if (cfg.channel.trp_beams > 0 && cfg.channel.trp_theta3db_deg <= 0.0) {
    bad.push_back("channel.trp_theta3db_deg: must be positive when a beam grid is configured");
  }
  if (cfg.channel.ue_beams_per_panel > 0 && cfg.channel.ue_theta3db_deg <= 0.0) {
    bad.push_back("channel.ue_theta3db_deg: must be positive when receive beams are configured");
  }
  if (is_mmwave(cfg.scenario) && cfg.channel.trp_beams <= 0) {
    bad.push_back("channel.trp_beams: 30 GHz scenarios require a transmit beam grid");
  }
  if (cfg.geometry.du_isd_m <= 0.0) bad.push_back("geometry.du_isd_m: must be positive");
  if (cfg.geometry.inh_rows < 1 || cfg.geometry.inh_cols < 1) {
    bad.push_back("geometry.inh_rows/inh_cols: must be >= 1");
  }
  if (cfg.geometry.ue_height_m <= 0.0) bad.push_back("geometry.ue_height_m: must be positive");
  return bad;
}

void validate_or_throw(const Config& cfg) {
  const auto bad = validate(cfg);
  if (bad.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& b : bad) msg += "\n  " + b;
  throw ConfigError(msg);
}

std::string to_json_string(const Config& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

Config config_from_json_string(const std::string& text) {
  try {
    return config_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration parse failure: ") + e.what());
  }
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_string(ss.str());
}

void save_config(const Config& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write configuration file: " + path);
  out << to_json_string(cfg);
}

void apply_override(Config& cfg, const std::string& key, const std::string& value) {
  json j = config_to_json(cfg);
  std::string pointer = "/" + key;
  for (char& ch : pointer) {
    if (ch == '.') ch = '/';
  }
  json::json_pointer ptr;
  try {
    ptr = json::json_pointer(pointer);
  } catch (const json::exception&) {
    throw ConfigError("malformed override key: " + key);
  }
  if (!j.contains(ptr)) throw ConfigError("unknown configuration key: " + key);
  const json old = j.at(ptr);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings need no quoting
  }
  const bool both_numeric = old.is_number() && parsed.is_number();
  if (!both_numeric && old.type() != parsed.type()) {
    throw ConfigError("override type mismatch for " + key + ": expected " +
                      std::string(old.type_name()) + ", got " + std::string(parsed.type_name()));
  }
  j[ptr] = parsed;
  cfg = config_from_json(j);
}

std::string config_digest(const Config& cfg) {
  Config canon = cfg;
  canon.out_dir.clear();  // artifact placement never changes what was simulated
  const std::string s = to_json_string(canon);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace compsim
