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

// Batch experimentation front end: run | calibrate | sweep | report |
// dump-layout | dump-gains. Exit codes: 0 success, 1 validation error,
// 2 run failure, 3 calibration failure, 4 partial sweep failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "compsim/config.hpp"
#include "compsim/engine.hpp"
#include "compsim/io.hpp"
#include "compsim/metrics.hpp"
#include "compsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace compsim;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string scenario = "inh4ghz";
  std::string scale;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> overrides;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Configuration file (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--scenario", opts.scenario,
                  "Scenario preset when no --config is given "
                  "(inh4ghz|du4ghz|inh30ghz|du30ghz)");
  cmd->add_option("--scale", opts.scale, "Layout scale override (full|desk)");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--seed", opts.seeds, "Seed list override");
  cmd->add_option("--override", opts.overrides, "dotted.key=value configuration override");
  cmd->add_option("--jobs", opts.jobs, "Worker threads for independent runs")
      ->check(CLI::PositiveNumber);
}

Config resolve_config(const CommonOpts& opts) {
  Config cfg = opts.config_path.empty() ? default_config(scenario_from_string(opts.scenario))
                                        : load_config(opts.config_path);
  if (!opts.scale.empty()) cfg.scale = scale_from_string(opts.scale);
  if (!opts.seeds.empty()) cfg.seeds = opts.seeds;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  for (const auto& ov : opts.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + ov);
    apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  validate_or_throw(cfg);
  return cfg;
}

std::string ru_label(double ru) {
  std::ostringstream os;
  os << "ru" << std::round(ru * 1000.0) / 10.0;
  return os.str();
}

std::string cell_stem(const Config& cfg) {
  std::ostringstream os;
  os << to_string(cfg.scenario) << '_' << to_string(cfg.scale) << "_ntx" << cfg.n_tx << '_'
     << ru_label(cfg.target_ru) << '_' << to_string(cfg.scheme);
  return os.str();
}

std::string calib_stem(const Config& cfg, double ru) {
  std::ostringstream os;
  os << to_string(cfg.scenario) << '_' << to_string(cfg.scale) << "_ntx" << cfg.n_tx << '_'
     << ru_label(ru);
  return os.str();
}

void audit_conservation(const RunResult& res) {
  if (res.delivered_bits != res.completed_bits + res.inflight_bits) {
    throw RunError("conservation violation: delivered bits do not equal completed plus in-flight");
  }
}

/// Runs one engine per seed, up to `jobs` concurrently; results in seed order.
std::vector<RunResult> run_seeds(const Config& cfg, int jobs) {
  std::vector<RunResult> results(cfg.seeds.size());
  std::vector<std::string> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cfg.seeds.size();) {
      try {
        Engine engine(cfg, cfg.seeds[i]);
        results[i] = engine.run();
        audit_conservation(results[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.seeds.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      throw RunError("seed " + std::to_string(cfg.seeds[i]) + ": " + errors[i]);
    }
  }
  return results;
}

void write_run_artifacts(const Config& cfg, const std::vector<RunResult>& results) {
  const std::string digest = config_digest(cfg);
  const std::string stem = cell_stem(cfg);
  atomic_write(cfg.out_dir + "/config_" + stem + ".json", to_json_string(cfg));
  for (const auto& res : results) {
    const std::string tail = stem + "_seed" + std::to_string(res.summary.seed);
    atomic_write(cfg.out_dir + "/summary_" + tail + ".json", summary_json(res.summary, digest));
    atomic_write(cfg.out_dir + "/transfers_" + tail + ".csv", transfers_csv(res, digest));
    if (cfg.engine.sched_log) {
      atomic_write(cfg.out_dir + "/schedlog_" + tail + ".csv", sched_log_csv(res, digest));
    }
  }
}

int cmd_run(const CommonOpts& opts) {
  const Config cfg = resolve_config(opts);
  const auto results = run_seeds(cfg, opts.jobs);
  write_run_artifacts(cfg, results);
  for (const auto& res : results) {
    std::cout << cell_stem(cfg) << " seed=" << res.summary.seed
              << " samples=" << res.summary.n_samples << " achieved_ru=" << res.summary.achieved_ru
              << " mean_upt_bps=" << res.summary.mean_upt_bps
              << (res.truncated_by_overload ? " (overload truncation)" : "") << "\n";
  }
  return 0;
}

int cmd_calibrate(const CommonOpts& opts, double target_ru, double tolerance) {
  Config cfg = resolve_config(opts);
  if (target_ru > 0.0) cfg.target_ru = target_ru;
  const auto rec = calibrate_ru(cfg, cfg.target_ru, tolerance);
  const std::string path =
      cfg.out_dir + "/calibration_" + calib_stem(cfg, cfg.target_ru) + ".json";
  atomic_write(path, calibration_json(rec));
  std::cout << "calibrated " << calib_stem(cfg, cfg.target_ru)
            << " lambda_per_s=" << rec.lambda_per_s << " achieved_ru=" << rec.achieved_ru << "\n";
  return 0;
}

CalibrationRecord cached_or_calibrate(const Config& cfg, double ru, double tolerance, bool force) {
  const std::string path = cfg.out_dir + "/calibration_" + calib_stem(cfg, ru) + ".json";
  if (!force && fs::exists(path)) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto rec = calibration_from_json(ss.str());
    if (rec.config_digest == calibration_cache_key(cfg, ru) && rec.seeds == cfg.seeds) {
      return rec;
    }
  }
  const auto rec = calibrate_ru(cfg, ru, tolerance);
  atomic_write(path, calibration_json(rec));
  return rec;
}

int cmd_sweep(const CommonOpts& opts, std::vector<double> rus, std::vector<std::string> schemes,
              double tolerance, bool force_calibrate) {
  const Config base = resolve_config(opts);
  std::vector<PooledCell> cells;
  std::vector<std::string> failures;
  bool any_ok = false;
  int exit_on_total_failure = 2;

  for (double ru : rus) {
    CalibrationRecord calib;
    try {
      calib = cached_or_calibrate(base, ru, tolerance, force_calibrate);
    } catch (const std::exception& e) {
      failures.push_back(calib_stem(base, ru) + ": " + e.what());
      exit_on_total_failure = 3;
      continue;
    }
    for (const auto& scheme_name : schemes) {
      Config cfg = base;
      cfg.scheme = scheme_from_string(scheme_name);
      cfg.target_ru = ru;
      cfg.traffic.lambda_per_s = calib.lambda_per_s;
      try {
        const auto results = run_seeds(cfg, opts.jobs);
        write_run_artifacts(cfg, results);
        std::vector<std::vector<double>> per_seed_upt;
        std::vector<double> per_seed_ru;
        for (const auto& res : results) {
          per_seed_upt.push_back(res.upt_samples);
          per_seed_ru.push_back(res.summary.achieved_ru);
        }
        cells.push_back(
            pool_samples(cfg.scenario, cfg.scheme, cfg.n_tx, ru, per_seed_upt, per_seed_ru));
        any_ok = true;
        std::cout << "cell " << cell_stem(cfg) << " mean_upt_bps=" << cells.back().mean_upt_bps
                  << " achieved_ru=" << cells.back().achieved_ru << "\n";
      } catch (const std::exception& e) {
        failures.push_back(cell_stem(cfg) + ": " + e.what());
      }
    }
  }

  if (!cells.empty()) {
    try {
      const auto rows = build_report(cells);
      atomic_write(base.out_dir + "/report.csv", report_csv(rows));
      atomic_write(base.out_dir + "/report.txt", report_text(rows));
      std::cout << report_text(rows);
    } catch (const std::exception& e) {
      failures.push_back(std::string("report: ") + e.what());
    }
  }
  for (const auto& f : failures) std::cerr << "sweep cell failed: " << f << "\n";
  if (failures.empty()) return 0;
  return any_ok ? 4 : exit_on_total_failure;
}

std::vector<double> read_upt_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RunError("cannot open " + path);
  std::vector<double> upt;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("ue_id", 0) == 0) continue;
    std::istringstream ls(line);
    std::string field;
    for (int i = 0; i < 4 && std::getline(ls, field, ','); ++i) {
    }
    upt.push_back(std::stod(field));
  }
  return upt;
}

int cmd_report(const CommonOpts& opts) {
  const std::string dir = opts.out_dir.empty() ? "out" : opts.out_dir;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);

  struct CellAccum {
    std::vector<std::vector<double>> per_seed_upt;
    std::vector<double> per_seed_ru;
  };
  std::map<std::tuple<int, int, int, double>, CellAccum> accum;  // scenario, scheme, n_tx, ru
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("summary_", 0) != 0 || entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    const RunSummary s = summary_from_json(ss.str());
    std::string twin = name;
    twin.replace(0, 8, "transfers_");
    twin.replace(twin.size() - 5, 5, ".csv");
    auto& cell = accum[{static_cast<int>(s.scenario), static_cast<int>(s.scheme), s.n_tx,
                        s.target_ru}];
    cell.per_seed_upt.push_back(read_upt_column(dir + "/" + twin));
    cell.per_seed_ru.push_back(s.achieved_ru);
  }
  if (accum.empty()) throw ConfigError("no summary records under " + dir);

  std::vector<PooledCell> cells;
  for (const auto& [key, cell] : accum) {
    cells.push_back(pool_samples(static_cast<ScenarioKind>(std::get<0>(key)),
                                 static_cast<SchemeMode>(std::get<1>(key)), std::get<2>(key),
                                 std::get<3>(key), cell.per_seed_upt, cell.per_seed_ru));
  }
  const auto rows = build_report(cells);
  atomic_write(dir + "/report.csv", report_csv(rows));
  atomic_write(dir + "/report.txt", report_text(rows));
  std::cout << report_text(rows);
  return 0;
}

int cmd_dump_layout(const CommonOpts& opts) {
  const Config cfg = resolve_config(opts);
  const Layout layout = generate_layout(cfg.scenario, cfg.scale, cfg.geometry,
                                        default_antenna(cfg.scenario, cfg.n_tx));
  const std::string csv = layout_csv(layout);
  if (opts.out_dir.empty()) {
    std::cout << csv;
  } else {
    const std::string path = opts.out_dir + "/layout_" + to_string(cfg.scenario) + "_" +
                             to_string(cfg.scale) + ".csv";
    atomic_write(path, csv);
    std::cout << path << "\n";
  }
  return 0;
}

int cmd_dump_gains(const CommonOpts& opts, int n_ues) {
  const Config cfg = resolve_config(opts);
  const Layout layout = generate_layout(cfg.scenario, cfg.scale, cfg.geometry,
                                        default_antenna(cfg.scenario, cfg.n_tx));
  const std::uint64_t seed = cfg.seeds.front();
  ChannelModel channel(layout, cfg.channel, layout.trps.front().antenna.n_tx_ports,
                       default_ue_panel(cfg.scenario), seed);
  RngStream drop = RngStream(seed).child(0x6761696eull);  // independent drop stream
  std::ostringstream os;
  os << "# config_digest=" << config_digest(cfg) << " seed=" << seed << "\n";
  os << "ue,x,y,trp,coupling_gain_db,anchor\n";
  os << std::setprecision(10);
  for (int u = 0; u < n_ues; ++u) {
    const Vec3 pos = drop_ue(layout, drop);
    channel.add_ue(u, pos);
    const auto gains = channel.coupling_gains_db(u);
    const int anchor = strongest_trp(gains);
    for (int t = 0; t < layout.n_trps(); ++t) {
      os << u << ',' << pos.x() << ',' << pos.y() << ',' << t << ',' << gains[t] << ','
         << (t == anchor ? 1 : 0) << "\n";
    }
  }
  if (opts.out_dir.empty()) {
    std::cout << os.str();
  } else {
    const std::string path = opts.out_dir + "/gains_" + to_string(cfg.scenario) + "_" +
                             to_string(cfg.scale) + ".csv";
    atomic_write(path, os.str());
    std::cout << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Downlink multi-TRP coordination simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts, calib_opts, sweep_opts, report_opts, layout_opts, gains_opts;

  auto* run_cmd = app.add_subcommand("run", "Simulate every configured seed and write artifacts");
  add_common(run_cmd, run_opts);

  auto* calib_cmd =
      app.add_subcommand("calibrate", "Find the arrival rate hitting the target utilization");
  add_common(calib_cmd, calib_opts);
  double target_ru = 0.0, calib_tol = 0.01;
  calib_cmd->add_option("--target-ru", target_ru, "Target utilization (defaults to the config)");
  calib_cmd->add_option("--tolerance", calib_tol, "Calibration tolerance on achieved RU");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "Calibrate and run schemes x load points, then report");
  add_common(sweep_cmd, sweep_opts);
  std::vector<double> sweep_rus{0.1, 0.2, 0.4};
  std::vector<std::string> sweep_schemes{"baseline", "dps", "ncjt"};
  double sweep_tol = 0.01;
  bool force_calibrate = false;
  sweep_cmd->add_option("--ru", sweep_rus, "Target utilization points");
  sweep_cmd->add_option("--schemes", sweep_schemes, "Schemes to run");
  sweep_cmd->add_option("--tolerance", sweep_tol, "Calibration tolerance on achieved RU");
  sweep_cmd->add_flag("--force-calibrate", force_calibrate, "Ignore cached calibration records");

  auto* report_cmd = app.add_subcommand("report", "Rebuild the gain report from run artifacts");
  add_common(report_cmd, report_opts);

  auto* layout_cmd = app.add_subcommand("dump-layout", "Print or write the TRP layout CSV");
  add_common(layout_cmd, layout_opts);

  auto* gains_cmd =
      app.add_subcommand("dump-gains", "Drop UEs and dump per-link coupling gains CSV");
  add_common(gains_cmd, gains_opts);
  int n_ues = 100;
  gains_cmd->add_option("--n-ues", n_ues, "Number of dropped UEs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opts);
    if (calib_cmd->parsed()) return cmd_calibrate(calib_opts, target_ru, calib_tol);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_opts, sweep_rus, sweep_schemes, sweep_tol, force_calibrate);
    }
    if (report_cmd->parsed()) return cmd_report(report_opts);
    if (layout_cmd->parsed()) return cmd_dump_layout(layout_opts);
    if (gains_cmd->parsed()) return cmd_dump_gains(gains_opts, n_ues);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
