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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "compsim/engine.hpp"
#include "compsim/link.hpp"
#include "compsim/metrics.hpp"
#include "doctest.h"

using namespace compsim;

namespace {

Config quick_cfg(ScenarioKind kind, SchemeMode scheme, double lambda) {
  Config cfg = default_config(kind);
  cfg.scale = LayoutScale::Desk;
  cfg.scheme = scheme;
  cfg.traffic.lambda_per_s = lambda;
  cfg.engine.warmup_ttis = 50;
  cfg.engine.min_measure_ttis = 600;
  cfg.engine.min_samples = 5;
  cfg.engine.max_ttis = 6000;
  return cfg;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("an idle system stays idle") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 0.0);
  cfg.engine.require_samples = false;
  Engine e(cfg, 1);
  RunResult r = e.run();
  CHECK(r.summary.achieved_ru == doctest::Approx(0.0));
  CHECK(r.summary.n_samples == 0);
  CHECK(r.transfers.empty());
  CHECK(r.delivered_bits == 0);
  CHECK_FALSE(r.truncated_by_overload);
}

TEST_CASE("a run without samples is an error when samples are required") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 0.0);
  Engine e(cfg, 1);
  CHECK_THROWS_AS(e.run(), RunError);
}

TEST_CASE("delivered bits are conserved exactly") {
  for (SchemeMode scheme : {SchemeMode::Baseline, SchemeMode::DPS, SchemeMode::NCJT}) {
    Config cfg = quick_cfg(ScenarioKind::InH4GHz, scheme, 20.0);
    Engine e(cfg, 7);
    RunResult r = e.run();
    REQUIRE(r.summary.n_samples >= 5);
    CHECK(r.delivered_bits == r.completed_bits + r.inflight_bits);
    CHECK(r.delivered_bits > 0);

    // Completed sizes are whole files.
    std::uint64_t whole = 0;
    for (const auto& t : r.transfers) whole += cfg.traffic.file_size_bits;
    CHECK(r.completed_bits == whole);
  }
}

TEST_CASE("summary statistics are recomputable from the samples") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::DPS, 25.0);
  Engine e(cfg, 11);
  RunResult r = e.run();
  REQUIRE_FALSE(r.upt_samples.empty());
  double mean = 0.0;
  for (double x : r.upt_samples) mean += x;
  mean /= static_cast<double>(r.upt_samples.size());
  CHECK(r.summary.mean_upt_bps == doctest::Approx(mean).epsilon(1e-12));
  CHECK(r.summary.edge_upt_bps == doctest::Approx(percentile(r.upt_samples, 0.05)));
  CHECK(r.summary.n_samples == r.upt_samples.size());
  CHECK(r.summary.lambda_per_s == doctest::Approx(25.0));
  CHECK(r.summary.scheme == SchemeMode::DPS);

  // Samples come from measured transfers in completion order.
  std::size_t measured = 0;
  for (const auto& t : r.transfers) {
    if (t.measured) {
      CHECK(r.upt_samples[measured] == doctest::Approx(t.upt_bps));
      ++measured;
    }
  }
  CHECK(measured == r.upt_samples.size());
}

TEST_CASE("warm-up transfers are excluded from measurement") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 30.0);
  Engine e(cfg, 13);
  RunResult r = e.run();
  bool saw_warmup = false;
  for (const auto& t : r.transfers) {
    CHECK(t.completion_tti >= t.arrival_tti);
    if (t.arrival_tti < cfg.engine.warmup_ttis) {
      CHECK_FALSE(t.measured);
      saw_warmup = true;
    } else {
      CHECK(t.measured);
    }
    const double ttis = static_cast<double>(t.completion_tti - t.arrival_tti + 1);
    CHECK(t.upt_bps ==
          doctest::Approx(static_cast<double>(cfg.traffic.file_size_bits) / (ttis * cfg.engine.tti_s)));
  }
  CHECK(saw_warmup);
}

TEST_CASE("identical seeds replay identical runs") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::NCJT, 22.0);
  RunResult a = Engine(cfg, 5).run();
  RunResult b = Engine(cfg, 5).run();
  CHECK(a.summary.mean_upt_bps == b.summary.mean_upt_bps);
  CHECK(a.summary.edge_upt_bps == b.summary.edge_upt_bps);
  CHECK(a.summary.achieved_ru == b.summary.achieved_ru);
  CHECK(a.delivered_bits == b.delivered_bits);
  REQUIRE(a.transfers.size() == b.transfers.size());
  for (std::size_t i = 0; i < a.transfers.size(); ++i) {
    CHECK(a.transfers[i].ue_id == b.transfers[i].ue_id);
    CHECK(a.transfers[i].arrival_tti == b.transfers[i].arrival_tti);
    CHECK(a.transfers[i].completion_tti == b.transfers[i].completion_tti);
    CHECK(a.transfers[i].upt_bps == b.transfers[i].upt_bps);
  }

  RunResult c = Engine(cfg, 6).run();
  CHECK((c.summary.mean_upt_bps != a.summary.mean_upt_bps ||
         c.summary.n_samples != a.summary.n_samples));
}

TEST_CASE("attachment follows the strongest coupling") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 20.0);
  Engine e(cfg, 17);
  std::set<int> checked;
  for (int i = 0; i < 3000 && checked.size() < 5; ++i) {
    e.step();
    for (int ue : e.active_ue_ids()) {
      if (!checked.insert(ue).second) continue;
      const auto gains = e.channel_model().coupling_gains_db(ue);
      int best = 0;
      for (std::size_t t = 1; t < gains.size(); ++t) {
        if (gains[t] > gains[best]) best = static_cast<int>(t);
      }
      CHECK(e.anchor_trp(ue) == best);
      CHECK(e.serving_cluster(ue) == e.layout().trps[best].cluster_id);
    }
  }
  CHECK(checked.size() >= 5);
}

TEST_CASE("interference covariance assembles noise plus scaled outer products") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 20.0);
  Engine e(cfg, 19);
  for (int i = 0; i < 1500 && e.active_ue_ids().empty(); ++i) e.step();
  const auto ids = e.active_ue_ids();
  REQUIRE_FALSE(ids.empty());
  const int victim = ids.front();
  const double noise_w = cfg.engine.noise_power_w();
  const std::int64_t now = e.tti();

  // Empty snapshot: pure noise.
  CMat r0 = e.interference_covariance(victim, {}, RxBeamConfig{}, now);
  CHECK((r0 - noise_w * CMat::Identity(4, 4)).norm() == doctest::Approx(0.0));

  // One- and two-transmission snapshots against a term-by-term rebuild.
  std::vector<Transmission> snap;
  for (int t = 0; t < 2; ++t) {
    Transmission tx;
    tx.trp = t;
    tx.ue = victim + 1000;  // any served UE id; blanks (ue < 0) are skipped
    CMat h_own = e.channel_model().channel(victim, t, -1, RxBeamConfig{}, now);
    tx.prec = svd_precoder(h_own, 1 + t);
    tx.power_per_layer_w = cfg.engine.trp_power_w() / tx.prec.rank;
    tx.tx_beam = -1;
    snap.push_back(tx);
    CMat want = noise_w * CMat::Identity(4, 4);
    for (const auto& s : snap) {
      CMat h = e.channel_model().channel(victim, s.trp, s.tx_beam, RxBeamConfig{}, now);
      CMat hw = h * s.prec.w;
      want += s.power_per_layer_w * (hw * hw.adjoint());
    }
    CMat got = e.interference_covariance(victim, snap, RxBeamConfig{}, now);
    CHECK((got - want).norm() / want.norm() < 1e-9);
  }
}

TEST_CASE("the scheduled set becomes the next interference snapshot") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::DPS, 40.0);
  Engine e(cfg, 23);
  for (int i = 0; i < 120; ++i) {
    e.step();
    const auto& prev = e.previous_set();
    const auto& cur = e.current_set();
    REQUIRE(prev.size() == cur.size());
    for (std::size_t k = 0; k < cur.size(); ++k) {
      CHECK(prev[k].trp == cur[k].trp);
      CHECK(prev[k].ue == cur[k].ue);
    }
  }
}

TEST_CASE("utilisation stays a fraction of TRP TTIs") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 35.0);
  Engine e(cfg, 29);
  RunResult r = e.run();
  CHECK(r.summary.achieved_ru > 0.0);
  CHECK(r.summary.achieved_ru <= 1.0);
  CHECK(e.ru() == doctest::Approx(r.summary.achieved_ru));
}

TEST_CASE("overload ends measurement early and is flagged") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 4000.0);
  cfg.engine.max_active_ues = 8;
  cfg.engine.require_samples = false;
  Engine e(cfg, 31);
  RunResult r = e.run();
  CHECK(r.truncated_by_overload);
}

TEST_CASE("the scheduling log names real cluster members") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::NCJT, 30.0);
  cfg.engine.sched_log = true;
  Engine e(cfg, 37);
  RunResult r = e.run();
  REQUIRE_FALSE(r.sched_log.empty());
  int joint_rows = 0;
  for (const auto& row : r.sched_log) {
    REQUIRE(row.cluster >= 0);
    REQUIRE(row.cluster < e.layout().n_clusters());
    const auto& members = e.layout().clusters[row.cluster].member_trps;
    CHECK(std::count(members.begin(), members.end(), row.trp) == 1);
    if (row.tag == ModeTag::Blank) {
      CHECK(row.ue == -1);
      CHECK(row.rank == 0);
    } else {
      CHECK(row.ue >= 0);
      CHECK(row.rank >= 1);
      CHECK(row.rank <= 2);  // two transmit ports per TRP
    }
    if (row.tag == ModeTag::Ncjt) ++joint_rows;
  }
  // Joint transmissions appear in pairs.
  CHECK(joint_rows % 2 == 0);
  CHECK(joint_rows > 0);

  Config off = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::NCJT, 30.0);
  off.engine.sched_log = false;
  CHECK(Engine(off, 37).run().sched_log.empty());
}

TEST_CASE("calibration lands the utilisation on target") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 0.0);
  cfg.engine.warmup_ttis = 200;
  cfg.engine.min_measure_ttis = 3000;
  cfg.engine.min_samples = 50;
  cfg.engine.max_ttis = 20000;
  cfg.seeds = {1, 2};

  CalibrationRecord low = calibrate_ru(cfg, 0.1, 0.02);
  CHECK(low.lambda_per_s > 0.0);
  CHECK(std::abs(low.achieved_ru - 0.1) <= 0.02);

  CalibrationRecord high = calibrate_ru(cfg, 0.3, 0.02);
  CHECK(high.lambda_per_s > low.lambda_per_s);
  CHECK(std::abs(high.achieved_ru - 0.3) <= 0.02);

  // Re-simulating at the calibrated rate reproduces the utilisation.
  Config check = cfg;
  check.scheme = SchemeMode::Baseline;
  check.traffic.lambda_per_s = low.lambda_per_s;
  check.engine.require_samples = false;
  double ru_sum = 0.0;
  for (auto seed : check.seeds) ru_sum += Engine(check, seed).run().summary.achieved_ru;
  CHECK(std::abs(ru_sum / 2.0 - 0.1) <= 0.02);

  CHECK(calibration_cache_key(cfg, 0.1) == low.config_digest);
  CHECK(calibration_cache_key(cfg, 0.1) != calibration_cache_key(cfg, 0.3));
}

TEST_CASE("calibration rejects an unreachable target") {
  Config cfg = quick_cfg(ScenarioKind::InH4GHz, SchemeMode::Baseline, 0.0);
  cfg.engine.min_measure_ttis = 500;
  cfg.engine.max_ttis = 2000;
  cfg.seeds = {1};
  CHECK_THROWS_AS(calibrate_ru(cfg, 0.0, 0.01), CalibrationError);
}

}  // TEST_SUITE
