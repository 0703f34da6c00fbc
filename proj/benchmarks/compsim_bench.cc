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
//
// Microbenchmarks for the per-TTI hot path: link evaluations, hypothesis
// enumeration, channel queries, and whole engine steps.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "compsim/channel.hpp"
#include "compsim/config.hpp"
#include "compsim/engine.hpp"
#include "compsim/link.hpp"
#include "compsim/rng.hpp"
#include "compsim/scenario.hpp"
#include "compsim/scheduler.hpp"
#include "compsim/types.hpp"

using namespace compsim;

namespace {

CMat random_cmat(RngStream& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.cnormal();
  }
  return m;
}

CMat random_psd(RngStream& rng, int n) {
  CMat a = random_cmat(rng, n, n);
  return a * a.adjoint() + 0.05 * CMat::Identity(n, n);
}

ClusterContext bench_ctx(int n_trp, int n_ues, RngStream& rng) {
  ClusterContext ctx;
  ctx.trp_ids.resize(static_cast<std::size_t>(n_trp));
  std::iota(ctx.trp_ids.begin(), ctx.trp_ids.end(), 0);
  ctx.n_rx = 4;
  ctx.noise_w = 1e-3;
  ctx.bandwidth_hz = 20e6;
  ctx.trp_power_w = 0.25;
  ctx.max_rank_single = 2;
  for (int u = 0; u < n_ues; ++u) {
    ClusterUe cu;
    cu.ue = u;
    cu.avg_bps = 1e6 * (1.0 + rng.uniform(0.0, 3.0));
    for (int t = 0; t < n_trp; ++t) cu.h_raw[static_cast<std::size_t>(t)] = random_cmat(rng, 4, 2);
    ctx.ues.push_back(std::move(cu));
  }
  return ctx;
}

void BM_MmseIrcSinr(benchmark::State& state) {
  RngStream rng(1);
  const CMat g = random_cmat(rng, 4, static_cast<int>(state.range(0)));
  const CMat r = random_psd(rng, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mmse_irc_sinr_scaled(g, r));
  }
}
BENCHMARK(BM_MmseIrcSinr)->DenseRange(1, 4);

void BM_RankAdapt(benchmark::State& state) {
  RngStream rng(2);
  const int n_tx = static_cast<int>(state.range(0));
  const CMat h = random_cmat(rng, 4, n_tx);
  const CMat r = 1e-3 * CMat::Identity(4, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_adapt(h, r, 0.25, n_tx));
  }
}
BENCHMARK(BM_RankAdapt)->Arg(2)->Arg(4);

void BM_NcjtRankAdapt(benchmark::State& state) {
  RngStream rng(3);
  const CMat h_a = random_cmat(rng, 4, 2);
  const CMat h_b = random_cmat(rng, 4, 2);
  const CMat r = 1e-3 * CMat::Identity(4, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ncjt_rank_adapt(h_a, h_b, r, 0.25, 0.25));
  }
}
BENCHMARK(BM_NcjtRankAdapt);

void BM_EnumerateHypotheses(benchmark::State& state) {
  RngStream rng(4);
  const int n_trp = static_cast<int>(state.range(0));
  const int n_ues = static_cast<int>(state.range(1));
  const SchemeMode mode = state.range(2) == 0 ? SchemeMode::DPS : SchemeMode::NCJT;
  SchedulerParams params;
  ClusterContext ctx = bench_ctx(n_trp, n_ues, rng);
  build_candidates(ctx, params);
  std::size_t hyps = 0;
  for (auto _ : state) {
    const auto list = enumerate_hypotheses(ctx, mode, params);
    hyps = list.size();
    benchmark::DoNotOptimize(list.data());
  }
  state.counters["hypotheses"] = static_cast<double>(hyps);
}
BENCHMARK(BM_EnumerateHypotheses)
    ->Args({2, 4, 0})
    ->Args({2, 4, 1})
    ->Args({2, 10, 1})
    ->Args({3, 4, 0})
    ->Args({3, 4, 1})
    ->Args({3, 10, 1});

void BM_ChannelQuery(benchmark::State& state) {
  const ScenarioKind kind = ScenarioKind::InH4GHz;
  Config cfg = default_config(kind);
  const Layout layout =
      generate_layout(kind, LayoutScale::Desk, cfg.geometry, default_antenna(kind, 2));
  ChannelModel model(layout, cfg.channel, 2, default_ue_panel(kind), 7);
  model.add_ue(0, Vec3(12.0, 20.0, 1.5));
  std::int64_t tti = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.channel(0, 0, -1, RxBeamConfig{}, ++tti));
  }
}
BENCHMARK(BM_ChannelQuery);

void BM_EngineStep(benchmark::State& state) {
  const SchemeMode scheme = static_cast<SchemeMode>(state.range(0));
  Config cfg = default_config(ScenarioKind::InH4GHz);
  cfg.scale = LayoutScale::Desk;
  cfg.scheme = scheme;
  cfg.traffic.lambda_per_s = 30.0;  // roughly the 10% utilization point
  cfg.engine.require_samples = false;
  Engine engine(cfg, 1);
  for (auto _ : state) {
    engine.step();
  }
  state.counters["ttis"] = static_cast<double>(engine.tti());
}
BENCHMARK(BM_EngineStep)->Arg(0)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
