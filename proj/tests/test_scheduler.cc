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
#include <numeric>
#include <set>
#include <vector>

#include "compsim/rng.hpp"
#include "compsim/scheduler.hpp"
#include "doctest.h"

using namespace compsim;

namespace {

CMat random_cmat(RngStream& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.cnormal();
  }
  return m;
}

ClusterContext make_ctx(int n_trp, int n_ues, RngStream& rng) {
  ClusterContext ctx;
  ctx.cluster_id = 0;
  ctx.trp_ids.resize(n_trp);
  std::iota(ctx.trp_ids.begin(), ctx.trp_ids.end(), 0);
  ctx.n_rx = 4;
  ctx.noise_w = 1e-3;
  ctx.bandwidth_hz = 20e6;
  ctx.tti_s = 1e-3;
  ctx.se_cap = 7.8;
  ctx.trp_power_w = 0.25;
  ctx.max_rank_single = 2;
  for (int u = 0; u < n_ues; ++u) {
    ClusterUe cu;
    cu.ue = 100 + u;
    cu.avg_bps = 1e5 * (1.0 + rng.uniform(0.0, 3.0));
    for (int t = 0; t < n_trp; ++t) cu.h_raw[t] = random_cmat(rng, 4, 2);
    ctx.ues.push_back(std::move(cu));
  }
  return ctx;
}

// Reference enumeration count for point selection: each slot picks blank or
// one of its candidates, no UE twice.
long ref_count_point_selection(const std::vector<std::vector<int>>& cand_ues, std::size_t slot,
                               std::set<int>& used) {
  if (slot == cand_ues.size()) return 1;
  long total = ref_count_point_selection(cand_ues, slot + 1, used);  // blank
  for (int ue : cand_ues[slot]) {
    if (used.count(ue)) continue;
    used.insert(ue);
    total += ref_count_point_selection(cand_ues, slot + 1, used);
    used.erase(ue);
  }
  return total;
}

std::vector<std::vector<int>> candidate_ues(const ClusterContext& ctx) {
  std::vector<std::vector<int>> out(ctx.cands.size());
  for (std::size_t t = 0; t < ctx.cands.size(); ++t) {
    for (const auto& c : ctx.cands[t]) out[t].push_back(c.ue_idx);
  }
  return out;
}

long ref_count_joint_extra(const ClusterContext& ctx, const SchedulerParams& params) {
  const auto cand = candidate_ues(ctx);
  const int n_trp = ctx.n_trp();
  long total = 0;
  for (auto [i, j] : cluster_pairs(n_trp)) {
    for (std::size_t ui = 0; ui < ctx.ues.size(); ++ui) {
      const int u = static_cast<int>(ui);
      const bool in_i = std::count(cand[i].begin(), cand[i].end(), u) > 0;
      const bool in_j = std::count(cand[j].begin(), cand[j].end(), u) > 0;
      if (!in_i && !in_j) continue;
      ++total;
      int third = -1;
      for (int t = 0; t < n_trp; ++t) {
        if (t != i && t != j) third = t;
      }
      if (third >= 0 && params.allow_third_trp) {
        for (int v : cand[third]) {
          if (v != u) ++total;
        }
      }
    }
  }
  return total;
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("pf metric is rate over average") {
  CHECK(pf_metric(1e6, 1e5) == doctest::Approx(10.0));
  CHECK(pf_metric(0.0, 5e4) == doctest::Approx(0.0));
  CHECK(pf_metric(3e6, 1.5e6) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pf_metric(1e6, 0.0), RunError);
  CHECK_THROWS_AS(pf_metric(1e6, -1.0), RunError);
}

TEST_CASE("pf state follows the exponential recurrence") {
  const double beta = 0.01, floor = 1e3;
  PfState pf(beta, floor);
  pf.add_ue(9);
  CHECK(pf.avg(9) == doctest::Approx(floor));

  RngStream rng(301);
  double ref = floor;
  for (int step = 0; step < 100; ++step) {
    const double rate = rng.uniform(0.0, 1.0) < 0.3 ? 0.0 : rng.uniform(0.0, 5e8);
    pf.update(9, rate);
    ref = std::max(floor, (1.0 - beta) * ref + beta * rate);
    CHECK(pf.avg(9) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("pf average never decays below the floor") {
  PfState pf(0.01, 1e3);
  pf.add_ue(0);
  pf.update(0, 1e9);
  for (int i = 0; i < 5000; ++i) pf.update(0, 0.0);
  CHECK(pf.avg(0) == doctest::Approx(1e3));
}

TEST_CASE("pf state membership bookkeeping") {
  PfState pf(0.1, 1.0);
  CHECK_FALSE(pf.has(4));
  pf.add_ue(4);
  CHECK(pf.has(4));
  CHECK(pf.size() == 1);
  pf.remove_ue(4);
  CHECK_FALSE(pf.has(4));
  CHECK(pf.size() == 0);
}

TEST_CASE("cluster pair enumeration order") {
  CHECK(cluster_pairs(2) == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(cluster_pairs(3) == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(cluster_pairs(1).empty());
}

TEST_CASE("candidates are sorted by solo metric and pruned") {
  RngStream rng(302);
  ClusterContext ctx = make_ctx(2, 6, rng);
  SchedulerParams params;
  params.prune_top = 4;
  build_candidates(ctx, params);
  REQUIRE(ctx.cands.size() == 2);
  for (const auto& list : ctx.cands) {
    REQUIRE(list.size() == 4);
    for (std::size_t i = 1; i < list.size(); ++i) {
      CHECK(list[i - 1].metric >= list[i].metric);
    }
    for (const auto& c : list) {
      CHECK(c.rate_bps == doctest::Approx(c.quality.spectral_efficiency * ctx.bandwidth_hz));
      CHECK(c.metric == doctest::Approx(c.rate_bps / ctx.ues[c.ue_idx].avg_bps));
    }
  }

  SchedulerParams all;
  all.prune_top = 0;
  build_candidates(ctx, all);
  for (const auto& list : ctx.cands) CHECK(list.size() == 6);
}

TEST_CASE("candidate ties break toward the lower UE index") {
  RngStream rng(303);
  ClusterContext ctx = make_ctx(2, 1, rng);
  // Clone UE 0 twice: identical channel and average means identical metric.
  ClusterUe dup = ctx.ues[0];
  dup.ue = 101;
  ctx.ues.push_back(dup);
  ClusterUe dup2 = ctx.ues[0];
  dup2.ue = 102;
  ctx.ues.push_back(dup2);
  SchedulerParams params;
  build_candidates(ctx, params);
  for (const auto& list : ctx.cands) {
    REQUIRE(list.size() == 3);
    CHECK(list[0].ue_idx == 0);
    CHECK(list[1].ue_idx == 1);
    CHECK(list[2].ue_idx == 2);
  }
}

TEST_CASE("enumeration counts: one UE, two TRPs") {
  RngStream rng(304);
  ClusterContext ctx = make_ctx(2, 1, rng);
  SchedulerParams params;
  build_candidates(ctx, params);
  auto dps = enumerate_hypotheses(ctx, SchemeMode::DPS, params);
  CHECK(dps.size() == 3);  // blank/blank, serve on 0, serve on 1
  auto ncjt = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
  CHECK(ncjt.size() == 4);  // plus the joint pair
  CHECK(ncjt.back().joint);
}

TEST_CASE("enumeration counts: empty cluster") {
  RngStream rng(305);
  ClusterContext ctx = make_ctx(2, 0, rng);
  SchedulerParams params;
  build_candidates(ctx, params);
  CHECK(enumerate_hypotheses(ctx, SchemeMode::DPS, params).size() == 1);
  CHECK(enumerate_hypotheses(ctx, SchemeMode::NCJT, params).size() == 1);
}

TEST_CASE("enumeration counts match an independent recursion") {
  RngStream rng(306);
  for (int trial = 0; trial < 6; ++trial) {
    const int n_trp = 2 + trial % 2;
    const int n_ues = 1 + trial;
    ClusterContext ctx = make_ctx(n_trp, n_ues, rng);
    SchedulerParams params;
    params.prune_top = (trial % 3 == 0) ? 0 : 4;
    build_candidates(ctx, params);

    std::set<int> used;
    const long want_dps = ref_count_point_selection(candidate_ues(ctx), 0, used);
    auto dps = enumerate_hypotheses(ctx, SchemeMode::DPS, params);
    CHECK(static_cast<long>(dps.size()) == want_dps);

    auto ncjt = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
    CHECK(static_cast<long>(ncjt.size()) == want_dps + ref_count_joint_extra(ctx, params));
  }
}

TEST_CASE("point selection list is a verbatim prefix of the joint list") {
  RngStream rng(307);
  for (int trial = 0; trial < 4; ++trial) {
    ClusterContext ctx = make_ctx(2 + trial % 2, 3, rng);
    SchedulerParams params;
    build_candidates(ctx, params);
    auto dps = enumerate_hypotheses(ctx, SchemeMode::DPS, params);
    auto ncjt = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
    REQUIRE(ncjt.size() >= dps.size());
    for (std::size_t i = 0; i < dps.size(); ++i) {
      CHECK(ncjt[i].pf_value == dps[i].pf_value);
      CHECK(ncjt[i].n_transmitting == dps[i].n_transmitting);
      CHECK(ncjt[i].joint == dps[i].joint);
      for (int t = 0; t < kMaxClusterTrps; ++t) {
        CHECK(ncjt[i].per_trp[t].ue_idx == dps[i].per_trp[t].ue_idx);
        CHECK(ncjt[i].per_trp[t].tag == dps[i].per_trp[t].tag);
      }
    }
    for (std::size_t i = dps.size(); i < ncjt.size(); ++i) CHECK(ncjt[i].joint);
  }
}

TEST_CASE("hypothesis structural invariants") {
  RngStream rng(308);
  ClusterContext ctx = make_ctx(3, 4, rng);
  SchedulerParams params;
  build_candidates(ctx, params);
  auto hyps = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
  for (const auto& h : hyps) {
    int transmitting = 0;
    int joint_slots = 0;
    std::set<int> singles;
    for (int t = 0; t < ctx.n_trp(); ++t) {
      const auto& a = h.per_trp[t];
      if (a.tag == ModeTag::Blank) {
        CHECK(a.ue_idx == -1);
        continue;
      }
      ++transmitting;
      if (a.tag == ModeTag::Ncjt) {
        ++joint_slots;
        REQUIRE(a.partner_slot >= 0);
        const auto& p = h.per_trp[a.partner_slot];
        CHECK(p.tag == ModeTag::Ncjt);
        CHECK(p.ue_idx == a.ue_idx);
        CHECK(p.partner_slot == t);
      } else {
        // A UE may appear on at most one single-mode slot.
        CHECK(singles.insert(a.ue_idx).second);
      }
      CHECK(a.power_per_layer_w == doctest::Approx(ctx.trp_power_w / a.prec.rank));
    }
    CHECK(transmitting == h.n_transmitting);
    CHECK((joint_slots == 0 || joint_slots == 2));
    CHECK(h.joint == (joint_slots == 2));
    if (h.joint) {
      // Joint pair never exceeds the receiver's port budget.
      int total_rank = 0;
      for (int t = 0; t < ctx.n_trp(); ++t) {
        if (h.per_trp[t].tag == ModeTag::Ncjt) total_rank += h.per_trp[t].prec.rank;
      }
      CHECK(total_rank <= kMaxPorts);
    }
    double pf = 0.0;
    for (const auto& s : h.served) pf += s.metric;
    CHECK(h.pf_value == doctest::Approx(pf).epsilon(1e-12));
  }
}

TEST_CASE("selection is the pf argmax") {
  RngStream rng(309);
  for (int trial = 0; trial < 10; ++trial) {
    ClusterContext ctx = make_ctx(2, 3, rng);
    SchedulerParams params;
    build_candidates(ctx, params);
    auto hyps = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
    const int pick = select_hypothesis(hyps);
    for (const auto& h : hyps) CHECK(hyps[pick].pf_value >= h.pf_value);
  }
}

TEST_CASE("selection tie-breaks prefer fewer transmitters then lowest index") {
  std::vector<SchedulingHypothesis> hyps(4);
  hyps[0].pf_value = 1.0;
  hyps[0].n_transmitting = 1;
  hyps[1].pf_value = 2.0;
  hyps[1].n_transmitting = 3;
  hyps[2].pf_value = 2.0;
  hyps[2].n_transmitting = 2;  // same pf, fewer TRPs: wins over 1
  hyps[3].pf_value = 2.0;
  hyps[3].n_transmitting = 2;  // same pf and TRPs: index 2 keeps it
  CHECK(select_hypothesis(hyps) == 2);
  CHECK_THROWS_AS(select_hypothesis({}), RunError);
}

TEST_CASE("a silent second leg makes blanking beat joint transmission") {
  // The UE hears TRP 0 only. Joint transmission adds dead layers at the same
  // pf sum, so the tie-break must land on the single-TRP hypothesis.
  RngStream rng(310);
  ClusterContext ctx = make_ctx(2, 1, rng);
  ctx.ues[0].h_raw[1] = CMat::Zero(4, 2);
  SchedulerParams params;
  build_candidates(ctx, params);
  auto hyps = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
  REQUIRE(hyps.size() == 4);
  const auto& joint = hyps.back();
  REQUIRE(joint.joint);
  // Exact pf tie between the single serve and the joint serve.
  CHECK(joint.pf_value == hyps[2].pf_value);
  const int pick = select_hypothesis(hyps);
  CHECK(hyps[pick].n_transmitting == 1);
  CHECK_FALSE(hyps[pick].joint);
  CHECK(hyps[pick].per_trp[0].tag == ModeTag::Single);
}

TEST_CASE("selection is invariant to a common scaling of the averages") {
  RngStream rng(311);
  for (int trial = 0; trial < 6; ++trial) {
    ClusterContext ctx = make_ctx(2, 3, rng);
    SchedulerParams params;
    build_candidates(ctx, params);
    auto hyps = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
    const int base_pick = select_hypothesis(hyps);

    ClusterContext scaled = ctx;
    for (auto& u : scaled.ues) u.avg_bps *= 4.0;  // power of two: exact
    build_candidates(scaled, params);
    auto hyps2 = enumerate_hypotheses(scaled, SchemeMode::NCJT, params);
    REQUIRE(hyps2.size() == hyps.size());
    CHECK(select_hypothesis(hyps2) == base_pick);
    CHECK(hyps2[base_pick].pf_value == doctest::Approx(hyps[base_pick].pf_value / 4.0));
  }
}

TEST_CASE("joint hypotheses with a third transmitter account for its UE") {
  RngStream rng(312);
  ClusterContext ctx = make_ctx(3, 3, rng);
  SchedulerParams params;
  build_candidates(ctx, params);
  auto hyps = enumerate_hypotheses(ctx, SchemeMode::NCJT, params);
  bool saw_third = false;
  for (const auto& h : hyps) {
    if (!h.joint || h.n_transmitting != 3) continue;
    saw_third = true;
    REQUIRE(h.served.size() == 2);
    CHECK(h.served[0].n_trps == 2);
    CHECK(h.served[1].n_trps == 1);
    CHECK(h.served[0].ue_idx != h.served[1].ue_idx);
  }
  CHECK(saw_third);

  SchedulerParams no_third;
  no_third.allow_third_trp = false;
  auto restricted = enumerate_hypotheses(ctx, SchemeMode::NCJT, no_third);
  for (const auto& h : restricted) {
    if (h.joint) CHECK(h.n_transmitting == 2);
  }
}

TEST_CASE("in-cluster interference lowers the evaluated rate") {
  // Compare each UE's served rate in a two-transmitter hypothesis against its
  // solo candidate rate: adding the cross TRP cannot raise it.
  RngStream rng(313);
  ClusterContext ctx = make_ctx(2, 2, rng);
  SchedulerParams params;
  build_candidates(ctx, params);
  auto hyps = enumerate_hypotheses(ctx, SchemeMode::DPS, params);
  for (const auto& h : hyps) {
    if (h.n_transmitting != 2) continue;
    for (const auto& s : h.served) {
      // Find the solo rate for this UE on its serving slot.
      int slot = -1;
      for (int t = 0; t < 2; ++t) {
        if (h.per_trp[t].ue_idx == s.ue_idx && h.per_trp[t].tag == ModeTag::Single) slot = t;
      }
      REQUIRE(slot >= 0);
      for (const auto& c : ctx.cands[slot]) {
        if (c.ue_idx == s.ue_idx) CHECK(s.rate_bps <= c.rate_bps + 1e-9);
      }
    }
  }
}

TEST_CASE("baseline selection is a pf argmax with earliest-wins ties") {
  CHECK(baseline_select({}) == -1);

  std::vector<BaselineCandidate> one(1);
  one[0].rate_bps = 1e6;
  one[0].avg_bps = 1e5;
  CHECK(baseline_select(one) == 0);

  RngStream rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BaselineCandidate> cands(5);
    for (auto& c : cands) {
      c.rate_bps = rng.uniform(1e5, 1e8);
      c.avg_bps = rng.uniform(1e4, 1e7);
    }
    int best = 0;
    for (int i = 1; i < 5; ++i) {
      if (cands[i].rate_bps / cands[i].avg_bps > cands[best].rate_bps / cands[best].avg_bps) {
        best = i;
      }
    }
    CHECK(baseline_select(cands) == best);
  }

  std::vector<BaselineCandidate> tied(3);
  for (auto& c : tied) {
    c.rate_bps = 2e6;
    c.avg_bps = 1e5;
  }
  CHECK(baseline_select(tied) == 0);
}

TEST_CASE("joint enumeration rejects the uncoordinated baseline") {
  RngStream rng(315);
  ClusterContext ctx = make_ctx(2, 1, rng);
  SchedulerParams params;
  build_candidates(ctx, params);
  CHECK_THROWS_AS(enumerate_hypotheses(ctx, SchemeMode::Baseline, params), RunError);
}

TEST_CASE("pf scheduling serves equal users equally") {
  // Two identical full-buffer users on one TRP: long-run service shares must
  // converge to one half each.
  const double rate = 5e7;
  PfState pf(0.01, 1e3);
  pf.add_ue(0);
  pf.add_ue(1);
  int served_count[2] = {0, 0};
  for (int tti = 0; tti < 10000; ++tti) {
    std::vector<BaselineCandidate> cands(2);
    for (int u = 0; u < 2; ++u) {
      cands[u].ue = u;
      cands[u].rate_bps = rate;
      cands[u].avg_bps = pf.avg(u);
    }
    const int pick = baseline_select(cands);
    REQUIRE(pick >= 0);
    ++served_count[pick];
    pf.update(pick, rate);
    pf.update(1 - pick, 0.0);
  }
  CHECK(std::abs(served_count[0] - served_count[1]) < 0.05 * 10000);
}

}  // TEST_SUITE
