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

#include "compsim/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace compsim {
namespace {

CMat row_scaled(const RVec& amps, const CMat& m) {
  CMat out = m;
  for (int i = 0; i < out.rows(); ++i) out.row(i) *= amps(i);
  return out;
}

CMat both_scaled(const RVec& amps, const CMat& m) {
  CMat out = m;
  for (int i = 0; i < out.rows(); ++i) out.row(i) *= amps(i);
  for (int j = 0; j < out.cols(); ++j) out.col(j) *= amps(j);
  return out;
}

void fill_defaults(ClusterContext& ctx) {
  const int n = ctx.n_rx;
  for (ClusterUe& u : ctx.ues) {
    for (int t = 0; t < kMaxClusterTrps; ++t) {
      for (int s = 0; s < kMaxClusterTrps; ++s) {
        if (u.amp_single[t][s].size() == 0) u.amp_single[t][s] = RVec::Ones(n);
        if (u.amp_pair[t][s].size() == 0) u.amp_pair[t][s] = RVec::Ones(n);
      }
      if (u.r_out_single[t].size() == 0) u.r_out_single[t] = CMat::Zero(n, n);
      if (u.r_out_pair[t].size() == 0) u.r_out_pair[t] = CMat::Zero(n, n);
    }
  }
}

}  // namespace

std::string to_string(ModeTag tag) {
  switch (tag) {
    case ModeTag::Blank: return "blank";
    case ModeTag::Single: return "single";
    case ModeTag::Ncjt: return "ncjt";
  }
  throw RunError("unknown mode tag");
}

double pf_metric(double instantaneous_rate_bps, double avg_throughput_bps) {
  if (avg_throughput_bps <= 0.0) throw RunError("proportional-fair average must be positive");
  return instantaneous_rate_bps / avg_throughput_bps;
}

void PfState::update(int ue, double served_rate_bps) {
  double& a = avg_.at(ue);
  a = std::max(floor_bps_, (1.0 - beta_) * a + beta_ * served_rate_bps);
}

std::vector<std::pair<int, int>> cluster_pairs(int n_trp) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n_trp; ++i) {
    for (int j = i + 1; j < n_trp; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

void build_candidates(ClusterContext& ctx, const SchedulerParams& params) {
  fill_defaults(ctx);
  const int n_trp = ctx.n_trp();
  ctx.cands.assign(n_trp, {});
  const CMat noise = ctx.noise_w * CMat::Identity(ctx.n_rx, ctx.n_rx);
  for (int t = 0; t < n_trp; ++t) {
    auto& list = ctx.cands[t];
    for (std::size_t ui = 0; ui < ctx.ues.size(); ++ui) {
      const ClusterUe& u = ctx.ues[ui];
      const CMat r = noise + u.r_out_single[t];
      const CMat h = row_scaled(u.amp_single[t][t], u.h_raw[t]);
      auto [prec, q] = rank_adapt(h, r, ctx.trp_power_w, ctx.max_rank_single, ctx.se_cap);
      SoloCandidate c;
      c.ue_idx = static_cast<int>(ui);
      c.prec = std::move(prec);
      c.quality = q;
      c.rate_bps = q.spectral_efficiency * ctx.bandwidth_hz;
      c.metric = pf_metric(c.rate_bps, u.avg_bps);
      list.push_back(std::move(c));
    }
    std::sort(list.begin(), list.end(), [](const SoloCandidate& a, const SoloCandidate& b) {
      if (a.metric != b.metric) return a.metric > b.metric;
      return a.ue_idx < b.ue_idx;
    });
    if (params.prune_top > 0 && static_cast<int>(list.size()) > params.prune_top) {
      list.resize(params.prune_top);
    }
  }
}

namespace {

/// Shared evaluation state for one cluster-TTI enumeration. Cross-TRP
/// interference terms (power-weighted precoded outer products at unit
/// receive gain) are memoized per (ue, slot, candidate).
class HypothesisBuilder {
 public:
  HypothesisBuilder(const ClusterContext& ctx, const SchedulerParams& params)
      : ctx_(ctx), params_(params), noise_(ctx.noise_w * CMat::Identity(ctx.n_rx, ctx.n_rx)) {
    memo_.resize(ctx.ues.size());
    for (auto& per_slot : memo_) {
      for (int t = 0; t < ctx_.n_trp(); ++t) per_slot[t].assign(ctx_.cands[t].size(), {});
    }
  }

  std::vector<SchedulingHypothesis> run(SchemeMode mode) {
    std::vector<SchedulingHypothesis> out;
    std::array<int, kMaxClusterTrps> pick;
    pick.fill(-1);
    enumerate_point_selection(0, pick, out);
    if (mode == SchemeMode::NCJT) append_joint(out);
    return out;
  }

 private:
  // Interference caused to ue `ui` by slot `t` serving its candidate `ci`.
  const CMat& cross_term(std::size_t ui, int t, int ci) {
    Memo& m = memo_[ui][t][static_cast<std::size_t>(ci)];
    if (!m.ready) {
      const SoloCandidate& c = ctx_.cands[t][static_cast<std::size_t>(ci)];
      const double p_layer = ctx_.trp_power_w / c.prec.rank;
      const CMat mw = ctx_.ues[ui].h_raw[t] * c.prec.w;
      m.k = p_layer * (mw * mw.adjoint());
      m.ready = true;
    }
    return m.k;
  }

  void enumerate_point_selection(int slot, std::array<int, kMaxClusterTrps>& pick,
                                 std::vector<SchedulingHypothesis>& out) {
    if (slot == ctx_.n_trp()) {
      out.push_back(eval_point_selection(pick));
      return;
    }
    pick[slot] = -1;
    enumerate_point_selection(slot + 1, pick, out);
    for (int ci = 0; ci < static_cast<int>(ctx_.cands[slot].size()); ++ci) {
      const int ue_idx = ctx_.cands[slot][static_cast<std::size_t>(ci)].ue_idx;
      bool used = false;
      for (int s = 0; s < slot; ++s) {
        if (pick[s] >= 0 && ctx_.cands[s][static_cast<std::size_t>(pick[s])].ue_idx == ue_idx) {
          used = true;
          break;
        }
      }
      if (used) continue;
      pick[slot] = ci;
      enumerate_point_selection(slot + 1, pick, out);
    }
    pick[slot] = -1;
  }

  SchedulingHypothesis eval_point_selection(const std::array<int, kMaxClusterTrps>& pick) {
    SchedulingHypothesis hyp;
    const int n_trp = ctx_.n_trp();
    for (int t = 0; t < n_trp; ++t) {
      if (pick[t] < 0) continue;
      const SoloCandidate& c = ctx_.cands[t][static_cast<std::size_t>(pick[t])];
      HypAssignment& a = hyp.per_trp[t];
      a.ue_idx = c.ue_idx;
      a.tag = ModeTag::Single;
      a.prec = c.prec;
      a.power_per_layer_w = ctx_.trp_power_w / c.prec.rank;
      ++hyp.n_transmitting;
    }
    for (int t = 0; t < n_trp; ++t) {
      if (pick[t] < 0) continue;
      const SoloCandidate& c = ctx_.cands[t][static_cast<std::size_t>(pick[t])];
      const auto ui = static_cast<std::size_t>(c.ue_idx);
      const ClusterUe& u = ctx_.ues[ui];
      CMat r = noise_ + u.r_out_single[t];
      for (int s = 0; s < n_trp; ++s) {
        if (s == t || pick[s] < 0) continue;
        r += both_scaled(u.amp_single[t][s], cross_term(ui, s, pick[s]));
      }
      const CMat h = row_scaled(u.amp_single[t][t], u.h_raw[t]);
      const LinkQuality q =
          mmse_irc_sinr(h * hyp.per_trp[t].prec.w, r, hyp.per_trp[t].power_per_layer_w, ctx_.se_cap);
      ServedUe served;
      served.ue_idx = c.ue_idx;
      served.rate_bps = q.spectral_efficiency * ctx_.bandwidth_hz;
      served.metric = pf_metric(served.rate_bps, u.avg_bps);
      served.quality = q;
      served.n_trps = 1;
      hyp.pf_value += served.metric;
      hyp.served.push_back(std::move(served));
    }
    return hyp;
  }

  void append_joint(std::vector<SchedulingHypothesis>& out) {
    const auto pairs = cluster_pairs(ctx_.n_trp());
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      const auto [i, j] = pairs[pi];
      for (std::size_t ui = 0; ui < ctx_.ues.size(); ++ui) {
        if (!is_candidate(static_cast<int>(ui), i) && !is_candidate(static_cast<int>(ui), j)) {
          continue;
        }
        const ClusterUe& u = ctx_.ues[ui];
        const CMat r_base = noise_ + u.r_out_pair[pi];
        const CMat h_a = row_scaled(u.amp_pair[pi][i], u.h_raw[i]);
        const CMat h_b = row_scaled(u.amp_pair[pi][j], u.h_raw[j]);
        NcjtSelection sel;
        try {
          sel = ncjt_rank_adapt(h_a, h_b, r_base, ctx_.trp_power_w, ctx_.trp_power_w, ctx_.se_cap);
        } catch (const RunError&) {
          continue;  // no feasible split for degenerate dimensions
        }
        // Third cluster member: blank first, then its candidates.
        const int third = third_slot(ctx_.n_trp(), i, j);
        out.push_back(eval_joint(pi, i, j, static_cast<int>(ui), sel, third, -1));
        if (third >= 0 && params_.allow_third_trp) {
          for (int ci = 0; ci < static_cast<int>(ctx_.cands[third].size()); ++ci) {
            if (ctx_.cands[third][static_cast<std::size_t>(ci)].ue_idx == static_cast<int>(ui)) {
              continue;
            }
            out.push_back(eval_joint(pi, i, j, static_cast<int>(ui), sel, third, ci));
          }
        }
      }
    }
  }

  bool is_candidate(int ue_idx, int slot) const {
    for (const SoloCandidate& c : ctx_.cands[slot]) {
      if (c.ue_idx == ue_idx) return true;
    }
    return false;
  }

  static int third_slot(int n_trp, int i, int j) {
    for (int t = 0; t < n_trp; ++t) {
      if (t != i && t != j) return t;
    }
    return -1;
  }

  SchedulingHypothesis eval_joint(std::size_t pi, int i, int j, int ue_idx,
                                  const NcjtSelection& sel, int third, int third_ci) {
    SchedulingHypothesis hyp;
    hyp.joint = true;
    const auto ui = static_cast<std::size_t>(ue_idx);
    const ClusterUe& u = ctx_.ues[ui];

    hyp.per_trp[i] = {ue_idx, ModeTag::Ncjt, j, sel.w_a, ctx_.trp_power_w / sel.w_a.rank};
    hyp.per_trp[j] = {ue_idx, ModeTag::Ncjt, i, sel.w_b, ctx_.trp_power_w / sel.w_b.rank};
    hyp.n_transmitting = 2;

    CMat r_joint = noise_ + u.r_out_pair[pi];
    if (third >= 0 && third_ci >= 0) {
      r_joint += both_scaled(u.amp_pair[pi][third], cross_term(ui, third, third_ci));
      ++hyp.n_transmitting;
    }
    const CMat h_a = row_scaled(u.amp_pair[pi][i], u.h_raw[i]);
    const CMat h_b = row_scaled(u.amp_pair[pi][j], u.h_raw[j]);
    const LinkQuality q = ncjt_link_quality(h_a, h_b, sel.w_a, sel.w_b, r_joint,
                                            ctx_.trp_power_w, ctx_.trp_power_w, ctx_.se_cap);
    ServedUe served;
    served.ue_idx = ue_idx;
    served.rate_bps = q.spectral_efficiency * ctx_.bandwidth_hz;
    served.metric = pf_metric(served.rate_bps, u.avg_bps);
    served.quality = q;
    served.n_trps = 2;
    hyp.pf_value += served.metric;
    hyp.served.push_back(std::move(served));

    if (third >= 0 && third_ci >= 0) {
      const SoloCandidate& c = ctx_.cands[third][static_cast<std::size_t>(third_ci)];
      HypAssignment& a = hyp.per_trp[third];
      a.ue_idx = c.ue_idx;
      a.tag = ModeTag::Single;
      a.prec = c.prec;
      a.power_per_layer_w = ctx_.trp_power_w / c.prec.rank;

      const auto vi = static_cast<std::size_t>(c.ue_idx);
      const ClusterUe& v = ctx_.ues[vi];
      CMat r = noise_ + v.r_out_single[third];
      // The joint pair interferes with the third TRP's UE through both legs.
      for (const auto& [slot, w] : {std::pair<int, const Precoder*>{i, &sel.w_a},
                                    std::pair<int, const Precoder*>{j, &sel.w_b}}) {
        const CMat mw = v.h_raw[slot] * w->w;
        const double p_layer = ctx_.trp_power_w / w->rank;
        r += both_scaled(v.amp_single[third][slot], p_layer * (mw * mw.adjoint()));
      }
      const CMat h = row_scaled(v.amp_single[third][third], v.h_raw[third]);
      const LinkQuality q3 = mmse_irc_sinr(h * c.prec.w, r, a.power_per_layer_w, ctx_.se_cap);
      ServedUe s3;
      s3.ue_idx = c.ue_idx;
      s3.rate_bps = q3.spectral_efficiency * ctx_.bandwidth_hz;
      s3.metric = pf_metric(s3.rate_bps, v.avg_bps);
      s3.quality = q3;
      s3.n_trps = 1;
      hyp.pf_value += s3.metric;
      hyp.served.push_back(std::move(s3));
    }
    return hyp;
  }

  struct Memo {
    bool ready = false;
    CMat k;
  };

  const ClusterContext& ctx_;
  const SchedulerParams& params_;
  CMat noise_;
  std::vector<std::array<std::vector<Memo>, kMaxClusterTrps>> memo_;
};

}  // namespace

std::vector<SchedulingHypothesis> enumerate_hypotheses(const ClusterContext& ctx, SchemeMode mode,
                                                       const SchedulerParams& params) {
  if (mode == SchemeMode::Baseline) {
    throw RunError("joint enumeration is undefined for the uncoordinated baseline");
  }
  HypothesisBuilder builder(ctx, params);
  return builder.run(mode);
}

int select_hypothesis(const std::vector<SchedulingHypothesis>& hypotheses) {
  if (hypotheses.empty()) throw RunError("hypothesis selection over an empty list");
  int best = 0;
  for (int i = 1; i < static_cast<int>(hypotheses.size()); ++i) {
    const auto& h = hypotheses[static_cast<std::size_t>(i)];
    const auto& b = hypotheses[static_cast<std::size_t>(best)];
    if (h.pf_value > b.pf_value ||
        (h.pf_value == b.pf_value && h.n_transmitting < b.n_transmitting)) {
      best = i;
    }
  }
  return best;
}

int baseline_select(const std::vector<BaselineCandidate>& candidates) {
  int best = -1;
  double best_metric = 0.0;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    const auto& c = candidates[static_cast<std::size_t>(i)];
    const double m = pf_metric(c.rate_bps, c.avg_bps);
    if (best < 0 || m > best_metric) {
      best = i;
      best_metric = m;
    }
  }
  return best;
}

}  // namespace compsim
