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

#include "compsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "compsim/metrics.hpp"

namespace compsim {
namespace {

constexpr std::uint64_t kArrivalsTag = 0x61727276;  // stream labels
constexpr std::uint64_t kDropTag = 0x64726f70;

Layout checked_layout(const Config& cfg) {
  validate_or_throw(cfg);
  return generate_layout(cfg.scenario, cfg.scale, cfg.geometry,
                         default_antenna(cfg.scenario, cfg.n_tx));
}

}  // namespace

Engine::Engine(const Config& cfg, std::uint64_t seed)
    : cfg_(cfg),
      seed_(seed),
      layout_(checked_layout(cfg)),
      channel_(layout_, cfg.channel, layout_.trps.front().antenna.n_tx_ports,
               default_ue_panel(cfg.scenario), seed),
      traffic_(cfg.traffic, cfg.engine.tti_s),
      pf_(cfg.scheduler.pf_beta, cfg.scheduler.pf_floor_bps),
      arrivals_rng_(RngStream(seed).child(kArrivalsTag)),
      drop_rng_(RngStream(seed).child(kDropTag)) {
  noise_w_ = cfg_.engine.noise_power_w();
  trp_power_w_ = cfg_.engine.trp_power_w();
  max_rank_ = std::min(channel_.n_tx(), kMaxPorts);
}

std::vector<int> Engine::active_ue_ids() const {
  std::vector<int> ids;
  ids.reserve(ues_.size());
  for (const auto& [id, ue] : ues_) ids.push_back(id);
  return ids;
}

const FileTransfer& Engine::transfer(int ue) const { return ues_.at(ue).transfer; }

int Engine::anchor_trp(int ue) const { return ues_.at(ue).anchor; }

int Engine::serving_cluster(int ue) const { return ues_.at(ue).cluster; }

double Engine::ru() const {
  return accounted_ttis_ > 0 ? static_cast<double>(busy_trp_ttis_) / accounted_ttis_ : 0.0;
}

void Engine::spawn_ues(int count) {
  for (int i = 0; i < count; ++i) {
    UeState ue;
    ue.id = next_ue_id_++;
    ue.position = drop_ue(layout_, drop_rng_);
    channel_.add_ue(ue.id, ue.position);
    const auto gains = channel_.coupling_gains_db(ue.id);
    ue.anchor = strongest_trp(gains);
    ue.cluster = layout_.trps[ue.anchor].cluster_id;
    ue.transfer.ue_id = ue.id;
    ue.transfer.size_bits = cfg_.traffic.file_size_bits;
    ue.transfer.remaining_bits = cfg_.traffic.file_size_bits;
    ue.transfer.arrival_tti = tti_;
    ue.measured = measuring_;
    pf_.add_ue(ue.id);
    ues_.emplace(ue.id, std::move(ue));
  }
}

void Engine::remove_ue(int ue) {
  channel_.remove_ue(ue);
  pf_.remove_ue(ue);
  ues_.erase(ue);
}

CMat Engine::unscaled_interference_sum(int victim, const std::vector<Transmission>& snapshot,
                                       std::int64_t at_tti, int skip_trp_a, int skip_trp_b) {
  const int n = channel_.n_rx();
  CMat m = CMat::Zero(n, n);
  for (const auto& tx : snapshot) {
    if (tx.ue < 0 || tx.trp == skip_trp_a || tx.trp == skip_trp_b) continue;
    const double a = channel_.tx_amplitude(victim, tx.trp, tx.tx_beam);
    const CMat hw = a * (channel_.fading_core(victim, tx.trp, at_tti) * tx.prec.w);
    m.noalias() += tx.power_per_layer_w * (hw * hw.adjoint());
  }
  return m;
}

CMat Engine::interference_covariance(int victim, const std::vector<Transmission>& snapshot,
                                     const RxBeamConfig& rx, std::int64_t at_tti) {
  const int n = channel_.n_rx();
  CMat r = noise_w_ * CMat::Identity(n, n);
  for (const auto& tx : snapshot) {
    if (tx.ue < 0) continue;
    const CMat h = channel_.channel(victim, tx.trp, tx.tx_beam, rx, at_tti);
    const CMat hw = h * tx.prec.w;
    r.noalias() += tx.power_per_layer_w * (hw * hw.adjoint());
  }
  return r;
}

void Engine::schedule_baseline(std::vector<Transmission>& out) {
  for (const auto& trp : layout_.trps) {
    std::vector<BaselineCandidate> cands;
    for (const auto& [id, ue] : ues_) {
      if (ue.anchor != trp.id) continue;
      std::vector<Transmission> others;
      others.reserve(prev_set_.size());
      for (const auto& tx : prev_set_) {
        if (tx.trp != trp.id) others.push_back(tx);
      }
      const RxBeamConfig rx = channel_.rx_toward(id, trp.id);
      const int beam = channel_.best_trp_beam(id, trp.id);
      const CMat h = channel_.channel(id, trp.id, beam, rx, tti_);
      const CMat r = interference_covariance(id, others, rx, tti_);
      auto [prec, quality] = rank_adapt(h, r, trp_power_w_, max_rank_, cfg_.engine.se_cap);
      BaselineCandidate c;
      c.ue = id;
      c.rate_bps = quality.spectral_efficiency * cfg_.engine.bandwidth_hz;
      c.avg_bps = pf_.avg(id);
      c.prec = std::move(prec);
      c.quality = std::move(quality);
      cands.push_back(std::move(c));
    }
    const int pick = baseline_select(cands);
    if (pick < 0) {
      pf_by_trp_[trp.id] = 0.0;
      continue;
    }
    const auto& c = cands[pick];
    Transmission tx;
    tx.trp = trp.id;
    tx.ue = c.ue;
    tx.prec = c.prec;
    tx.power_per_layer_w = trp_power_w_ / c.prec.rank;
    tx.tx_beam = channel_.best_trp_beam(c.ue, trp.id);
    tx.tag = ModeTag::Single;
    out.push_back(std::move(tx));
    pf_by_trp_[trp.id] = pf_metric(c.rate_bps, c.avg_bps);
  }
}

ClusterContext Engine::build_cluster_context(const CoordinationCluster& cluster,
                                             const std::vector<int>& cluster_ues) {
  ClusterContext ctx;
  ctx.cluster_id = cluster.id;
  ctx.trp_ids = cluster.member_trps;
  ctx.n_rx = channel_.n_rx();
  ctx.noise_w = noise_w_;
  ctx.bandwidth_hz = cfg_.engine.bandwidth_hz;
  ctx.tti_s = cfg_.engine.tti_s;
  ctx.se_cap = cfg_.engine.se_cap;
  ctx.trp_power_w = trp_power_w_;
  ctx.max_rank_single = max_rank_;

  const int n = ctx.n_trp();
  const auto pairs = cluster_pairs(n);
  const bool mmwave = channel_.mmwave();

  std::vector<Transmission> out_of_cluster;
  out_of_cluster.reserve(prev_set_.size());
  for (const auto& tx : prev_set_) {
    if (std::find(ctx.trp_ids.begin(), ctx.trp_ids.end(), tx.trp) == ctx.trp_ids.end()) {
      out_of_cluster.push_back(tx);
    }
  }

  for (int id : cluster_ues) {
    ClusterUe cu;
    cu.ue = id;
    cu.avg_bps = pf_.avg(id);

    std::array<RxBeamConfig, kMaxClusterTrps> rx_single;
    std::vector<RxBeamConfig> rx_pair(pairs.size());
    for (int t = 0; t < n; ++t) rx_single[t] = channel_.rx_toward(id, ctx.trp_ids[t]);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      rx_pair[p] = channel_.rx_toward_pair(id, ctx.trp_ids[pairs[p].first],
                                           ctx.trp_ids[pairs[p].second]);
    }

    for (int s = 0; s < n; ++s) {
      const int trp = ctx.trp_ids[s];
      const int beam = channel_.best_trp_beam(id, trp);
      cu.h_raw[s] = channel_.tx_amplitude(id, trp, beam) * channel_.fading_core(id, trp, tti_);
      if (mmwave) {
        for (int t = 0; t < n; ++t) {
          cu.amp_single[t][s] = channel_.rx_amplitudes(id, trp, rx_single[t]);
        }
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          cu.amp_pair[p][s] = channel_.rx_amplitudes(id, trp, rx_pair[p]);
        }
      }
    }

    if (!mmwave) {
      // Receive gain is flat, so one out-of-cluster sum serves every
      // configuration.
      const CMat r_out = unscaled_interference_sum(id, out_of_cluster, tti_);
      for (int t = 0; t < n; ++t) cu.r_out_single[t] = r_out;
      for (std::size_t p = 0; p < pairs.size(); ++p) cu.r_out_pair[p] = r_out;
    } else {
      const int nr = ctx.n_rx;
      for (int t = 0; t < n; ++t) cu.r_out_single[t] = CMat::Zero(nr, nr);
      for (std::size_t p = 0; p < pairs.size(); ++p) cu.r_out_pair[p] = CMat::Zero(nr, nr);
      for (const auto& tx : out_of_cluster) {
        if (tx.ue < 0) continue;
        const double a = channel_.tx_amplitude(id, tx.trp, tx.tx_beam);
        const CMat hw = a * (channel_.fading_core(id, tx.trp, tti_) * tx.prec.w);
        const CMat k = tx.power_per_layer_w * (hw * hw.adjoint());
        for (int t = 0; t < n; ++t) {
          const RVec amp = channel_.rx_amplitudes(id, tx.trp, rx_single[t]);
          cu.r_out_single[t].noalias() += amp.asDiagonal() * k * amp.asDiagonal();
        }
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          const RVec amp = channel_.rx_amplitudes(id, tx.trp, rx_pair[p]);
          cu.r_out_pair[p].noalias() += amp.asDiagonal() * k * amp.asDiagonal();
        }
      }
    }
    ctx.ues.push_back(std::move(cu));
  }
  return ctx;
}

void Engine::schedule_joint(std::vector<Transmission>& out) {
  for (const auto& cluster : layout_.clusters) {
    std::vector<int> cluster_ues;
    for (const auto& [id, ue] : ues_) {
      if (ue.cluster == cluster.id) cluster_ues.push_back(id);
    }
    if (cluster_ues.empty()) {
      for (int trp : cluster.member_trps) pf_by_trp_[trp] = 0.0;
      continue;
    }
    ClusterContext ctx = build_cluster_context(cluster, cluster_ues);
    build_candidates(ctx, cfg_.scheduler);
    const auto hyps = enumerate_hypotheses(ctx, cfg_.scheme, cfg_.scheduler);
    const int pick = select_hypothesis(hyps);
    const auto& hyp = hyps[pick];
    for (int t = 0; t < ctx.n_trp(); ++t) {
      const auto& a = hyp.per_trp[t];
      pf_by_trp_[ctx.trp_ids[t]] = hyp.pf_value;
      if (a.ue_idx < 0) continue;
      Transmission tx;
      tx.trp = ctx.trp_ids[t];
      tx.ue = ctx.ues[a.ue_idx].ue;
      tx.prec = a.prec;
      tx.power_per_layer_w = a.power_per_layer_w;
      tx.tx_beam = channel_.best_trp_beam(tx.ue, tx.trp);
      tx.tag = a.tag;
      tx.partner_trp = a.partner_slot >= 0 ? ctx.trp_ids[a.partner_slot] : -1;
      out.push_back(std::move(tx));
    }
  }
}

void Engine::realize_and_deliver(const std::vector<Transmission>& set) {
  // Group the set by served UE; joint transmissions contribute two entries in
  // slot order.
  std::map<int, std::vector<const Transmission*>> by_ue;
  for (const auto& tx : set) by_ue[tx.ue].push_back(&tx);

  std::vector<Realized> realized;
  realized.reserve(by_ue.size());
  for (const auto& [ue, txs] : by_ue) {
    Realized r;
    r.ue = ue;
    if (txs.size() == 1) {
      const auto& tx = *txs[0];
      const RxBeamConfig rx = channel_.rx_toward(ue, tx.trp);
      std::vector<Transmission> others;
      others.reserve(set.size());
      for (const auto& o : set) {
        if (o.trp != tx.trp) others.push_back(o);
      }
      const CMat h = channel_.channel(ue, tx.trp, tx.tx_beam, rx, tti_);
      const CMat r_ipn = interference_covariance(ue, others, rx, tti_);
      r.quality = mmse_irc_sinr(h * tx.prec.w, r_ipn, tx.power_per_layer_w, cfg_.engine.se_cap);
    } else {
      const auto& ta = *txs[0];
      const auto& tb = *txs[1];
      const RxBeamConfig rx = channel_.rx_toward_pair(ue, ta.trp, tb.trp);
      std::vector<Transmission> others;
      others.reserve(set.size());
      for (const auto& o : set) {
        if (o.trp != ta.trp && o.trp != tb.trp) others.push_back(o);
      }
      const CMat h_a = channel_.channel(ue, ta.trp, ta.tx_beam, rx, tti_);
      const CMat h_b = channel_.channel(ue, tb.trp, tb.tx_beam, rx, tti_);
      const CMat r_ipn = interference_covariance(ue, others, rx, tti_);
      r.quality = ncjt_link_quality(h_a, h_b, ta.prec, tb.prec, r_ipn,
                                    ta.power_per_layer_w * ta.prec.rank,
                                    tb.power_per_layer_w * tb.prec.rank, cfg_.engine.se_cap);
    }
    const double rate = r.quality.spectral_efficiency * cfg_.engine.bandwidth_hz;
    r.link_bits = static_cast<std::uint64_t>(rate * cfg_.engine.tti_s);
    realized.push_back(std::move(r));
  }

  // PF averages move every TTI: served UEs by the realized link rate,
  // everyone else decays toward the floor.
  std::map<int, double> served_rate;
  for (const auto& r : realized) {
    served_rate[r.ue] = r.quality.spectral_efficiency * cfg_.engine.bandwidth_hz;
  }
  for (const auto& [id, ue] : ues_) {
    auto it = served_rate.find(id);
    pf_.update(id, it != served_rate.end() ? it->second : 0.0);
  }

  std::vector<int> departed;
  for (const auto& r : realized) {
    auto& ue = ues_.at(r.ue);
    const std::uint64_t consumed = record_delivery(ue.transfer, r.link_bits, tti_);
    delivered_bits_ += consumed;
    if (!ue.transfer.complete()) continue;
    completed_bits_ += ue.transfer.size_bits;
    TransferRecord rec;
    rec.ue_id = r.ue;
    rec.arrival_tti = ue.transfer.arrival_tti;
    rec.completion_tti = ue.transfer.completion_tti;
    rec.upt_bps = upt_bps(ue.transfer, cfg_.engine.tti_s);
    rec.serving_cluster = ue.cluster;
    rec.scheme = cfg_.scheme;
    rec.measured = ue.measured;
    if (rec.measured) upt_samples_.push_back(rec.upt_bps);
    transfers_.push_back(rec);
    departed.push_back(r.ue);
  }
  for (int id : departed) remove_ue(id);
}

void Engine::account_ru(const std::vector<Transmission>& set) {
  if (!measuring_) return;
  busy_trp_ttis_ += static_cast<std::int64_t>(set.size());
  accounted_ttis_ += layout_.n_trps();
}

void Engine::log_decisions(const std::vector<Transmission>& set,
                           const std::map<int, double>& pf_values) {
  for (const auto& trp : layout_.trps) {
    SchedLogRow row;
    row.tti = tti_;
    row.cluster = trp.cluster_id;
    row.trp = trp.id;
    for (const auto& tx : set) {
      if (tx.trp != trp.id) continue;
      row.ue = tx.ue;
      row.tag = tx.tag;
      row.rank = tx.prec.rank;
      break;
    }
    auto it = pf_values.find(trp.id);
    row.pf_value = it != pf_values.end() ? it->second : 0.0;
    sched_log_.push_back(row);
  }
}

void Engine::step() {
  measuring_ = tti_ >= cfg_.engine.warmup_ttis;
  const auto offsets = traffic_.arrivals(arrivals_rng_);
  spawn_ues(static_cast<int>(offsets.size()));

  curr_set_.clear();
  pf_by_trp_.clear();
  if (cfg_.scheme == SchemeMode::Baseline) {
    schedule_baseline(curr_set_);
  } else {
    schedule_joint(curr_set_);
  }

  account_ru(curr_set_);
  if (cfg_.engine.sched_log) log_decisions(curr_set_, pf_by_trp_);
  realize_and_deliver(curr_set_);

  prev_set_ = curr_set_;
  ++tti_;
}

RunResult Engine::run() {
  const auto& ep = cfg_.engine;
  const std::int64_t stop_at = static_cast<std::int64_t>(ep.warmup_ttis) + ep.max_ttis;
  while (true) {
    step();
    if (static_cast<int>(ues_.size()) > ep.max_active_ues) {
      overload_ = true;
      break;
    }
    const std::int64_t measured_ttis = tti_ - ep.warmup_ttis;
    if (measured_ttis >= ep.min_measure_ttis &&
        static_cast<int>(upt_samples_.size()) >= ep.min_samples) {
      break;
    }
    if (tti_ >= stop_at) break;
  }

  if (ep.require_samples && upt_samples_.empty()) {
    throw RunError("no transfer completed inside the measurement window; "
                   "lower the offered load or raise engine.max_ttis");
  }

  RunResult res;
  res.summary.scenario = cfg_.scenario;
  res.summary.scheme = cfg_.scheme;
  res.summary.n_tx = cfg_.n_tx;
  res.summary.target_ru = cfg_.target_ru;
  res.summary.achieved_ru = ru();
  res.summary.lambda_per_s = cfg_.traffic.lambda_per_s;
  res.summary.n_samples = upt_samples_.size();
  res.summary.seed = seed_;
  if (!upt_samples_.empty()) {
    res.summary.mean_upt_bps =
        std::accumulate(upt_samples_.begin(), upt_samples_.end(), 0.0) / upt_samples_.size();
    res.summary.edge_upt_bps = percentile(upt_samples_, 0.05);
  }
  res.transfers = std::move(transfers_);
  res.sched_log = std::move(sched_log_);
  res.upt_samples = std::move(upt_samples_);
  res.delivered_bits = delivered_bits_;
  res.completed_bits = completed_bits_;
  for (const auto& [id, ue] : ues_) {
    res.inflight_bits += ue.transfer.size_bits - ue.transfer.remaining_bits;
  }
  res.truncated_by_overload = overload_;
  return res;
}

namespace {

Config calibration_base(const Config& cfg, double target_ru) {
  Config base = cfg;
  base.scheme = SchemeMode::Baseline;  // load points are defined on the baseline
  base.target_ru = target_ru;
  base.engine.require_samples = false;
  base.engine.sched_log = false;
  return base;
}

}  // namespace

std::string calibration_cache_key(const Config& cfg, double target_ru) {
  Config key = calibration_base(cfg, target_ru);
  key.traffic.lambda_per_s = 0.0;
  return config_digest(key);
}

CalibrationRecord calibrate_ru(const Config& cfg, double target_ru, double tolerance) {
  if (!(target_ru > 0.0 && target_ru <= 0.7)) {
    throw CalibrationError("target resource utilization must lie in (0, 0.7]");
  }
  if (tolerance <= 0.0) throw CalibrationError("calibration tolerance must be positive");

  const Config base = calibration_base(cfg, target_ru);

  const Layout layout = generate_layout(base.scenario, base.scale, base.geometry,
                                        default_antenna(base.scenario, base.n_tx));
  auto mean_ru = [&](double lambda) {
    double sum = 0.0;
    for (std::uint64_t seed : base.seeds) {
      Config c = base;
      c.traffic.lambda_per_s = lambda;
      Engine engine(c, seed);
      sum += engine.run().summary.achieved_ru;
    }
    return sum / static_cast<double>(base.seeds.size());
  };

  // Initial guess from a nominal 4 b/s/Hz service rate per TRP.
  const double nominal_rate = 4.0 * base.engine.bandwidth_hz;
  double lambda = target_ru * layout.n_trps() * nominal_rate /
                  static_cast<double>(base.traffic.file_size_bits);

  double lo = lambda, lo_ru = mean_ru(lo);
  double hi = lo, hi_ru = lo_ru;
  int expansions = 0;
  while (lo_ru > target_ru && expansions < 24) {
    hi = lo;
    hi_ru = lo_ru;
    lo *= 0.5;
    lo_ru = mean_ru(lo);
    ++expansions;
  }
  while (hi_ru < target_ru && expansions < 24) {
    lo = hi;
    lo_ru = hi_ru;
    hi *= 2.0;
    hi_ru = mean_ru(hi);
    ++expansions;
  }
  if (lo_ru > target_ru || hi_ru < target_ru) {
    throw CalibrationError("cannot bracket the target resource utilization; "
                           "the deployment saturates away from it");
  }

  CalibrationRecord rec;
  rec.scenario = base.scenario;
  rec.scale = base.scale;
  rec.n_tx = base.n_tx;
  rec.target_ru = target_ru;
  rec.seeds = base.seeds;
  rec.config_digest = calibration_cache_key(cfg, target_ru);

  double best_lambda = (lo + hi) / 2.0;
  double best_ru = 0.0;
  for (int it = 0; it < 40; ++it) {
    best_lambda = (lo + hi) / 2.0;
    best_ru = mean_ru(best_lambda);
    if (std::abs(best_ru - target_ru) <= tolerance) {
      rec.lambda_per_s = best_lambda;
      rec.achieved_ru = best_ru;
      return rec;
    }
    if (best_ru < target_ru) {
      lo = best_lambda;
    } else {
      hi = best_lambda;
    }
  }
  throw CalibrationError("resource utilization did not converge to the target; "
                         "the run-to-run noise exceeds the tolerance");
}

}  // namespace compsim
