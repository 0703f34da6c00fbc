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

#include "compsim/channel.hpp"

#include <cassert>
#include <cmath>

namespace compsim {

double pattern_gain_db(double offset_deg, double theta3db_deg, double peak_db, double ftb_db) {
  const double o = wrap_deg(offset_deg);
  const double att = std::min(12.0 * (o / theta3db_deg) * (o / theta3db_deg), ftb_db);
  return peak_db - att;
}

double beam_direction_deg(int b, int n, double span_deg) {
  return (b + 0.5) * span_deg / n - span_deg / 2.0;
}

double los_probability(ScenarioKind kind, double distance_2d_m) {
  const double d = distance_2d_m;
  if (is_indoor(kind)) {
    if (d <= 5.0) return 1.0;
    return std::exp(-(d - 5.0) / 30.0);
  }
  const double a = std::min(18.0 / std::max(d, 1e-9), 1.0);
  const double e = std::exp(-d / 63.0);
  return a * (1.0 - e) + e;
}

double pathloss_db(const ChannelParams& p, double distance_m, bool los, bool* degenerate) {
  double d = distance_m;
  bool clamped = false;
  if (d < 1.0) {
    d = 1.0;
    clamped = true;
  }
  if (degenerate != nullptr) *degenerate = clamped;
  const double n = los ? p.pl_exp_los : p.pl_exp_nlos;
  return p.pl_intercept_db + 10.0 * n * std::log10(d);
}

LargeScaleState compute_large_scale(ScenarioKind kind, const ChannelParams& p, double distance_3d_m,
                                    double distance_2d_m, RngStream& rng) {
  LargeScaleState ls;
  ls.distance_m = distance_3d_m;
  ls.los = rng.bernoulli(los_probability(kind, distance_2d_m));
  ls.pathloss_db = pathloss_db(p, distance_3d_m, ls.los, &ls.degenerate);
  const double sigma = ls.los ? p.shadow_sigma_los_db : p.shadow_sigma_nlos_db;
  ls.shadowing_db = sigma * rng.normal();
  return ls;
}

BeamSelection select_beams(const ChannelParams& p, double az_trp_to_ue_rel_boresight_deg,
                           double az_ue_to_trp_deg, const std::array<double, 2>& panel_az_deg) {
  if (p.trp_beams <= 0) throw RunError("beam selection invoked without a transmit beam grid");
  BeamSelection best;
  bool first = true;
  for (int tb = 0; tb < p.trp_beams; ++tb) {
    const double g_tx =
        pattern_gain_db(az_trp_to_ue_rel_boresight_deg - beam_direction_deg(tb, p.trp_beams, p.trp_beam_span_deg),
                        p.trp_theta3db_deg, p.trp_peak_gain_db, p.trp_ftb_db);
    for (int panel = 0; panel < 2; ++panel) {
      for (int ub = 0; ub < p.ue_beams_per_panel; ++ub) {
        const double g_rx = pattern_gain_db(
            az_ue_to_trp_deg - panel_az_deg[panel] -
                beam_direction_deg(ub, p.ue_beams_per_panel, p.ue_beam_span_deg),
            p.ue_theta3db_deg, p.ue_peak_gain_db, p.ue_ftb_db);
        const double g = g_tx + g_rx;
        if (first || g > best.gain_db) {
          best = {tb, panel, ub, g};
          first = false;
        }
      }
    }
  }
  return best;
}

ChannelParams default_channel_params(ScenarioKind kind) {
  ChannelParams p;
  const double f = carrier_ghz(kind);
  if (is_indoor(kind)) {
    p.pl_intercept_db = 32.4 + 20.0 * std::log10(f);
    p.pl_exp_los = 1.7;
    p.pl_exp_nlos = 3.0;
  } else {
    p.pl_intercept_db = 28.0 + 20.0 * std::log10(f);
    p.pl_exp_los = 2.2;
    p.pl_exp_nlos = 3.5;
  }
  p.sector_pattern = (kind == ScenarioKind::DU4GHz);
  if (is_mmwave(kind)) {
    const bool indoor = is_indoor(kind);
    const int elements = indoor ? 16 : 64;
    p.trp_beams = indoor ? 16 : 32;
    p.trp_beam_span_deg = indoor ? 360.0 : 120.0;
    p.trp_theta3db_deg = p.trp_beam_span_deg / p.trp_beams;
    p.trp_peak_gain_db = 5.0 * std::log10(static_cast<double>(elements)) + 8.0;
    p.ue_beams_per_panel = 8;
    p.ue_beam_span_deg = 180.0;
    p.ue_theta3db_deg = p.ue_beam_span_deg / p.ue_beams_per_panel;
    p.ue_peak_gain_db = 5.0 * std::log10(8.0) + 8.0;
  }
  return p;
}

ChannelModel::ChannelModel(const Layout& layout, const ChannelParams& params, int n_tx_ports,
                           const UePanelConfig& panel, std::uint64_t run_seed)
    : layout_(&layout),
      params_(params),
      n_tx_(n_tx_ports),
      n_rx_(panel.total_rx_ports),
      panel_(panel),
      run_seed_(run_seed) {}

void ChannelModel::add_ue(int ue_id, const Vec3& position) {
  UeLinks ue;
  ue.position = position;
  RngStream root(run_seed_);
  if (mmwave()) {
    const double az0 = root.child(0x70616e656cull ^ static_cast<std::uint64_t>(ue_id)).uniform(0.0, 360.0);
    ue.panel_az_deg = {az0, az0 + 180.0};
  }
  ue.per_trp.resize(layout_->n_trps());
  for (const Trp& trp : layout_->trps) {
    LinkState& l = ue.per_trp[trp.id];
    l.rng = root.child(link_tag(ue_id, trp.id));
    const Vec3 off = offset_to(*layout_, trp, position);
    const double d2 = off.head<2>().norm();
    const double az_abs = rad_to_deg(std::atan2(off.y(), off.x()));
    l.az_trp_to_ue_deg = wrap_deg(az_abs - trp.antenna.boresight_az_deg);
    l.az_ue_to_trp_deg = wrap_deg(az_abs + 180.0);
    l.ls = compute_large_scale(layout_->kind, params_, off.norm(), d2, l.rng);

    double best_gain = 0.0;
    if (mmwave()) {
      double best_tx = -1e300;
      for (int tb = 0; tb < params_.trp_beams; ++tb) {
        const double g = pattern_gain_db(
            l.az_trp_to_ue_deg - beam_direction_deg(tb, params_.trp_beams, params_.trp_beam_span_deg),
            params_.trp_theta3db_deg, params_.trp_peak_gain_db, params_.trp_ftb_db);
        if (g > best_tx) {
          best_tx = g;
          l.best_trp_beam = tb;
        }
      }
      for (int panel = 0; panel < 2; ++panel) {
        double best_rx = -1e300;
        for (int ub = 0; ub < params_.ue_beams_per_panel; ++ub) {
          const double g = pattern_gain_db(
              l.az_ue_to_trp_deg - ue.panel_az_deg[panel] -
                  beam_direction_deg(ub, params_.ue_beams_per_panel, params_.ue_beam_span_deg),
              params_.ue_theta3db_deg, params_.ue_peak_gain_db, params_.ue_ftb_db);
          if (g > best_rx) {
            best_rx = g;
            l.best_panel_beam[panel] = ub;
          }
        }
        l.best_panel_gain_db[panel] = best_rx;
      }
      best_gain = best_tx + std::max(l.best_panel_gain_db[0], l.best_panel_gain_db[1]);
    } else if (params_.sector_pattern) {
      best_gain = pattern_gain_db(l.az_trp_to_ue_deg, params_.sector_theta3db_deg,
                                  params_.sector_peak_gain_db, params_.sector_ftb_db);
    }
    l.coupling_gain_db = -l.ls.pathloss_db - l.ls.shadowing_db + best_gain;

    l.los_rx.resize(n_rx_);
    l.los_tx.resize(n_tx_);
    for (int i = 0; i < n_rx_; ++i) {
      const double ph = l.rng.uniform(0.0, 2.0 * kPi);
      l.los_rx(i) = cxd(std::cos(ph), std::sin(ph));
    }
    for (int i = 0; i < n_tx_; ++i) {
      const double ph = l.rng.uniform(0.0, 2.0 * kPi);
      l.los_tx(i) = cxd(std::cos(ph), std::sin(ph));
    }
  }
  links_.emplace(ue_id, std::move(ue));
}

void ChannelModel::remove_ue(int ue_id) { links_.erase(ue_id); }

const ChannelModel::LinkState& ChannelModel::link(int ue, int trp) const {
  return links_.at(ue).per_trp.at(trp);
}

ChannelModel::LinkState& ChannelModel::link(int ue, int trp) {
  return links_.at(ue).per_trp.at(trp);
}

const LargeScaleState& ChannelModel::large_scale(int ue, int trp) const { return link(ue, trp).ls; }

double ChannelModel::coupling_gain_db(int ue, int trp) const { return link(ue, trp).coupling_gain_db; }

std::vector<double> ChannelModel::coupling_gains_db(int ue) const {
  std::vector<double> out(layout_->n_trps());
  for (int t = 0; t < layout_->n_trps(); ++t) out[t] = coupling_gain_db(ue, t);
  return out;
}

BeamSelection ChannelModel::best_beam_selection(int ue, int trp) const {
  const LinkState& l = link(ue, trp);
  return select_beams(params_, l.az_trp_to_ue_deg, l.az_ue_to_trp_deg, links_.at(ue).panel_az_deg);
}

int ChannelModel::best_trp_beam(int ue, int trp) const { return link(ue, trp).best_trp_beam; }

RxBeamConfig ChannelModel::rx_toward(int ue, int trp) const {
  const LinkState& l = link(ue, trp);
  return RxBeamConfig{{l.best_panel_beam[0], l.best_panel_beam[1]}};
}

RxBeamConfig ChannelModel::rx_toward_pair(int ue, int trp_a, int trp_b) const {
  if (!mmwave()) return RxBeamConfig{};
  const LinkState& la = link(ue, trp_a);
  const LinkState& lb = link(ue, trp_b);
  const double straight = la.best_panel_gain_db[0] + lb.best_panel_gain_db[1];
  const double swapped = lb.best_panel_gain_db[0] + la.best_panel_gain_db[1];
  if (straight >= swapped) {
    return RxBeamConfig{{la.best_panel_beam[0], lb.best_panel_beam[1]}};
  }
  return RxBeamConfig{{lb.best_panel_beam[0], la.best_panel_beam[1]}};
}

double ChannelModel::trp_gain_db(const LinkState& l, int tx_beam, const Trp& trp) const {
  (void)trp;
  if (mmwave()) {
    return pattern_gain_db(
        l.az_trp_to_ue_deg - beam_direction_deg(tx_beam, params_.trp_beams, params_.trp_beam_span_deg),
        params_.trp_theta3db_deg, params_.trp_peak_gain_db, params_.trp_ftb_db);
  }
  if (params_.sector_pattern) {
    return pattern_gain_db(l.az_trp_to_ue_deg, params_.sector_theta3db_deg,
                           params_.sector_peak_gain_db, params_.sector_ftb_db);
  }
  return 0.0;
}

double ChannelModel::tx_amplitude(int ue, int trp, int tx_beam) const {
  const LinkState& l = link(ue, trp);
  const double gain_db = -l.ls.pathloss_db - l.ls.shadowing_db + trp_gain_db(l, tx_beam, layout_->trps[trp]);
  return std::sqrt(db_to_linear(gain_db));
}

RVec ChannelModel::rx_amplitudes(int ue, int trp, const RxBeamConfig& rx) const {
  RVec amps = RVec::Ones(n_rx_);
  if (!mmwave()) return amps;
  const LinkState& l = link(ue, trp);
  const UeLinks& u = links_.at(ue);
  for (int panel = 0; panel < panel_.n_panels; ++panel) {
    const double g = pattern_gain_db(
        l.az_ue_to_trp_deg - u.panel_az_deg[panel] -
            beam_direction_deg(rx.beam[panel], params_.ue_beams_per_panel, params_.ue_beam_span_deg),
        params_.ue_theta3db_deg, params_.ue_peak_gain_db, params_.ue_ftb_db);
    const double a = std::sqrt(db_to_linear(g));
    for (int port = 0; port < panel_.rx_ports_per_beam; ++port) {
      amps(panel * panel_.rx_ports_per_beam + port) = a;
    }
  }
  return amps;
}

const CMat& ChannelModel::fading_core(int ue, int trp, std::int64_t tti) {
  LinkState& l = link(ue, trp);
  if (l.core_tti == tti) return l.core;

  if (l.fading_tti < 0) {
    l.fading.resize(n_rx_, n_tx_);
    for (int i = 0; i < n_rx_; ++i) {
      for (int j = 0; j < n_tx_; ++j) l.fading(i, j) = l.rng.cnormal();
    }
    l.fading_tti = tti;
  } else if (l.fading_tti < tti) {
    const double rho_step = params_.fading_rho;
    const double rho = std::pow(rho_step, static_cast<double>(tti - l.fading_tti));
    const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (int i = 0; i < n_rx_; ++i) {
      for (int j = 0; j < n_tx_; ++j) l.fading(i, j) = rho * l.fading(i, j) + innov * l.rng.cnormal();
    }
    l.fading_tti = tti;
  }

  if (l.ls.los) {
    const double k = db_to_linear(params_.ricean_k_db);
    const double w_los = std::sqrt(k / (k + 1.0));
    const double w_nlos = std::sqrt(1.0 / (k + 1.0));
    l.core = w_los * (l.los_rx * l.los_tx.adjoint()) + w_nlos * l.fading;
  } else {
    l.core = l.fading;
  }
  l.core_tti = tti;
  return l.core;
}

CMat ChannelModel::channel(int ue, int trp, int tx_beam, const RxBeamConfig& rx, std::int64_t tti) {
  const CMat& core = fading_core(ue, trp, tti);
  CMat h = tx_amplitude(ue, trp, tx_beam) * core;
  if (mmwave()) {
    const RVec amps = rx_amplitudes(ue, trp, rx);
    for (int i = 0; i < n_rx_; ++i) h.row(i) *= amps(i);
  }
  return h;
}

}  // namespace compsim
