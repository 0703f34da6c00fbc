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

#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "compsim/rng.hpp"
#include "compsim/scenario.hpp"
#include "compsim/types.hpp"

namespace compsim {

/// Radio propagation knobs: log-distance pathloss, lognormal shadowing,
/// distance-decaying LOS probability, Ricean small-scale fading with AR(1)
/// temporal correlation, and a parabolic main-lobe beam/sector gain model.
struct ChannelParams {
  double pl_intercept_db = 0.0;  // pathloss at the 1 m reference distance
  double pl_exp_los = 1.7;
  double pl_exp_nlos = 3.0;
  double shadow_sigma_los_db = 3.0;
  double shadow_sigma_nlos_db = 8.0;
  double ricean_k_db = 9.0;
  double fading_rho = 0.9;  // AR(1) coefficient between consecutive TTIs

  // Transmit side. 4 GHz: either isotropic (indoor) or a fixed sector
  // pattern (dense urban). 30 GHz: a grid of analog beams.
  bool sector_pattern = false;
  double sector_theta3db_deg = 65.0;
  double sector_ftb_db = 30.0;
  double sector_peak_gain_db = 8.0;

  int trp_beams = 0;               // 0 disables the transmit beam grid
  double trp_beam_span_deg = 360.0;
  double trp_theta3db_deg = 0.0;
  double trp_peak_gain_db = 0.0;
  double trp_ftb_db = 25.0;

  // Receive side, 30 GHz only: two opposite panels, each with a beam grid.
  int ue_beams_per_panel = 0;      // 0 disables receive beams (4 GHz)
  double ue_beam_span_deg = 180.0;
  double ue_theta3db_deg = 0.0;
  double ue_peak_gain_db = 0.0;
  double ue_ftb_db = 25.0;
};

ChannelParams default_channel_params(ScenarioKind kind);

struct LargeScaleState {
  double pathloss_db = 0.0;
  double shadowing_db = 0.0;  // zero-mean normal draw, frozen per link
  bool los = false;
  double distance_m = 0.0;
  bool degenerate = false;    // distance clamped to the 1 m reference
};

struct BeamSelection {
  int trp_beam = -1;
  int ue_panel = -1;
  int ue_beam = -1;
  double gain_db = 0.0;  // combined transmit + receive beam gain
};

/// Active receive beam per UE panel; -1 marks an unused slot. Ignored for
/// 4 GHz scenarios.
struct RxBeamConfig {
  std::array<int, 2> beam{-1, -1};
};

/// Parabolic main lobe with a front-to-back floor:
/// gain = peak - min(12 * (offset / theta3db)^2, ftb).
double pattern_gain_db(double offset_deg, double theta3db_deg, double peak_db, double ftb_db);

/// Pointing direction of beam `b` in a grid of `n` beams spread over `span`
/// degrees centered on 0 (grid convention: (b + 0.5) / n across the span).
double beam_direction_deg(int b, int n, double span_deg);

double los_probability(ScenarioKind kind, double distance_2d_m);

/// Pathloss at 3D distance under the log-distance model; distances below the
/// 1 m reference are clamped and flagged.
double pathloss_db(const ChannelParams& p, double distance_m, bool los, bool* degenerate);

LargeScaleState compute_large_scale(ScenarioKind kind, const ChannelParams& p, double distance_3d_m,
                                    double distance_2d_m, RngStream& rng);

/// Exhaustive best-beam-pair search over (TRP beam, UE panel, UE beam); ties
/// broken by lowest (trp_beam, panel, beam) lexicographic index.
BeamSelection select_beams(const ChannelParams& p, double az_trp_to_ue_rel_boresight_deg,
                           double az_ue_to_trp_deg, const std::array<double, 2>& panel_az_deg);

/// Per-run channel state: frozen large-scale and beam geometry per live
/// (UE, TRP) link plus lazily advanced temporally correlated fading.
class ChannelModel {
 public:
  ChannelModel(const Layout& layout, const ChannelParams& params, int n_tx_ports,
               const UePanelConfig& panel, std::uint64_t run_seed);

  /// Freezes large-scale state, beam geometry, and fading seed streams for
  /// every (ue, trp) link; all draws come from substreams derived from
  /// (run seed, ue, trp), so they are independent of call interleaving.
  void add_ue(int ue_id, const Vec3& position);
  void remove_ue(int ue_id);

  int n_tx() const { return n_tx_; }
  int n_rx() const { return n_rx_; }
  bool mmwave() const { return params_.trp_beams > 0; }
  const ChannelParams& params() const { return params_; }
  const Layout& layout() const { return *layout_; }

  const LargeScaleState& large_scale(int ue, int trp) const;
  /// -pathloss - shadowing + best antenna/beam gain; the association metric.
  double coupling_gain_db(int ue, int trp) const;
  std::vector<double> coupling_gains_db(int ue) const;

  /// Full exhaustive search result for this link (30 GHz).
  BeamSelection best_beam_selection(int ue, int trp) const;
  /// TRP side of the best pair (independent of the UE panel choice).
  int best_trp_beam(int ue, int trp) const;
  /// Best receive beam on each panel when listening to `trp`.
  RxBeamConfig rx_toward(int ue, int trp) const;
  /// Panel-to-TRP pairing for two-TRP reception maximizing the summed panel
  /// gains; ties keep panel 0 on `trp_a`.
  RxBeamConfig rx_toward_pair(int ue, int trp_a, int trp_b) const;

  /// Channel matrix for the link at `tti` with the given transmit beam and
  /// receive configuration. At 4 GHz both beam arguments are ignored.
  CMat channel(int ue, int trp, int tx_beam, const RxBeamConfig& rx, std::int64_t tti);

  /// Receive-side amplitude per rx port (sqrt linear panel gain); identity
  /// at 4 GHz. Exposed so covariance assembly can rescale cached terms.
  RVec rx_amplitudes(int ue, int trp, const RxBeamConfig& rx) const;

  /// Amplitude common to all rx ports: sqrt linear of (-pathloss - shadowing
  /// + transmit gain toward this UE for `tx_beam`).
  double tx_amplitude(int ue, int trp, int tx_beam) const;

  /// Beam-independent unit-power fading core at `tti` (Ricean mixture),
  /// advanced lazily with the exact multi-step AR(1) jump.
  const CMat& fading_core(int ue, int trp, std::int64_t tti);

  bool has_ue(int ue) const { return links_.count(ue) > 0; }
  std::size_t n_live_ues() const { return links_.size(); }

 private:
  struct LinkState {
    LargeScaleState ls;
    double az_trp_to_ue_deg = 0.0;  // relative to TRP boresight
    double az_ue_to_trp_deg = 0.0;  // absolute azimuth seen from the UE
    int best_trp_beam = -1;
    std::array<int, 2> best_panel_beam{-1, -1};
    std::array<double, 2> best_panel_gain_db{0.0, 0.0};
    double coupling_gain_db = 0.0;
    CVec los_rx;  // unit-modulus Ricean component, h_los = los_rx * los_tx^H
    CVec los_tx;
    CMat fading;          // AR(1) Gaussian state, unit variance entries
    std::int64_t fading_tti = -1;
    CMat core;            // cached Ricean mixture for core_tti
    std::int64_t core_tti = -2;
    RngStream rng{0};
  };
  struct UeLinks {
    Vec3 position;
    std::array<double, 2> panel_az_deg{0.0, 180.0};
    std::vector<LinkState> per_trp;
  };

  const LinkState& link(int ue, int trp) const;
  LinkState& link(int ue, int trp);
  double trp_gain_db(const LinkState& l, int tx_beam, const Trp& trp) const;

  const Layout* layout_;
  ChannelParams params_;
  int n_tx_;
  int n_rx_;
  UePanelConfig panel_;
  std::uint64_t run_seed_;
  std::unordered_map<int, UeLinks> links_;
};

}  // namespace compsim
