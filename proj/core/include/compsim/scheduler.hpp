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
#include <unordered_map>
#include <vector>

#include "compsim/channel.hpp"
#include "compsim/link.hpp"
#include "compsim/types.hpp"

namespace compsim {

inline constexpr int kMaxClusterTrps = 3;

struct SchedulerParams {
  double pf_beta = 0.01;        // exponential forgetting per TTI
  double pf_floor_bps = 1e3;    // initialization and decay floor
  int prune_top = 4;            // per-TRP candidates entering joint enumeration; 0 = no pruning
  bool allow_third_trp = true;  // third cluster member may transmit during a joint pair
};

enum class ModeTag { Blank, Single, Ncjt };
std::string to_string(ModeTag tag);

/// Proportional-fair metric: instantaneous rate over long-run average.
double pf_metric(double instantaneous_rate_bps, double avg_throughput_bps);

/// Per-UE exponentially weighted average served rate, floored positive.
class PfState {
 public:
  PfState(double beta, double floor_bps) : beta_(beta), floor_bps_(floor_bps) {}

  void add_ue(int ue) { avg_[ue] = floor_bps_; }
  void remove_ue(int ue) { avg_.erase(ue); }
  bool has(int ue) const { return avg_.count(ue) > 0; }
  double avg(int ue) const { return avg_.at(ue); }
  std::size_t size() const { return avg_.size(); }

  /// avg <- max(floor, (1 - beta) * avg + beta * served_rate).
  void update(int ue, double served_rate_bps);

 private:
  double beta_;
  double floor_bps_;
  std::unordered_map<int, double> avg_;
};

/// Frozen per-TTI inputs for one cluster's joint scheduling decision.
///
/// Channels are per (UE, serving configuration) because the receive beam
/// choice depends on which TRP(s) serve the UE; interference terms are cached
/// unscaled (unit receive gain) and rescaled per configuration on use.
/// Out-of-cluster interference is baked into `s_out` from the previous TTI's
/// transmitting set; in-cluster interference is added per hypothesis.
struct ClusterUe {
  int ue = -1;
  double avg_bps = 0.0;
  std::array<CMat, kMaxClusterTrps> h_raw;  // channel from slot t at unit receive gain
  // Receive amplitudes depend on both the serving configuration (which fixes
  // the UE's analog beams) and the arrival direction of each source slot.
  // amp_single[t][s]: serving slot t, source slot s. amp_pair[p][s]: serving
  // pair p, source slot s. Empty vectors default to unit gain (4 GHz).
  std::array<std::array<RVec, kMaxClusterTrps>, kMaxClusterTrps> amp_single;
  std::array<std::array<RVec, kMaxClusterTrps>, kMaxClusterTrps> amp_pair;
  // Out-of-cluster interference from the previous TTI's transmitting set,
  // already receive-scaled per serving configuration; noise not included.
  // Empty matrices default to zero.
  std::array<CMat, kMaxClusterTrps> r_out_single;
  std::array<CMat, kMaxClusterTrps> r_out_pair;
};

struct SoloCandidate {
  int ue_idx = -1;     // index into ClusterContext::ues
  Precoder prec;       // fixed from the out-of-cluster covariance
  LinkQuality quality; // in-cluster-silent link quality
  double rate_bps = 0.0;
  double metric = 0.0; // solo PF metric used for pruning order
};

struct ClusterContext {
  int cluster_id = 0;
  std::vector<int> trp_ids;
  int n_rx = kMaxPorts;
  double noise_w = 0.0;
  double bandwidth_hz = 0.0;
  double tti_s = 1e-3;
  double se_cap = kSeCapDefault;
  double trp_power_w = 0.0;
  int max_rank_single = 0;  // min(n_tx ports, 4)
  std::vector<ClusterUe> ues;
  std::vector<std::vector<SoloCandidate>> cands;  // per slot, filled by build_candidates

  int n_trp() const { return static_cast<int>(trp_ids.size()); }
};

/// TRP pairs eligible for joint transmission, in enumeration order.
std::vector<std::pair<int, int>> cluster_pairs(int n_trp);

/// Computes solo precoders/qualities per (slot, UE), orders candidates by
/// descending solo PF metric (ties toward lower UE index), and prunes to the
/// top `prune_top` per slot.
void build_candidates(ClusterContext& ctx, const SchedulerParams& params);

struct HypAssignment {
  int ue_idx = -1;  // -1 = blank
  ModeTag tag = ModeTag::Blank;
  int partner_slot = -1;  // other slot of a joint transmission
  Precoder prec;
  double power_per_layer_w = 0.0;
};

struct ServedUe {
  int ue_idx = -1;
  double rate_bps = 0.0;
  double metric = 0.0;
  LinkQuality quality;
  int n_trps = 1;
};

struct SchedulingHypothesis {
  std::array<HypAssignment, kMaxClusterTrps> per_trp;
  double pf_value = 0.0;
  int n_transmitting = 0;
  bool joint = false;  // contains a two-TRP assignment
  std::vector<ServedUe> served;
};

/// All candidate assignments for one cluster and TTI. The point-selection
/// hypothesis list (every per-TRP choice of blank-or-one-candidate, each UE
/// at most once) is generated first in a fixed order; joint-transmission mode
/// appends two-TRP hypotheses after it, so the point-selection list is always
/// a verbatim prefix. Rates are evaluated with in-cluster cross interference
/// under each hypothesis; precoders stay fixed from the solo evaluation.
std::vector<SchedulingHypothesis> enumerate_hypotheses(const ClusterContext& ctx, SchemeMode mode,
                                                       const SchedulerParams& params);

/// Index of the PF-sum argmax; ties prefer fewer transmitting TRPs, then the
/// lowest index. Empty input is a contract violation.
int select_hypothesis(const std::vector<SchedulingHypothesis>& hypotheses);

/// One uncoordinated TRP's choice among the UEs attached to it.
struct BaselineCandidate {
  int ue = -1;
  double rate_bps = 0.0;
  double avg_bps = 0.0;
  Precoder prec;
  LinkQuality quality;
};

/// PF argmax; -1 when no candidates (the TRP stays silent). Ties go to the
/// earliest candidate.
int baseline_select(const std::vector<BaselineCandidate>& candidates);

}  // namespace compsim
