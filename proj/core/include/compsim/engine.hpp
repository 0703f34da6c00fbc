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

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "compsim/channel.hpp"
#include "compsim/config.hpp"
#include "compsim/scheduler.hpp"
#include "compsim/traffic.hpp"
#include "compsim/types.hpp"

namespace compsim {

/// One TRP's transmission during a TTI, as seen by every other link.
struct Transmission {
  int trp = -1;
  int ue = -1;
  Precoder prec;
  double power_per_layer_w = 0.0;
  int tx_beam = -1;
  ModeTag tag = ModeTag::Single;
  int partner_trp = -1;
};

struct TransferRecord {
  int ue_id = -1;
  std::int64_t arrival_tti = 0;
  std::int64_t completion_tti = 0;
  double upt_bps = 0.0;
  int serving_cluster = -1;
  SchemeMode scheme = SchemeMode::Baseline;
  bool measured = false;  // arrived after warm-up, counts toward statistics
};

struct SchedLogRow {
  std::int64_t tti = 0;
  int cluster = -1;
  int trp = -1;
  int ue = -1;  // -1 = blank
  ModeTag tag = ModeTag::Blank;
  int rank = 0;
  double pf_value = 0.0;
};

struct RunSummary {
  ScenarioKind scenario = ScenarioKind::InH4GHz;
  SchemeMode scheme = SchemeMode::Baseline;
  int n_tx = 2;
  double target_ru = 0.0;
  double achieved_ru = 0.0;
  double lambda_per_s = 0.0;
  double mean_upt_bps = 0.0;
  double edge_upt_bps = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct RunResult {
  RunSummary summary;
  std::vector<TransferRecord> transfers;
  std::vector<SchedLogRow> sched_log;
  std::vector<double> upt_samples;  // measured transfers, completion order
  // Conservation ledger, exact in integer bits:
  // delivered == completed sizes + progress of in-flight transfers.
  std::uint64_t delivered_bits = 0;
  std::uint64_t completed_bits = 0;
  std::uint64_t inflight_bits = 0;
  bool truncated_by_overload = false;
};

/// Discrete-time simulation loop. Each TTI: arrivals spawn UEs, channels
/// advance, interference is estimated from the previous TTI's transmitting
/// set, clusters (or uncoordinated TRPs) schedule, realized SINR is computed
/// from the actual concurrent transmissions, and transfer/PF/RU bookkeeping
/// runs. Single-threaded and fully determined by (config, seed).
class Engine {
 public:
  Engine(const Config& cfg, std::uint64_t seed);

  RunResult run();

  /// One TTI; exposed for stepping tests. run() drives this.
  void step();

  std::int64_t tti() const { return tti_; }
  const Layout& layout() const { return layout_; }
  ChannelModel& channel_model() { return channel_; }
  const Config& config() const { return cfg_; }
  const std::vector<Transmission>& previous_set() const { return prev_set_; }
  const std::vector<Transmission>& current_set() const { return curr_set_; }
  std::vector<int> active_ue_ids() const;
  const FileTransfer& transfer(int ue) const;
  double pf_avg(int ue) const { return pf_.avg(ue); }
  int anchor_trp(int ue) const;
  int serving_cluster(int ue) const;
  /// Busy fraction accumulated so far over the accounting window.
  double ru() const;
  std::uint64_t delivered_bits() const { return delivered_bits_; }

  /// sigma^2 I plus the precoded outer product of every transmission in the
  /// snapshot as received by `victim` under the given receive configuration.
  /// The snapshot must already exclude the victim's own desired links.
  CMat interference_covariance(int victim, const std::vector<Transmission>& snapshot,
                               const RxBeamConfig& rx, std::int64_t at_tti);

 private:
  struct UeState {
    int id = -1;
    Vec3 position = Vec3::Zero();
    int cluster = -1;
    int anchor = -1;  // strongest-coupling TRP
    FileTransfer transfer;
    bool measured = false;
  };

  struct Realized {
    int ue = -1;
    LinkQuality quality;
    std::uint64_t link_bits = 0;
  };

  void spawn_ues(int count);
  void remove_ue(int ue);
  CMat unscaled_interference_sum(int victim, const std::vector<Transmission>& snapshot,
                                 std::int64_t at_tti, int skip_trp_a = -1, int skip_trp_b = -1);
  void schedule_baseline(std::vector<Transmission>& out);
  void schedule_joint(std::vector<Transmission>& out);
  ClusterContext build_cluster_context(const CoordinationCluster& cluster,
                                       const std::vector<int>& cluster_ues);
  void realize_and_deliver(const std::vector<Transmission>& set);
  void account_ru(const std::vector<Transmission>& set);
  void log_decisions(const std::vector<Transmission>& set,
                     const std::map<int, double>& pf_values);

  Config cfg_;
  std::uint64_t seed_;
  Layout layout_;
  ChannelModel channel_;
  TrafficModel traffic_;
  PfState pf_;
  RngStream arrivals_rng_;
  RngStream drop_rng_;

  std::int64_t tti_ = 0;
  int next_ue_id_ = 0;
  std::map<int, UeState> ues_;  // ordered for deterministic iteration
  std::vector<Transmission> prev_set_;
  std::vector<Transmission> curr_set_;
  std::map<int, double> pf_by_trp_;  // decision values for the schedule log
  bool overload_ = false;

  bool measuring_ = false;
  std::int64_t busy_trp_ttis_ = 0;
  std::int64_t accounted_ttis_ = 0;
  std::uint64_t delivered_bits_ = 0;
  std::uint64_t completed_bits_ = 0;
  std::vector<TransferRecord> transfers_;
  std::vector<double> upt_samples_;
  std::vector<SchedLogRow> sched_log_;

  double noise_w_ = 0.0;
  double trp_power_w_ = 0.0;
  int max_rank_ = 2;
};

struct CalibrationRecord {
  ScenarioKind scenario = ScenarioKind::InH4GHz;
  LayoutScale scale = LayoutScale::Desk;
  int n_tx = 2;
  double target_ru = 0.0;
  double lambda_per_s = 0.0;
  double achieved_ru = 0.0;
  std::vector<std::uint64_t> seeds;
  std::string config_digest;
};

/// Digest identifying the inputs a calibration depends on (scheme forced to
/// Baseline, arrival rate zeroed). Cached records are valid iff this matches.
std::string calibration_cache_key(const Config& cfg, double target_ru);

/// Bisection on the arrival rate until the Baseline scheme's seed-averaged
/// RU is within `tolerance` of the target. The returned rate is meant to be
/// reused unchanged for the coordinated schemes (equal offered load defines
/// the operating point). Throws CalibrationError when no bracket is found.
CalibrationRecord calibrate_ru(const Config& cfg, double target_ru, double tolerance);

}  // namespace compsim
