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
#include <vector>

#include "compsim/rng.hpp"

namespace compsim {

struct TrafficParams {
  double lambda_per_s = 1.0;               // file arrival rate (users/s)
  std::uint64_t file_size_bits = 4000000;  // 0.5 decimal megabytes
};

/// One finite download; the source of one throughput sample. Users arrive
/// with exactly one file and depart on completion.
struct FileTransfer {
  int ue_id = -1;
  std::uint64_t size_bits = 0;
  std::uint64_t remaining_bits = 0;
  std::int64_t arrival_tti = 0;
  std::int64_t completion_tti = -1;

  bool complete() const { return remaining_bits == 0; }
};

/// Poisson file arrivals at a fixed rate. Each arrival carries a uniform
/// sub-TTI offset so that absolute arrival timestamps form an exact
/// homogeneous Poisson process (inter-arrival times exactly exponential).
class TrafficModel {
 public:
  TrafficModel(const TrafficParams& params, double tti_duration_s)
      : params_(params), tti_s_(tti_duration_s) {}

  /// Sorted sub-TTI offsets (fractions of one TTI, in [0,1)) of this TTI's
  /// arrivals; the count is Poisson with mean lambda * tti_duration.
  std::vector<double> arrivals(RngStream& rng) const;

  const TrafficParams& params() const { return params_; }
  double tti_duration_s() const { return tti_s_; }

 private:
  TrafficParams params_;
  double tti_s_;
};

/// Consumes up to `bits` from the transfer; returns the amount actually
/// consumed (delivery past completion is clipped, never negative carry).
/// Marks completion at `tti`. Delivering to a completed transfer is a
/// contract violation.
std::uint64_t record_delivery(FileTransfer& transfer, std::uint64_t bits, std::int64_t tti);

/// size / ((completion - arrival + 1) * tti_duration); completed transfers
/// only.
double upt_bps(const FileTransfer& transfer, double tti_duration_s);

}  // namespace compsim
