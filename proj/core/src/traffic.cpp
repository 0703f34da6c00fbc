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

#include "compsim/traffic.hpp"

#include <algorithm>

#include "compsim/types.hpp"

namespace compsim {

std::vector<double> TrafficModel::arrivals(RngStream& rng) const {
  const int n = rng.poisson(params_.lambda_per_s * tti_s_);
  std::vector<double> offsets(static_cast<std::size_t>(std::max(n, 0)));
  for (double& o : offsets) o = rng.uniform();
  std::sort(offsets.begin(), offsets.end());
  return offsets;
}

std::uint64_t record_delivery(FileTransfer& transfer, std::uint64_t bits, std::int64_t tti) {
  if (transfer.complete()) throw RunError("delivery to a completed transfer");
  const std::uint64_t consumed = std::min(bits, transfer.remaining_bits);
  transfer.remaining_bits -= consumed;
  if (transfer.remaining_bits == 0) transfer.completion_tti = tti;
  return consumed;
}

double upt_bps(const FileTransfer& transfer, double tti_duration_s) {
  if (!transfer.complete()) throw RunError("throughput of an incomplete transfer");
  const auto ttis = static_cast<double>(transfer.completion_tti - transfer.arrival_tti + 1);
  return static_cast<double>(transfer.size_bits) / (ttis * tti_duration_s);
}

}  // namespace compsim
