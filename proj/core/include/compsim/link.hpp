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

#include "compsim/types.hpp"

namespace compsim {

inline constexpr double kSeCapDefault = 7.8;  // bits/s/Hz per layer

struct Precoder {
  CMat w;        // n_tx x rank, semi-unitary columns
  int rank = 0;
};

struct LinkQuality {
  RVec sinr;                        // linear, one entry per layer
  int rank = 0;
  double spectral_efficiency = 0.0; // sum over layers of min(log2(1+sinr), cap)
};

/// Top-`rank` right singular vectors of h, ordered by descending singular
/// value. Requires 1 <= rank <= min(dims of h, 4).
Precoder svd_precoder(const CMat& h, int rank);

/// Per-layer post-IRC SINR for pre-scaled effective columns g_k:
/// SINR_k = g_k^H (r_ipn + sum_{j != k} g_j g_j^H)^{-1} g_k.
LinkQuality mmse_irc_sinr_scaled(const CMat& g, const CMat& r_ipn, double se_cap = kSeCapDefault);

/// Same with uniform per-layer power: g_k = sqrt(p) * h_eff[:,k].
LinkQuality mmse_irc_sinr(const CMat& h_eff, const CMat& r_ipn, double tx_power_per_layer,
                          double se_cap = kSeCapDefault);

/// Evaluates ranks 1..max_rank with equal power split total_power/rank and
/// returns the spectral-efficiency argmax; ties go to the lower rank.
std::pair<Precoder, LinkQuality> rank_adapt(const CMat& h, const CMat& r_ipn, double total_power_w,
                                            int max_rank, double se_cap = kSeCapDefault);

/// Two-TRP joint transmission of distinct layers: stacked effective channel
/// [sqrt(pa/ra) h_a w_a | sqrt(pb/rb) h_b w_b], partner layers received
/// jointly rather than treated as interference. Per-TRP power budgets.
LinkQuality ncjt_link_quality(const CMat& h_a, const CMat& h_b, const Precoder& w_a,
                              const Precoder& w_b, const CMat& r_ipn, double power_a_w,
                              double power_b_w, double se_cap = kSeCapDefault);

struct NcjtSelection {
  Precoder w_a;
  Precoder w_b;
  LinkQuality quality;
};

/// Exhaustive search over rank splits (ra, rb >= 1, ra + rb <= max_total)
/// maximizing joint spectral efficiency; ties toward lower total rank, then
/// lower ra. Per-TRP precoders from svd_precoder of each leg.
NcjtSelection ncjt_rank_adapt(const CMat& h_a, const CMat& h_b, const CMat& r_ipn,
                              double power_a_w, double power_b_w,
                              double se_cap = kSeCapDefault, int max_total_rank = kMaxPorts);

}  // namespace compsim
