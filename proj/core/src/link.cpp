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

#include "compsim/link.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace compsim {
namespace {

double capped_se(const RVec& sinr, double se_cap) {
  double se = 0.0;
  for (int k = 0; k < sinr.size(); ++k) {
    se += std::min(std::log2(1.0 + sinr(k)), se_cap);
  }
  return se;
}

}  // namespace

Precoder svd_precoder(const CMat& h, int rank) {
  const int bound = static_cast<int>(std::min<Eigen::Index>(std::min(h.rows(), h.cols()), kMaxPorts));
  if (rank < 1 || rank > bound) throw RunError("precoder rank outside [1, min(dims, 4)]");
  Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeThinV);
  Precoder p;
  p.rank = rank;
  p.w = svd.matrixV().leftCols(rank);
  return p;
}

LinkQuality mmse_irc_sinr_scaled(const CMat& g, const CMat& r_ipn, double se_cap) {
  Eigen::LLT<CMat> ipn_check(r_ipn);
  if (ipn_check.info() != Eigen::Success) {
    throw RunError("interference-plus-noise covariance is not positive definite");
  }
  const int rank = static_cast<int>(g.cols());
  CMat r_tot = r_ipn + g * g.adjoint();
  Eigen::LLT<CMat> llt(r_tot);
  if (llt.info() != Eigen::Success) {
    throw RunError("total receive covariance is not positive definite");
  }
  LinkQuality q;
  q.rank = rank;
  q.sinr.resize(rank);
  for (int k = 0; k < rank; ++k) {
    // With R_k = R_tot - g_k g_k^H, Sherman-Morrison gives
    // g_k^H R_k^{-1} g_k = u / (1 - u) for u = g_k^H R_tot^{-1} g_k.
    const CVec x = llt.solve(g.col(k));
    const double u = std::real(g.col(k).dot(x));
    if (u >= 1.0 - 1e-15) {
      q.sinr(k) = 1e15;
    } else {
      q.sinr(k) = std::max(0.0, u / (1.0 - u));
    }
  }
  q.spectral_efficiency = capped_se(q.sinr, se_cap);
  return q;
}

LinkQuality mmse_irc_sinr(const CMat& h_eff, const CMat& r_ipn, double tx_power_per_layer,
                          double se_cap) {
  const CMat g = std::sqrt(tx_power_per_layer) * h_eff;
  return mmse_irc_sinr_scaled(g, r_ipn, se_cap);
}

std::pair<Precoder, LinkQuality> rank_adapt(const CMat& h, const CMat& r_ipn, double total_power_w,
                                            int max_rank, double se_cap) {
  const int bound = static_cast<int>(std::min<Eigen::Index>(std::min(h.rows(), h.cols()), kMaxPorts));
  max_rank = std::min(max_rank, bound);
  if (max_rank < 1) throw RunError("rank adaptation needs at least one feasible layer");

  Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeThinV);
  Precoder best_p;
  LinkQuality best_q;
  for (int rank = 1; rank <= max_rank; ++rank) {
    Precoder p;
    p.rank = rank;
    p.w = svd.matrixV().leftCols(rank);
    const LinkQuality q = mmse_irc_sinr(h * p.w, r_ipn, total_power_w / rank, se_cap);
    if (rank == 1 || q.spectral_efficiency > best_q.spectral_efficiency) {
      best_p = p;
      best_q = q;
    }
  }
  return {best_p, best_q};
}

LinkQuality ncjt_link_quality(const CMat& h_a, const CMat& h_b, const Precoder& w_a,
                              const Precoder& w_b, const CMat& r_ipn, double power_a_w,
                              double power_b_w, double se_cap) {
  const int total = w_a.rank + w_b.rank;
  if (total > kMaxPorts) throw RunError("joint transmission rank exceeds the receive port count");
  CMat g(h_a.rows(), total);
  g.leftCols(w_a.rank) = std::sqrt(power_a_w / w_a.rank) * (h_a * w_a.w);
  g.rightCols(w_b.rank) = std::sqrt(power_b_w / w_b.rank) * (h_b * w_b.w);
  return mmse_irc_sinr_scaled(g, r_ipn, se_cap);
}

NcjtSelection ncjt_rank_adapt(const CMat& h_a, const CMat& h_b, const CMat& r_ipn,
                              double power_a_w, double power_b_w, double se_cap,
                              int max_total_rank) {
  const int max_a = static_cast<int>(std::min<Eigen::Index>(std::min(h_a.rows(), h_a.cols()), kMaxPorts));
  const int max_b = static_cast<int>(std::min<Eigen::Index>(std::min(h_b.rows(), h_b.cols()), kMaxPorts));
  Eigen::JacobiSVD<CMat> svd_a(h_a, Eigen::ComputeThinV);
  Eigen::JacobiSVD<CMat> svd_b(h_b, Eigen::ComputeThinV);

  NcjtSelection best;
  bool first = true;
  // Totals ascending, then the first leg ascending: strict improvement keeps
  // the lowest total rank and lowest rank_a on ties.
  for (int total = 2; total <= max_total_rank; ++total) {
    for (int ra = 1; ra < total; ++ra) {
      const int rb = total - ra;
      if (ra > max_a || rb > max_b) continue;
      Precoder wa{svd_a.matrixV().leftCols(ra), ra};
      Precoder wb{svd_b.matrixV().leftCols(rb), rb};
      const LinkQuality q = ncjt_link_quality(h_a, h_b, wa, wb, r_ipn, power_a_w, power_b_w, se_cap);
      if (first || q.spectral_efficiency > best.quality.spectral_efficiency) {
        best = {wa, wb, q};
        first = false;
      }
    }
  }
  if (first) throw RunError("no feasible joint rank split");
  return best;
}

}  // namespace compsim
