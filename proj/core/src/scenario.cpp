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

#include "compsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace compsim {
namespace {

// Axial hex lattice basis scaled by the inter-site distance.
Eigen::Vector2d hex_axial(double isd, int i, int j) {
  return Eigen::Vector2d(isd * (i + 0.5 * j), isd * (std::sqrt(3.0) / 2.0 * j));
}

// Sites ring by ring: center, then rings in increasing hex distance; within
// a ring, sorted by (angle, then axial coords) for a stable order.
std::vector<Eigen::Vector2d> hex_sites(double isd, int rings) {
  struct Cand {
    int ring;
    double angle;
    int i, j;
  };
  std::vector<Cand> cands;
  for (int i = -rings; i <= rings; ++i) {
    for (int j = -rings; j <= rings; ++j) {
      int ring = (std::abs(i) + std::abs(j) + std::abs(i + j)) / 2;
      if (ring > rings) continue;
      Eigen::Vector2d p = hex_axial(isd, i, j);
      double angle = ring == 0 ? 0.0 : std::atan2(p.y(), p.x());
      cands.push_back({ring, angle, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.ring != b.ring) return a.ring < b.ring;
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<Eigen::Vector2d> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(hex_axial(isd, c.i, c.j));
  return out;
}

// Wraparound translations for a two-ring (19-site) grid: the six lattice
// vectors with squared hex norm 19.
const int kWrapOffsets[6][2] = {{3, 2}, {-2, 5}, {-5, 3}, {-3, -2}, {2, -5}, {5, -3}};

// Membership in the regular hexagonal cell centred on a site. The cell edges
// bisect the six nearest-neighbour directions, so the projection of the
// offset onto each of them is at most isd/2. Edge sites get the same shape as
// interior ones, which keeps the drop density uniform across the grid.
bool point_in_hex_cell(const Eigen::Vector2d& p, const Eigen::Vector2d& site, double isd) {
  const Eigen::Vector2d d = p - site;
  for (int k = 0; k < 6; ++k) {
    const double ang = kPi / 3.0 * k;
    if (d.x() * std::cos(ang) + d.y() * std::sin(ang) > 0.5 * isd) return false;
  }
  return true;
}

}  // namespace

GeometryParams default_geometry(ScenarioKind kind) {
  GeometryParams g;
  // The 30 GHz dense-urban deployment uses 7 sites even at full scale.
  g.du_rings = (kind == ScenarioKind::DU30GHz) ? 1 : 2;
  return g;
}

AntennaConfig default_antenna(ScenarioKind kind, int n_tx_ports) {
  AntennaConfig a;
  switch (kind) {
    case ScenarioKind::InH4GHz:
    case ScenarioKind::DU4GHz:
      a.n_tx_ports = n_tx_ports;
      a.n_analog_beams = 0;
      break;
    case ScenarioKind::InH30GHz:
      a.n_tx_ports = 2;  // ports per analog beam
      a.n_analog_beams = 16;
      a.array_rows = 4;
      a.array_cols = 4;
      break;
    case ScenarioKind::DU30GHz:
      a.n_tx_ports = 2;
      a.n_analog_beams = 32;
      a.array_rows = 8;
      a.array_cols = 8;
      break;
  }
  return a;
}

UePanelConfig default_ue_panel(ScenarioKind kind) {
  UePanelConfig p;
  if (is_mmwave(kind)) {
    p.n_panels = 2;
    p.beams_per_panel = 8;
    p.rx_ports_per_beam = 2;
    p.total_rx_ports = 4;
  } else {
    p.n_panels = 1;
    p.beams_per_panel = 0;
    p.rx_ports_per_beam = 0;
    p.total_rx_ports = 4;
  }
  return p;
}

Layout generate_layout(ScenarioKind kind, LayoutScale scale, const GeometryParams& geom,
                       const AntennaConfig& antenna) {
  Layout layout;
  layout.kind = kind;
  layout.scale = scale;
  layout.geometry = geom;

  if (is_indoor(kind)) {
    const int cols = (scale == LayoutScale::Desk) ? geom.inh_desk_cols : geom.inh_cols;
    layout.drop_rect_x_m = (scale == LayoutScale::Desk)
                               ? 2.0 * geom.inh_col_offset_m + (cols - 1) * geom.inh_spacing_m
                               : geom.inh_hall_x_m;
    layout.drop_rect_y_m = geom.inh_hall_y_m;
    int id = 0;
    for (int row = 0; row < geom.inh_rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        Trp t;
        t.id = id++;
        t.position = Vec3(geom.inh_col_offset_m + col * geom.inh_spacing_m,
                          geom.inh_row_offset_m +
                              row * (geom.inh_hall_y_m - 2.0 * geom.inh_row_offset_m) /
                                  std::max(1, geom.inh_rows - 1),
                          geom.inh_trp_height_m);
        t.antenna = antenna;
        t.antenna.boresight_az_deg = 0.0;
        layout.trps.push_back(t);
      }
    }
    // Pairs along rows: (2k, 2k+1) are horizontally adjacent.
    for (int k = 0; 2 * k + 1 < static_cast<int>(layout.trps.size()); ++k) {
      CoordinationCluster c;
      c.id = k;
      c.member_trps = {2 * k, 2 * k + 1};
      layout.trps[2 * k].cluster_id = k;
      layout.trps[2 * k + 1].cluster_id = k;
      layout.clusters.push_back(c);
    }
  } else {
    const int rings = (scale == LayoutScale::Desk) ? geom.du_rings_desk : geom.du_rings;
    auto sites2d = hex_sites(geom.du_isd_m, rings);
    int id = 0;
    for (std::size_t s = 0; s < sites2d.size(); ++s) {
      layout.site_positions.emplace_back(sites2d[s].x(), sites2d[s].y(), geom.du_trp_height_m);
      CoordinationCluster c;
      c.id = static_cast<int>(s);
      for (int sector = 0; sector < 3; ++sector) {
        Trp t;
        t.id = id++;
        t.position = layout.site_positions.back();
        t.antenna = antenna;
        t.antenna.boresight_az_deg = geom.du_sector_az_deg[sector];
        t.cluster_id = c.id;
        c.member_trps.push_back(t.id);
        layout.trps.push_back(t);
      }
      layout.clusters.push_back(c);
    }
  }
  return layout;
}

Vec3 drop_ue(const Layout& layout, RngStream& rng) {
  const GeometryParams& g = layout.geometry;
  if (!layout.dense_urban()) {
    const double x = rng.uniform(0.0, layout.drop_rect_x_m);
    const double y = rng.uniform(0.0, layout.drop_rect_y_m);
    return Vec3(x, y, g.ue_height_m);
  }
  // Uniform over the union of congruent hexagonal cells: pick a site, then
  // rejection-sample its hexagon from the bounding square.
  const int n_sites = static_cast<int>(layout.site_positions.size());
  const double cell_r = g.du_isd_m / std::sqrt(3.0);  // hex circumradius
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int site = static_cast<int>(rng.uniform(0.0, 1.0) * n_sites) % n_sites;
    const Vec3& sp = layout.site_positions[site];
    const double x = sp.x() + rng.uniform(-cell_r, cell_r);
    const double y = sp.y() + rng.uniform(-cell_r, cell_r);
    const Eigen::Vector2d p(x, y);
    const Eigen::Vector2d own(sp.x(), sp.y());
    if ((p - own).norm() < g.du_min_drop_dist_m) continue;
    if (!point_in_hex_cell(p, own, g.du_isd_m)) continue;
    return Vec3(x, y, g.ue_height_m);
  }
  throw RunError("dense-urban UE drop failed to find a point in any cell");
}

int strongest_trp(const std::vector<double>& coupling_gain_db) {
  int best = 0;
  for (std::size_t i = 1; i < coupling_gain_db.size(); ++i) {
    if (coupling_gain_db[i] > coupling_gain_db[best]) best = static_cast<int>(i);
  }
  return best;
}

int associate_cluster(const Layout& layout, const std::vector<double>& coupling_gain_db) {
  return layout.trps[strongest_trp(coupling_gain_db)].cluster_id;
}

Vec3 offset_to(const Layout& layout, const Trp& trp, const Vec3& point) {
  Vec3 d = point - trp.position;
  if (!layout.geometry.wraparound || !layout.dense_urban() || layout.scale == LayoutScale::Desk) {
    return d;
  }
  Vec3 best = d;
  double best_n = best.head<2>().squaredNorm();
  for (const auto& off : kWrapOffsets) {
    const Eigen::Vector2d t = hex_axial(layout.geometry.du_isd_m, off[0], off[1]);
    Vec3 cand = d;
    cand.x() += t.x();
    cand.y() += t.y();
    const double n = cand.head<2>().squaredNorm();
    if (n < best_n) {
      best = cand;
      best_n = n;
    }
  }
  return best;
}

std::string layout_csv(const Layout& layout) {
  std::ostringstream os;
  os << "trp_id,x,y,z,azimuth,cluster_id\n";
  for (const Trp& t : layout.trps) {
    os << t.id << ',' << t.position.x() << ',' << t.position.y() << ',' << t.position.z() << ','
       << t.antenna.boresight_az_deg << ',' << t.cluster_id << '\n';
  }
  return os.str();
}

}  // namespace compsim
