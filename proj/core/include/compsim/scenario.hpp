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
#include <string>
#include <vector>

#include "compsim/rng.hpp"
#include "compsim/types.hpp"

namespace compsim {

struct AntennaConfig {
  int n_tx_ports = 2;
  int n_analog_beams = 0;  // 0 for the fully digital 4 GHz scenarios
  int array_rows = 0;
  int array_cols = 0;
  double boresight_az_deg = 0.0;
  double downtilt_deg = 0.0;
};

struct UePanelConfig {
  int n_panels = 1;
  int beams_per_panel = 0;
  int rx_ports_per_beam = 0;
  int total_rx_ports = 4;
};

struct Trp {
  int id = 0;
  Vec3 position = Vec3::Zero();
  AntennaConfig antenna;
  int cluster_id = 0;
};

struct CoordinationCluster {
  int id = 0;
  std::vector<int> member_trps;
};

/// Deployment geometry knobs. Values not fixed by the scenario definitions
/// (spacings, heights, drop rules) are configuration with the defaults below.
struct GeometryParams {
  // Indoor hall: TRPs on a regular ceiling grid inside a rectangle.
  double inh_hall_x_m = 120.0;
  double inh_hall_y_m = 50.0;
  int inh_rows = 2;
  int inh_cols = 6;
  double inh_spacing_m = 20.0;    // along-row TRP spacing
  double inh_col_offset_m = 10.0; // first TRP to short wall
  double inh_row_offset_m = 10.0; // row to long wall
  double inh_trp_height_m = 3.0;
  int inh_desk_cols = 2;          // desk scale keeps this many columns per row

  // Dense urban: hexagonal site grid, three co-sited sectors per site.
  double du_isd_m = 200.0;
  int du_rings = 2;               // 2 rings = 19 sites, 1 ring = 7 sites
  int du_rings_desk = 1;
  double du_trp_height_m = 25.0;
  double du_min_drop_dist_m = 10.0;
  std::array<double, 3> du_sector_az_deg{30.0, 150.0, 270.0};
  bool wraparound = false;        // full dense-urban layouts only

  double ue_height_m = 1.5;
};

GeometryParams default_geometry(ScenarioKind kind);
AntennaConfig default_antenna(ScenarioKind kind, int n_tx_ports);
UePanelConfig default_ue_panel(ScenarioKind kind);

struct Layout {
  ScenarioKind kind = ScenarioKind::InH4GHz;
  LayoutScale scale = LayoutScale::Full;
  GeometryParams geometry;
  std::vector<Trp> trps;
  std::vector<CoordinationCluster> clusters;
  // Drop region: rectangle for indoor, per-site hex cells for dense urban.
  double drop_rect_x_m = 0.0;
  double drop_rect_y_m = 0.0;
  std::vector<Vec3> site_positions;  // dense urban only

  int n_trps() const { return static_cast<int>(trps.size()); }
  int n_clusters() const { return static_cast<int>(clusters.size()); }
  bool dense_urban() const { return !is_indoor(kind); }
};

/// Deterministic TRP/cluster generation for a scenario at full or desk scale.
Layout generate_layout(ScenarioKind kind, LayoutScale scale, const GeometryParams& geom,
                       const AntennaConfig& antenna);

/// Uniform UE drop over the deployment's coverage area (indoor rectangle or
/// union of hexagonal site cells, respecting the minimum drop distance).
Vec3 drop_ue(const Layout& layout, RngStream& rng);

/// Index of the strongest-coupling TRP; ties broken toward the lowest id.
int strongest_trp(const std::vector<double>& coupling_gain_db);

/// Cluster containing the strongest-coupling TRP.
int associate_cluster(const Layout& layout, const std::vector<double>& coupling_gain_db);

/// Displacement from a TRP to a point, using the closest wraparound image of
/// the point when the layout has wraparound enabled. Identity otherwise.
Vec3 offset_to(const Layout& layout, const Trp& trp, const Vec3& point);

/// CSV dump: trp_id, x, y, z, azimuth, cluster_id.
std::string layout_csv(const Layout& layout);

}  // namespace compsim
