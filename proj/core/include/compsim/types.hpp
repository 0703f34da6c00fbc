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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace compsim {

using cxd = std::complex<double>;
using Vec3 = Eigen::Vector3d;

/// UEs have at most 4 receive ports and TRPs expose at most 4 transmit ports,
/// so every per-link matrix fits in a fixed-capacity (stack-allocated) block.
inline constexpr int kMaxPorts = 4;

using CMat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPorts, kMaxPorts>;
using CVec = Eigen::Matrix<cxd, Eigen::Dynamic, 1, 0, kMaxPorts, 1>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPorts, 1>;

enum class ScenarioKind { InH4GHz, DU4GHz, InH30GHz, DU30GHz };
enum class LayoutScale { Full, Desk };
enum class SchemeMode { Baseline, DPS, NCJT };

std::string to_string(ScenarioKind kind);
std::string to_string(LayoutScale scale);
std::string to_string(SchemeMode mode);
ScenarioKind scenario_from_string(const std::string& s);
LayoutScale scale_from_string(const std::string& s);
SchemeMode scheme_from_string(const std::string& s);

inline bool is_mmwave(ScenarioKind kind) {
  return kind == ScenarioKind::InH30GHz || kind == ScenarioKind::DU30GHz;
}

inline bool is_indoor(ScenarioKind kind) {
  return kind == ScenarioKind::InH4GHz || kind == ScenarioKind::InH30GHz;
}

inline double carrier_ghz(ScenarioKind kind) { return is_mmwave(kind) ? 30.0 : 4.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// Normalizes an angle to [-180, 180).
inline double wrap_deg(double deg) {
  double a = std::fmod(deg + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  return a - 180.0;
}

constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Invalid run configuration; `what()` lists every violated field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulation run that could not produce valid results (e.g. no completed
/// transfers in the measurement window).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Load calibration failed to bracket or converge on the target utilization.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace compsim
