#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbgnc/guidance.hpp"
#include "sbgnc/mpc.hpp"
#include "sbgnc/navfilters.hpp"
#include "sbgnc/scenario.hpp"

namespace sbgnc {

/// One logged sample at the orbit-filter cadence.
struct HistoryRow {
  double t = 0.0;
  Vec6 truth_mee = Vec6::Zero();
  Vec6 est_mee = Vec6::Zero();
  double r = 0.0, lon = 0.0, lat = 0.0;
  Vec3 sigma_bo_truth = Vec3::Zero();
  Vec3 sigma_bo_est = Vec3::Zero();
  Vec3 euler = Vec3::Zero();  // pitch, roll, yaw of the truth sigma_BO, rad
  Vec3 accel_cmd = Vec3::Zero();
  Vec3 accel_applied = Vec3::Zero();
  Vec3 torque_cmd = Vec3::Zero();
  Vec3 torque_applied = Vec3::Zero();
  VecX grav_orb;      // orbit filter C/S means
  VecX grav_orb_sd;   // and marginal standard deviations
  VecX grav_att;
  VecX grav_att_sd;
  Vec3 gyro_bias_est = Vec3::Zero();
  int landmarks_seen = 0;
};

struct SatelliteHistory {
  int index = 0;
  double a_target = 0.0;
  int n_orb = 0;
  int n_att = 0;
  std::vector<HistoryRow> rows;
};

struct SatelliteRuntime {
  int index = 0;
  SatelliteSpec spec;
  TruthState truth;
  OrbitFilter orbit;
  AttitudeFilter attitude;
  SensorRng rng;
  Mee orbit_companion;  // orbit estimate carried between orbit filter calls
  OrbitReference orbit_ref;
  std::optional<VecX> orbit_warm;
  std::optional<VecX> attitude_warm;
  SatelliteHistory history;

  SatelliteRuntime(std::uint64_t seed, std::uint64_t stream) : rng(seed, stream) {}
};

/// Per-coefficient inputs across satellites.
struct FusionInput {
  std::vector<VecX> means;
  std::vector<VecX> sigmas;
};

/// Inverse-variance weighted mean per coefficient.
VecX fuse_gravity(const FusionInput& in);
/// Normalized weights per satellite (columns) and coefficient (rows).
MatX fusion_weights(const FusionInput& in);

struct RunResult {
  std::vector<SatelliteHistory> satellites;
  std::vector<double> fused_t;
  std::vector<VecX> fused_orbit;  // fused orbit-block coefficients after each fusion
  std::uint64_t attitude_steps = 0;
  std::uint64_t orbit_steps = 0;
  std::vector<int> attitude_steps_between_orbit;  // schedule audit
};

struct RunOptions {
  /// Progress hook called after every orbit filter epoch with the current time.
  std::function<void(double)> progress;
};

/// Initial truth and filter states for one satellite.
SatelliteRuntime make_satellite(const Scenario& sc, int index);

/// Runs the nested guidance, navigation and control schedule for every satellite.
RunResult run_constellation(const Scenario& sc, const RunOptions& opt = {});

/// Runs satellite `index` alone with its own random stream.
RunResult run_standalone(const Scenario& sc, int index, const RunOptions& opt = {});

}  // namespace sbgnc
