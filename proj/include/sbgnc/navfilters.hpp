#pragma once

#include <vector>

#include "sbgnc/dynamics.hpp"
#include "sbgnc/gravity.hpp"
#include "sbgnc/sensors.hpp"
#include "sbgnc/ukf.hpp"

namespace sbgnc {

constexpr int orbit_state_dim(int n_orb) { return 6 + gravity_param_count(n_orb); }
constexpr int attitude_state_dim(int n_att) { return 9 + gravity_param_count(n_att); }

struct InitialUncertainty {
  double p = 5.0;             // m
  double elements = 5e-6;     // f, g, h, k, L
  double gravity = 5e-3;
  double sigma = 1e-6;
  double omega = 1e-8;        // rad/s
  double gyro_bias = 2.42e-6; // rad/s
};

struct OrbitFilter {
  int n_orb = 4;
  GaussianState est;
  MatX Qy;

  Mee orbit() const { return Mee::from(est.mean.head<6>()); }
  VecX gravity_params() const { return est.mean.tail(gravity_param_count(n_orb)); }
  GravityModel gravity(const AsteroidModel& ast) const;
};

struct AttitudeFilter {
  int n_att = 2;
  GaussianState est;
  MatX Qy;

  Vec3 sigma_bi() const { return est.mean.head<3>(); }
  Vec3 omega() const { return est.mean.segment<3>(3); }
  VecX gravity_params() const { return est.mean.segment(6, gravity_param_count(n_att)); }
  Vec3 gyro_bias() const { return est.mean.tail<3>(); }
  GravityModel gravity(const AsteroidModel& ast) const;
};

OrbitFilter make_orbit_filter(const Mee& x0, const VecX& gravity0, int n_orb, const InitialUncertainty& u = {});
AttitudeFilter make_attitude_filter(const Vec3& sigma_bi, const Vec3& omega, const VecX& gravity0, const Vec3& bias0,
                                    int n_att, const InitialUncertainty& u = {});

struct FilterStepInfo {
  bool updated = false;
  VecX innovation;
};

/// Propagates over [t0, t0 + dt] and updates with the camera/LIDAR reading
/// taken at t0 + dt. An empty id list skips the update.
FilterStepInfo orbit_filter_step(OrbitFilter& f, const VecX& z_pixels, const std::vector<int>& ids,
                                 const Vec3& sigma_bi, const ActuatorChannel& accel, double t0, double dt,
                                 const LandmarkCatalog& catalog, const SensorSuite& suite,
                                 const AsteroidModel& asteroid, const UkfParams& params);

FilterStepInfo attitude_filter_step(AttitudeFilter& f, const Vec6& z_att, const OrbitTrack& track,
                                    const ActuatorChannel& torque, double t0, double dt, const SpacecraftConfig& sc,
                                    const SensorSuite& suite, const AsteroidModel& asteroid, const UkfParams& params);

/// Replaces the attitude mean by its shadow set when its norm exceeds one.
void switch_attitude_shadow(GaussianState& g);

Vec3 mrp_orbit_from_inertial(const Mee& x);
Vec3 reconstruct_body_orbit(const Vec3& sigma_bi, const Mee& x);
/// Inverse of reconstruct_body_orbit.
Vec3 body_inertial_from_orbit(const Vec3& sigma_bo, const Mee& x);

}  // namespace sbgnc
