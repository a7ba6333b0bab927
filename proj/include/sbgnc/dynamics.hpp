#pragma once

#include <array>

#include "sbgnc/core.hpp"
#include "sbgnc/elements.hpp"
#include "sbgnc/gravity.hpp"
#include "sbgnc/ode.hpp"

namespace sbgnc {

struct SpacecraftConfig {
  Mat3 J = Vec3(2000.0, 16400.0, 17600.0).asDiagonal();
  MassDistribution masses = {
      {Vec3(8.0, 0.0, 0.0), 200.0},  {Vec3(-2.0, -2.0, 0.0), 200.0}, {Vec3(-2.0, 2.0, 0.0), 200.0},
      {Vec3(-2.0, 0.0, -1.0), 200.0}, {Vec3(-2.0, 0.0, 1.0), 200.0},
  };
  double c_r = 1.4;
  double area = 10.0;     // m^2
  double mass = 1000.0;   // kg
  double a_max = 0.01;    // m/s^2 per axis
  double t_max = 0.01;    // N m per axis
  double tau = 0.1;       // 1/s
  double isp = 2900.0;    // s

  void validate() const;
};

/// Exponential blend between the previous and current command.
struct ActuatorChannel {
  Vec3 prev = Vec3::Zero();
  Vec3 cmd = Vec3::Zero();
  double t_switch = 0.0;
  double tau = 0.1;

  Vec3 at(double t) const { return cmd + std::exp(-tau * (t - t_switch)) * (prev - cmd); }
  void command(const Vec3& u, double t) {
    prev = cmd;
    cmd = u;
    t_switch = t;
  }
};

struct TruthState {
  Mee orbit;
  Vec3 sigma_bi = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  double t = 0.0;
  ActuatorChannel accel;   // orbit frame, m/s^2
  ActuatorChannel torque;  // body frame, N m
};

struct TruthEnvironment {
  const AsteroidModel* asteroid = nullptr;
  const SolarModel* solar = nullptr;
  const SpacecraftConfig* sc = nullptr;
  ode::AdaptiveOptions integrator;
};

/// Gauss variational equations in MEE for an orbit-frame acceleration.
Vec6 gve_rates(const Mee& x, const Vec3& a, double mu);

/// Inertial-referenced MRP kinematics and Euler rigid-body equations.
Vec6 attitude_rates_inertial(const Vec3& sigma_bi, const Vec3& omega, const Vec3& torque, const Mat3& J,
                             const Mat3& J_inv);
/// Orbit-referenced MRP kinematics; omega_o is the orbit-frame angular velocity in orbit axes.
Vec3 mrp_rates_orbit_relative(const Vec3& sigma_bo, const Vec3& omega, const Vec3& omega_o);

/// Truth derivative of [MEE, sigma_BI, omega].
Eigen::Matrix<double, 12, 1> truth_rates(const Eigen::Matrix<double, 12, 1>& y, double t, const TruthState& s,
                                         const TruthEnvironment& env);

/// Advances the truth by dt with the actuator channels as set in `s`.
void propagate_truth(TruthState& s, double dt, const TruthEnvironment& env);

/// Filter-model orbit dynamics (no solar terms).
Vec6 orbit_model_rates(const Vec6& x, double t, const GravityModel& g, const AsteroidModel& ast, const Vec3& a_u);

/// Number of RK4 substeps used by the orbit process.
inline constexpr int kOrbitProcessSubsteps = 4;

VecX orbit_process_flow(const VecX& y0, double t0, double dt, const ActuatorChannel& accel,
                        const AsteroidModel& asteroid, int n_orb);

/// Positions of the companion orbit at t0, t0 + dt/2 and t0 + dt.
struct OrbitTrack {
  double t0 = 0.0;
  double dt = 0.0;
  std::array<Vec3, 3> r;
  Mee end;
  Vec3 at(double t) const;
};

OrbitTrack build_orbit_track(const Mee& x0, double t0, double dt, const GravityModel& g, const ActuatorChannel& accel,
                             const AsteroidModel& asteroid);

VecX attitude_process_flow(const VecX& y0, double t0, double dt, const OrbitTrack& track,
                           const ActuatorChannel& torque, const SpacecraftConfig& sc, const AsteroidModel& asteroid,
                           int n_att);

/// Same, with the companion orbit built from the state's own coefficients.
VecX attitude_process_flow(const VecX& y0, double t0, double dt, const Mee& orbit_estimate,
                           const ActuatorChannel& accel, const ActuatorChannel& torque, const SpacecraftConfig& sc,
                           const AsteroidModel& asteroid, int n_att);

/// Derivative of [sigma_BO, omega] for the control model.
/// a_n is the normal perturbing acceleration that drives the orbit-frame roll rate.
Vec6 attitude_bo_rates(const Vec6& x, double t, const Vec3& torque_u, const Mee& orbit, double a_n,
                       const GravityModel& g, const SpacecraftConfig& sc, const Mat3& J_inv, const AsteroidModel& ast);

}  // namespace sbgnc
