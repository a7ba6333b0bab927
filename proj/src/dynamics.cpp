#include "sbgnc/dynamics.hpp"

#include <cmath>

namespace sbgnc {

void SpacecraftConfig::validate() const {
  if (!(mass > 0.0) || !(area >= 0.0) || !(a_max > 0.0) || !(t_max > 0.0) || !(tau > 0.0) || !(isp > 0.0)) {
    throw ConfigError("spacecraft parameters must be positive");
  }
  if (!J.isApprox(J.transpose(), 1e-12)) throw ConfigError("inertia matrix is not symmetric");
  Eigen::LLT<Mat3> llt(J);
  if (llt.info() != Eigen::Success) throw ConfigError("inertia matrix is not positive definite");
  validate_masses(masses);
  const Mat3 Jm = inertia_from_masses(masses);
  if ((Jm - J).norm() > 1e-6 * J.norm()) throw ConfigError("inertia matrix inconsistent with mass distribution");
}

Vec6 gve_rates(const Mee& x, const Vec3& a, double mu) {
  const double cL = std::cos(x.L), sL = std::sin(x.L);
  const double w = 1.0 + x.f * cL + x.g * sL;
  if (!(w > 0.0)) throw DomainError("rectilinear MEE state in GVE");
  const double q = std::sqrt(x.p / mu);
  const double s2 = x.s2();
  const double ar = a.x(), at = a.y(), an = a.z();
  const double hk = x.h * sL - x.k * cL;
  Vec6 d;
  d[0] = 2.0 * x.p / w * q * at;
  d[1] = q * (ar * sL + ((w + 1.0) * cL + x.f) * at / w - hk * x.g * an / w);
  d[2] = q * (-ar * cL + ((w + 1.0) * sL + x.g) * at / w + hk * x.f * an / w);
  d[3] = q * s2 * cL * an / (2.0 * w);
  d[4] = q * s2 * sL * an / (2.0 * w);
  d[5] = std::sqrt(mu * x.p) * (w / x.p) * (w / x.p) + q * hk * an / w;
  return d;
}

Vec6 attitude_rates_inertial(const Vec3& sigma_bi, const Vec3& omega, const Vec3& torque, const Mat3& J,
                             const Mat3& J_inv) {
  Vec6 d;
  d.head<3>() = 0.25 * mrp_kinematics(sigma_bi) * omega;
  d.tail<3>() = J_inv * (torque - omega.cross(J * omega));
  return d;
}

Vec3 mrp_rates_orbit_relative(const Vec3& sigma_bo, const Vec3& omega, const Vec3& omega_o) {
  return 0.25 * mrp_kinematics(sigma_bo) * (omega - mrp_to_rotation(sigma_bo) * omega_o);
}

Eigen::Matrix<double, 12, 1> truth_rates(const Eigen::Matrix<double, 12, 1>& y, double t, const TruthState& s,
                                         const TruthEnvironment& env) {
  const AsteroidModel& ast = *env.asteroid;
  const SpacecraftConfig& sc = *env.sc;
  const Mee x = Mee::from(y.head<6>());
  const Vec3 sigma = y.segment<3>(6);
  const Vec3 omega = y.segment<3>(9);

  const Vec3 r = mee_position(x);
  const double angle = ast.rotation_angle(t);
  Vec3 a_i = harmonics_accel_inertial(ast.gravity, r, angle);
  a_i += sun_third_body_inertial(r, *env.solar);
  a_i += srp_accel_inertial(r, *env.solar, sc.c_r, sc.area, sc.mass);
  const Vec3 a_o = rot_orbit_from_inertial(x) * a_i + s.accel.at(t);

  const Mat3 R_bi = mrp_to_rotation(sigma);
  const Vec3 torque = gravity_gradient_torque_inertial(ast.gravity, sc.masses, r, R_bi, angle) + s.torque.at(t);

  Eigen::Matrix<double, 12, 1> d;
  d.head<6>() = gve_rates(x, a_o, ast.gravity.mu());
  d.segment<3>(6) = 0.25 * mrp_kinematics(sigma) * omega;
  d.segment<3>(9) = sc.J.ldlt().solve(torque - omega.cross(sc.J * omega));
  return d;
}

void propagate_truth(TruthState& s, double dt, const TruthEnvironment& env) {
  if (!(dt > 0.0)) throw DomainError("truth step must be positive");
  using V12 = Eigen::Matrix<double, 12, 1>;
  V12 y;
  y << s.orbit.vec(), s.sigma_bi, s.omega;
  auto f = [&](const V12& yy, double t) { return truth_rates(yy, t, s, env); };
  ode::dopri5(f, y, s.t, s.t + dt, env.integrator);
  s.orbit = Mee::from(y.head<6>());
  s.sigma_bi = mrp_normalize(y.segment<3>(6));
  s.omega = y.segment<3>(9);
  s.t += dt;
}

Vec6 orbit_model_rates(const Vec6& x, double t, const GravityModel& g, const AsteroidModel& ast, const Vec3& a_u) {
  const Mee m = Mee::from(x);
  const Vec3 a = rot_orbit_from_inertial(m) * harmonics_accel_inertial(g, mee_position(m), ast.rotation_angle(t));
  return gve_rates(m, a + a_u, g.mu());
}

VecX orbit_process_flow(const VecX& y0, double t0, double dt, const ActuatorChannel& accel,
                        const AsteroidModel& asteroid, int n_orb) {
  if (y0.size() != 6 + gravity_param_count(n_orb)) throw DomainError("orbit extended state size mismatch");
  const GravityModel g = GravityModel::from_params(asteroid.gravity.mu(), asteroid.gravity.re(),
                                                   y0.tail(gravity_param_count(n_orb)), n_orb);
  Vec6 x = y0.head<6>();
  auto f = [&](const Vec6& s, double t) { return orbit_model_rates(s, t, g, asteroid, accel.at(t)); };
  ode::rk4(f, x, t0, t0 + dt, kOrbitProcessSubsteps);
  VecX y = y0;
  y.head<6>() = x;
  return y;
}

Vec3 OrbitTrack::at(double t) const {
  const long i = std::lround((t - t0) / (0.5 * dt));
  return r[static_cast<std::size_t>(std::clamp(i, 0L, 2L))];
}

OrbitTrack build_orbit_track(const Mee& x0, double t0, double dt, const GravityModel& g, const ActuatorChannel& accel,
                             const AsteroidModel& asteroid) {
  OrbitTrack tr;
  tr.t0 = t0;
  tr.dt = dt;
  Vec6 x = x0.vec();
  tr.r[0] = mee_position(x0);
  auto f = [&](const Vec6& s, double t) { return orbit_model_rates(s, t, g, asteroid, accel.at(t)); };
  ode::rk4(f, x, t0, t0 + 0.5 * dt, 1);
  tr.r[1] = mee_position(Mee::from(x));
  ode::rk4(f, x, t0 + 0.5 * dt, t0 + dt, 1);
  tr.end = Mee::from(x);
  tr.r[2] = mee_position(tr.end);
  return tr;
}

VecX attitude_process_flow(const VecX& y0, double t0, double dt, const OrbitTrack& track,
                           const ActuatorChannel& torque, const SpacecraftConfig& sc, const AsteroidModel& asteroid,
                           int n_att) {
  const int np = gravity_param_count(n_att);
  if (y0.size() != 9 + np) throw DomainError("attitude extended state size mismatch");
  const GravityModel g = GravityModel::from_params(asteroid.gravity.mu(), asteroid.gravity.re(), y0.segment(6, np), n_att);
  const Mat3 J_inv = sc.J.inverse();
  Vec6 x = y0.head<6>();
  auto f = [&](const Vec6& s, double t) {
    const Vec3 sigma = s.head<3>();
    const Vec3 tq = gravity_gradient_torque_inertial(g, sc.masses, track.at(t), mrp_to_rotation(sigma),
                                                     asteroid.rotation_angle(t)) +
                    torque.at(t);
    return attitude_rates_inertial(sigma, s.tail<3>(), tq, sc.J, J_inv);
  };
  ode::rk4(f, x, t0, t0 + dt, 1);
  VecX y = y0;
  y.head<6>() = x;
  return y;
}

VecX attitude_process_flow(const VecX& y0, double t0, double dt, const Mee& orbit_estimate,
                           const ActuatorChannel& accel, const ActuatorChannel& torque, const SpacecraftConfig& sc,
                           const AsteroidModel& asteroid, int n_att) {
  const int np = gravity_param_count(n_att);
  if (y0.size() != 9 + np) throw DomainError("attitude extended state size mismatch");
  const GravityModel g = GravityModel::from_params(asteroid.gravity.mu(), asteroid.gravity.re(), y0.segment(6, np), n_att);
  const OrbitTrack tr = build_orbit_track(orbit_estimate, t0, dt, g, accel, asteroid);
  return attitude_process_flow(y0, t0, dt, tr, torque, sc, asteroid, n_att);
}

Vec6 attitude_bo_rates(const Vec6& x, double t, const Vec3& torque_u, const Mee& orbit, double a_n,
                       const GravityModel& g, const SpacecraftConfig& sc, const Mat3& J_inv, const AsteroidModel& ast) {
  const Vec3 sigma = x.head<3>();
  const Vec3 omega = x.tail<3>();
  const Mat3 R_oi = rot_orbit_from_inertial(orbit);
  const Vec3 r = mee_position(orbit);
  const double angle = ast.rotation_angle(t);
  const Vec3 w_o = orbit_frame_angular_velocity(orbit, a_n, g.mu());
  const Mat3 R_bo = mrp_to_rotation(sigma);
  const Vec3 tq = gravity_gradient_torque_inertial(g, sc.masses, r, R_bo * R_oi, angle) + torque_u;
  Vec6 d;
  d.head<3>() = 0.25 * mrp_kinematics(sigma) * (omega - R_bo * w_o);
  d.tail<3>() = J_inv * (tq - omega.cross(sc.J * omega));
  return d;
}

}  // namespace sbgnc
