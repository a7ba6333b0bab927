#include "sbgnc/navfilters.hpp"

namespace sbgnc {

GravityModel OrbitFilter::gravity(const AsteroidModel& ast) const {
  return GravityModel::from_params(ast.gravity.mu(), ast.gravity.re(), gravity_params(), n_orb);
}

GravityModel AttitudeFilter::gravity(const AsteroidModel& ast) const {
  return GravityModel::from_params(ast.gravity.mu(), ast.gravity.re(), gravity_params(), n_att);
}

OrbitFilter make_orbit_filter(const Mee& x0, const VecX& gravity0, int n_orb, const InitialUncertainty& u) {
  const int np = gravity_param_count(n_orb);
  if (gravity0.size() != np) throw DomainError("initial gravity estimate size mismatch");
  OrbitFilter f;
  f.n_orb = n_orb;
  f.est.mean.resize(6 + np);
  f.est.mean << x0.vec(), gravity0;
  VecX d(6 + np);
  d[0] = u.p * u.p;
  d.segment<5>(1).setConstant(u.elements * u.elements);
  d.tail(np).setConstant(u.gravity * u.gravity);
  f.est.cov = d.asDiagonal();
  f.Qy = MatX::Zero(6 + np, 6 + np);
  return f;
}

AttitudeFilter make_attitude_filter(const Vec3& sigma_bi, const Vec3& omega, const VecX& gravity0, const Vec3& bias0,
                                    int n_att, const InitialUncertainty& u) {
  const int np = gravity_param_count(n_att);
  if (gravity0.size() != np) throw DomainError("initial gravity estimate size mismatch");
  AttitudeFilter f;
  f.n_att = n_att;
  const int n = 9 + np;
  f.est.mean.resize(n);
  f.est.mean << sigma_bi, omega, gravity0, bias0;
  VecX d(n);
  d.head<3>().setConstant(u.sigma * u.sigma);
  d.segment<3>(3).setConstant(u.omega * u.omega);
  d.segment(6, np).setConstant(u.gravity * u.gravity);
  d.tail<3>().setConstant(u.gyro_bias * u.gyro_bias);
  f.est.cov = d.asDiagonal();
  f.Qy = MatX::Zero(n, n);
  return f;
}

FilterStepInfo orbit_filter_step(OrbitFilter& f, const VecX& z_pixels, const std::vector<int>& ids,
                                 const Vec3& sigma_bi, const ActuatorChannel& accel, double t0, double dt,
                                 const LandmarkCatalog& catalog, const SensorSuite& suite,
                                 const AsteroidModel& asteroid, const UkfParams& params) {
  const int n_orb = f.n_orb;
  auto g = [&](const VecX& y) { return orbit_process_flow(y, t0, dt, accel, asteroid, n_orb); };
  FilterStepInfo info;
  if (ids.empty()) {
    f.est = ukf_predict(g, f.est, f.Qy, params).prior;
    return info;
  }
  if (z_pixels.size() != 3 * static_cast<Eigen::Index>(ids.size())) throw DomainError("orbit measurement size mismatch");
  const double t1 = t0 + dt;
  auto h = [&](const VecX& y) {
    return orbit_measurement_fn(y, sigma_bi, catalog, ids, suite.camera, t1, asteroid);
  };
  const MatX Qz = orbit_measurement_noise(suite, static_cast<int>(ids.size()));
  UkfResult r = ukf_step(g, h, f.est, pixel_centres(z_pixels), f.Qy, Qz, params);
  f.est = std::move(r.posterior);
  f.Qy = std::move(r.Qy_hat);
  info.updated = true;
  info.innovation = std::move(r.innovation);
  return info;
}

void switch_attitude_shadow(GaussianState& g) {
  const Vec3 s = g.mean.head<3>();
  const double n2 = s.squaredNorm();
  if (n2 <= 1.0) return;
  const Mat3 J = -(Mat3::Identity() * n2 - 2.0 * s * s.transpose()) / (n2 * n2);
  g.mean.head<3>() = -s / n2;
  const Eigen::Index n = g.mean.size();
  MatX T = MatX::Identity(n, n);
  T.topLeftCorner<3, 3>() = J;
  g.cov = T * g.cov * T.transpose();
  g.cov = 0.5 * (g.cov + g.cov.transpose()).eval();
}

FilterStepInfo attitude_filter_step(AttitudeFilter& f, const Vec6& z_att, const OrbitTrack& track,
                                    const ActuatorChannel& torque, double t0, double dt, const SpacecraftConfig& sc,
                                    const SensorSuite& suite, const AsteroidModel& asteroid, const UkfParams& params) {
  const int n_att = f.n_att;
  auto g = [&](const VecX& y) { return attitude_process_flow(y, t0, dt, track, torque, sc, asteroid, n_att); };
  auto h = [&](const VecX& y) { return VecX(attitude_measurement_fn(y, n_att)); };
  auto innov = [](const VecX& z, const VecX& z_hat) {
    VecX zz = z;
    const Vec3 s = z.head<3>();
    if (s.squaredNorm() > 0.0) {
      const Vec3 sh = mrp_shadow(s);
      if ((sh - z_hat.head<3>()).norm() < (s - z_hat.head<3>()).norm()) zz.head<3>() = sh;
    }
    return VecX(zz - z_hat);
  };
  const MatX Qz = attitude_measurement_noise(suite, f.sigma_bi());
  UkfResult r = ukf_step(g, h, f.est, VecX(z_att), f.Qy, Qz, params, innov);
  f.est = std::move(r.posterior);
  f.Qy = std::move(r.Qy_hat);
  switch_attitude_shadow(f.est);
  FilterStepInfo info;
  info.updated = true;
  info.innovation = std::move(r.innovation);
  return info;
}

Vec3 mrp_orbit_from_inertial(const Mee& x) { return rotation_to_mrp(rot_orbit_from_inertial(x)); }

Vec3 reconstruct_body_orbit(const Vec3& sigma_bi, const Mee& x) {
  return mrp_normalize(mrp_compose(-mrp_orbit_from_inertial(x), sigma_bi));
}

Vec3 body_inertial_from_orbit(const Vec3& sigma_bo, const Mee& x) {
  return mrp_normalize(mrp_compose(mrp_orbit_from_inertial(x), sigma_bo));
}

}  // namespace sbgnc
