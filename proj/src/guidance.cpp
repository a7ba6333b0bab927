#include "sbgnc/guidance.hpp"

#include <cmath>

#include "sbgnc/dynamics.hpp"

namespace sbgnc {

Vec6 reference_rates(const Vec6& x, const Vec3& a_grav_orbit, double mu) {
  return gve_rates(Mee::from(x), Vec3(0.0, 0.0, a_grav_orbit.z()), mu);
}

OrbitReference orbit_reference(const Mee& start, const GravityModel& gravity, double a_target, double t0,
                               double horizon, int N, const AsteroidModel& asteroid, int nodes_per_interval) {
  if (!(a_target > 0.0) || !(horizon > 0.0) || N < 1 || nodes_per_interval < 1) {
    throw DomainError("invalid orbit reference request");
  }
  OrbitReference ref;
  ref.t0_ = t0;
  ref.a_ = a_target;
  const int n_nodes = N * nodes_per_interval;
  ref.h_ = horizon / n_nodes;

  auto accel = [&](const Vec6& x, double t) {
    const Mee m = Mee::from(x);
    return Vec3(rot_orbit_from_inertial(m) *
                harmonics_accel_inertial(gravity, mee_position(m), asteroid.rotation_angle(t)));
  };
  auto f = [&](const Vec6& x, double t) { return reference_rates(x, accel(x, t), gravity.mu()); };

  Vec6 x;
  x << a_target, 0.0, 0.0, start.h, start.k, start.L;
  ref.x_.reserve(n_nodes + 1);
  for (int i = 0; i <= n_nodes; ++i) {
    const double t = t0 + i * ref.h_;
    if (i > 0) ode::rk4(f, x, t - ref.h_, t, 1);
    const Vec3 a = accel(x, t);
    ref.x_.push_back(x);
    ref.xd_.push_back(reference_rates(x, a, gravity.mu()));
    ref.u_.push_back(Vec3(-a.x(), -a.y(), 0.0));
    ref.an_.push_back(a.z());
  }
  return ref;
}

std::size_t OrbitReference::locate(double t, double& s) const {
  if (x_.empty()) throw DomainError("empty orbit reference");
  const double u = (t - t0_) / h_;
  const double last = static_cast<double>(x_.size() - 1);
  if (u < -1e-9 || u > last + 1e-9) throw DomainError("time outside the orbit reference horizon");
  const double uc = std::clamp(u, 0.0, last);
  std::size_t i = static_cast<std::size_t>(std::floor(uc));
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  s = uc - static_cast<double>(i);
  return i;
}

Vec6 OrbitReference::state(double t) const {
  double s;
  const std::size_t i = locate(t, s);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * x_[i] + h10 * h_ * xd_[i] + h01 * x_[i + 1] + h11 * h_ * xd_[i + 1];
}

Vec6 OrbitReference::rate(double t) const {
  double s;
  const std::size_t i = locate(t, s);
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return (d00 * x_[i] + d01 * x_[i + 1]) / h_ + d10 * xd_[i] + d11 * xd_[i + 1];
}

Vec3 OrbitReference::control(double t) const {
  double s;
  const std::size_t i = locate(t, s);
  return (1.0 - s) * u_[i] + s * u_[i + 1];
}

double OrbitReference::normal_accel(double t) const {
  double s;
  const std::size_t i = locate(t, s);
  return (1.0 - s) * an_[i] + s * an_[i + 1];
}

Vec3 OrbitReference::average_control(double a, double b) const {
  if (!(b > a)) throw DomainError("empty averaging interval");
  int m = static_cast<int>(std::ceil((b - a) / h_ - 1e-9));
  if (m % 2) ++m;
  m = std::max(m, 2);
  const double dh = (b - a) / m;
  Vec3 sum = control(a) + control(b);
  for (int j = 1; j < m; ++j) sum += (j % 2 ? 4.0 : 2.0) * control(a + j * dh);
  return sum * dh / 3.0 / (b - a);
}

Vec6 AttitudeReference::state(double t) const {
  const Mee x = Mee::from(orbit->state(t));
  const Vec3 w_o = orbit_frame_angular_velocity(x, orbit->normal_accel(t), mu);
  Vec6 s;
  s << sigma_bo, mrp_to_rotation(sigma_bo) * w_o;
  return s;
}

Vec6 AttitudeReference::rate(double t) const {
  const double d = 0.5;
  const double lo = std::max(orbit->t0(), t - d), hi = std::min(orbit->t_end(), t + d);
  return (state(hi) - state(lo)) / (hi - lo);
}

AttitudeReference attitude_reference(const OrbitReference& orbit_ref, const Vec3& sigma_bo, double mu) {
  return {&orbit_ref, sigma_bo, mu};
}

}  // namespace sbgnc
