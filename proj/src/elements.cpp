#include "sbgnc/elements.hpp"

#include <algorithm>
#include <cmath>

namespace sbgnc {

namespace {

Vec3 f_axis(const Mee& x) {
  const double s2 = x.s2();
  return Vec3(1.0 - x.k * x.k + x.h * x.h, 2.0 * x.h * x.k, -2.0 * x.k) / s2;
}

Vec3 g_axis(const Mee& x) {
  const double s2 = x.s2();
  return Vec3(2.0 * x.h * x.k, 1.0 + x.k * x.k - x.h * x.h, 2.0 * x.h) / s2;
}

}  // namespace

void validate(const Mee& x) {
  if (!x.vec().allFinite()) throw DomainError("MEE state is not finite");
  if (!(x.p > 0.0)) throw DomainError("MEE semi-latus rectum must be positive");
  if (!(x.w() > 0.0)) throw DomainError("MEE state is rectilinear (w <= 0)");
}

Vec3 mee_radial_dir(const Mee& x) {
  return f_axis(x) * std::cos(x.L) + g_axis(x) * std::sin(x.L);
}

Vec3 mee_normal_dir(const Mee& x) {
  return Vec3(2.0 * x.k, -2.0 * x.h, 1.0 - x.h * x.h - x.k * x.k) / x.s2();
}

Vec3 mee_position(const Mee& x) { return x.radius() * mee_radial_dir(x); }

CartesianState mee_to_cartesian(const Mee& x, double mu) {
  validate(x);
  const double cL = std::cos(x.L), sL = std::sin(x.L);
  const Vec3 fa = f_axis(x), ga = g_axis(x);
  const double sq = std::sqrt(mu / x.p);
  CartesianState out;
  out.r = x.radius() * (fa * cL + ga * sL);
  out.v = sq * (-(x.g + sL) * fa + (x.f + cL) * ga);
  return out;
}

Mee cartesian_to_mee(const Vec3& r, const Vec3& v, double mu) {
  if (!r.allFinite() || !v.allFinite()) throw DomainError("cartesian state is not finite");
  const Vec3 hv = r.cross(v);
  const double hn = hv.norm();
  if (!(hn > 0.0)) throw DomainError("zero angular momentum");
  const Vec3 hh = hv / hn;
  if (1.0 + hh.z() < 1e-12) throw DomainError("retrograde equatorial orbit is singular in MEE");
  const Vec3 e = v.cross(hv) / mu - r.normalized();
  if (e.norm() >= 1.0) throw DomainError("orbit is not elliptic (e >= 1)");
  Mee x;
  x.p = hn * hn / mu;
  x.h = -hh.y() / (1.0 + hh.z());
  x.k = hh.x() / (1.0 + hh.z());
  const Vec3 fa = f_axis(x), ga = g_axis(x);
  x.f = e.dot(fa);
  x.g = e.dot(ga);
  x.L = std::atan2(r.dot(ga), r.dot(fa));
  return x;
}

Mee classical_to_mee(const ClassicalElements& c) {
  if (!(c.a > 0.0) || c.e < 0.0 || c.e >= 1.0) throw DomainError("invalid classical elements");
  if (std::abs(c.i - kPi) < 1e-12) throw DomainError("retrograde equatorial orbit is singular in MEE");
  Mee x;
  x.p = c.a * (1.0 - c.e * c.e);
  x.f = c.e * std::cos(c.argp + c.raan);
  x.g = c.e * std::sin(c.argp + c.raan);
  const double t = std::tan(c.i / 2.0);
  x.h = t * std::cos(c.raan);
  x.k = t * std::sin(c.raan);
  x.L = c.raan + c.argp + c.nu;
  return x;
}

ClassicalElements mee_to_classical(const Mee& x) {
  validate(x);
  ClassicalElements c;
  c.e = std::hypot(x.f, x.g);
  if (c.e >= 1.0) throw DomainError("orbit is not elliptic (e >= 1)");
  c.a = x.p / (1.0 - c.e * c.e);
  c.i = 2.0 * std::atan(std::hypot(x.h, x.k));
  c.raan = std::atan2(x.k, x.h);
  const double lp = std::atan2(x.g, x.f);
  c.argp = lp - c.raan;
  c.nu = x.L - lp;
  return c;
}

SphericalCoords cartesian_to_spherical(const Vec3& r) {
  const double n = r.norm();
  if (!(n > 0.0)) throw DomainError("zero radius");
  return {n, std::atan2(r.y(), r.x()), std::asin(std::clamp(r.z() / n, -1.0, 1.0))};
}

SphericalCoords mee_to_spherical(const Mee& x, double rotation_angle) {
  validate(x);
  return cartesian_to_spherical(frame_rot_z(rotation_angle) * mee_position(x));
}

Mat3 rot_orbit_from_inertial(const Mee& x) {
  if (!(x.radius() > 0.0)) throw DomainError("zero radius");
  const Vec3 ir = mee_radial_dir(x);
  const Vec3 kn = mee_normal_dir(x);
  Mat3 R;
  R.row(0) = ir.transpose();
  R.row(1) = kn.cross(ir).transpose();
  R.row(2) = kn.transpose();
  return R;
}

Mat3 rot_asteroid_from_spherical(double lon, double lat) {
  const double cl = std::cos(lon), sl = std::sin(lon);
  const double cp = std::cos(lat), sp = std::sin(lat);
  Mat3 R;
  R.col(0) << cp * cl, cp * sl, sp;
  R.col(1) << -sl, cl, 0.0;
  R.col(2) << -sp * cl, -sp * sl, cp;
  return R;
}

Vec3 orbit_frame_angular_velocity(const Mee& x, double a_n, double mu) {
  const double hm = std::sqrt(mu * x.p);
  const double r = x.radius();
  return Vec3(r * a_n / hm, 0.0, hm / (r * r));
}

Mat3 mrp_to_rotation(const Vec3& sigma) {
  const double s2 = sigma.squaredNorm();
  const Mat3 S = cross(sigma);
  const double d = 1.0 + s2;
  return Mat3::Identity() + (8.0 * S * S - 4.0 * (1.0 - s2) * S) / (d * d);
}

Vec3 rotation_to_mrp(const Mat3& R) {
  // Shepperd: pick the largest quaternion component for the division.
  const double tr = R.trace();
  const Eigen::Vector4d cand(tr, R(0, 0), R(1, 1), R(2, 2));
  int idx = 0;
  cand.maxCoeff(&idx);
  double q0, q1, q2, q3;
  switch (idx) {
    case 0: {
      q0 = 0.5 * std::sqrt(1.0 + tr);
      q1 = (R(1, 2) - R(2, 1)) / (4.0 * q0);
      q2 = (R(2, 0) - R(0, 2)) / (4.0 * q0);
      q3 = (R(0, 1) - R(1, 0)) / (4.0 * q0);
      break;
    }
    case 1: {
      q1 = 0.5 * std::sqrt(1.0 + 2.0 * R(0, 0) - tr);
      q0 = (R(1, 2) - R(2, 1)) / (4.0 * q1);
      q2 = (R(0, 1) + R(1, 0)) / (4.0 * q1);
      q3 = (R(2, 0) + R(0, 2)) / (4.0 * q1);
      break;
    }
    case 2: {
      q2 = 0.5 * std::sqrt(1.0 + 2.0 * R(1, 1) - tr);
      q0 = (R(2, 0) - R(0, 2)) / (4.0 * q2);
      q1 = (R(0, 1) + R(1, 0)) / (4.0 * q2);
      q3 = (R(1, 2) + R(2, 1)) / (4.0 * q2);
      break;
    }
    default: {
      q3 = 0.5 * std::sqrt(1.0 + 2.0 * R(2, 2) - tr);
      q0 = (R(0, 1) - R(1, 0)) / (4.0 * q3);
      q1 = (R(2, 0) + R(0, 2)) / (4.0 * q3);
      q2 = (R(1, 2) + R(2, 1)) / (4.0 * q3);
      break;
    }
  }
  if (q0 < 0.0) {
    q0 = -q0;
    q1 = -q1;
    q2 = -q2;
    q3 = -q3;
  }
  return Vec3(q1, q2, q3) / (1.0 + q0);
}

Vec3 mrp_compose(const Vec3& sigma0, const Vec3& sigma_rot) {
  auto attempt = [](const Vec3& s0, const Vec3& sr, double& den) {
    const double n0 = s0.squaredNorm(), nr = sr.squaredNorm();
    den = 1.0 + n0 * nr - 2.0 * sr.dot(s0);
    return Vec3((1.0 - nr) * s0 + (1.0 - n0) * sr + 2.0 * s0.cross(sr));
  };
  double den = 0.0;
  Vec3 num = attempt(sigma0, sigma_rot, den);
  if (std::abs(den) > 1e-8) return num / den;
  if (sigma_rot.squaredNorm() > 0.0) {
    num = attempt(sigma0, mrp_shadow(sigma_rot), den);
    if (std::abs(den) > 1e-8) return num / den;
  }
  throw NumericalError("singular MRP composition");
}

Vec3 mrp_shadow(const Vec3& sigma) {
  const double n2 = sigma.squaredNorm();
  if (!(n2 > 0.0)) throw DomainError("shadow set of zero MRP is undefined");
  return -sigma / n2;
}

Vec3 mrp_normalize(const Vec3& sigma) {
  return sigma.squaredNorm() > 1.0 ? mrp_shadow(sigma) : sigma;
}

Mat3 mrp_kinematics(const Vec3& s) {
  const double s2 = s.squaredNorm();
  return (1.0 - s2) * Mat3::Identity() + 2.0 * cross(s) + 2.0 * s * s.transpose();
}

Mat3 rotation_from_euler(const EulerAngles& e) {
  return frame_rot_z(e.pitch) * frame_rot_y(e.roll) * frame_rot_x(e.yaw);
}

EulerAngles euler_angles_from_mrp(const Vec3& sigma_bo) {
  const Mat3 R = mrp_to_rotation(sigma_bo);
  const double c2 = std::hypot(R(0, 0), R(1, 0));
  if (c2 < 1e-9) throw DomainError("Euler sequence is at gimbal lock");
  EulerAngles e;
  e.roll = std::atan2(R(2, 0), c2);
  e.yaw = std::atan2(-R(2, 1), R(2, 2));
  e.pitch = std::atan2(-R(1, 0), R(0, 0));
  return e;
}

double wrap_two_pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

}  // namespace sbgnc
