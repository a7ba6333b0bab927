#pragma once

#include "sbgnc/core.hpp"

namespace sbgnc {

/// Modified equinoctial elements. p in metres, L in radians (unwrapped).
struct Mee {
  double p = 0.0;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  double k = 0.0;
  double L = 0.0;

  Vec6 vec() const {
    Vec6 v;
    v << p, f, g, h, k, L;
    return v;
  }
  static Mee from(const Eigen::Ref<const Vec6>& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }

  double w() const { return 1.0 + f * std::cos(L) + g * std::sin(L); }
  double s2() const { return 1.0 + h * h + k * k; }
  double radius() const { return p / w(); }
};

struct ClassicalElements {
  double a = 0.0;
  double e = 0.0;
  double i = 0.0;
  double raan = 0.0;
  double argp = 0.0;
  double nu = 0.0;
};

struct SphericalCoords {
  double r = 0.0;
  double lon = 0.0;
  double lat = 0.0;
};

struct CartesianState {
  Vec3 r;
  Vec3 v;
};

void validate(const Mee& x);

CartesianState mee_to_cartesian(const Mee& x, double mu);
Mee cartesian_to_mee(const Vec3& r, const Vec3& v, double mu);

Mee classical_to_mee(const ClassicalElements& c);
ClassicalElements mee_to_classical(const Mee& x);

/// Inertial position only; independent of mu.
Vec3 mee_position(const Mee& x);

/// Radial and angular-momentum unit vectors of the orbit frame, in inertial axes.
Vec3 mee_radial_dir(const Mee& x);
Vec3 mee_normal_dir(const Mee& x);

/// Asteroid-fixed spherical coordinates; the asteroid frame is the inertial
/// frame rotated about z by `rotation_angle`.
SphericalCoords mee_to_spherical(const Mee& x, double rotation_angle);
SphericalCoords cartesian_to_spherical(const Vec3& r);

/// R^O_I: rows are radial, transverse and normal unit vectors.
Mat3 rot_orbit_from_inertial(const Mee& x);

/// R^A_S: columns are the local up, east and north unit vectors.
Mat3 rot_asteroid_from_spherical(double lon, double lat);

/// Angular velocity of the orbit frame w.r.t. inertial, in orbit-frame axes.
Vec3 orbit_frame_angular_velocity(const Mee& x, double a_n, double mu);

// Modified Rodrigues parameters. Rotation matrices are passive (frame) DCMs.
Mat3 mrp_to_rotation(const Vec3& sigma);
Vec3 rotation_to_mrp(const Mat3& R);
Vec3 mrp_compose(const Vec3& sigma0, const Vec3& sigma_rot);
Vec3 mrp_shadow(const Vec3& sigma);
Vec3 mrp_normalize(const Vec3& sigma);

/// Kinematic matrix with sigma_dot = 0.25 * mrp_kinematics(sigma) * omega.
Mat3 mrp_kinematics(const Vec3& sigma);

struct EulerAngles {
  double pitch = 0.0;  // about z, applied last
  double roll = 0.0;   // about y
  double yaw = 0.0;    // about x, applied first
};

EulerAngles euler_angles_from_mrp(const Vec3& sigma_bo);
Mat3 rotation_from_euler(const EulerAngles& e);

double wrap_two_pi(double angle);

}  // namespace sbgnc
