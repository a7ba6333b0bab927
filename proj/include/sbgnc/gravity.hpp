#pragma once

#include <atomic>
#include <cstdint>
#include <random>
#include <vector>

#include "sbgnc/core.hpp"
#include "sbgnc/elements.hpp"

namespace sbgnc {

inline constexpr int kMaxGravityDegree = 30;

/// Number of (C, S) parameters of degrees 2..n in the filter layout.
constexpr int gravity_param_count(int n) { return n < 2 ? 0 : (n + 1) * (n + 1) - 4; }

/// Fully normalized (4 pi, no Condon-Shortley phase) spherical-harmonics field.
class GravityModel {
 public:
  GravityModel() = default;
  GravityModel(double mu, double re, int degree);

  double mu() const { return mu_; }
  double re() const { return re_; }
  int degree() const { return degree_; }

  double C(int i, int j) const { return c_[index(i, j)]; }
  double S(int i, int j) const { return s_[index(i, j)]; }
  void set_C(int i, int j, double v);
  void set_S(int i, int j, double v);

  /// Parameter vector for degrees 2..n, ordered per degree as
  /// C_i0..C_ii then S_i1..S_ii.
  VecX params(int n) const;
  void set_params(const Eigen::Ref<const VecX>& v, int n);
  static GravityModel from_params(double mu, double re, const Eigen::Ref<const VecX>& v, int n);

  /// Copy truncated (or zero-extended) to degree n.
  GravityModel truncated(int n) const;

  bool all_zero() const;

 private:
  static int index(int i, int j) { return i * (i + 1) / 2 + j; }
  void check(int i, int j) const;

  double mu_ = 0.0;
  double re_ = 1.0;
  int degree_ = 0;
  std::vector<double> c_{0.0};
  std::vector<double> s_{0.0};
};

/// Position of (i, j) coefficients inside the parameter vector.
int gravity_param_index_C(int i, int j);
int gravity_param_index_S(int i, int j);

struct AsteroidModel {
  GravityModel gravity;
  double spin_rate = 0.0;    // rad/s
  double epoch_angle = 0.0;  // rad

  double rotation_angle(double t) const { return spin_rate * t + epoch_angle; }
  /// R^I_A at time t.
  Mat3 inertial_from_asteroid(double t) const { return frame_rot_z(rotation_angle(t)).transpose(); }
};

struct SolarModel {
  double mu_sun = 1.3271244e20;                 // m^3/s^2
  Vec3 r_sun = Vec3(1.46 * kAu, 0.0, 0.0);       // m, asteroid-centred inertial
  double p_1au = 4.5e-6;                         // Pa
  double r_1au = kAu;                            // m
  bool enabled = true;
};

struct PointMass {
  Vec3 offset;  // body frame, m
  double mass = 0.0;
};

using MassDistribution = std::vector<PointMass>;

void validate_masses(const MassDistribution& masses);
Mat3 inertia_from_masses(const MassDistribution& masses);

struct LegendreTable {
  int n_max = 0;
  // Scaled values Pt = Pbar / cos(lat)^m and their x-derivatives.
  std::vector<double> pt;
  std::vector<double> dpt;
  double x = 0.0;
  double c = 1.0;

  static int index(int n, int m) { return n * (n + 1) / 2 + m; }
  double pbar(int n, int m) const;
  double dpbar(int n, int m) const;  // d Pbar / dx, infinite limit at the poles for m = 1
};

LegendreTable legendre_normalized(int n_max, double x);

/// Non-Keplerian harmonics acceleration in (radial, east, north) axes.
Vec3 harmonics_accel_spherical(const GravityModel& model, const SphericalCoords& s);
/// Same, in inertial axes, for inertial position r and asteroid rotation angle.
Vec3 harmonics_accel_inertial(const GravityModel& model, const Vec3& r, double rotation_angle);
/// Harmonics acceleration projected into the orbit frame.
Vec3 gravity_accel_orbit_frame(const GravityModel& model, const Mee& x, double t, const AsteroidModel& asteroid);

/// Potential of degrees >= 2 (no central term).
double harmonics_potential(const GravityModel& model, const SphericalCoords& s);

Vec3 sun_third_body_inertial(const Vec3& r, const SolarModel& solar);
Vec3 sun_third_body(const Mee& x, const SolarModel& solar);
Vec3 srp_accel_inertial(const Vec3& r, const SolarModel& solar, double c_r, double area, double mass);
Vec3 srp_accel(const Mee& x, const SolarModel& solar, double c_r, double area, double mass);

/// Gravity-gradient torque in body axes; R_bi is R^B_I.
Vec3 gravity_gradient_torque_inertial(const GravityModel& model, const MassDistribution& masses, const Vec3& r,
                                      const Mat3& R_bi, double rotation_angle);
Vec3 gravity_gradient_torque(const GravityModel& model, const MassDistribution& masses, const Mee& x,
                             const Vec3& sigma_bo, double t, const AsteroidModel& asteroid);

/// Count of evaluations performed inside the normalization sphere.
std::uint64_t brillouin_violations();
void reset_brillouin_violations();

/// Degree-4 field with Eros-scale coefficient magnitudes.
GravityModel eros_like_gravity(double mu, double re);
/// Random field with coefficient scale `scale`/i^2 per degree.
GravityModel random_gravity(double mu, double re, int degree, double scale, std::mt19937_64& rng);

}  // namespace sbgnc
