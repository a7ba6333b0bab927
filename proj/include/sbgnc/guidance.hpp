#pragma once

#include <vector>

#include "sbgnc/elements.hpp"
#include "sbgnc/gravity.hpp"

namespace sbgnc {

/// Closed circular reference orbit with harmonics cancellation in the orbital plane.
class OrbitReference {
 public:
  OrbitReference() = default;

  double t0() const { return t0_; }
  double t_end() const { return t0_ + h_ * (static_cast<double>(x_.size()) - 1.0); }
  double target_radius() const { return a_; }

  /// Cubic Hermite interpolation of the reference state and its rate.
  Vec6 state(double t) const;
  Vec6 rate(double t) const;
  /// Reference control (orbit frame), linear between nodes.
  Vec3 control(double t) const;
  /// Normal component of the estimated harmonics acceleration along the reference.
  double normal_accel(double t) const;
  /// Average reference control over [a, b] by composite Simpson on the node grid.
  Vec3 average_control(double a, double b) const;

  const std::vector<Vec6>& nodes() const { return x_; }
  double node_step() const { return h_; }

  friend OrbitReference orbit_reference(const Mee& start, const GravityModel& gravity, double a_target,
                                        double t0, double horizon, int N, const AsteroidModel& asteroid,
                                        int nodes_per_interval);

 private:
  std::size_t locate(double t, double& s) const;

  double t0_ = 0.0;
  double h_ = 1.0;
  double a_ = 0.0;
  std::vector<Vec6> x_;
  std::vector<Vec6> xd_;
  std::vector<Vec3> u_;
  std::vector<double> an_;
};

/// Hand-off of (h, k, L) from `start`, with p = a_target and f = g = 0 frozen.
OrbitReference orbit_reference(const Mee& start, const GravityModel& gravity, double a_target, double t0,
                               double horizon, int N, const AsteroidModel& asteroid, int nodes_per_interval = 10);

/// Rates of the frozen reference: only h, k and L evolve.
Vec6 reference_rates(const Vec6& x, const Vec3& a_grav_orbit, double mu);

struct AttitudeReference {
  const OrbitReference* orbit = nullptr;
  Vec3 sigma_bo = Vec3::Zero();
  double mu = 0.0;

  /// [sigma_bar, R(sigma_bar) omega_O(x_bar(t))].
  Vec6 state(double t) const;
  /// Time derivative of state(t) by central differences on the orbit interpolant.
  Vec6 rate(double t) const;
};

AttitudeReference attitude_reference(const OrbitReference& orbit_ref, const Vec3& sigma_bo, double mu);

}  // namespace sbgnc
