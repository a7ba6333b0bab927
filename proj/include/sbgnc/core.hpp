#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sbgnc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kDeg = kPi / 180.0;
inline constexpr double kArcsec = kDeg / 3600.0;
inline constexpr double kAu = 1.495978707e11;  // m

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input to a pure function (non-finite values, violated preconditions).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (factorization, integrator, solver).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or data file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Skew-symmetric cross-product matrix: cross(v) * w == v.cross(w).
inline Mat3 cross(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Passive (frame) rotation about the z axis by `angle`.
inline Mat3 frame_rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, s, 0.0,
       -s, c, 0.0,
       0.0, 0.0, 1.0;
  return m;
}

inline Mat3 frame_rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, 0.0, -s,
       0.0, 1.0, 0.0,
       s, 0.0, c;
  return m;
}

inline Mat3 frame_rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << 1.0, 0.0, 0.0,
       0.0, c, s,
       0.0, -s, c;
  return m;
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace sbgnc
