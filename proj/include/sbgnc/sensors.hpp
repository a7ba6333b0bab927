#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sbgnc/core.hpp"
#include "sbgnc/dynamics.hpp"
#include "sbgnc/elements.hpp"
#include "sbgnc/gravity.hpp"

namespace sbgnc {

struct Landmark {
  int id = 0;
  Vec3 r_a;  // asteroid frame, m
};

using LandmarkCatalog = std::vector<Landmark>;

struct CameraModel {
  double focal = 0.3;            // m
  int resolution = 2048;         // pixels per side
  double fov = 30.0 * kDeg;      // full angle
  Mat3 R_cb = (Mat3() << 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0).finished();

  double pixel_width() const { return 2.0 * focal * std::tan(0.5 * fov) / resolution; }
};

struct SensorSuite {
  CameraModel camera;
  double pixel_sigma = 0.5;               // px
  double range_sigma = 5.0;               // m
  double star_sigma = 10.0 * kArcsec;     // rad on the rotation angle
  Vec3 gyro_bias = Vec3::Constant(5.0 * kDeg / 3600.0);
  double gyro_sigma = 0.05 * kDeg / 3600.0;  // rad/s per axis
  int q_max = 3;
  bool quantization_noise = true;
};

/// Independent random streams for one spacecraft's sensors.
struct SensorRng {
  std::mt19937_64 camera;
  std::mt19937_64 attitude;

  SensorRng(std::uint64_t seed, std::uint64_t sat);
};

struct LandmarkPixel {
  int px = 0;
  int py = 0;
  double range = 0.0;
};

/// Camera-frame line of sight from the spacecraft to the landmark.
Vec3 camera_line_of_sight(const Landmark& lmk, const Vec3& r_sc, const Mat3& R_bi, const CameraModel& cam,
                          double rotation_angle);

std::vector<int> select_landmarks(const LandmarkCatalog& catalog, const Mee& x, const Vec3& sigma_bi,
                                  const CameraModel& cam, int q_max, double t, const AsteroidModel& asteroid);

LandmarkPixel camera_project(const Landmark& lmk, const Mee& x, const Vec3& sigma_bi, const CameraModel& cam, double t,
                             const AsteroidModel& asteroid);

/// Pixels (x, y) and range per landmark; pixels are integers.
VecX simulate_orbit_measurement(const TruthState& truth, const LandmarkCatalog& catalog, const std::vector<int>& ids,
                                const SensorSuite& suite, const AsteroidModel& asteroid, std::mt19937_64& rng);

/// [sigma_star, omega_gyro].
Vec6 simulate_attitude_measurement(const TruthState& truth, const SensorSuite& suite, std::mt19937_64& rng);

/// Noiseless, unquantized prediction with the same layout as the simulated measurement.
VecX orbit_measurement_fn(const VecX& y_orb, const Vec3& sigma_bi, const LandmarkCatalog& catalog,
                          const std::vector<int>& ids, const CameraModel& cam, double t, const AsteroidModel& asteroid);

Vec6 attitude_measurement_fn(const VecX& y_att, int n_att);

/// Shifts integer pixel readings to the pixel centres.
VecX pixel_centres(const VecX& z);

MatX orbit_measurement_noise(const SensorSuite& suite, int n_landmarks);
Mat6 attitude_measurement_noise(const SensorSuite& suite, const Vec3& sigma_prior);

/// Number of predictions clamped because a landmark fell behind the image plane.
std::uint64_t behind_plane_clamps();

const Landmark& find_landmark(const LandmarkCatalog& catalog, int id);

}  // namespace sbgnc
