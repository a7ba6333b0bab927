#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sbgnc/sensors.hpp"

using namespace sbgnc;

namespace {

constexpr double kMu = 4.4628e5;

struct Geometry {
  AsteroidModel ast{GravityModel(kMu, 16000.0, 0), 3.3e-4, 0.4};
  Mee x = classical_to_mee({34000.0, 0.0, 1.3, 0.5, 0.0, 0.8});
  double t = 1234.0;
  Vec3 sigma_bi;
  CameraModel cam;

  Geometry() {
    // Nadir pointing: body axes equal orbit axes.
    sigma_bi = rotation_to_mrp(rot_orbit_from_inertial(x));
  }
  Mat3 R_bi() const { return mrp_to_rotation(sigma_bi); }
  // Landmark whose camera-frame line of sight is rho_c.
  Landmark landmark_at(const Vec3& rho_c, int id = 1) const {
    const Vec3 r_i = mee_position(x) + R_bi().transpose() * (cam.R_cb.transpose() * rho_c);
    return {id, frame_rot_z(ast.rotation_angle(t)) * r_i};
  }
  Vec3 los(double off_angle, double azimuth, double range) const {
    return range * Vec3(std::sin(off_angle) * std::cos(azimuth), std::sin(off_angle) * std::sin(azimuth),
                        std::cos(off_angle));
  }
};

TruthState truth_of(const Geometry& g) {
  TruthState s;
  s.orbit = g.x;
  s.sigma_bi = g.sigma_bi;
  s.t = g.t;
  return s;
}

}  // namespace

TEST(Camera, PixelPitch) {
  CameraModel c;
  EXPECT_NEAR(c.pixel_width(), 2.0 * 0.3 * std::tan(15.0 * kDeg) / 2048.0, 1e-18);
  EXPECT_NEAR(c.pixel_width(), 7.85e-5, 1e-7);
}

TEST(Camera, BoresightPointsAtNadir) {
  Geometry g;
  const Vec3 nadir_b = g.R_bi() * (-mee_position(g.x).normalized());
  EXPECT_LT((g.cam.R_cb * nadir_b - Vec3::UnitZ()).norm(), 1e-14);
}

TEST(Camera, ProjectionFloorsAndRange) {
  Geometry g;
  const double pw = g.cam.pixel_width();
  const double depth = 18000.0;
  const Vec3 rho(1.7 * pw * depth / g.cam.focal, -0.4 * pw * depth / g.cam.focal, depth);
  const Landmark l = g.landmark_at(rho);
  const LandmarkPixel p = camera_project(l, g.x, g.sigma_bi, g.cam, g.t, g.ast);
  EXPECT_EQ(p.px, 1);
  EXPECT_EQ(p.py, -1);
  const Vec3 r_lmk_i = frame_rot_z(g.ast.rotation_angle(g.t)).transpose() * l.r_a;
  EXPECT_NEAR(p.range, (r_lmk_i - mee_position(g.x)).norm(), 1e-9);
}

TEST(Camera, ProjectionOnBoresight) {
  Geometry g;
  const double pw = g.cam.pixel_width();
  const Landmark l = g.landmark_at(Vec3(0.25 * pw * 18000.0 / 0.3, 0.25 * pw * 18000.0 / 0.3, 18000.0));
  const LandmarkPixel p = camera_project(l, g.x, g.sigma_bi, g.cam, g.t, g.ast);
  EXPECT_EQ(p.px, 0);
  EXPECT_EQ(p.py, 0);
}

TEST(Camera, RandomGeometryRange) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Geometry g;
  for (int k = 0; k < 100; ++k) {
    g.sigma_bi = 0.5 * Vec3(u(rng), u(rng), u(rng));
    g.t = 5000.0 * (1.0 + u(rng));
    const Landmark l{k, Vec3(u(rng), u(rng), u(rng)) * 15000.0};
    const Vec3 r_lmk_i = frame_rot_z(g.ast.rotation_angle(g.t)).transpose() * l.r_a;
    const Vec3 rho = camera_line_of_sight(l, mee_position(g.x), g.R_bi(), g.cam, g.ast.rotation_angle(g.t));
    if (rho.z() <= 0.0) {
      EXPECT_THROW(camera_project(l, g.x, g.sigma_bi, g.cam, g.t, g.ast), DomainError);
      continue;
    }
    EXPECT_NEAR(camera_project(l, g.x, g.sigma_bi, g.cam, g.t, g.ast).range, (r_lmk_i - mee_position(g.x)).norm(),
                1e-9);
  }
}

TEST(Selection, SingleLandmarkOnBoresight) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(Vec3(0.0, 0.0, 18000.0), 7)};
  EXPECT_EQ(select_landmarks(cat, g.x, g.sigma_bi, g.cam, 3, g.t, g.ast), std::vector<int>{7});
}

TEST(Selection, BehindCameraAndOutsideFovExcluded) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(Vec3(0.0, 0.0, -18000.0), 1),
                               g.landmark_at(g.los(20.0 * kDeg, 0.3, 18000.0), 2),
                               g.landmark_at(g.los(10.0 * kDeg, 0.3, 18000.0), 3)};
  EXPECT_EQ(select_landmarks(cat, g.x, g.sigma_bi, g.cam, 3, g.t, g.ast), std::vector<int>{3});
}

TEST(Selection, FarSideExcluded) {
  Geometry g;
  // A point past the asteroid centre along the boresight is hidden by the body.
  const LandmarkCatalog cat = {g.landmark_at(Vec3(0.0, 0.0, 34000.0 + 10000.0), 1)};
  EXPECT_TRUE(select_landmarks(cat, g.x, g.sigma_bi, g.cam, 3, g.t, g.ast).empty());
}

TEST(Selection, RingPicksSmallestAngles) {
  Geometry g;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ua(0.0, 14.0 * kDeg), uz(0.0, kTwoPi);
  LandmarkCatalog cat;
  std::vector<std::pair<double, int>> oracle;
  for (int k = 0; k < 10; ++k) {
    const double off = ua(rng);
    cat.push_back(g.landmark_at(g.los(off, uz(rng), 18000.0), k));
    oracle.emplace_back(off, k);
  }
  std::sort(oracle.begin(), oracle.end());
  const std::vector<int> got = select_landmarks(cat, g.x, g.sigma_bi, g.cam, 3, g.t, g.ast);
  ASSERT_EQ(got.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(got[static_cast<std::size_t>(i)], oracle[static_cast<std::size_t>(i)].second);
}

TEST(Measurement, ZeroNoiseMatchesProjection) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(g.los(5.0 * kDeg, 1.0, 18000.0), 1),
                               g.landmark_at(g.los(8.0 * kDeg, 2.0, 17000.0), 2)};
  SensorSuite suite;
  suite.pixel_sigma = 0.0;
  suite.range_sigma = 0.0;
  std::mt19937_64 rng(1);
  const VecX z = simulate_orbit_measurement(truth_of(g), cat, {1, 2}, suite, g.ast, rng);
  const VecX h = orbit_measurement_fn(g.x.vec(), g.sigma_bi, cat, {1, 2}, g.cam, g.t, g.ast);
  for (int q = 0; q < 2; ++q) {
    const LandmarkPixel p = camera_project(cat[static_cast<std::size_t>(q)], g.x, g.sigma_bi, g.cam, g.t, g.ast);
    EXPECT_EQ(z[3 * q], p.px);
    EXPECT_EQ(z[3 * q + 1], p.py);
    EXPECT_EQ(z[3 * q + 2], p.range);
    EXPECT_LT(std::abs(h[3 * q] - z[3 * q]), 1.0);
    EXPECT_GE(h[3 * q] - z[3 * q], 0.0);
    EXPECT_LT(std::abs(pixel_centres(z)[3 * q + 1] - h[3 * q + 1]), 0.5 + 1e-12);
    EXPECT_EQ(h[3 * q + 2], z[3 * q + 2]);
  }
}

TEST(Measurement, RangeSensitivityToSemilatusRectum) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(Vec3(0.0, 0.0, 18000.0), 1)};
  VecX y = g.x.vec();
  const VecX h0 = orbit_measurement_fn(y, g.sigma_bi, cat, {1}, g.cam, g.t, g.ast);
  y[0] += 5.0;
  const VecX h1 = orbit_measurement_fn(y, g.sigma_bi, cat, {1}, g.cam, g.t, g.ast);
  // Raising a circular orbit moves the spacecraft away from a nadir landmark.
  EXPECT_NEAR(h1[2] - h0[2], 5.0, 1e-3);
}

TEST(Measurement, PixelNoiseStatistics) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(g.los(3.0 * kDeg, 0.7, 18000.0), 1)};
  SensorSuite suite;
  std::mt19937_64 rng(43);
  const int n = 10000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const VecX z = simulate_orbit_measurement(truth_of(g), cat, {1}, suite, g.ast, rng);
    s += z[0];
    s2 += z[0] * z[0];
  }
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_GE(sd, 0.45);
  EXPECT_LE(sd, 0.62);
}

TEST(Measurement, StarTrackerAngleStatistics) {
  TruthState s;
  s.sigma_bi = Vec3(0.2, -0.1, 0.3);
  SensorSuite suite;
  std::mt19937_64 rng(44);
  const int n = 10000;
  double ss = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec6 z = simulate_attitude_measurement(s, suite, rng);
    const Mat3 dR = mrp_to_rotation(z.head<3>()) * mrp_to_rotation(s.sigma_bi).transpose();
    const double angle = std::acos(std::clamp(0.5 * (dR.trace() - 1.0), -1.0, 1.0));
    ss += angle * angle;
  }
  EXPECT_NEAR(std::sqrt(ss / n) / (10.0 * kArcsec), 1.0, 0.05);
}

TEST(Measurement, GyroBiasAndZeroNoise) {
  TruthState s;
  s.sigma_bi = Vec3(0.1, 0.2, -0.3);
  s.omega = Vec3(1e-3, -2e-3, 5e-4);
  SensorSuite suite;
  suite.star_sigma = 0.0;
  suite.gyro_sigma = 0.0;
  std::mt19937_64 rng(45);
  const Vec6 z = simulate_attitude_measurement(s, suite, rng);
  EXPECT_LT((z.head<3>() - s.sigma_bi).norm(), 1e-15);
  EXPECT_LT((z.tail<3>() - s.omega - Vec3::Constant(5.0 * kDeg / 3600.0)).norm(), 1e-18);
  suite.gyro_bias.setZero();
  EXPECT_LT((simulate_attitude_measurement(s, suite, rng).tail<3>() - s.omega).norm(), 1e-18);
}

TEST(Measurement, AttitudeMeasurementFunctionIsAffine) {
  const int n_att = 2;
  VecX y = VecX::Zero(9 + gravity_param_count(n_att));
  y.head<3>() = Vec3(0.1, 0.2, 0.3);
  y.segment<3>(3) = Vec3(1e-3, 2e-3, 3e-3);
  Vec6 z = attitude_measurement_fn(y, n_att);
  EXPECT_EQ(z.head<3>(), y.head<3>());
  EXPECT_EQ(z.tail<3>(), y.segment<3>(3));
  const Vec3 b(1e-5, -2e-5, 3e-5);
  y.tail<3>() = b;
  z = attitude_measurement_fn(y, n_att);
  EXPECT_LT((z.tail<3>() - y.segment<3>(3) - b).norm(), 1e-18);
  EXPECT_THROW(attitude_measurement_fn(y.head(10), n_att), DomainError);
}

TEST(Measurement, Determinism) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(g.los(3.0 * kDeg, 0.7, 18000.0), 1)};
  SensorSuite suite;
  SensorRng a(9, 0), b(9, 0), c(9, 1);
  const VecX za = simulate_orbit_measurement(truth_of(g), cat, {1}, suite, g.ast, a.camera);
  const VecX zb = simulate_orbit_measurement(truth_of(g), cat, {1}, suite, g.ast, b.camera);
  EXPECT_EQ(za, zb);
  EXPECT_NE(a.camera(), c.camera());
  EXPECT_NE(SensorRng(9, 0).camera(), SensorRng(9, 0).attitude());
}

TEST(Measurement, BehindPlanePredictionIsClamped) {
  Geometry g;
  const LandmarkCatalog cat = {g.landmark_at(Vec3(100.0, 0.0, -18000.0), 1)};
  const std::uint64_t before = behind_plane_clamps();
  const VecX h = orbit_measurement_fn(g.x.vec(), g.sigma_bi, cat, {1}, g.cam, g.t, g.ast);
  EXPECT_TRUE(h.allFinite());
  EXPECT_EQ(behind_plane_clamps(), before + 1);
}

TEST(Measurement, NoiseCovariances) {
  SensorSuite suite;
  const MatX R = orbit_measurement_noise(suite, 2);
  EXPECT_EQ(R.rows(), 6);
  EXPECT_NEAR(R(0, 0), 0.25 + 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(R(2, 2), 25.0, 1e-15);
  suite.quantization_noise = false;
  EXPECT_NEAR(orbit_measurement_noise(suite, 1)(1, 1), 0.25, 1e-15);
  EXPECT_THROW(find_landmark({}, 3), DomainError);
}
