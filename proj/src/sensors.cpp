#include "sbgnc/sensors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace sbgnc {

namespace {

std::atomic<std::uint64_t> g_clamps{0};

}  // namespace

SensorRng::SensorRng(std::uint64_t seed, std::uint64_t sat) {
  std::seed_seq cam_seq{seed, sat, std::uint64_t{1}};
  std::seed_seq att_seq{seed, sat, std::uint64_t{2}};
  camera.seed(cam_seq);
  attitude.seed(att_seq);
}

const Landmark& find_landmark(const LandmarkCatalog& catalog, int id) {
  auto it = std::lower_bound(catalog.begin(), catalog.end(), id,
                             [](const Landmark& l, int v) { return l.id < v; });
  if (it != catalog.end() && it->id == id) return *it;
  for (const auto& l : catalog)
    if (l.id == id) return l;
  throw DomainError("unknown landmark id " + std::to_string(id));
}

Vec3 camera_line_of_sight(const Landmark& lmk, const Vec3& r_sc, const Mat3& R_bi, const CameraModel& cam,
                          double rotation_angle) {
  const Vec3 r_lmk = frame_rot_z(rotation_angle).transpose() * lmk.r_a;
  return cam.R_cb * (R_bi * (r_lmk - r_sc));
}

std::vector<int> select_landmarks(const LandmarkCatalog& catalog, const Mee& x, const Vec3& sigma_bi,
                                  const CameraModel& cam, int q_max, double t, const AsteroidModel& asteroid) {
  const double angle = asteroid.rotation_angle(t);
  const Vec3 r_sc = mee_position(x);
  const Vec3 r_sc_a = frame_rot_z(angle) * r_sc;
  const Mat3 R_bi = mrp_to_rotation(sigma_bi);
  const double half = 0.5 * cam.fov;
  std::vector<std::pair<double, int>> cand;
  for (const auto& l : catalog) {
    const Vec3 rho = camera_line_of_sight(l, r_sc, R_bi, cam, angle);
    if (!(rho.z() > 0.0)) continue;
    const double off = std::atan2(std::hypot(rho.x(), rho.y()), rho.z());
    if (off > half) continue;
    if (!(l.r_a.dot(r_sc_a - l.r_a) > 0.0)) continue;
    cand.emplace_back(off, l.id);
  }
  std::sort(cand.begin(), cand.end());
  std::vector<int> ids;
  for (std::size_t i = 0; i < cand.size() && static_cast<int>(i) < q_max; ++i) ids.push_back(cand[i].second);
  return ids;
}

LandmarkPixel camera_project(const Landmark& lmk, const Mee& x, const Vec3& sigma_bi, const CameraModel& cam, double t,
                             const AsteroidModel& asteroid) {
  const Vec3 rho = camera_line_of_sight(lmk, mee_position(x), mrp_to_rotation(sigma_bi), cam, asteroid.rotation_angle(t));
  if (!(rho.z() > 0.0)) throw DomainError("landmark is behind the image plane");
  const double pw = cam.pixel_width();
  const double u = cam.focal * rho.x() / rho.z();
  const double v = cam.focal * rho.y() / rho.z();
  return {static_cast<int>(std::floor(u / pw)), static_cast<int>(std::floor(v / pw)), rho.norm()};
}

VecX simulate_orbit_measurement(const TruthState& truth, const LandmarkCatalog& catalog, const std::vector<int>& ids,
                                const SensorSuite& suite, const AsteroidModel& asteroid, std::mt19937_64& rng) {
  const CameraModel& cam = suite.camera;
  const double pw = cam.pixel_width();
  const Vec3 r_sc = mee_position(truth.orbit);
  const Mat3 R_bi = mrp_to_rotation(truth.sigma_bi);
  const double angle = asteroid.rotation_angle(truth.t);
  std::normal_distribution<double> nd(0.0, 1.0);
  VecX z(3 * ids.size());
  for (std::size_t q = 0; q < ids.size(); ++q) {
    const Vec3 rho = camera_line_of_sight(find_landmark(catalog, ids[q]), r_sc, R_bi, cam, angle);
    if (!(rho.z() > 0.0)) throw DomainError("selected landmark is behind the image plane");
    const double u = cam.focal * rho.x() / rho.z() / pw + suite.pixel_sigma * nd(rng);
    const double v = cam.focal * rho.y() / rho.z() / pw + suite.pixel_sigma * nd(rng);
    z[3 * q] = std::floor(u);
    z[3 * q + 1] = std::floor(v);
    z[3 * q + 2] = rho.norm() + suite.range_sigma * nd(rng);
  }
  return z;
}

Vec6 simulate_attitude_measurement(const TruthState& truth, const SensorSuite& suite, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec3 axis(nd(rng), nd(rng), nd(rng));
  axis.normalize();
  const double theta = suite.star_sigma * nd(rng);
  const Vec3 delta = axis * std::tan(0.25 * theta);
  Vec6 z;
  z.head<3>() = mrp_normalize(mrp_compose(truth.sigma_bi, delta));
  const Vec3 noise(nd(rng), nd(rng), nd(rng));
  z.tail<3>() = truth.omega + suite.gyro_bias + suite.gyro_sigma * noise;
  return z;
}

VecX orbit_measurement_fn(const VecX& y_orb, const Vec3& sigma_bi, const LandmarkCatalog& catalog,
                          const std::vector<int>& ids, const CameraModel& cam, double t, const AsteroidModel& asteroid) {
  const Mee x = Mee::from(y_orb.head<6>());
  const Vec3 r_sc = mee_position(x);
  const Mat3 R_bi = mrp_to_rotation(sigma_bi);
  const double angle = asteroid.rotation_angle(t);
  const double pw = cam.pixel_width();
  VecX z(3 * ids.size());
  for (std::size_t q = 0; q < ids.size(); ++q) {
    const Vec3 rho = camera_line_of_sight(find_landmark(catalog, ids[q]), r_sc, R_bi, cam, angle);
    double rz = rho.z();
    const double floor_z = 1e-3 * rho.norm();
    if (rz < floor_z) {
      g_clamps.fetch_add(1, std::memory_order_relaxed);
      rz = floor_z;
    }
    z[3 * q] = cam.focal * rho.x() / rz / pw;
    z[3 * q + 1] = cam.focal * rho.y() / rz / pw;
    z[3 * q + 2] = rho.norm();
  }
  return z;
}

Vec6 attitude_measurement_fn(const VecX& y_att, int n_att) {
  const int nb = 6 + gravity_param_count(n_att);
  if (y_att.size() != nb + 3) throw DomainError("attitude extended state size mismatch");
  Vec6 z;
  z.head<3>() = y_att.head<3>();
  z.tail<3>() = y_att.segment<3>(3) + y_att.segment<3>(nb);
  return z;
}

VecX pixel_centres(const VecX& z) {
  VecX out = z;
  for (Eigen::Index q = 0; q + 2 < z.size(); q += 3) {
    out[q] += 0.5;
    out[q + 1] += 0.5;
  }
  return out;
}

MatX orbit_measurement_noise(const SensorSuite& suite, int n_landmarks) {
  const double pv = suite.pixel_sigma * suite.pixel_sigma + (suite.quantization_noise ? 1.0 / 12.0 : 0.0);
  const double rv = suite.range_sigma * suite.range_sigma;
  VecX d(3 * n_landmarks);
  for (int q = 0; q < n_landmarks; ++q) d.segment<3>(3 * q) << pv, pv, rv;
  return d.asDiagonal();
}

Mat6 attitude_measurement_noise(const SensorSuite& suite, const Vec3& sigma_prior) {
  const double k = 1.0 + sigma_prior.squaredNorm();
  Vec6 d;
  d.head<3>().setConstant(k * k / 16.0 * suite.star_sigma * suite.star_sigma / 3.0);
  d.tail<3>().setConstant(suite.gyro_sigma * suite.gyro_sigma);
  return d.asDiagonal();
}

std::uint64_t behind_plane_clamps() { return g_clamps.load(); }

}  // namespace sbgnc
