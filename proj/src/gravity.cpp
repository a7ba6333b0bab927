#include "sbgnc/gravity.hpp"

#include <array>
#include <cmath>
#include <string>

namespace sbgnc {

namespace {

std::atomic<std::uint64_t> g_brillouin{0};

constexpr int kTri = (kMaxGravityDegree + 1) * (kMaxGravityDegree + 2) / 2;

}  // namespace

GravityModel::GravityModel(double mu, double re, int degree) : mu_(mu), re_(re), degree_(degree) {
  if (degree < 0 || degree > kMaxGravityDegree) {
    throw DomainError("gravity degree out of range: " + std::to_string(degree));
  }
  if (!(re > 0.0) || !std::isfinite(mu)) throw DomainError("invalid gravity model constants");
  c_.assign(index(degree, degree) + 1, 0.0);
  s_.assign(index(degree, degree) + 1, 0.0);
}

void GravityModel::check(int i, int j) const {
  if (i < 0 || i > degree_ || j < 0 || j > i) {
    throw DomainError("coefficient index (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
  }
}

void GravityModel::set_C(int i, int j, double v) {
  check(i, j);
  c_[index(i, j)] = v;
}

void GravityModel::set_S(int i, int j, double v) {
  check(i, j);
  if (j == 0 && v != 0.0) throw DomainError("S_i0 is identically zero");
  s_[index(i, j)] = v;
}

int gravity_param_index_C(int i, int j) { return i * i - 4 + j; }
int gravity_param_index_S(int i, int j) { return i * i - 4 + i + j; }

VecX GravityModel::params(int n) const {
  VecX v = VecX::Zero(gravity_param_count(n));
  for (int i = 2; i <= std::min(n, degree_); ++i) {
    for (int j = 0; j <= i; ++j) v[gravity_param_index_C(i, j)] = C(i, j);
    for (int j = 1; j <= i; ++j) v[gravity_param_index_S(i, j)] = S(i, j);
  }
  return v;
}

void GravityModel::set_params(const Eigen::Ref<const VecX>& v, int n) {
  if (v.size() != gravity_param_count(n) || n > degree_) throw DomainError("gravity parameter size mismatch");
  for (int i = 2; i <= n; ++i) {
    for (int j = 0; j <= i; ++j) c_[index(i, j)] = v[gravity_param_index_C(i, j)];
    for (int j = 1; j <= i; ++j) s_[index(i, j)] = v[gravity_param_index_S(i, j)];
  }
}

GravityModel GravityModel::from_params(double mu, double re, const Eigen::Ref<const VecX>& v, int n) {
  GravityModel m(mu, re, std::max(n, 0));
  m.set_params(v, n);
  return m;
}

GravityModel GravityModel::truncated(int n) const {
  GravityModel m(mu_, re_, n);
  for (int i = 0; i <= std::min(n, degree_); ++i) {
    for (int j = 0; j <= i; ++j) {
      m.c_[index(i, j)] = C(i, j);
      m.s_[index(i, j)] = S(i, j);
    }
  }
  return m;
}

bool GravityModel::all_zero() const {
  for (int i = 2; i <= degree_; ++i)
    for (int j = 0; j <= i; ++j)
      if (C(i, j) != 0.0 || S(i, j) != 0.0) return false;
  return true;
}

void validate_masses(const MassDistribution& masses) {
  double total = 0.0, arm = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& pm : masses) {
    if (!(pm.mass > 0.0) || !pm.offset.allFinite()) throw ConfigError("invalid point mass");
    total += pm.mass;
    moment += pm.mass * pm.offset;
    arm = std::max(arm, pm.offset.norm());
  }
  if (!(total > 0.0)) throw ConfigError("mass distribution is empty");
  if (moment.norm() > 1e-9 * total * std::max(arm, 1.0)) {
    throw ConfigError("mass distribution centre of mass is not at the origin");
  }
}

Mat3 inertia_from_masses(const MassDistribution& masses) {
  Mat3 J = Mat3::Zero();
  for (const auto& pm : masses) {
    J += pm.mass * (pm.offset.squaredNorm() * Mat3::Identity() - pm.offset * pm.offset.transpose());
  }
  return J;
}

double LegendreTable::pbar(int n, int m) const { return std::pow(c, m) * pt[index(n, m)]; }

double LegendreTable::dpbar(int n, int m) const {
  if (m == 0) return dpt[index(n, 0)];
  return -m * x * std::pow(c, m - 2) * pt[index(n, m)] + std::pow(c, m) * dpt[index(n, m)];
}

namespace {

// Scaled column recursion; out arrays sized for the triangular table.
void legendre_scaled(int n_max, double x, double* pt, double* dpt) {
  auto id = [](int n, int m) { return n * (n + 1) / 2 + m; };
  pt[0] = 1.0;
  dpt[0] = 0.0;
  for (int m = 0; m <= n_max; ++m) {
    if (m >= 1) {
      const double prev = pt[id(m - 1, m - 1)];
      pt[id(m, m)] = (m == 1 ? std::sqrt(3.0) : std::sqrt((2.0 * m + 1.0) / (2.0 * m))) * prev;
      dpt[id(m, m)] = 0.0;
    }
    if (m + 1 <= n_max) {
      const double a = std::sqrt(2.0 * m + 3.0);
      pt[id(m + 1, m)] = a * x * pt[id(m, m)];
      dpt[id(m + 1, m)] = a * pt[id(m, m)];
    }
    for (int n = m + 2; n <= n_max; ++n) {
      const double nm = n - m, np = n + m;
      const double a = std::sqrt((2.0 * n - 1.0) * (2.0 * n + 1.0) / (nm * np));
      const double b = std::sqrt((2.0 * n + 1.0) * (np - 1.0) * (nm - 1.0) / (nm * np * (2.0 * n - 3.0)));
      pt[id(n, m)] = a * x * pt[id(n - 1, m)] - b * pt[id(n - 2, m)];
      dpt[id(n, m)] = a * (pt[id(n - 1, m)] + x * dpt[id(n - 1, m)]) - b * dpt[id(n - 2, m)];
    }
  }
}

}  // namespace

LegendreTable legendre_normalized(int n_max, double x) {
  if (n_max < 0 || n_max > kMaxGravityDegree) throw DomainError("Legendre degree out of range");
  if (!(std::abs(x) <= 1.0)) throw DomainError("Legendre argument outside [-1, 1]");
  LegendreTable t;
  t.n_max = n_max;
  t.x = x;
  t.c = std::sqrt(std::max(0.0, 1.0 - x * x));
  const int sz = LegendreTable::index(n_max, n_max) + 1;
  t.pt.resize(sz);
  t.dpt.resize(sz);
  legendre_scaled(n_max, x, t.pt.data(), t.dpt.data());
  return t;
}

Vec3 harmonics_accel_spherical(const GravityModel& model, const SphericalCoords& s) {
  const int n = model.degree();
  if (n < 2) return Vec3::Zero();
  if (!(s.r > 0.0)) throw DomainError("zero radius in gravity evaluation");
  if (s.r < model.re()) g_brillouin.fetch_add(1, std::memory_order_relaxed);

  const double x = std::sin(s.lat);
  const double c = std::cos(s.lat);
  std::array<double, kTri> pt{}, dpt{};
  legendre_scaled(n, x, pt.data(), dpt.data());

  std::array<double, kMaxGravityDegree + 1> cosj{}, sinj{}, cpow{};
  cpow[0] = 1.0;
  for (int j = 0; j <= n; ++j) {
    cosj[j] = std::cos(j * s.lon);
    sinj[j] = std::sin(j * s.lon);
    if (j > 0) cpow[j] = cpow[j - 1] * c;
  }

  const double ratio = model.re() / s.r;
  double scale = model.mu() / (s.r * s.r) * ratio;
  double ar = 0.0, ae = 0.0, an = 0.0;
  for (int i = 2; i <= n; ++i) {
    scale *= ratio;
    double sr = 0.0, se = 0.0, sn = 0.0;
    for (int j = 0; j <= i; ++j) {
      const int id = LegendreTable::index(i, j);
      const double cc = model.C(i, j), ss = model.S(i, j);
      if (cc == 0.0 && ss == 0.0) continue;
      const double trig = cc * cosj[j] + ss * sinj[j];
      const double dtrig = -cc * sinj[j] + ss * cosj[j];
      const double p = cpow[j] * pt[id];
      sr += -(i + 1.0) * p * trig;
      if (j > 0) se += j * cpow[j - 1] * pt[id] * dtrig;
      const double dp = (j > 0 ? -j * x * cpow[j - 1] * pt[id] : 0.0) + cpow[j] * c * dpt[id];
      sn += dp * trig;
    }
    ar += scale * sr;
    ae += scale * se;
    an += scale * sn;
  }
  return Vec3(ar, ae, an);
}

double harmonics_potential(const GravityModel& model, const SphericalCoords& s) {
  const int n = model.degree();
  if (n < 2) return 0.0;
  const LegendreTable t = legendre_normalized(n, std::sin(s.lat));
  const double ratio = model.re() / s.r;
  double u = 0.0, scale = model.mu() / s.r * ratio;
  for (int i = 2; i <= n; ++i) {
    scale *= ratio;
    double sum = 0.0;
    for (int j = 0; j <= i; ++j) {
      sum += t.pbar(i, j) * (model.C(i, j) * std::cos(j * s.lon) + model.S(i, j) * std::sin(j * s.lon));
    }
    u += scale * sum;
  }
  return u;
}

Vec3 harmonics_accel_inertial(const GravityModel& model, const Vec3& r, double rotation_angle) {
  if (model.degree() < 2) return Vec3::Zero();
  const Mat3 R_ai = frame_rot_z(rotation_angle);
  const SphericalCoords s = cartesian_to_spherical(R_ai * r);
  const Vec3 a_s = harmonics_accel_spherical(model, s);
  return R_ai.transpose() * (rot_asteroid_from_spherical(s.lon, s.lat) * a_s);
}

Vec3 gravity_accel_orbit_frame(const GravityModel& model, const Mee& x, double t, const AsteroidModel& asteroid) {
  validate(x);
  return rot_orbit_from_inertial(x) * harmonics_accel_inertial(model, mee_position(x), asteroid.rotation_angle(t));
}

Vec3 sun_third_body_inertial(const Vec3& r, const SolarModel& solar) {
  if (!solar.enabled) return Vec3::Zero();
  const Vec3& rs = solar.r_sun;
  const Vec3 d = r - rs;
  const double dn = d.norm();
  if (!(dn > 0.0)) throw DomainError("spacecraft coincides with the Sun");
  // Cancellation-free form of -mu (d/|d|^3 + rs/|rs|^3).
  const double q = r.dot(r - 2.0 * rs) / rs.squaredNorm();
  const double fq = q * (3.0 + 3.0 * q + q * q) / (1.0 + std::pow(1.0 + q, 1.5));
  return -solar.mu_sun / (dn * dn * dn) * (r + fq * rs);
}

Vec3 sun_third_body(const Mee& x, const SolarModel& solar) {
  return rot_orbit_from_inertial(x) * sun_third_body_inertial(mee_position(x), solar);
}

Vec3 srp_accel_inertial(const Vec3& r, const SolarModel& solar, double c_r, double area, double mass) {
  if (!(mass > 0.0)) throw DomainError("spacecraft mass must be positive");
  if (!solar.enabled) return Vec3::Zero();
  const Vec3 d = solar.r_sun - r;
  const double ratio = solar.r_1au / solar.r_sun.norm();
  return -(c_r * solar.p_1au * area / mass) * ratio * ratio * d.normalized();
}

Vec3 srp_accel(const Mee& x, const SolarModel& solar, double c_r, double area, double mass) {
  return rot_orbit_from_inertial(x) * srp_accel_inertial(mee_position(x), solar, c_r, area, mass);
}

Vec3 gravity_gradient_torque_inertial(const GravityModel& model, const MassDistribution& masses, const Vec3& r,
                                      const Mat3& R_bi, double rotation_angle) {
  const double mu = model.mu();
  auto accel = [&](const Vec3& p) {
    const double n = p.norm();
    return Vec3(-mu / (n * n * n) * p + harmonics_accel_inertial(model, p, rotation_angle));
  };
  const Vec3 a0 = accel(r);
  const Mat3 R_ib = R_bi.transpose();
  Vec3 torque = Vec3::Zero();
  for (const auto& pm : masses) {
    if (pm.offset.squaredNorm() == 0.0) continue;
    const Vec3 da = accel(r + R_ib * pm.offset) - a0;
    torque += pm.mass * pm.offset.cross(R_bi * da);
  }
  return torque;
}

Vec3 gravity_gradient_torque(const GravityModel& model, const MassDistribution& masses, const Mee& x,
                             const Vec3& sigma_bo, double t, const AsteroidModel& asteroid) {
  validate(x);
  const Vec3 r = mee_position(x);
  if (r.norm() < model.re()) g_brillouin.fetch_add(1, std::memory_order_relaxed);
  const Mat3 R_bi = mrp_to_rotation(sigma_bo) * rot_orbit_from_inertial(x);
  return gravity_gradient_torque_inertial(model, masses, r, R_bi, asteroid.rotation_angle(t));
}

std::uint64_t brillouin_violations() { return g_brillouin.load(); }
void reset_brillouin_violations() { g_brillouin.store(0); }

GravityModel eros_like_gravity(double mu, double re) {
  GravityModel m(mu, re, 4);
  m.set_C(2, 0, -0.052478);
  m.set_C(2, 2, 0.082538);
  m.set_S(2, 2, -0.027745);
  m.set_C(3, 0, -0.0014);
  m.set_C(3, 1, 0.004055);
  m.set_S(3, 1, 0.003379);
  m.set_C(3, 2, 0.001792);
  m.set_S(3, 2, -0.000686);
  m.set_C(3, 3, -0.010337);
  m.set_S(3, 3, -0.012134);
  m.set_C(4, 0, 0.01287);
  m.set_C(4, 1, -0.000055);
  m.set_S(4, 1, 0.000553);
  m.set_C(4, 2, -0.017476);
  m.set_S(4, 2, 0.004613);
  m.set_C(4, 3, -0.000314);
  m.set_S(4, 3, -0.000819);
  m.set_C(4, 4, 0.017535);
  m.set_S(4, 4, -0.008853);
  return m;
}

GravityModel random_gravity(double mu, double re, int degree, double scale, std::mt19937_64& rng) {
  GravityModel m(mu, re, degree);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 2; i <= degree; ++i) {
    const double s = scale / (i * i);
    for (int j = 0; j <= i; ++j) {
      m.set_C(i, j, s * nd(rng));
      if (j > 0) m.set_S(i, j, s * nd(rng));
    }
  }
  return m;
}

}  // namespace sbgnc
