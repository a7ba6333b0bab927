#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sbgnc/gravity.hpp"

using namespace sbgnc;
using namespace sbgnc::testing;

TEST(Legendre, MatchesStdAssocLegendre) {
  for (double x : {-0.97, -0.4, 0.0, 0.31, 0.88}) {
    const LegendreTable t = legendre_normalized(12, x);
    for (int n = 0; n <= 12; ++n) {
      for (int m = 0; m <= n; ++m) {
        EXPECT_NEAR(t.pbar(n, m), pbar_oracle(n, m, x), 1e-11 * std::max(1.0, std::abs(pbar_oracle(n, m, x))))
            << n << "," << m << " x=" << x;
      }
    }
  }
}

TEST(Legendre, DerivativeMatchesFiniteDifference) {
  const double x = 0.37, h = 1e-6;
  const LegendreTable t = legendre_normalized(8, x);
  for (int n = 0; n <= 8; ++n) {
    for (int m = 0; m <= n; ++m) {
      const double fd = (pbar_oracle(n, m, x + h) - pbar_oracle(n, m, x - h)) / (2.0 * h);
      EXPECT_NEAR(t.dpbar(n, m), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Gravity, AccelerationMatchesPotentialGradient) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ur(1.3, 4.0), ua(0.0, kTwoPi);
  for (int k = 0; k < 200; ++k) {
    const GravityModel g = random_gravity(4.4628e5, 16000.0, 2 + k % 7, 0.05, rng);
    const Vec3 r = Vec3(u(rng), u(rng), u(rng)).normalized() * ur(rng) * g.re();
    const double rot = ua(rng);
    const Vec3 a = harmonics_accel_inertial(g, r, rot);
    const Vec3 ref = potential_gradient_oracle(g, r, rot);
    EXPECT_LT((a - ref).norm(), 1e-6 * ref.norm()) << k;
  }
}

TEST(Gravity, ZeroAndPointMassFields) {
  const GravityModel g(4.4628e5, 16000.0, 4);
  EXPECT_TRUE(g.all_zero());
  EXPECT_EQ(harmonics_accel_inertial(g, Vec3(30000.0, 100.0, -50.0), 0.2), Vec3::Zero());
  const Mee x = classical_to_mee({34000.0, 0.0, 1.0, 0.0, 0.0, 0.5});
  AsteroidModel ast{g, 3.3e-4, 0.0};
  EXPECT_EQ(gravity_accel_orbit_frame(g, x, 100.0, ast), Vec3::Zero());
}

TEST(Gravity, ParameterLayout) {
  EXPECT_EQ(gravity_param_count(2), 5);
  EXPECT_EQ(gravity_param_count(4), 21);
  EXPECT_EQ(gravity_param_count(15), 252);
  EXPECT_EQ(gravity_param_index_C(2, 0), 0);
  EXPECT_EQ(gravity_param_index_C(2, 2), 2);
  EXPECT_EQ(gravity_param_index_S(2, 1), 3);
  EXPECT_EQ(gravity_param_index_S(2, 2), 4);
  EXPECT_EQ(gravity_param_index_C(3, 0), 5);
  EXPECT_EQ(gravity_param_index_S(4, 4), 20);

  const GravityModel g = eros_like_gravity(4.4628e5, 16000.0);
  const VecX p = g.params(4);
  ASSERT_EQ(p.size(), 21);
  EXPECT_EQ(p[gravity_param_index_C(2, 0)], g.C(2, 0));
  EXPECT_EQ(p[gravity_param_index_S(3, 1)], g.S(3, 1));
  const GravityModel back = GravityModel::from_params(g.mu(), g.re(), p, 4);
  for (int i = 2; i <= 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      EXPECT_EQ(back.C(i, j), g.C(i, j));
      EXPECT_EQ(back.S(i, j), g.S(i, j));
    }
  }
  const GravityModel t2 = g.truncated(2);
  EXPECT_EQ(t2.degree(), 2);
  EXPECT_EQ(t2.C(2, 2), g.C(2, 2));
}

TEST(Gravity, RejectsBadCoefficients) {
  GravityModel g(1.0, 1.0, 3);
  EXPECT_THROW(g.set_C(4, 0, 1.0), DomainError);
  EXPECT_THROW(g.set_C(2, 3, 1.0), DomainError);
  EXPECT_THROW(g.set_S(2, 0, 1.0), DomainError);
}

TEST(Gravity, GravityGradientTorqueMatchesPointMassFormula) {
  // Small body: torque -> 3 mu / r^3 rhat x (J rhat) for a central field.
  const GravityModel g(4.4628e5, 16000.0, 0);
  MassDistribution masses = {{Vec3(1.0, 0.0, 0.0), 10.0}, {Vec3(-1.0, 0.0, 0.0), 10.0}, {Vec3(0.0, 0.5, 0.2), 5.0},
                             {Vec3(0.0, -0.5, -0.2), 5.0}};
  const Mat3 J = inertia_from_masses(masses);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 r = Vec3(u(rng), u(rng), u(rng)).normalized() * 34000.0;
    const Mat3 R_bi = mrp_to_rotation(0.5 * Vec3(u(rng), u(rng), u(rng)));
    const Vec3 tq = gravity_gradient_torque_inertial(g, masses, r, R_bi, 0.0);
    const Vec3 rb = R_bi * r.normalized();
    const Vec3 ref = 3.0 * g.mu() / std::pow(r.norm(), 3) * rb.cross(J * rb);
    EXPECT_LT((tq - ref).norm(), 1e-3 * ref.norm() + 1e-18);
  }
}

TEST(Gravity, InertiaFromMasses) {
  const MassDistribution m = {{Vec3(1.0, 0.0, 0.0), 2.0}, {Vec3(-1.0, 0.0, 0.0), 2.0}};
  const Mat3 J = inertia_from_masses(m);
  EXPECT_DOUBLE_EQ(J(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(J(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(J(2, 2), 4.0);
  EXPECT_THROW(validate_masses({{Vec3(1.0, 0.0, 0.0), -1.0}}), ConfigError);
  EXPECT_THROW(validate_masses({{Vec3(1.0, 0.0, 0.0), 1.0}}), ConfigError);
}

TEST(Solar, ThirdBodyMatchesDirectDifference) {
  SolarModel s;
  s.r_sun = Vec3(1.46 * kAu, 0.3 * kAu, 0.0);
  // The direct form loses digits; a long-double evaluation is the reference.
  for (const Vec3& r : {Vec3(34000.0, 0.0, 0.0), Vec3(-1e5, 2e4, 3e4), Vec3(0.0, 0.0, 5e4)}) {
    const Vec3 a = sun_third_body_inertial(r, s);
    long double ref[3];
    long double d[3], nd = 0, ns = 0;
    for (int i = 0; i < 3; ++i) {
      d[i] = static_cast<long double>(r[i]) - s.r_sun[i];
      nd += d[i] * d[i];
      ns += static_cast<long double>(s.r_sun[i]) * s.r_sun[i];
    }
    nd = std::sqrt(nd);
    ns = std::sqrt(ns);
    for (int i = 0; i < 3; ++i) ref[i] = -s.mu_sun * (d[i] / (nd * nd * nd) + s.r_sun[i] / (ns * ns * ns));
    const Vec3 rv(static_cast<double>(ref[0]), static_cast<double>(ref[1]), static_cast<double>(ref[2]));
    EXPECT_LT((a - rv).norm(), 1e-6 * rv.norm());
  }
  s.enabled = false;
  EXPECT_EQ(sun_third_body_inertial(Vec3(1.0, 2.0, 3.0), s), Vec3::Zero());
}

TEST(Solar, RadiationPressureScaling) {
  SolarModel s;
  const Vec3 r(34000.0, 0.0, 0.0);
  const Vec3 a1 = srp_accel_inertial(r, s, 1.4, 10.0, 1000.0);
  const Vec3 a2 = srp_accel_inertial(r, s, 1.4, 10.0, 2000.0);
  EXPECT_NEAR(a2.norm(), 0.5 * a1.norm(), 1e-20);
  const double expected = 1.4 * s.p_1au * 10.0 / 1000.0 / (1.46 * 1.46);
  EXPECT_NEAR(a1.norm(), expected, 1e-12 * expected);
  EXPECT_LT(a1.x(), 0.0);  // pushed away from the Sun
  EXPECT_THROW(srp_accel_inertial(r, s, 1.4, 10.0, 0.0), DomainError);
}

TEST(Gravity, BrillouinCounter) {
  reset_brillouin_violations();
  const GravityModel g = eros_like_gravity(4.4628e5, 16000.0);
  AsteroidModel ast{g, 3.3e-4, 0.0};
  gravity_accel_orbit_frame(g, classical_to_mee({34000.0, 0.0, 1.0, 0.0, 0.0, 0.0}), 0.0, ast);
  EXPECT_EQ(brillouin_violations(), 0u);
  gravity_accel_orbit_frame(g, classical_to_mee({12000.0, 0.0, 1.0, 0.0, 0.0, 0.0}), 0.0, ast);
  EXPECT_EQ(brillouin_violations(), 1u);
}
