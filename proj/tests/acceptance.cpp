// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance --criterion N   (N = 1..9, or omit to run all)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "sbgnc/harness.hpp"

using namespace sbgnc;
using namespace sbgnc::testing;

namespace {

constexpr double kMu = 4.4628e5;
constexpr double kRe = 16000.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Scenario shipped_scenario() { return load_scenario(SBGNC_SCENARIO_FILE); }

// 1. Harmonics acceleration against the finite-difference potential gradient.
Outcome gravity_oracle() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ur(1.2, 4.0), ua(0.0, kTwoPi), us(0.01, 0.1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const GravityModel g = random_gravity(kMu, kRe, 2 + k % 7, us(rng), rng);
    Vec3 dir;
    do dir = Vec3(u(rng), u(rng), u(rng));
    while (dir.norm() < 1e-3);
    const Vec3 r = dir.normalized() * ur(rng) * kRe;
    const double rot = ua(rng);
    const Vec3 ref = potential_gradient_oracle(g, r, rot);
    worst = std::max(worst, (harmonics_accel_inertial(g, r, rot) - ref).norm() / ref.norm());
  }
  return {worst < 1e-6, fmt("max relative error %.2e over 1000 pairs", worst)};
}

// 2. MRP rotation and composition against quaternions.
Outcome attitude_oracle() {
  std::mt19937_64 rng(1002);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ua(0.0, kPi);
  auto random_mrp = [&]() {
    Vec3 e(nd(rng), nd(rng), nd(rng));
    return Vec3(e.normalized() * std::tan(ua(rng) / 4.0));
  };
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Vec3 a = random_mrp(), b = random_mrp();
    const Eigen::Quaterniond qa = quaternion_of_mrp(a), qb = quaternion_of_mrp(b);
    worst = std::max(worst, (mrp_to_rotation(a) - passive_dcm(qa)).cwiseAbs().maxCoeff());
    // R(b) R(a): first a, then b.
    worst = std::max(worst, (mrp_to_rotation(mrp_compose(a, b)) - passive_dcm(qa * qb)).cwiseAbs().maxCoeff());
    const Vec3 v(nd(rng), nd(rng), nd(rng));
    worst = std::max(worst, (mrp_to_rotation(a) * v - qa.conjugate() * v).norm() / v.norm());
  }
  return {worst < 1e-12, fmt("max element error %.2e over 1e4 cases", worst)};
}

// 3. Unscented filter on affine-Gaussian systems against the closed-form filter.
Outcome ukf_oracle() {
  std::mt19937_64 rng(1003);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  const double thetas[] = {1.0, 0.5, 1e-3};
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + trial % 3, m = 2;
    KalmanOracle kf;
    kf.F = MatX::Identity(n, n);
    kf.H = MatX(m, n);
    kf.b = VecX(n);
    kf.d = VecX(m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) kf.F(i, j) += 0.05 * nd(rng);
      kf.b[i] = nd(rng);
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) kf.H(i, j) = nd(rng);
      kf.d[i] = nd(rng);
    }
    kf.Q = 1e-3 * random_spd(n, 10.0, rng);
    kf.R = 0.1 * random_spd(m, 5.0, rng);
    kf.x = VecX::Zero(n);
    kf.P = random_spd(n, 100.0, rng);
    UkfParams p;
    p.alpha = 1.0;
    p.theta = thetas[trial % 3];
    GaussianState g{kf.x, kf.P};
    const auto f = [&](const VecX& x) { return VecX(kf.F * x + kf.b); };
    const auto h = [&](const VecX& x) { return VecX(kf.H * x + kf.d); };
    for (int k = 0; k < 50; ++k) {
      VecX z(m);
      for (int i = 0; i < m; ++i) z[i] = nd(rng);
      g = ukf_step(f, h, g, z, kf.Q, kf.R, p).posterior;
      kf.step(z);
    }
    const double em = (g.mean - kf.x).cwiseAbs().maxCoeff() / std::max(1.0, kf.x.cwiseAbs().maxCoeff());
    const double ec = (g.cov - kf.P).cwiseAbs().maxCoeff() / kf.P.cwiseAbs().maxCoeff();
    worst = std::max({worst, em, ec});
  }
  return {worst < 1e-8, fmt("max relative mean/covariance error %.2e after 50 steps", worst)};
}

// 4. Box QP against enumeration, plus KKT residuals on MPC-generated problems.
Outcome qp_oracle() {
  std::mt19937_64 rng(1004);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ub(0.1, 2.0), u(-1.0, 1.0);
  double worst_obj = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 8;
    QpProblem p;
    p.H = random_spd(n, 1e3, rng);
    p.c.resize(n);
    p.lb.resize(n);
    p.ub.resize(n);
    for (int i = 0; i < n; ++i) {
      p.c[i] = 3.0 * nd(rng);
      p.lb[i] = -ub(rng);
      p.ub[i] = ub(rng);
    }
    const double ref = p.objective(enumerate_box_qp(p.H, p.c, p.lb, p.ub));
    worst_obj = std::max(worst_obj, std::abs(solve_box_qp(p).objective - ref) / std::max(1.0, std::abs(ref)));
  }

  const Scenario sc = shipped_scenario();
  const AsteroidModel& ast = sc.asteroid;
  const VecX truth = ast.gravity.params(sc.filters.n_orb);
  double worst_kkt = 0.0;
  int instances = 0;
  for (int k = 0; k < 20; ++k) {
    VecX est = truth;
    for (int i = 0; i < est.size(); ++i) est[i] += 0.02 * nd(rng);
    const GravityModel g = GravityModel::from_params(kMu, kRe, est, sc.filters.n_orb);
    const Mee x = classical_to_mee({34000.0 + 800.0 * u(rng), 0.01 * std::abs(u(rng)), kPi / 2 + 0.02 * u(rng),
                                    0.1 * u(rng), kPi * u(rng), kPi * u(rng)});
    const double t0 = 3600.0 * std::abs(u(rng));
    const OrbitMpcResult o = mpc_step_orbit(x, g, 34000.0, t0, sc.orbit_mpc, ast);
    const KktResiduals r = kkt_residuals(o.problem.qp, o.qp.x);
    worst_kkt = std::max({worst_kkt, r.stationarity, r.primal, r.complementarity});
    ++instances;

    const Vec3 sigma = 0.05 * Vec3(u(rng), u(rng), u(rng));
    const Vec6 ref = attitude_reference(o.reference, sc.attitude_target, kMu).state(t0);
    const Vec3 omega = ref.tail<3>() + 2e-4 * Vec3(u(rng), u(rng), u(rng));
    const AttitudeMpcResult a = mpc_step_attitude(sigma, omega, o.reference, g.truncated(sc.filters.n_att),
                                                  sc.attitude_target, t0, sc.attitude_mpc, sc.spacecraft, ast);
    const KktResiduals ra = kkt_residuals(a.problem.qp, a.qp.x);
    worst_kkt = std::max({worst_kkt, ra.stationarity, ra.primal, ra.complementarity});
    ++instances;
  }
  const bool pass = worst_obj < 1e-8 && worst_kkt < 1e-8;
  return {pass, fmt("objective gap %.2e on 100 QPs, ", worst_obj) +
                    fmt("max KKT residual %.2e on ", worst_kkt) + std::to_string(instances) + " MPC instances"};
}

// 5. Kepler invariants, J2 nodal regression and the STM semigroup.
Outcome dynamics_fidelity() {
  std::string detail;
  bool pass = true;

  SolarModel solar;
  solar.enabled = false;
  const SpacecraftConfig sc;
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_inv = 0.0;
  {
    const AsteroidModel ast{GravityModel(kMu, kRe, 0), kTwoPi / 18972.0, 0.0};
    const TruthEnvironment env{&ast, &solar, &sc, {}};
    for (int k = 0; k < 5; ++k) {
      const double a = 30000.0 + 10000.0 * u(rng);
      TruthState s;
      s.orbit = classical_to_mee({a, 0.2 * u(rng), 0.1 + 2.9 * u(rng), kTwoPi * u(rng), kTwoPi * u(rng), kTwoPi * u(rng)});
      const CartesianState c0 = mee_to_cartesian(s.orbit, kMu);
      propagate_truth(s, kTwoPi * std::sqrt(a * a * a / kMu), env);
      const CartesianState c1 = mee_to_cartesian(s.orbit, kMu);
      const auto energy = [](const CartesianState& c) { return 0.5 * c.v.squaredNorm() - kMu / c.r.norm(); };
      const Vec3 h0 = c0.r.cross(c0.v), h1 = c1.r.cross(c1.v);
      worst_inv = std::max({worst_inv, std::abs(energy(c1) / energy(c0) - 1.0), (h1 - h0).norm() / h0.norm(),
                            (c1.r - c0.r).norm() / c0.r.norm()});
    }
  }
  pass &= worst_inv < 1e-9;
  detail += fmt("Kepler invariant drift %.2e/orbit", worst_inv);

  double worst_raan = 0.0;
  {
    GravityModel g(kMu, kRe, 2);
    g.set_C(2, 0, eros_like_gravity(kMu, kRe).C(2, 0));
    const AsteroidModel ast{g, kTwoPi / 18972.0, 0.0};
    const TruthEnvironment env{&ast, &solar, &sc, {}};
    for (double inc_deg : {30.0, 60.0, 120.0}) {
      TruthState s;
      const double a = 34000.0;
      s.orbit = classical_to_mee({a, 0.0, inc_deg * kDeg, 0.3, 0.0, 0.0});
      const double period = kTwoPi * std::sqrt(a * a * a / kMu);
      const double raan0 = std::atan2(s.orbit.k, s.orbit.h);
      // The secular rate is evaluated on orbit-averaged elements.
      const int steps = 400;
      double a_mean = 0.0, i_mean = 0.0;
      for (int k = 0; k < steps; ++k) {
        propagate_truth(s, period / steps, env);
        const ClassicalElements c = mee_to_classical(s.orbit);
        a_mean += c.a / steps;
        i_mean += c.i / steps;
      }
      const double J2 = -std::sqrt(5.0) * g.C(2, 0);
      const double n = std::sqrt(kMu / (a_mean * a_mean * a_mean));
      const double analytic = -1.5 * n * J2 * std::pow(kRe / a_mean, 2) * std::cos(i_mean);
      const double measured = std::remainder(std::atan2(s.orbit.k, s.orbit.h) - raan0, kTwoPi) / period;
      worst_raan = std::max(worst_raan, std::abs(measured / analytic - 1.0));
    }
  }
  pass &= worst_raan < 0.05;
  detail += fmt(", RAAN rate deviation %.2f%%", 100.0 * worst_raan);

  double worst_stm = 0.0;
  {
    const AsteroidModel ast{eros_like_gravity(kMu, kRe), kTwoPi / 18972.0, 0.0};
    const Mee start = classical_to_mee({34000.0, 0.0, kPi / 2, 0.2, 0.0, 0.4});
    const double dt = 360.0;
    const OrbitReference ref = orbit_reference(start, ast.gravity, 34000.0, 0.0, 4 * dt, 4, ast);
    const RateFn f = [&](const Vec6& x, const Vec3& a, double t) {
      return orbit_model_rates(x, t, ast.gravity, ast, a);
    };
    Vec6 floor;
    floor << 1e-3, 1e-8, 1e-8, 1e-8, 1e-8, 1e-8;
    const LinearModelFn lin = linearize(
        f, [&](double t) { return ref.state(t); }, [&](double t) { return ref.control(t); }, nullptr, floor, 0.01);
    const LtvBlocks whole = integrate_stm(lin, 0.0, 4 * dt, 1, 16);
    const LtvBlocks quarters = integrate_stm(lin, 0.0, dt, 4, 4);
    Mat6 prod = Mat6::Identity();
    for (const Mat6& P : quarters.Phi) prod = P * prod;
    worst_stm = (whole.Phi[0] - prod).cwiseAbs().maxCoeff() / whole.Phi[0].cwiseAbs().maxCoeff();
  }
  pass &= worst_stm < 1e-9;
  detail += fmt(", STM semigroup error %.2e", worst_stm);
  return {pass, detail};
}

double coefficient_convergence_h(const SatelliteHistory& h, const GravityModel& truth, int idx) {
  std::vector<double> t;
  for (const auto& r : h.rows) t.push_back(r.t);
  const auto c = convergence_time(t, coefficient_error_pct(h, truth, idx));
  return c ? *c / 3600.0 : std::numeric_limits<double>::infinity();
}

// 6. Two-day closed loop on the shipped scenario.
Outcome closed_loop() {
  const Scenario sc = shipped_scenario();
  const RunResult run = run_constellation(sc);
  const MetricsReport m = compute_metrics(run.satellites[0], sc.asteroid.gravity, {sc.spacecraft.mass, sc.spacecraft.isp});
  const CoefficientMetric& c20 = m.coefficients[static_cast<std::size_t>(gravity_param_index_C(2, 0))];
  const bool a = m.dR_max_time_s <= 86400.0;
  const bool b = m.dR_per_day_m.size() == 2 && m.dR_per_day_m[1] < m.dR_per_day_m[0];
  const bool c = std::abs(c20.final_error_pct) < 5.0 && c20.convergence_h.has_value();
  std::string d = fmt("(a) dR max %.1f m ", m.dR_max_m) + fmt("at %.2f h; ", m.dR_max_time_s / 3600.0);
  d += fmt("(b) day means %.1f m -> ", m.dR_per_day_m[0]) + fmt("%.1f m; ", m.dR_per_day_m.back());
  d += fmt("(c) C20 error %.3f%%, converged ", c20.final_error_pct) +
       (c20.convergence_h ? fmt("at %.2f h", *c20.convergence_h) : std::string("never"));
  return {a && b && c, d};
}

// 7. Learning against non-learning guidance over five seeds.
Outcome learning_benefit() {
  int wins = 0;
  std::string d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Scenario sc = shipped_scenario();
    sc.seed = seed;
    const MetricsSettings ms{sc.spacecraft.mass, sc.spacecraft.isp};
    const double learn = compute_metrics(run_constellation(sc).satellites[0], sc.asteroid.gravity, ms).dR_mean_m;
    sc.mode.learning = false;
    const double plain = compute_metrics(run_constellation(sc).satellites[0], sc.asteroid.gravity, ms).dR_mean_m;
    const double ratio = learn / plain;
    if (ratio <= 0.8) ++wins;
    std::printf("  seed %d: learning %.1f m, non-learning %.1f m, ratio %.3f\n", static_cast<int>(seed), learn, plain,
                ratio);
    std::fflush(stdout);
    d += (d.empty() ? "ratios " : ", ") + fmt("%.3f", ratio);
  }
  return {wins >= 4, d + " (" + std::to_string(wins) + "/5 at or below 0.8)"};
}

bool same_history(const SatelliteHistory& a, const SatelliteHistory& b) {
  if (a.rows.size() != b.rows.size()) return false;
  const auto eq = [](const auto& x, const auto& y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const HistoryRow &x = a.rows[i], &y = b.rows[i];
    if (x.t != y.t || !eq(x.truth_mee, y.truth_mee) || !eq(x.est_mee, y.est_mee) || !eq(x.sigma_bo_truth, y.sigma_bo_truth) ||
        !eq(x.sigma_bo_est, y.sigma_bo_est) || !eq(x.accel_cmd, y.accel_cmd) || !eq(x.torque_cmd, y.torque_cmd) ||
        !eq(x.grav_orb, y.grav_orb) || !eq(x.grav_orb_sd, y.grav_orb_sd) || !eq(x.grav_att, y.grav_att) ||
        !eq(x.grav_att_sd, y.grav_att_sd) || !eq(x.gyro_bias_est, y.gyro_bias_est) ||
        x.landmarks_seen != y.landmarks_seen) {
      return false;
    }
  }
  return true;
}

// 8. Three-satellite fusion against the members flown alone.
Outcome constellation_benefit() {
  int wins = 0;
  bool identical = false;
  std::string d;
  const int idx = gravity_param_index_C(2, 0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Scenario sc = shipped_scenario();
    sc.seed = seed;
    sc.satellites = constellation_preset(3);
    sc.mode.fusion = true;
    const RunResult fused = run_constellation(sc);
    const auto err = coefficient_error_pct(fused.fused_orbit, sc.asteroid.gravity, idx, sc.filters.n_orb);
    const auto conv = convergence_time(fused.fused_t, err);
    const double t_fused = conv ? *conv / 3600.0 : std::numeric_limits<double>::infinity();

    Scenario alone = sc;
    alone.mode.fusion = false;
    std::vector<double> t_single;
    for (int i = 0; i < 3; ++i) {
      const RunResult r = run_standalone(alone, i);
      t_single.push_back(coefficient_convergence_h(r.satellites[0], sc.asteroid.gravity, idx));
      if (seed == 1 && i == 0) {
        Scenario one = sc;
        one.satellites = {sc.satellites[0]};
        identical = same_history(run_constellation(one).satellites[0], r.satellites[0]);
      }
    }
    std::sort(t_single.begin(), t_single.end());
    const double median = t_single[1];
    if (t_fused <= median) ++wins;
    std::printf("  seed %d: fused C20 convergence %.2f h, standalone %.2f / %.2f / %.2f h\n", static_cast<int>(seed),
                t_fused, t_single[0], t_single[1], t_single[2]);
    std::fflush(stdout);
  }
  d = std::to_string(wins) + "/5 seeds at or below the median standalone time; single-member fused run " +
      (identical ? "bit-identical" : "DIFFERS") + " to standalone";
  return {wins >= 4 && identical, d};
}

// 9. Fuel integral and Euler round trip.
Outcome metrics_arithmetic() {
  SatelliteHistory h;
  h.a_target = 34000.0;
  h.n_orb = 2;
  h.n_att = 2;
  for (int k = 0; k <= 2400; ++k) {
    HistoryRow r;
    r.t = 36.0 * k;
    r.r = 34000.0;
    r.accel_applied = Vec3(0.6e-4, 0.0, 0.8e-4);
    r.grav_orb = r.grav_orb_sd = r.grav_att = r.grav_att_sd = VecX::Zero(5);
    h.rows.push_back(r);
  }
  const double fuel = compute_metrics(h, GravityModel(kMu, kRe, 2), {1000.0, 2900.0}).fuel_kg;
  const double closed = 1000.0 * 1e-4 * 86400.0 / (9.8066 * 2900.0);
  const double fuel_err = std::abs(fuel - closed) / closed;

  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> ua(-3.1, 3.1), ur(-1.5, 1.5);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const EulerAngles e{ua(rng), ur(rng), ua(rng)};
    // Passive z-y-x sequence: yaw about x first, pitch about z last.
    const Mat3 R = (Eigen::AngleAxisd(e.yaw, Vec3::UnitX()) * Eigen::AngleAxisd(e.roll, Vec3::UnitY()) *
                    Eigen::AngleAxisd(e.pitch, Vec3::UnitZ()))
                       .toRotationMatrix()
                       .transpose();
    worst = std::max(worst, (rotation_from_euler(e) - R).cwiseAbs().maxCoeff());
    const EulerAngles b = euler_angles_from_mrp(rotation_to_mrp(R));
    worst = std::max({worst, std::abs(b.pitch - e.pitch), std::abs(b.roll - e.roll), std::abs(b.yaw - e.yaw)});
  }
  const bool pass = fuel_err < 1e-12 && worst < 1e-10;
  return {pass, fmt("fuel %.10f kg ", fuel) + fmt("(relative error %.1e), ", fuel_err) +
                    fmt("Euler round-trip error %.1e", worst)};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Criterion number (1-9); all when omitted")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {"gravity oracle", 10.0, gravity_oracle},
      {"attitude algebra oracle", 5.0, attitude_oracle},
      {"UKF oracle", 5.0, ukf_oracle},
      {"QP oracle", 30.0, qp_oracle},
      {"dynamics fidelity", 60.0, dynamics_fidelity},
      {"two-day closed loop", 600.0, closed_loop},
      {"learning vs non-learning", 3600.0, learning_benefit},
      {"constellation benefit", 3600.0, constellation_benefit},
      {"metrics arithmetic", 1.0, metrics_arithmetic},
  };

  bool ok = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < all[i].budget_s;
    const bool pass = o.pass && in_time;
    std::printf("criterion %zu %s: %s - %s; %.2f s of %.0f s budget\n", i + 1, all[i].name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, all[i].budget_s);
    std::fflush(stdout);
    ok &= pass;
  }
  return ok ? 0 : 1;
}
