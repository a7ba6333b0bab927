#include "sbgnc/constellation.hpp"

#include <cmath>
#include <sstream>

namespace sbgnc {

namespace {

constexpr double kSigmaFloor = 1e-15;

VecX block_sigmas(const MatX& cov, Eigen::Index start, Eigen::Index n) {
  return cov.diagonal().segment(start, n).cwiseMax(0.0).cwiseSqrt();
}

[[noreturn]] void rethrow_with_context(const std::exception& e, int sat, double t) {
  std::ostringstream os;
  os << "satellite " << sat << " at t = " << t << " s: " << e.what();
  throw Error(os.str());
}

HistoryRow snapshot(const SatelliteRuntime& s, const Scenario& sc, double t, int landmarks_seen) {
  HistoryRow row;
  row.t = t;
  row.truth_mee = s.truth.orbit.vec();
  row.est_mee = s.orbit.orbit().vec();
  const SphericalCoords sph = mee_to_spherical(s.truth.orbit, sc.asteroid.rotation_angle(t));
  row.r = sph.r;
  row.lon = sph.lon;
  row.lat = sph.lat;
  row.sigma_bo_truth = reconstruct_body_orbit(s.truth.sigma_bi, s.truth.orbit);
  row.sigma_bo_est = reconstruct_body_orbit(s.attitude.sigma_bi(), s.orbit.orbit());
  const Vec3 err = mrp_normalize(mrp_compose(-sc.attitude_target, row.sigma_bo_truth));
  const EulerAngles e = euler_angles_from_mrp(err);
  row.euler = Vec3(e.pitch, e.roll, e.yaw);
  row.accel_cmd = s.truth.accel.cmd;
  row.accel_applied = s.truth.accel.at(t);
  row.torque_cmd = s.truth.torque.cmd;
  row.torque_applied = s.truth.torque.at(t);
  const int np_o = gravity_param_count(s.orbit.n_orb);
  const int np_a = gravity_param_count(s.attitude.n_att);
  row.grav_orb = s.orbit.gravity_params();
  row.grav_orb_sd = block_sigmas(s.orbit.est.cov, 6, np_o);
  row.grav_att = s.attitude.gravity_params();
  row.grav_att_sd = block_sigmas(s.attitude.est.cov, 6, np_a);
  row.gyro_bias_est = s.attitude.gyro_bias();
  row.landmarks_seen = landmarks_seen;
  return row;
}

GravityModel zero_gravity(const AsteroidModel& ast, int n) { return GravityModel(ast.gravity.mu(), ast.gravity.re(), n); }

void fuse_block(std::vector<SatelliteRuntime>& sats, bool orbit_block, VecX* fused_out) {
  FusionInput in;
  for (const auto& s : sats) {
    const GaussianState& g = orbit_block ? s.orbit.est : s.attitude.est;
    const int np = gravity_param_count(orbit_block ? s.orbit.n_orb : s.attitude.n_att);
    in.means.push_back(g.mean.segment(6, np));
    in.sigmas.push_back(block_sigmas(g.cov, 6, np));
  }
  const VecX fused = fuse_gravity(in);
  for (auto& s : sats) {
    GaussianState& g = orbit_block ? s.orbit.est : s.attitude.est;
    g.mean.segment(6, fused.size()) = fused;
  }
  if (fused_out) *fused_out = fused;
}

void run_schedule(const Scenario& sc, std::vector<SatelliteRuntime>& sats, RunResult& res, const RunOptions& opt) {
  const TruthEnvironment env{&sc.asteroid, &sc.solar, &sc.spacecraft, sc.truth_integrator};
  const int n_att_steps = sc.attitude_steps_per_orbit();
  const int n_orb_steps = sc.orbit_steps_per_control();
  const long total = std::lround(sc.duration / sc.filters.orbit_dt);
  const double dt_orb = sc.filters.orbit_dt;
  const double dt_att = sc.filters.attitude_dt;

  std::vector<int> seen(sats.size(), 0);
  for (std::size_t i = 0; i < sats.size(); ++i) sats[i].history.rows.push_back(snapshot(sats[i], sc, 0.0, 0));

  for (long k = 0; k < total; ++k) {
    const double t0 = k * dt_orb;

    if (k % n_orb_steps == 0) {
      for (auto& s : sats) {
        try {
          const GravityModel g = sc.mode.learning ? s.orbit.gravity(sc.asteroid) : zero_gravity(sc.asteroid, s.orbit.n_orb);
          OrbitMpcResult m = mpc_step_orbit(s.orbit.orbit(), g, s.spec.a_target, t0, sc.orbit_mpc, sc.asteroid);
          s.truth.accel.command(m.command, t0);
          s.orbit_ref = std::move(m.reference);
        } catch (const std::exception& e) {
          rethrow_with_context(e, s.index, t0);
        }
      }
    }

    for (auto& s : sats) {
      try {
        const GravityModel g =
            sc.mode.learning ? s.attitude.gravity(sc.asteroid) : zero_gravity(sc.asteroid, s.attitude.n_att);
        const Vec3 sigma_bo = reconstruct_body_orbit(s.attitude.sigma_bi(), s.orbit_companion);
        AttitudeMpcResult m = mpc_step_attitude(sigma_bo, s.attitude.omega(), s.orbit_ref, g, sc.attitude_target, t0,
                                                sc.attitude_mpc, sc.spacecraft, sc.asteroid);
        s.truth.torque.command(m.command, t0);
      } catch (const std::exception& e) {
        rethrow_with_context(e, s.index, t0);
      }
    }

    for (int a = 0; a < n_att_steps; ++a) {
      const double ta = t0 + a * dt_att;
      for (auto& s : sats) {
        try {
          propagate_truth(s.truth, dt_att, env);
          s.truth.t = ta + dt_att;  // keep the clock on the global grid
          const Vec6 z = simulate_attitude_measurement(s.truth, sc.sensors, s.rng.attitude);
          const OrbitTrack track =
              build_orbit_track(s.orbit_companion, ta, dt_att, s.orbit.gravity(sc.asteroid), s.truth.accel, sc.asteroid);
          attitude_filter_step(s.attitude, z, track, s.truth.torque, ta, dt_att, sc.spacecraft, sc.sensors, sc.asteroid,
                               sc.filters.ukf);
          s.orbit_companion = track.end;
        } catch (const std::exception& e) {
          rethrow_with_context(e, s.index, ta);
        }
      }
      ++res.attitude_steps;
    }
    res.attitude_steps_between_orbit.push_back(n_att_steps);

    const double t1 = t0 + dt_orb;
    for (std::size_t i = 0; i < sats.size(); ++i) {
      auto& s = sats[i];
      try {
        const std::vector<int> ids = select_landmarks(sc.landmarks, s.truth.orbit, s.truth.sigma_bi, sc.sensors.camera,
                                                      sc.sensors.q_max, t1, sc.asteroid);
        const VecX z = simulate_orbit_measurement(s.truth, sc.landmarks, ids, sc.sensors, sc.asteroid, s.rng.camera);
        orbit_filter_step(s.orbit, z, ids, s.attitude.sigma_bi(), s.truth.accel, t0, dt_orb, sc.landmarks, sc.sensors,
                          sc.asteroid, sc.filters.ukf);
        s.orbit_companion = s.orbit.orbit();
        seen[i] = static_cast<int>(ids.size());
      } catch (const std::exception& e) {
        rethrow_with_context(e, s.index, t1);
      }
    }
    ++res.orbit_steps;

    VecX fused;
    if (sc.mode.fusion) {
      fuse_block(sats, true, &fused);
      fuse_block(sats, false, nullptr);
    } else {
      fused = sats.front().orbit.gravity_params();
    }
    res.fused_t.push_back(t1);
    res.fused_orbit.push_back(fused);

    for (std::size_t i = 0; i < sats.size(); ++i) sats[i].history.rows.push_back(snapshot(sats[i], sc, t1, seen[i]));
    if (opt.progress) opt.progress(t1);
  }
}

}  // namespace

MatX fusion_weights(const FusionInput& in) {
  if (in.means.empty() || in.means.size() != in.sigmas.size()) throw DomainError("fusion needs at least one input");
  const Eigen::Index n = in.means.front().size();
  const auto m = static_cast<Eigen::Index>(in.means.size());
  MatX inv(n, m);
  for (Eigen::Index s = 0; s < m; ++s) {
    if (in.means[s].size() != n || in.sigmas[s].size() != n) throw DomainError("fusion input size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sd = std::max(in.sigmas[s][i], kSigmaFloor);
      inv(i, s) = 1.0 / (sd * sd);
    }
  }
  MatX w(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < m; ++s) total += inv(i, s);
    for (Eigen::Index s = 0; s < m; ++s) w(i, s) = inv(i, s) / total;
  }
  return w;
}

VecX fuse_gravity(const FusionInput& in) {
  const MatX w = fusion_weights(in);
  VecX out = VecX::Zero(w.rows());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index s = 0; s < w.cols(); ++s) acc += w(i, s) * in.means[static_cast<std::size_t>(s)][i];
    out[i] = acc;
  }
  return out;
}

SatelliteRuntime make_satellite(const Scenario& sc, int index) {
  const SatelliteSpec& spec = sc.satellites.at(static_cast<std::size_t>(index));
  const std::uint64_t stream = spec.stream < 0 ? static_cast<std::uint64_t>(index) : static_cast<std::uint64_t>(spec.stream);
  SatelliteRuntime s(sc.seed, stream);
  s.index = index;
  s.spec = spec;

  ClassicalElements ce;
  ce.a = spec.a_target;
  ce.e = 0.0;
  ce.i = spec.inclination;
  ce.raan = spec.raan;
  ce.argp = 0.0;
  ce.nu = spec.arg_latitude;
  const Mee x0 = classical_to_mee(ce);
  const double mu = sc.asteroid.gravity.mu();

  s.truth.orbit = x0;
  s.truth.t = 0.0;
  const Vec3 w_o = orbit_frame_angular_velocity(x0, 0.0, mu);
  s.truth.sigma_bi = body_inertial_from_orbit(sc.attitude_target, x0);
  s.truth.omega = mrp_to_rotation(sc.attitude_target) * w_o;
  s.truth.accel.tau = sc.spacecraft.tau;
  s.truth.torque.tau = sc.spacecraft.tau;

  const InitialUncertainty& u = sc.filters.initial;
  const Mee x_est = x0;
  const Vec3 sigma_est = s.truth.sigma_bi;
  const Vec3 omega_est = s.truth.omega;

  s.orbit = make_orbit_filter(x_est, VecX::Zero(gravity_param_count(sc.filters.n_orb)), sc.filters.n_orb, u);
  s.attitude = make_attitude_filter(sigma_est, omega_est, VecX::Zero(gravity_param_count(sc.filters.n_att)), Vec3::Zero(),
                                    sc.filters.n_att, u);
  s.orbit_companion = x_est;

  s.history.index = index;
  s.history.a_target = spec.a_target;
  s.history.n_orb = sc.filters.n_orb;
  s.history.n_att = sc.filters.n_att;
  return s;
}

RunResult run_constellation(const Scenario& sc, const RunOptions& opt) {
  sc.validate();
  std::vector<SatelliteRuntime> sats;
  sats.reserve(sc.satellites.size());
  for (std::size_t i = 0; i < sc.satellites.size(); ++i) sats.push_back(make_satellite(sc, static_cast<int>(i)));
  RunResult res;
  run_schedule(sc, sats, res, opt);
  for (auto& s : sats) res.satellites.push_back(std::move(s.history));
  return res;
}

RunResult run_standalone(const Scenario& sc, int index, const RunOptions& opt) {
  Scenario single = sc;
  SatelliteSpec spec = sc.satellites.at(static_cast<std::size_t>(index));
  if (spec.stream < 0) spec.stream = index;
  single.satellites = {spec};
  return run_constellation(single, opt);
}

}  // namespace sbgnc
