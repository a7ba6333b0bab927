#include "sbgnc/mpc.hpp"

#include <cmath>

namespace sbgnc {

void MpcConfig::validate() const {
  if (N < 1 || !(dt > 0.0) || !(gamma > 0.0) || !(u_max > 0.0) || stm_substeps < 1) {
    throw ConfigError("invalid MPC configuration");
  }
}

Mat6 jacobian_x(const RateFn& f, const Vec6& x, const Vec3& u, double t, const Vec6& floor) {
  Mat6 A;
  for (int i = 0; i < 6; ++i) {
    const double h = std::max(1e-6 * std::abs(x[i]), floor[i]);
    Vec6 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    A.col(i) = (f(xp, u, t) - f(xm, u, t)) / (xp[i] - xm[i]);
  }
  if (!A.allFinite()) throw NumericalError("non-finite state Jacobian");
  return A;
}

Mat63 jacobian_u(const RateFn& f, const Vec6& x, const Vec3& u, double t, double u_scale) {
  Mat63 B;
  for (int j = 0; j < 3; ++j) {
    Vec3 up = u, um = u;
    up[j] += u_scale;
    um[j] -= u_scale;
    B.col(j) = (f(x, up, t) - f(x, um, t)) / (up[j] - um[j]);
  }
  if (!B.allFinite()) throw NumericalError("non-finite input Jacobian");
  return B;
}

LinearModelFn linearize(RateFn f, std::function<Vec6(double)> x_bar, std::function<Vec3(double)> u_bar,
                        std::function<Vec6(double)> x_bar_rate, const Vec6& floor, double u_scale,
                        std::optional<Mat63> exact_B) {
  return [=](double t) {
    const Vec6 x = x_bar(t);
    const Vec3 u = u_bar(t);
    LinearModel m;
    m.A = jacobian_x(f, x, u, t, floor);
    m.B = exact_B ? *exact_B : jacobian_u(f, x, u, t, u_scale);
    if (x_bar_rate) m.drift = f(x, u, t) - x_bar_rate(t);
    return m;
  };
}

LtvBlocks integrate_stm(const LinearModelFn& model, double t0, double dt, int N, int substeps) {
  using Aug = Eigen::Matrix<double, 6, 10>;
  LtvBlocks out;
  const double h = dt / substeps;
  LinearModel m_start = model(t0);
  for (int k = 0; k < N; ++k) {
    const double ta = t0 + k * dt;
    Aug M = Aug::Zero();
    M.leftCols<6>().setIdentity();
    auto rhs = [](const LinearModel& m, const Aug& Y) {
      Aug d = m.A * Y;
      d.block<6, 3>(0, 6) += m.B;
      d.col(9) += m.drift;
      return d;
    };
    for (int s = 0; s < substeps; ++s) {
      const double t = ta + s * h;
      const LinearModel m_mid = model(t + 0.5 * h);
      const LinearModel m_end = model(s + 1 == substeps ? ta + dt : t + h);
      const Aug k1 = rhs(m_start, M);
      const Aug k2 = rhs(m_mid, M + 0.5 * h * k1);
      const Aug k3 = rhs(m_mid, M + 0.5 * h * k2);
      const Aug k4 = rhs(m_end, M + h * k3);
      M += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      m_start = m_end;
    }
    if (!M.allFinite()) throw NumericalError("non-finite state transition matrix");
    out.Phi.push_back(M.leftCols<6>());
    out.Gamma.push_back(M.block<6, 3>(0, 6));
    out.drift.push_back(M.col(9));
  }
  return out;
}

StackedLtv build_stacks(const LtvBlocks& b) {
  const int N = static_cast<int>(b.Phi.size());
  if (N < 1 || static_cast<int>(b.Gamma.size()) != N || static_cast<int>(b.drift.size()) != N) {
    throw DomainError("inconsistent LTV block counts");
  }
  StackedLtv s;
  s.D.resize(6 * N, 6);
  s.G = MatX::Zero(6 * N, 3 * N);
  s.dx_bar.resize(6 * N);
  Mat6 cum = Mat6::Identity();
  Vec6 dx = Vec6::Zero();
  for (int k = 0; k < N; ++k) {
    cum = b.Phi[k] * cum;
    s.D.block<6, 6>(6 * k, 0) = cum;
    dx = b.Phi[k] * dx + b.drift[k];
    s.dx_bar.segment<6>(6 * k) = dx;
  }
  for (int i = 0; i < N; ++i) {
    Mat63 P = b.Gamma[i];
    for (int k = i; k < N; ++k) {
      s.G.block<6, 3>(6 * k, 3 * i) = P;
      if (k + 1 < N) P = b.Phi[k + 1] * P;
    }
  }
  return s;
}

MpcQp assemble_qp(const StackedLtv& s, const Vec6& dx0, double gamma, const Mat6& Px, const VecX& u_bar_S,
                  double u_max, bool nullify_out_of_plane) {
  const Eigen::Index N = s.D.rows() / 6;
  const Eigen::Index nu = 3 * N;
  if (s.G.cols() != nu || u_bar_S.size() != nu) throw DomainError("stacked control size mismatch");

  MatX PG(6 * N, nu);
  VecX Pr(6 * N);
  const VecX free_resp = s.D * dx0 + s.dx_bar;
  for (Eigen::Index k = 0; k < N; ++k) {
    PG.middleRows<6>(6 * k) = Px * s.G.middleRows<6>(6 * k);
    Pr.segment<6>(6 * k) = Px * free_resp.segment<6>(6 * k);
  }
  MatX H = gamma * s.G.transpose() * PG;
  H.diagonal().array() += 1.0;
  H = 0.5 * (H + H.transpose()).eval();
  const VecX c = gamma * s.G.transpose() * Pr;

  MpcQp out;
  out.fixed = VecX::Zero(nu);
  std::vector<int> fixed_idx;
  for (Eigen::Index i = 0; i < nu; ++i) {
    if (nullify_out_of_plane && i % 3 == 2) {
      out.fixed[i] = -u_bar_S[i];
      fixed_idx.push_back(static_cast<int>(i));
    } else {
      out.free_vars.push_back(static_cast<int>(i));
    }
  }
  const Eigen::Index nf = static_cast<Eigen::Index>(out.free_vars.size());
  out.qp.H.resize(nf, nf);
  out.qp.c.resize(nf);
  out.qp.lb.resize(nf);
  out.qp.ub.resize(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    const int ia = out.free_vars[a];
    double ca = c[ia];
    for (int j : fixed_idx) ca += H(ia, j) * out.fixed[j];
    out.qp.c[a] = ca;
    out.qp.lb[a] = -u_max - u_bar_S[ia];
    out.qp.ub[a] = u_max - u_bar_S[ia];
    for (Eigen::Index b = 0; b < nf; ++b) out.qp.H(a, b) = H(ia, out.free_vars[b]);
  }
  return out;
}

VecX expand_solution(const MpcQp& m, const VecX& x) {
  VecX du = m.fixed;
  for (std::size_t a = 0; a < m.free_vars.size(); ++a) du[m.free_vars[a]] = x[static_cast<Eigen::Index>(a)];
  return du;
}

double stacked_cost(const StackedLtv& s, const Vec6& dx0, const VecX& du, double gamma, const Mat6& Px) {
  const VecX dx = s.D * dx0 + s.G * du + s.dx_bar;
  double j = du.squaredNorm();
  for (Eigen::Index k = 0; k < dx.size() / 6; ++k) {
    const Vec6 e = dx.segment<6>(6 * k);
    j += gamma * e.dot(Px * e);
  }
  return j;
}

namespace {

std::optional<VecX> reduce_warm_start(const MpcQp& m, const std::optional<VecX>& warm) {
  if (!warm || warm->size() != static_cast<Eigen::Index>(m.free_vars.size())) return std::nullopt;
  return warm;
}

}  // namespace

Mat6 orbit_weight(const Mat6& Px, double a_target) {
  Vec6 scale = Vec6::Ones();
  scale[0] = 1.0 / a_target;
  return scale.asDiagonal() * Px * scale.asDiagonal();
}

OrbitMpcResult mpc_step_orbit(const Mee& estimate, const GravityModel& gravity, double a_target, double t0,
                              const MpcConfig& cfg, const AsteroidModel& asteroid, const std::optional<VecX>& warm_start) {
  cfg.validate();
  OrbitMpcResult res;
  res.reference = orbit_reference(estimate, gravity, a_target, t0, cfg.N * cfg.dt, cfg.N, asteroid);
  const OrbitReference& ref = res.reference;

  RateFn f = [&](const Vec6& x, const Vec3& u, double t) { return orbit_model_rates(x, t, gravity, asteroid, u); };
  Vec6 floor;
  floor << 1e-3, 1e-8, 1e-8, 1e-8, 1e-8, 1e-8;
  const LinearModelFn lin = linearize(
      f, [&](double t) { return ref.state(t); }, [&](double t) { return ref.control(t); }, nullptr, floor,
      cfg.u_max);
  const StackedLtv stacks = build_stacks(integrate_stm(lin, t0, cfg.dt, cfg.N, cfg.stm_substeps));

  VecX u_bar(3 * cfg.N);
  for (int k = 0; k < cfg.N; ++k) u_bar.segment<3>(3 * k) = ref.average_control(t0 + k * cfg.dt, t0 + (k + 1) * cfg.dt);
  const Vec6 dx0 = estimate.vec() - ref.state(t0);

  res.problem = assemble_qp(stacks, dx0, cfg.gamma, orbit_weight(cfg.Px, a_target), u_bar, cfg.u_max,
                            cfg.nullify_out_of_plane);
  res.qp = solve_box_qp(res.problem.qp, {}, reduce_warm_start(res.problem, warm_start));
  res.plan = u_bar + expand_solution(res.problem, res.qp.x);
  res.command = res.plan.head<3>();
  return res;
}

AttitudeMpcResult mpc_step_attitude(const Vec3& sigma_bo, const Vec3& omega, const OrbitReference& orbit_ref,
                                    const GravityModel& gravity, const Vec3& sigma_target, double t0,
                                    const MpcConfig& cfg, const SpacecraftConfig& sc, const AsteroidModel& asteroid,
                                    const std::optional<VecX>& warm_start) {
  cfg.validate();
  const AttitudeReference aref = attitude_reference(orbit_ref, sigma_target, gravity.mu());
  const Mat3 J_inv = sc.J.inverse();
  RateFn f = [&](const Vec6& x, const Vec3& u, double t) {
    return attitude_bo_rates(x, t, u, Mee::from(orbit_ref.state(t)), orbit_ref.normal_accel(t), gravity, sc, J_inv,
                             asteroid);
  };
  Mat63 B = Mat63::Zero();
  B.bottomRows<3>() = J_inv;
  Vec6 floor;
  floor << 1e-7, 1e-7, 1e-7, 1e-10, 1e-10, 1e-10;
  const LinearModelFn lin = linearize(
      f, [&](double t) { return aref.state(t); }, [](double) { return Vec3::Zero(); },
      [&](double t) { return aref.rate(t); }, floor, cfg.u_max, B);

  AttitudeMpcResult res;
  res.stacks = build_stacks(integrate_stm(lin, t0, cfg.dt, cfg.N, cfg.stm_substeps));
  const Vec6 ref0 = aref.state(t0);
  res.dx0 << sigma_bo - ref0.head<3>(), omega - ref0.tail<3>();
  const VecX u_bar = VecX::Zero(3 * cfg.N);
  res.problem = assemble_qp(res.stacks, res.dx0, cfg.gamma, cfg.Px, u_bar, cfg.u_max, cfg.nullify_out_of_plane);
  res.qp = solve_box_qp(res.problem.qp, {}, reduce_warm_start(res.problem, warm_start));
  res.plan = expand_solution(res.problem, res.qp.x);
  res.command = res.plan.head<3>();
  return res;
}

}  // namespace sbgnc
