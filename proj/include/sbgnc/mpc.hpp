#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sbgnc/dynamics.hpp"
#include "sbgnc/guidance.hpp"
#include "sbgnc/qp.hpp"

namespace sbgnc {

using Mat63 = Eigen::Matrix<double, 6, 3>;

struct MpcConfig {
  int N = 40;
  double dt = 360.0;
  double gamma = 1e3;
  Mat6 Px = (Vec6() << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0).finished().asDiagonal();
  double u_max = 0.01;
  bool nullify_out_of_plane = false;
  int stm_substeps = 4;

  void validate() const;
};

/// Continuous linear model about the reference at time t.
struct LinearModel {
  Mat6 A;
  Mat63 B;
  Vec6 drift = Vec6::Zero();
};

using LinearModelFn = std::function<LinearModel(double t)>;

struct LtvBlocks {
  std::vector<Mat6> Phi;
  std::vector<Mat63> Gamma;
  std::vector<Vec6> drift;  // interval drift integrals
};

struct StackedLtv {
  MatX D;       // 6N x 6
  MatX G;       // 6N x 3N
  VecX dx_bar;  // 6N
};

/// Central finite-difference Jacobians of f(x, u, t).
using RateFn = std::function<Vec6(const Vec6& x, const Vec3& u, double t)>;
Mat6 jacobian_x(const RateFn& f, const Vec6& x, const Vec3& u, double t, const Vec6& floor);
Mat63 jacobian_u(const RateFn& f, const Vec6& x, const Vec3& u, double t, double u_scale);

/// Linearized model evaluator around a reference (x_bar(t), u_bar(t)).
LinearModelFn linearize(RateFn f, std::function<Vec6(double)> x_bar, std::function<Vec3(double)> u_bar,
                        std::function<Vec6(double)> x_bar_rate, const Vec6& floor, double u_scale,
                        std::optional<Mat63> exact_B = std::nullopt);

/// Per-interval STMs, input integrals and drift integrals by RK4 on the augmented system.
LtvBlocks integrate_stm(const LinearModelFn& model, double t0, double dt, int N, int substeps);

StackedLtv build_stacks(const LtvBlocks& blocks);

struct MpcQp {
  QpProblem qp;
  std::vector<int> free_vars;  // stacked control indices kept as decision variables
  VecX fixed;                  // stacked control deviation with eliminated entries filled
};

MpcQp assemble_qp(const StackedLtv& stacks, const Vec6& dx0, double gamma, const Mat6& Px, const VecX& u_bar_S,
                  double u_max, bool nullify_out_of_plane);

/// Stacked control deviation from a QP solution.
VecX expand_solution(const MpcQp& m, const VecX& x);

/// Cost sum of gamma dx' Px dx + du' du over the horizon.
double stacked_cost(const StackedLtv& s, const Vec6& dx0, const VecX& du, double gamma, const Mat6& Px);

/// Tracking weight on the orbit error with p measured in units of the target radius.
Mat6 orbit_weight(const Mat6& Px, double a_target);

struct OrbitMpcResult {
  Vec3 command;          // applied over the first interval, orbit frame
  VecX plan;             // total stacked command
  OrbitReference reference;
  QpSolution qp;
  MpcQp problem;
};

OrbitMpcResult mpc_step_orbit(const Mee& estimate, const GravityModel& gravity, double a_target, double t0,
                              const MpcConfig& cfg, const AsteroidModel& asteroid,
                              const std::optional<VecX>& warm_start = std::nullopt);

struct AttitudeMpcResult {
  Vec3 command;  // body torque over the first interval
  VecX plan;
  QpSolution qp;
  MpcQp problem;
  StackedLtv stacks;
  Vec6 dx0;
};

AttitudeMpcResult mpc_step_attitude(const Vec3& sigma_bo, const Vec3& omega, const OrbitReference& orbit_ref,
                                    const GravityModel& gravity, const Vec3& sigma_target, double t0,
                                    const MpcConfig& cfg, const SpacecraftConfig& sc, const AsteroidModel& asteroid,
                                    const std::optional<VecX>& warm_start = std::nullopt);

}  // namespace sbgnc
