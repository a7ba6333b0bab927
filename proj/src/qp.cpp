#include "sbgnc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbgnc {

void QpProblem::validate() const {
  const Eigen::Index n = c.size();
  if (H.rows() != n || H.cols() != n || lb.size() != n || ub.size() != n) throw DomainError("QP size mismatch");
  if (!H.allFinite() || !c.allFinite()) throw DomainError("QP data is not finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] > ub[i]) throw DomainError("QP bounds are not ordered");
  }
}

namespace {

double gradient_scale(const QpProblem& prob, const VecX& x) {
  const double hn = prob.H.cwiseAbs().rowwise().sum().maxCoeff();
  const double xn = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  const double cn = prob.c.size() ? prob.c.cwiseAbs().maxCoeff() : 0.0;
  return std::max({1.0, cn, hn * xn});
}

bool at_bound(double x, double b) { return x == b || std::abs(x - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// Solves H_FF x_F = rhs with diagonal equilibration and iterative refinement.
VecX solve_free(const MatX& A, const VecX& rhs) {
  const VecX d = A.diagonal().cwiseSqrt().cwiseInverse();
  const MatX As = d.asDiagonal() * A * d.asDiagonal();
  Eigen::LLT<MatX> llt(As);
  if (llt.info() != Eigen::Success) throw NumericalError("QP Hessian is not positive definite");
  VecX x = d.asDiagonal() * llt.solve(d.asDiagonal() * rhs);
  for (int it = 0; it < 2; ++it) {
    const VecX r = rhs - A * x;
    x += d.asDiagonal() * llt.solve(d.asDiagonal() * r);
  }
  return x;
}

}  // namespace

KktResiduals kkt_residuals(const QpProblem& prob, const VecX& x) {
  KktResiduals k;
  const VecX g = prob.H * x + prob.c;
  const double scale = gradient_scale(prob, x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool lo = at_bound(x[i], prob.lb[i]);
    const bool hi = at_bound(x[i], prob.ub[i]);
    double s;
    if (lo && hi) s = 0.0;
    else if (lo) s = std::max(0.0, -g[i]);
    else if (hi) s = std::max(0.0, g[i]);
    else s = std::abs(g[i]);
    k.stationarity = std::max(k.stationarity, s / scale);
    k.primal = std::max({k.primal, prob.lb[i] - x[i], x[i] - prob.ub[i]});
    const double lam_l = std::max(0.0, g[i]), lam_u = std::max(0.0, -g[i]);
    double comp = 0.0;
    if (std::isfinite(prob.lb[i])) comp += lam_l * std::max(0.0, x[i] - prob.lb[i]);
    if (std::isfinite(prob.ub[i])) comp += lam_u * std::max(0.0, prob.ub[i] - x[i]);
    const double range = std::max(1.0, std::isfinite(prob.ub[i] - prob.lb[i]) ? prob.ub[i] - prob.lb[i] : 1.0);
    if (!lo && !hi) comp = 0.0;  // free variables are covered by stationarity
    k.complementarity = std::max(k.complementarity, comp / (scale * range));
  }
  return k;
}

QpSolution solve_box_qp(const QpProblem& prob, const QpOptions& opt, const std::optional<VecX>& warm_start) {
  prob.validate();
  const Eigen::Index n = prob.c.size();
  if (n > 0 && Eigen::LLT<MatX>(prob.H).info() != Eigen::Success)
    throw NumericalError("QP Hessian is not positive definite");
  QpSolution sol;
  VecX x = warm_start ? *warm_start : VecX::Zero(n);
  if (x.size() != n) throw DomainError("warm start size mismatch");
  std::vector<int> state(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) x[i] = 0.0;
    if (x[i] <= prob.lb[i]) {
      x[i] = prob.lb[i];
      state[i] = -1;
    } else if (x[i] >= prob.ub[i]) {
      x[i] = prob.ub[i];
      state[i] = 1;
    }
    if (prob.lb[i] == prob.ub[i]) state[i] = -1;
  }

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    sol.iterations = iter;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (state[i] == 0) free.push_back(i);

    VecX cand = x;
    if (!free.empty()) {
      const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
      MatX A(nf, nf);
      VecX rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        double r = -prob.c[free[a]];
        for (Eigen::Index j = 0; j < n; ++j)
          if (state[j] != 0) r -= prob.H(free[a], j) * x[j];
        rhs[a] = r;
        for (Eigen::Index b = 0; b < nf; ++b) A(a, b) = prob.H(free[a], free[b]);
      }
      const VecX xf = solve_free(A, rhs);
      for (Eigen::Index a = 0; a < nf; ++a) cand[free[a]] = xf[a];
    }

    // Longest feasible step towards the subspace minimizer.
    double step = 1.0;
    Eigen::Index block = -1;
    int block_side = 0;
    for (Eigen::Index i : free) {
      const double d = cand[i] - x[i];
      if (d < 0.0 && cand[i] < prob.lb[i]) {
        const double s = (prob.lb[i] - x[i]) / d;
        if (s < step) {
          step = s;
          block = i;
          block_side = -1;
        }
      } else if (d > 0.0 && cand[i] > prob.ub[i]) {
        const double s = (prob.ub[i] - x[i]) / d;
        if (s < step) {
          step = s;
          block = i;
          block_side = 1;
        }
      }
    }

    if (block >= 0) {
      step = std::max(0.0, step);
      for (Eigen::Index i : free) x[i] += step * (cand[i] - x[i]);
      x[block] = block_side < 0 ? prob.lb[block] : prob.ub[block];
      state[block] = block_side;
      for (Eigen::Index i : free) x[i] = std::clamp(x[i], prob.lb[i], prob.ub[i]);
      continue;
    }

    x = cand;
    const VecX g = prob.H * x + prob.c;
    const double scale = gradient_scale(prob, x);
    Eigen::Index release = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[i] == 0 || prob.lb[i] == prob.ub[i]) continue;
      const double lambda = state[i] < 0 ? g[i] : -g[i];
      if (lambda < -opt.tol * scale) {
        release = i;
        break;
      }
    }
    if (release < 0) {
      sol.x = x;
      sol.active = state;
      sol.kkt = kkt_residuals(prob, x);
      sol.objective = prob.objective(x);
      return sol;
    }
    state[release] = 0;
  }
  throw NumericalError("box QP did not converge within the iteration limit");
}

}  // namespace sbgnc
