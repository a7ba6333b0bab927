#pragma once

#include <optional>
#include <vector>

#include "sbgnc/core.hpp"

namespace sbgnc {

/// minimize 2 c'x + x'Hx  subject to  lb <= x <= ub.
struct QpProblem {
  MatX H;
  VecX c;
  VecX lb;
  VecX ub;

  double objective(const VecX& x) const { return 2.0 * c.dot(x) + x.dot(H * x); }
  void validate() const;
};

struct KktResiduals {
  double stationarity = 0.0;     // scaled by max(1, |c|_inf, |H|_inf |x|_inf)
  double primal = 0.0;
  double complementarity = 0.0;
};

struct QpSolution {
  VecX x;
  std::vector<int> active;  // -1 lower, +1 upper, 0 free
  KktResiduals kkt;
  double objective = 0.0;
  int iterations = 0;
};

struct QpOptions {
  double tol = 1e-10;
  int max_iter = 1000;
};

/// Residuals computed from x alone, independent of the solver's bookkeeping.
KktResiduals kkt_residuals(const QpProblem& prob, const VecX& x);

QpSolution solve_box_qp(const QpProblem& prob, const QpOptions& opt = {},
                        const std::optional<VecX>& warm_start = std::nullopt);

}  // namespace sbgnc
