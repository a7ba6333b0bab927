#pragma once

#include <optional>
#include <string>

#include "sbgnc/core.hpp"

namespace sbgnc {

struct GaussianState {
  VecX mean;
  MatX cov;
};

struct UkfParams {
  double alpha = 0.98;  // process-noise fading factor
  double theta = 1e-3;
  double beta = 2.0;
  std::optional<double> lambda_spread;  // defaults to (theta^2 - 1) n

  double spread(int n) const { return lambda_spread ? *lambda_spread : (theta * theta - 1.0) * n; }
};

struct UkfWeights {
  VecX wm;
  VecX wc;
  double n_plus_lambda = 0.0;
};

/// Weights for sigma points ordered [0, +1..+n, -1..-n].
inline UkfWeights weights(const UkfParams& p, int n) {
  const double nl = n + p.spread(n);
  if (!(nl > 0.0) || n < 1) throw DomainError("UKF spread parameter gives n + lambda <= 0");
  UkfWeights w;
  w.n_plus_lambda = nl;
  w.wm = VecX::Constant(2 * n + 1, 1.0 / (2.0 * nl));
  w.wc = w.wm;
  w.wm[0] = p.spread(n) / nl;
  w.wc[0] = w.wm[0] + (1.0 - p.theta * p.theta + p.beta);
  return w;
}

/// Lower-triangular factor of a PSD matrix with one jitter retry.
inline MatX psd_sqrt(const MatX& A) {
  if (A.isZero(0.0)) return MatX::Zero(A.rows(), A.cols());
  Eigen::LLT<MatX> llt(A);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  MatX B = A;
  B.diagonal() += 1e-12 * A.diagonal().cwiseAbs();
  llt.compute(B);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance factorization failed after jitter");
  return llt.matrixL();
}

/// Columns are the 2n+1 sigma points.
inline MatX sigma_points(const GaussianState& g, const UkfParams& p) {
  const int n = static_cast<int>(g.mean.size());
  if (g.cov.rows() != n || g.cov.cols() != n) throw DomainError("covariance size mismatch");
  const UkfWeights w = weights(p, n);
  const MatX L = psd_sqrt(w.n_plus_lambda * g.cov);
  MatX chi(n, 2 * n + 1);
  chi.col(0) = g.mean;
  for (int k = 0; k < n; ++k) {
    chi.col(1 + k) = g.mean + L.col(k);
    chi.col(1 + n + k) = g.mean - L.col(k);
  }
  return chi;
}

namespace detail {

/// Centred weighted statistics of the columns of Y around column 0.
struct Spread {
  VecX mean;
  MatX dev;    // columns Y_k - Y_0, k >= 1
  VecX dbar;   // weighted mean deviation
};

inline Spread spread_of(const MatX& Y, const UkfWeights& w) {
  Spread s;
  const Eigen::Index m = Y.cols() - 1;
  s.dev = Y.rightCols(m).colwise() - Y.col(0);
  s.dbar = s.dev * w.wm.tail(m);
  s.mean = Y.col(0) + s.dbar;
  return s;
}

inline MatX cross_cov(const Spread& a, const Spread& b, const UkfWeights& w, const UkfParams& p) {
  const Eigen::Index m = a.dev.cols();
  return a.dev * w.wc.tail(m).asDiagonal() * b.dev.transpose() +
         (p.beta - p.theta * p.theta) * a.dbar * b.dbar.transpose();
}

inline void symmetrize(MatX& A) { A = 0.5 * (A + A.transpose()).eval(); }

}  // namespace detail

struct UkfPrediction {
  GaussianState prior;  // propagated mean and covariance (includes Q_y)
  MatX chi_prop;        // propagated sigma points
};

/// Propagates sigma points through g and forms the predicted state.
template <class G>
UkfPrediction ukf_predict(G&& g, const GaussianState& g0, const MatX& Qy, const UkfParams& p) {
  const int n = static_cast<int>(g0.mean.size());
  if (Qy.rows() != n || Qy.cols() != n) throw DomainError("process noise size mismatch");
  const UkfWeights w = weights(p, n);
  const MatX chi = sigma_points(g0, p);
  UkfPrediction out;
  out.chi_prop.resize(n, chi.cols());
  for (Eigen::Index k = 0; k < chi.cols(); ++k) {
    VecX y = g(VecX(chi.col(k)));
    if (y.size() != n) throw DomainError("process function changed the state dimension");
    out.chi_prop.col(k) = y;
  }
  const detail::Spread sx = detail::spread_of(out.chi_prop, w);
  out.prior.mean = sx.mean;
  out.prior.cov = detail::cross_cov(sx, sx, w, p) + Qy;
  detail::symmetrize(out.prior.cov);
  return out;
}

struct UkfResult {
  GaussianState posterior;
  GaussianState prior;
  MatX Qy_hat;
  VecX z_hat;
  MatX S;
  MatX K;
  VecX innovation;
};

struct DefaultInnovation {
  VecX operator()(const VecX& z, const VecX& z_hat) const { return z - z_hat; }
};

/// One filter step with innovation-driven process-noise estimation.
template <class G, class H, class Innov = DefaultInnovation>
UkfResult ukf_step(G&& g, H&& h, const GaussianState& g0, const VecX& z, const MatX& Qy, const MatX& Qz,
                   const UkfParams& p, Innov&& innov = Innov{}) {
  const int n = static_cast<int>(g0.mean.size());
  const int m = static_cast<int>(z.size());
  if (Qz.rows() != m || Qz.cols() != m) throw DomainError("measurement noise size mismatch");
  const UkfWeights w = weights(p, n);
  UkfPrediction pred = ukf_predict(g, g0, Qy, p);

  // Measurement transform uses the propagated sigma points directly.
  MatX Z(m, pred.chi_prop.cols());
  for (Eigen::Index k = 0; k < Z.cols(); ++k) {
    VecX zk = h(VecX(pred.chi_prop.col(k)));
    if (zk.size() != m) throw DomainError("measurement function size mismatch");
    Z.col(k) = zk;
  }
  const detail::Spread sx = detail::spread_of(pred.chi_prop, w);
  const detail::Spread sz = detail::spread_of(Z, w);

  UkfResult r;
  r.prior = pred.prior;
  r.z_hat = sz.mean;
  r.S = detail::cross_cov(sz, sz, w, p) + Qz;
  detail::symmetrize(r.S);
  const MatX Hxz = detail::cross_cov(sx, sz, w, p);

  Eigen::LDLT<MatX> ldlt(r.S);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    throw NumericalError("innovation covariance is not invertible");
  }
  r.K = ldlt.solve(Hxz.transpose()).transpose();
  r.innovation = innov(z, r.z_hat);
  const VecX w_hat = r.K * r.innovation;

  r.posterior.mean = pred.prior.mean + w_hat;
  r.posterior.cov = pred.prior.cov - r.K * r.S * r.K.transpose();
  detail::symmetrize(r.posterior.cov);
  if (!r.posterior.mean.allFinite() || !r.posterior.cov.allFinite()) throw NumericalError("UKF update is not finite");
  r.Qy_hat = (1.0 - p.alpha) * w_hat * w_hat.transpose() + p.alpha * Qy;
  return r;
}

}  // namespace sbgnc
