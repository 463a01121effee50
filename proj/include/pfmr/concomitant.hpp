#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "pfmr/covariance.hpp"
#include "pfmr/dataset.hpp"

namespace pfmr {

/// Multinomial-logit model of the mixing weights. alpha is G x (q+1)
/// with the first row (baseline component) fixed at zero.
struct ConcomitantModel {
  Matrix alpha;
  bool clamped = false;  // separation guard fired during fitting
};

/// Softmax of alpha * v over components, with max-subtraction.
inline Vector concomitant_weights(const Matrix& alpha, const Vector& v) {
  if (alpha.cols() != v.size())
    throw std::invalid_argument("concomitant_weights: dimension mismatch");
  Vector z = alpha * v;
  z.array() -= z.maxCoeff();
  Vector w = z.array().exp();
  return w / w.sum();
}

/// Row-wise log-softmax of V * alpha' (N x G).
inline Matrix concomitant_log_weights(const Matrix& alpha, const Matrix& V) {
  Matrix Z = V * alpha.transpose();
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const double m = Z.row(i).maxCoeff();
    const double lse = m + std::log((Z.row(i).array() - m).exp().sum());
    Z.row(i).array() -= lse;
  }
  return Z;
}

struct ConcomitantOptions {
  double grad_tol = 1e-6;
  int max_iter = 100;
  double separation_norm = 1e3;
  double ridge = 0.0;  // optional penalty on non-baseline coefficients
};

namespace detail {

inline double soft_logit_objective(const Matrix& alpha, const Matrix& V,
                                   const Matrix& tau, double ridge) {
  const Matrix logp = concomitant_log_weights(alpha, V);
  double obj = (tau.array() * logp.array()).sum();
  if (ridge > 0.0) obj -= 0.5 * ridge * alpha.bottomRows(alpha.rows() - 1).squaredNorm();
  return obj;
}

}  // namespace detail

/// Maximize sum_i sum_g tau_ig log pi_ig(v_i, alpha) over alpha with the
/// baseline row pinned at zero. Newton iterations with step-halving; a
/// norm clamp guards against separation when targets approach 0/1.
inline ConcomitantModel fit_concomitant_soft(const Matrix& V, const Matrix& tau,
                                             const Matrix& warm_start = Matrix(),
                                             const ConcomitantOptions& opt = {}) {
  const Eigen::Index N = V.rows();
  const Eigen::Index q1 = V.cols();
  const Eigen::Index G = tau.cols();
  if (tau.rows() != N) throw std::invalid_argument("fit_concomitant_soft: row mismatch");
  if (G < 1) throw std::invalid_argument("fit_concomitant_soft: need G >= 1");

  ConcomitantModel model;
  model.alpha = Matrix::Zero(G, q1);
  if (G == 1) return model;
  if (warm_start.rows() == G && warm_start.cols() == q1) model.alpha = warm_start;
  model.alpha.row(0).setZero();

  {
    // singular design guard
    Eigen::FullPivLU<Matrix> lu(V.transpose() * V);
    lu.setThreshold(1e-10);
    if (lu.rank() < q1) throw DegeneracyError("concomitant design is rank deficient");
  }

  const Eigen::Index k = (G - 1) * q1;
  double obj = detail::soft_logit_objective(model.alpha, V, tau, opt.ridge);

  for (int it = 0; it < opt.max_iter; ++it) {
    const Matrix P = concomitant_log_weights(model.alpha, V).array().exp();

    // gradient over non-baseline rows
    Matrix Gm = (tau - P).transpose() * V;  // G x q1
    if (opt.ridge > 0.0)
      Gm.bottomRows(G - 1) -= opt.ridge * model.alpha.bottomRows(G - 1);
    Vector grad(k);
    for (Eigen::Index g = 1; g < G; ++g)
      grad.segment((g - 1) * q1, q1) = Gm.row(g).transpose();
    if (grad.lpNorm<Eigen::Infinity>() < opt.grad_tol) break;

    // negated Hessian, block (g,h) = sum_i pi_ig (delta_gh - pi_ih) v_i v_i'
    Matrix H = Matrix::Zero(k, k);
    for (Eigen::Index g = 1; g < G; ++g) {
      for (Eigen::Index h = g; h < G; ++h) {
        Vector w;
        if (g == h)
          w = (P.col(g).array() * (1.0 - P.col(g).array())).matrix();
        else
          w = (-P.col(g).array() * P.col(h).array()).matrix();
        Matrix block = V.transpose() * w.asDiagonal() * V;
        H.block((g - 1) * q1, (h - 1) * q1, q1, q1) = block;
        if (h != g) H.block((h - 1) * q1, (g - 1) * q1, q1, q1) = block;
      }
    }
    if (opt.ridge > 0.0) H.diagonal().array() += opt.ridge;

    Eigen::LDLT<Matrix> ldlt(H + 1e-10 * Matrix::Identity(k, k));
    Vector step = ldlt.solve(grad);
    if (!step.allFinite()) step = grad;  // fall back to an ascent step

    double t = 1.0;
    Matrix next = model.alpha;
    double next_obj = obj;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      Matrix cand = model.alpha;
      for (Eigen::Index g = 1; g < G; ++g)
        cand.row(g) += t * step.segment((g - 1) * q1, q1).transpose();
      const double cand_obj = detail::soft_logit_objective(cand, V, tau, opt.ridge);
      if (cand_obj > obj - 1e-12) {
        next = cand;
        next_obj = cand_obj;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
    model.alpha = next;
    obj = next_obj;

    const double norm = model.alpha.norm();
    if (norm > opt.separation_norm) {
      model.alpha *= opt.separation_norm / norm;
      model.clamped = true;
      break;
    }
  }
  return model;
}

}  // namespace pfmr
