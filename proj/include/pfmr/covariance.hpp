#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfmr/dataset.hpp"
#include "pfmr/structure.hpp"

namespace pfmr {

/// Raised when an M-step produces a numerically singular or otherwise
/// unusable quantity. The EM driver catches it and discards the start.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

/// Per-component weighted residual scatter statistics feeding the
/// covariance M-step: W_g = sum_i tau_ig r_i r_i' and n_g = sum_i tau_ig.
struct ScatterInput {
  std::vector<Matrix> W;  // G symmetric PSD d x d matrices
  Vector n;               // G component weights
  double N = 0.0;         // total weight

  Eigen::Index groups() const { return static_cast<Eigen::Index>(W.size()); }
  Eigen::Index dim() const { return W.empty() ? 0 : W.front().rows(); }
};

namespace detail {

inline Matrix sym(const Matrix& M) { return 0.5 * (M + M.transpose()); }

/// Eigen-decomposition with eigenvalues sorted descending.
inline void eigh_desc(const Matrix& W, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W));
  if (es.info() != Eigen::Success)
    throw DegeneracyError("eigen-decomposition failed");
  values = es.eigenvalues().reverse();
  vectors = es.eigenvectors().rowwise().reverse();
}

inline Matrix det_normalized(const Matrix& M) {
  const double det = M.determinant();
  if (!(det > 0.0)) throw DegeneracyError("non-positive determinant in shape update");
  return M / std::pow(det, 1.0 / M.rows());
}

inline Vector det_normalized(const Vector& v) {
  const double logdet = v.array().log().sum();
  if (!std::isfinite(logdet)) throw DegeneracyError("non-positive shape entries");
  return v / std::exp(logdet / v.size());
}

}  // namespace detail

/// The quantity the constrained M-step maximizes,
/// sum_g [-n_g log|Sigma_g| - tr(Sigma_g^{-1} W_g)].
inline double covariance_objective(const std::vector<Matrix>& sigmas,
                                   const ScatterInput& s) {
  double val = 0.0;
  for (Eigen::Index g = 0; g < s.groups(); ++g) {
    Eigen::LLT<Matrix> llt(detail::sym(sigmas[g]));
    if (llt.info() != Eigen::Success)
      return -std::numeric_limits<double>::infinity();
    const Matrix L = llt.matrixL();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    val += -s.n[g] * logdet - llt.solve(s.W[g]).trace();
  }
  return val;
}

struct CovarianceOptions {
  double inner_tol = 1e-8;
  int inner_max_iter = 200;
  /// Relative eigenvalue threshold below which a result counts as singular.
  double singular_ratio = 1e-12;
};

namespace detail {

inline void check_nondegenerate(const std::vector<Matrix>& sigmas,
                                double singular_ratio) {
  for (const auto& S : sigmas) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(S));
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > singular_ratio * std::max(hi, 0.0)) || !(hi > 0.0))
      throw DegeneracyError("singular covariance estimate");
  }
}

/// Shared-orientation structures EVE/VVE: minimize sum_g tr(W_g D E_g D')
/// over orthogonal D by a majorize-minimize sweep. E_g collects the
/// inverse shape (and volume) weights.
inline Matrix update_shared_orientation(const std::vector<Matrix>& W,
                                        const std::vector<Vector>& inv_weights,
                                        Matrix D, int sweeps) {
  const Eigen::Index d = D.rows();
  const Eigen::Index G = static_cast<Eigen::Index>(W.size());
  std::vector<double> omega(G);
  for (Eigen::Index g = 0; g < G; ++g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W[g]));
    omega[g] = es.eigenvalues().maxCoeff();
  }
  for (int it = 0; it < sweeps; ++it) {
    Matrix F = Matrix::Zero(d, d);
    for (Eigen::Index g = 0; g < G; ++g)
      F += 2.0 * (W[g] - omega[g] * Matrix::Identity(d, d)) * D *
           inv_weights[g].asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(-F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix Dn = svd.matrixU() * svd.matrixV().transpose();
    const double step = (Dn - D).norm();
    D = Dn;
    if (step < 1e-10) break;
  }
  return D;
}

}  // namespace detail

/// Maximum-likelihood covariance M-step under the given structure.
/// Closed forms where available, short fixed-point iterations otherwise.
inline std::vector<Matrix> estimate_sigma(CovarianceStructure code,
                                          const ScatterInput& s,
                                          const CovarianceOptions& opt = {}) {
  using detail::det_normalized;
  const Eigen::Index G = s.groups();
  const Eigen::Index d = s.dim();
  if (G < 1 || d < 1) throw std::invalid_argument("estimate_sigma: empty input");
  const double N = s.N;
  const Matrix I = Matrix::Identity(d, d);
  std::vector<Matrix> out(G);

  auto finish = [&](std::vector<Matrix> sigmas) {
    detail::check_nondegenerate(sigmas, opt.singular_ratio);
    return sigmas;
  };

  switch (code) {
    case CovarianceStructure::EII: {
      double tr = 0.0;
      for (const auto& Wg : s.W) tr += Wg.trace();
      const double lambda = tr / (N * d);
      for (auto& S : out) S = lambda * I;
      return finish(std::move(out));
    }
    case CovarianceStructure::VII: {
      for (Eigen::Index g = 0; g < G; ++g)
        out[g] = (s.W[g].trace() / (s.n[g] * d)) * I;
      return finish(std::move(out));
    }
    case CovarianceStructure::EEI: {
      Vector diag = Vector::Zero(d);
      for (const auto& Wg : s.W) diag += Wg.diagonal();
      diag /= N;
      for (auto& S : out) S = diag.asDiagonal();
      return finish(std::move(out));
    }
    case CovarianceStructure::VVI: {
      for (Eigen::Index g = 0; g < G; ++g)
        out[g] = (s.W[g].diagonal() / s.n[g]).asDiagonal();
      return finish(std::move(out));
    }
    case CovarianceStructure::EVI: {
      double lambda = 0.0;
      std::vector<Vector> shapes(G);
      for (Eigen::Index g = 0; g < G; ++g) {
        shapes[g] = det_normalized(Vector(s.W[g].diagonal()));
        lambda += (s.W[g].diagonal().array() / shapes[g].array()).sum();
      }
      lambda /= N * d;
      for (Eigen::Index g = 0; g < G; ++g)
        out[g] = lambda * shapes[g].asDiagonal();
      return finish(std::move(out));
    }
    case CovarianceStructure::VEI: {
      Vector lambda(G);
      for (Eigen::Index g = 0; g < G; ++g)
        lambda[g] = s.W[g].trace() / (s.n[g] * d);
      double prev = -std::numeric_limits<double>::infinity();
      for (int it = 0; it < opt.inner_max_iter; ++it) {
        Vector diag = Vector::Zero(d);
        for (Eigen::Index g = 0; g < G; ++g)
          diag += s.W[g].diagonal() / lambda[g];
        const Vector shape = det_normalized(diag);
        for (Eigen::Index g = 0; g < G; ++g)
          lambda[g] = (s.W[g].diagonal().array() / shape.array()).sum() / (s.n[g] * d);
        for (Eigen::Index g = 0; g < G; ++g)
          out[g] = lambda[g] * shape.asDiagonal();
        const double obj = covariance_objective(out, s);
        if (std::abs(obj - prev) < opt.inner_tol * (1.0 + std::abs(obj))) break;
        prev = obj;
      }
      return finish(std::move(out));
    }
    case CovarianceStructure::EEE: {
      Matrix S = Matrix::Zero(d, d);
      for (const auto& Wg : s.W) S += Wg;
      S /= N;
      for (auto& o : out) o = S;
      return finish(std::move(out));
    }
    case CovarianceStructure::VVV: {
      for (Eigen::Index g = 0; g < G; ++g) out[g] = s.W[g] / s.n[g];
      return finish(std::move(out));
    }
    case CovarianceStructure::VEE: {
      Vector lambda(G);
      for (Eigen::Index g = 0; g < G; ++g)
        lambda[g] = s.W[g].trace() / (s.n[g] * d);
      double prev = -std::numeric_limits<double>::infinity();
      for (int it = 0; it < opt.inner_max_iter; ++it) {
        Matrix C = Matrix::Zero(d, d);
        for (Eigen::Index g = 0; g < G; ++g) C += s.W[g] / lambda[g];
        C = det_normalized(detail::sym(C));
        Eigen::LLT<Matrix> llt(C);
        if (llt.info() != Eigen::Success)
          throw DegeneracyError("VEE: indefinite shared shape");
        for (Eigen::Index g = 0; g < G; ++g)
          lambda[g] = llt.solve(s.W[g]).trace() / (s.n[g] * d);
        for (Eigen::Index g = 0; g < G; ++g) out[g] = lambda[g] * C;
        const double obj = covariance_objective(out, s);
        if (std::abs(obj - prev) < opt.inner_tol * (1.0 + std::abs(obj))) break;
        prev = obj;
      }
      return finish(std::move(out));
    }
    case CovarianceStructure::EVV: {
      double lambda = 0.0;
      std::vector<Matrix> shapes(G);
      for (Eigen::Index g = 0; g < G; ++g) {
        const double det = s.W[g].determinant();
        if (!(det > 0.0)) throw DegeneracyError("EVV: singular scatter");
        shapes[g] = s.W[g] / std::pow(det, 1.0 / d);
        lambda += std::pow(det, 1.0 / d);
      }
      lambda /= N;
      for (Eigen::Index g = 0; g < G; ++g) out[g] = lambda * shapes[g];
      return finish(std::move(out));
    }
    case CovarianceStructure::EEV: {
      Vector accum = Vector::Zero(d);
      std::vector<Matrix> vecs(G);
      for (Eigen::Index g = 0; g < G; ++g) {
        Vector omega;
        detail::eigh_desc(s.W[g], omega, vecs[g]);
        accum += omega;
      }
      accum /= N;
      for (Eigen::Index g = 0; g < G; ++g)
        out[g] = vecs[g] * accum.asDiagonal() * vecs[g].transpose();
      return finish(std::move(out));
    }
    case CovarianceStructure::VEV: {
      std::vector<Vector> omegas(G);
      std::vector<Matrix> vecs(G);
      Vector lambda(G);
      for (Eigen::Index g = 0; g < G; ++g) {
        detail::eigh_desc(s.W[g], omegas[g], vecs[g]);
        lambda[g] = s.W[g].trace() / (s.n[g] * d);
      }
      double prev = -std::numeric_limits<double>::infinity();
      for (int it = 0; it < opt.inner_max_iter; ++it) {
        Vector A = Vector::Zero(d);
        for (Eigen::Index g = 0; g < G; ++g) A += omegas[g] / lambda[g];
        A = det_normalized(A);
        for (Eigen::Index g = 0; g < G; ++g)
          lambda[g] = (omegas[g].array() / A.array()).sum() / (s.n[g] * d);
        for (Eigen::Index g = 0; g < G; ++g)
          out[g] = lambda[g] * vecs[g] * A.asDiagonal() * vecs[g].transpose();
        const double obj = covariance_objective(out, s);
        if (std::abs(obj - prev) < opt.inner_tol * (1.0 + std::abs(obj))) break;
        prev = obj;
      }
      return finish(std::move(out));
    }
    case CovarianceStructure::EVE:
    case CovarianceStructure::VVE: {
      const bool varying_volume = code == CovarianceStructure::VVE;
      // the coordinate descent over (shapes, volumes, orientation) can
      // stall in an orientation basin; start it from the pooled and each
      // per-group eigenbasis and keep the best objective
      std::vector<Matrix> inits;
      {
        Matrix pooled = Matrix::Zero(d, d);
        for (const auto& Wg : s.W) pooled += Wg;
        Vector ignored;
        Matrix D0;
        detail::eigh_desc(pooled, ignored, D0);
        inits.push_back(D0);
        for (Eigen::Index g = 0; g < G; ++g) {
          detail::eigh_desc(s.W[g], ignored, D0);
          inits.push_back(D0);
        }
      }
      double best_obj = -std::numeric_limits<double>::infinity();
      std::vector<Matrix> best;
      for (const Matrix& D0 : inits) try {
        Matrix D = D0;
        std::vector<Vector> shapes(G, Vector::Ones(d));
        Vector lambda = Vector::Ones(G);
        double prev = -std::numeric_limits<double>::infinity();
        for (int it = 0; it < opt.inner_max_iter; ++it) {
          for (Eigen::Index g = 0; g < G; ++g) {
            Vector diag = (D.transpose() * s.W[g] * D).diagonal();
            shapes[g] = det_normalized(Vector(diag.cwiseMax(1e-300)));
          }
          if (varying_volume) {
            for (Eigen::Index g = 0; g < G; ++g) {
              const Vector diag = (D.transpose() * s.W[g] * D).diagonal();
              lambda[g] = (diag.array() / shapes[g].array()).sum() / (s.n[g] * d);
            }
          } else {
            double acc = 0.0;
            for (Eigen::Index g = 0; g < G; ++g) {
              const Vector diag = (D.transpose() * s.W[g] * D).diagonal();
              acc += (diag.array() / shapes[g].array()).sum();
            }
            lambda.setConstant(acc / (N * d));
          }
          std::vector<Vector> inv_weights(G);
          for (Eigen::Index g = 0; g < G; ++g)
            inv_weights[g] = (lambda[g] * shapes[g].array()).inverse().matrix();
          D = detail::update_shared_orientation(s.W, inv_weights, D, 10);
          for (Eigen::Index g = 0; g < G; ++g)
            out[g] = lambda[g] * D * shapes[g].asDiagonal() * D.transpose();
          const double obj = covariance_objective(out, s);
          if (std::abs(obj - prev) < opt.inner_tol * (1.0 + std::abs(obj))) {
            prev = obj;
            break;
          }
          prev = obj;
        }
        if (std::isfinite(prev) && (best.empty() || prev > best_obj)) {
          best_obj = prev;
          best = out;
        }
      } catch (const DegeneracyError&) {
        // this start collapsed; the remaining ones may still succeed
      }
      if (best.empty())
        throw DegeneracyError("shared-orientation estimate degenerated");
      out = std::move(best);
      return finish(std::move(out));
    }
  }
  throw std::invalid_argument("unknown covariance structure");
}

/// True iff the set of SPD matrices satisfies the structure's equality
/// and diagonality constraints within a relative tolerance.
inline bool constraint_check(CovarianceStructure code,
                             const std::vector<Matrix>& sigmas,
                             double rel_tol = 1e-8) {
  if (sigmas.empty()) throw std::invalid_argument("constraint_check: empty set");
  const Eigen::Index d = sigmas.front().rows();
  const Eigen::Index G = static_cast<Eigen::Index>(sigmas.size());
  double scale = 0.0;
  for (const auto& S : sigmas) scale = std::max(scale, S.norm());
  const double tol = rel_tol * std::max(scale, 1e-300);

  auto all_diagonal = [&] {
    for (const auto& S : sigmas)
      if ((S - Matrix(S.diagonal().asDiagonal())).norm() > tol) return false;
    return true;
  };
  auto all_spherical = [&] {
    for (const auto& S : sigmas)
      if ((S - (S.trace() / d) * Matrix::Identity(d, d)).norm() > tol) return false;
    return true;
  };
  auto all_equal = [&] {
    for (Eigen::Index g = 1; g < G; ++g)
      if ((sigmas[g] - sigmas[0]).norm() > tol) return false;
    return true;
  };
  auto volume = [&](const Matrix& S) {
    return std::pow(S.determinant(), 1.0 / d);
  };
  auto equal_volume = [&] {
    const double v0 = volume(sigmas[0]);
    for (Eigen::Index g = 1; g < G; ++g)
      if (std::abs(volume(sigmas[g]) - v0) > rel_tol * std::abs(v0)) return false;
    return true;
  };
  auto proportional = [&] {
    // equal det-normalized matrices
    const Matrix C0 = sigmas[0] / volume(sigmas[0]);
    for (Eigen::Index g = 1; g < G; ++g)
      if ((sigmas[g] / volume(sigmas[g]) - C0).norm() > rel_tol * C0.norm())
        return false;
    return true;
  };
  auto commuting = [&] {
    // symmetric matrices share an orthogonal eigenbasis iff they commute
    for (Eigen::Index g = 0; g < G; ++g)
      for (Eigen::Index h = g + 1; h < G; ++h)
        if ((sigmas[g] * sigmas[h] - sigmas[h] * sigmas[g]).norm() >
            rel_tol * sigmas[g].norm() * sigmas[h].norm())
          return false;
    return true;
  };
  auto sorted_eigs = [&](const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(detail::sym(S));
    return Vector(es.eigenvalues());
  };
  auto equal_shape = [&] {
    // equal det-normalized eigenvalue profiles
    const Vector e0 = sorted_eigs(sigmas[0]) / volume(sigmas[0]);
    for (Eigen::Index g = 1; g < G; ++g) {
      const Vector eg = sorted_eigs(sigmas[g]) / volume(sigmas[g]);
      if ((eg - e0).norm() > rel_tol * e0.norm()) return false;
    }
    return true;
  };

  switch (code) {
    case CovarianceStructure::EII: return all_spherical() && all_equal();
    case CovarianceStructure::VII: return all_spherical();
    case CovarianceStructure::EEI: return all_diagonal() && all_equal();
    case CovarianceStructure::VEI: return all_diagonal() && proportional();
    case CovarianceStructure::EVI: return all_diagonal() && equal_volume();
    case CovarianceStructure::VVI: return all_diagonal();
    case CovarianceStructure::EEE: return all_equal();
    case CovarianceStructure::VEE: return proportional();
    case CovarianceStructure::EVE: return commuting() && equal_volume() ;
    case CovarianceStructure::VVE: return commuting();
    case CovarianceStructure::EEV: {
      const Vector e0 = sorted_eigs(sigmas[0]);
      for (Eigen::Index g = 1; g < G; ++g)
        if ((sorted_eigs(sigmas[g]) - e0).norm() > rel_tol * e0.norm())
          return false;
      return true;
    }
    case CovarianceStructure::VEV: return equal_shape();
    case CovarianceStructure::EVV: return equal_volume();
    case CovarianceStructure::VVV: return true;
  }
  throw std::invalid_argument("unknown covariance structure");
}

}  // namespace pfmr
