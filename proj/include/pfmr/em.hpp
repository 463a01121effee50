#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pfmr/concomitant.hpp"
#include "pfmr/covariance.hpp"
#include "pfmr/dataset.hpp"
#include "pfmr/model.hpp"
#include "pfmr/structure.hpp"

namespace pfmr {

struct EmConfig {
  double epsilon = 1e-5;  // Aitken tolerance
  int max_iter = 1000;
  /// Minimum sum_i tau_ig before an M-step, as a fraction of N.
  /// A component falling below it aborts the run as degenerate.
  double min_component_frac = 0.02;
  /// Absolute override for the minimum component weight; used when set.
  std::optional<double> min_component_weight;
  double gram_condition_limit = 1e12;
  CovarianceOptions covariance;
  ConcomitantOptions concomitant;
};

/// Aitken-acceleration stopping rule on three consecutive log-likelihoods.
/// Stops when the asymptotic estimate is within epsilon of the current
/// value; zero progress stops immediately, divergent acceleration never.
inline bool aitken_stop(double l_prev2, double l_prev, double l_curr,
                        double epsilon) {
  if (l_curr - l_prev == 0.0) return true;
  const double denom = l_prev - l_prev2;
  if (denom == 0.0) return false;
  const double a = (l_curr - l_prev) / denom;
  if (a >= 1.0) return false;
  const double l_asymptotic = l_prev + (l_curr - l_prev) / (1.0 - a);
  return l_asymptotic - l_curr < epsilon;
}

namespace detail {

/// Log multivariate normal density of each residual row, via Cholesky.
inline Vector log_gaussian_rows(const Matrix& resid, const Matrix& sigma) {
  const Eigen::Index d = resid.cols();
  Eigen::LLT<Matrix> llt(sym(sigma));
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("non-positive-definite covariance in density");
  const Matrix L = llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  const Matrix z = L.triangularView<Eigen::Lower>().solve(resid.transpose());
  const Vector maha = z.colwise().squaredNorm();
  constexpr double log2pi = 1.8378770664093454836;
  return (-0.5 * (d * log2pi + logdet + maha.array())).matrix();
}

/// N x G matrix of log(pi_ig * phi(y_i | B_g' x_i, Sigma_g)).
inline Matrix log_weighted_densities(const MixtureModel& model,
                                     const Dataset& data,
                                     const Matrix& concomitant_design) {
  const Eigen::Index N = data.n();
  const int G = model.G;
  Matrix logpi(N, G);
  if (const auto* sw = std::get_if<StaticWeights>(&model.weights)) {
    logpi = sw->pi.array().log().matrix().transpose().replicate(N, 1);
  } else {
    const auto& cw = std::get<ConcomitantWeights>(model.weights);
    logpi = concomitant_log_weights(cw.alpha, concomitant_design);
  }
  Matrix out(N, G);
  for (int g = 0; g < G; ++g) {
    const Matrix resid = data.y() - data.xaug() * model.components[g].B;
    out.col(g) = logpi.col(g) + log_gaussian_rows(resid, model.components[g].Sigma);
  }
  return out;
}

inline double row_logsumexp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double m = row.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((row.array() - m).exp().sum());
}

/// Intercept-augmented concomitant design: provided columns, else the
/// regression covariates.
inline Matrix concomitant_design(const Dataset& data, const Matrix& concomitant) {
  const Matrix& v = concomitant.size() > 0 ? concomitant : data.x();
  if (v.rows() != data.n())
    throw std::invalid_argument("concomitant design row count mismatch");
  Matrix va(v.rows(), v.cols() + 1);
  va.col(0).setOnes();
  va.rightCols(v.cols()) = v;
  return va;
}

}  // namespace detail

/// Responsibilities under the given model; rows sum to 1.
inline Matrix e_step(const MixtureModel& model, const Dataset& data,
                     const Matrix& concomitant = Matrix()) {
  const Matrix va = model.family() == Family::eFMRC
                        ? detail::concomitant_design(data, concomitant)
                        : Matrix();
  Matrix ld = detail::log_weighted_densities(model, data, va);
  for (Eigen::Index i = 0; i < ld.rows(); ++i) {
    const double lse = detail::row_logsumexp(ld.row(i));
    if (!std::isfinite(lse))
      throw DegeneracyError("all component densities underflowed");
    ld.row(i) = (ld.row(i).array() - lse).exp();
  }
  return ld;
}

/// Observed log-likelihood of the model on the data.
inline double log_likelihood(const MixtureModel& model, const Dataset& data,
                             const Matrix& concomitant = Matrix()) {
  const Matrix va = model.family() == Family::eFMRC
                        ? detail::concomitant_design(data, concomitant)
                        : Matrix();
  const Matrix ld = detail::log_weighted_densities(model, data, va);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < ld.rows(); ++i)
    ll += detail::row_logsumexp(ld.row(i));
  return ll;
}

/// Weighted least-squares coefficient update for one component.
inline Matrix m_step_coefficients(const Dataset& data, const Matrix& tau, int g,
                                  double condition_limit = 1e12) {
  const Matrix& xa = data.xaug();
  const Vector t = tau.col(g);
  const Matrix gram = xa.transpose() * t.asDiagonal() * xa;
  Eigen::SelfAdjointEigenSolver<Matrix> es(detail::sym(gram));
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > condition_limit)
    throw DegeneracyError("singular weighted Gram matrix");
  return gram.ldlt().solve(xa.transpose() * t.asDiagonal() * data.y());
}

/// Static mixing-weight update: column means of the responsibilities.
inline Vector m_step_weights_static(const Matrix& tau) {
  return tau.colwise().mean().transpose();
}

/// One full EM run for a (family, G, structure) configuration from the
/// given initial responsibilities. Starts with an M-step. Degeneracies
/// are reported through the returned FitResult, not thrown.
inline FitResult fit(const Dataset& data, Family family, int G,
                     CovarianceStructure structure, const Matrix& init,
                     const EmConfig& config = {},
                     const Matrix& concomitant = Matrix()) {
  const Eigen::Index N = data.n();
  const Eigen::Index d = data.d();
  if (init.rows() != N || init.cols() != G)
    throw std::invalid_argument("fit: init must be N x G");
  if (config.epsilon <= 0.0 || config.max_iter < 1)
    throw std::invalid_argument("fit: bad EM configuration");

  const double min_w = config.min_component_weight.value_or(
      config.min_component_frac * static_cast<double>(N));
  if (min_w < 0.0 || min_w >= static_cast<double>(N) / G)
    throw std::invalid_argument("fit: min component weight out of range");

  FitResult res;
  res.model.G = G;
  res.model.structure = structure;

  const Matrix va = family == Family::eFMRC
                        ? detail::concomitant_design(data, concomitant)
                        : Matrix();
  const int q = family == Family::eFMRC ? static_cast<int>(va.cols()) - 1 : 0;
  res.n_params = n_free_params(family, structure, G, static_cast<int>(d),
                               static_cast<int>(data.p()), q);

  Matrix tau = init;
  Matrix alpha;  // warm start across iterations
  try {
    for (int it = 0; it < config.max_iter; ++it) {
      const Vector ngs = tau.colwise().sum().transpose();
      if ((ngs.array() < min_w).any())
        throw DegeneracyError("component below minimum size");

      // M-step
      std::vector<ComponentParams> comps(G);
      ScatterInput scatter;
      scatter.n = ngs;
      scatter.N = static_cast<double>(N);
      scatter.W.resize(G);
      for (int g = 0; g < G; ++g) {
        comps[g].B = m_step_coefficients(data, tau, g, config.gram_condition_limit);
        const Matrix resid = data.y() - data.xaug() * comps[g].B;
        scatter.W[g] = resid.transpose() * tau.col(g).asDiagonal() * resid;
      }
      const auto sigmas = estimate_sigma(structure, scatter, config.covariance);
      for (int g = 0; g < G; ++g) comps[g].Sigma = sigmas[g];
      res.model.components = std::move(comps);

      if (family == Family::eFMR) {
        res.model.weights = StaticWeights{ngs / static_cast<double>(N)};
      } else {
        auto cm = fit_concomitant_soft(va, tau, alpha, config.concomitant);
        alpha = cm.alpha;
        res.model.weights = ConcomitantWeights{cm.alpha};
      }

      // E-step and observed log-likelihood
      Matrix ld = detail::log_weighted_densities(res.model, data, va);
      double ll = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        const double lse = detail::row_logsumexp(ld.row(i));
        if (!std::isfinite(lse))
          throw DegeneracyError("all component densities underflowed");
        ll += lse;
        ld.row(i) = (ld.row(i).array() - lse).exp();
      }
      tau = ld;
      res.loglik_trace.push_back(ll);

      const auto k = res.loglik_trace.size();
      if (k >= 3 && aitken_stop(res.loglik_trace[k - 3], res.loglik_trace[k - 2],
                                res.loglik_trace[k - 1], config.epsilon)) {
        res.converged = true;
        break;
      }
    }
  } catch (const DegeneracyError& e) {
    res.failure = e.what();
    res.iterations = static_cast<int>(res.loglik_trace.size());
    return res;
  }

  res.iterations = static_cast<int>(res.loglik_trace.size());
  res.loglik = res.loglik_trace.empty()
                   ? -std::numeric_limits<double>::infinity()
                   : res.loglik_trace.back();
  res.tau = tau;
  res.labels.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::Index arg = 0;
    tau.row(i).maxCoeff(&arg);
    res.labels[i] = static_cast<int>(arg);
  }
  res.bic = bic(res.loglik, res.n_params, static_cast<int>(N));
  return res;
}

}  // namespace pfmr
