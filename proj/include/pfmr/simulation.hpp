#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "pfmr/dataset.hpp"
#include "pfmr/metrics.hpp"
#include "pfmr/rng.hpp"
#include "pfmr/selection.hpp"

namespace pfmr {

/// Two-component generative design: one uniform covariate and a
/// bivariate Gaussian pair per component, three responses through
/// per-component coefficient matrices, and a shared (equal across
/// components) error covariance built from its volume/orientation/shape
/// factors.
struct SimScenario {
  int n_obs = 275;
  double pi1 = 0.45;

  // covariates: x1 uniform, (x2, x3) bivariate Gaussian
  double uniform_lo[2] = {0.0, -1.0};
  double uniform_hi[2] = {3.0, 5.0};
  Eigen::Vector2d gauss_mean[2] = {{0.0, 1.0}, {-3.0, 3.0}};
  Eigen::Matrix2d gauss_cov[2] = {
      (Eigen::Matrix2d() << 1.0, 0.8, 0.8, 1.2).finished(),
      (Eigen::Matrix2d() << 1.2, 0.4, 0.4, 1.0).finished()};

  // regression coefficients, intercept row first, (p+1) x d
  Matrix B[2] = {
      (Matrix(4, 3) << -3.0, -2.0, 1.0,
                       -1.9,  0.0, -1.0,
                        0.4, -0.4,  0.7,
                       -1.2,  0.8,  0.3).finished(),
      (Matrix(4, 3) << -4.0,  2.0, -1.3,
                        2.5,  2.3,  1.0,
                       -0.5, -1.3, -2.7,
                        1.0,  1.9, -2.3).finished()};

  // shared error covariance, factored as volume * orientation * shape
  double error_volume = 1.25;
  Matrix error_orientation = (Matrix(3, 3) << -0.45, 0.72, 0.53,
                                              -0.62, 0.18, -0.76,
                                              -0.65, -0.67, 0.36).finished();
  Vector error_shape = (Vector(3) << 2.7, 0.7, 1.0 / (2.7 * 0.7)).finished();

  int replicates = 50;
  std::uint64_t seed = 0;

  Matrix error_covariance() const {
    return error_volume * error_orientation * error_shape.asDiagonal() *
           error_orientation.transpose();
  }
};

struct SimulatedSample {
  Dataset data;
  std::vector<int> labels;
};

/// Draw one sample from the scenario. Bit-reproducible per seed.
inline SimulatedSample generate(const SimScenario& sc, std::uint64_t seed) {
  Rng rng(seed);
  const int N = sc.n_obs;
  const int n1 = rng.binomial(N, sc.pi1);

  Matrix X(N, 3), Y(N, 3);
  std::vector<int> labels(N);
  const Matrix sigma_chol =
      Eigen::LLT<Matrix>(sc.error_covariance()).matrixL();
  Eigen::Matrix2d gauss_chol[2] = {
      Eigen::LLT<Eigen::Matrix2d>(sc.gauss_cov[0]).matrixL(),
      Eigen::LLT<Eigen::Matrix2d>(sc.gauss_cov[1]).matrixL()};

  for (int i = 0; i < N; ++i) {
    const int g = i < n1 ? 0 : 1;
    labels[i] = g;
    X(i, 0) = rng.uniform(sc.uniform_lo[g], sc.uniform_hi[g]);
    Eigen::Vector2d z(rng.normal(), rng.normal());
    X.row(i).tail(2) = (sc.gauss_mean[g] + gauss_chol[g] * z).transpose();
    Vector eps(3);
    for (int j = 0; j < 3; ++j) eps[j] = rng.normal();
    Vector xaug(4);
    xaug << 1.0, X.row(i).transpose();
    Y.row(i) = (sc.B[g].transpose() * xaug + sigma_chol * eps).transpose();
  }
  return SimulatedSample{Dataset(Y, X), std::move(labels)};
}

struct ReplicateOutcome {
  int replicate = 0;
  Family family = Family::eFMR;
  bool ok = false;
  int G = 0;
  CovarianceStructure structure = CovarianceStructure::VVV;
  double ari = 0.0;
  double loglik = 0.0;
  double bic = 0.0;
  int df = 0;
};

struct FamilySummary {
  Family family = Family::eFMR;
  int n_ok = 0;
  int n_failed = 0;
  int correct_g = 0;  // replicates where the selected G equals 2
  double ari_median = 0, ari_min = 0, ari_max = 0;
  double loglik_median = 0, loglik_min = 0, loglik_max = 0;
  double bic_median = 0, bic_min = 0, bic_max = 0;
  double df_median = 0, df_min = 0, df_max = 0;
};

struct StudyReport {
  std::vector<ReplicateOutcome> outcomes;
  std::vector<FamilySummary> summaries;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Run the selection grid on each replicate and summarize the selected
/// model per family: medians and ranges of ARI, log-likelihood, BIC and
/// parameter count, plus the count of correct component-number choices.
inline StudyReport replicate_study(const SimScenario& sc, const SearchSpec& spec,
                                   const EmConfig& config = {}) {
  StudyReport report;
  for (int r = 0; r < sc.replicates; ++r) {
    const SimulatedSample sample = generate(sc, sc.seed + static_cast<std::uint64_t>(r));
    for (Family fam : spec.families) {
      SearchSpec one = spec;
      one.families = {fam};
      ReplicateOutcome out;
      out.replicate = r;
      out.family = fam;
      try {
        const SelectionReport sel = search(sample.data, one, config);
        const SearchCell& best = sel.best();
        out.ok = true;
        out.G = best.G;
        out.structure = best.structure;
        out.ari = adjusted_rand(sample.labels, best.result.labels);
        out.loglik = best.result.loglik;
        out.bic = best.result.bic;
        out.df = best.result.n_params;
      } catch (const std::runtime_error&) {
        out.ok = false;
      }
      report.outcomes.push_back(out);
    }
  }

  for (Family fam : spec.families) {
    FamilySummary s;
    s.family = fam;
    std::vector<double> ari, ll, bicv, df;
    for (const auto& o : report.outcomes) {
      if (o.family != fam) continue;
      if (!o.ok) { s.n_failed++; continue; }
      s.n_ok++;
      if (o.G == 2) s.correct_g++;
      ari.push_back(o.ari);
      ll.push_back(o.loglik);
      bicv.push_back(o.bic);
      df.push_back(o.df);
    }
    if (s.n_ok > 0) {
      auto minmax = [](const std::vector<double>& v) {
        return std::pair(*std::min_element(v.begin(), v.end()),
                         *std::max_element(v.begin(), v.end()));
      };
      s.ari_median = detail::median(ari);
      std::tie(s.ari_min, s.ari_max) = minmax(ari);
      s.loglik_median = detail::median(ll);
      std::tie(s.loglik_min, s.loglik_max) = minmax(ll);
      s.bic_median = detail::median(bicv);
      std::tie(s.bic_min, s.bic_max) = minmax(bicv);
      s.df_median = detail::median(df);
      std::tie(s.df_min, s.df_max) = minmax(df);
    }
    report.summaries.push_back(s);
  }
  return report;
}

}  // namespace pfmr
