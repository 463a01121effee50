#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "pfmr/dataset.hpp"
#include "pfmr/structure.hpp"

namespace pfmr {

/// One mixture component: regression coefficients (intercept row first)
/// and the error covariance.
struct ComponentParams {
  Matrix B;      // (p+1) x d
  Matrix Sigma;  // d x d, SPD
};

/// Fixed mixing weights, one per component.
struct StaticWeights {
  Vector pi;  // G entries, positive, summing to 1
};

/// Multinomial-logit mixing weights driven by concomitant covariates;
/// row 0 (component 1) is the baseline and stays identically zero.
struct ConcomitantWeights {
  Matrix alpha;  // G x (q+1)
};

using WeightModel = std::variant<StaticWeights, ConcomitantWeights>;

struct MixtureModel {
  int G = 1;
  CovarianceStructure structure = CovarianceStructure::VVV;
  std::vector<ComponentParams> components;
  WeightModel weights;

  Family family() const {
    return std::holds_alternative<StaticWeights>(weights) ? Family::eFMR
                                                          : Family::eFMRC;
  }
};

/// Outcome of one EM run.
struct FitResult {
  MixtureModel model;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> loglik_trace;
  Matrix tau;                 // N x G responsibilities
  std::vector<int> labels;    // argmax over components
  double bic = -std::numeric_limits<double>::infinity();
  int n_params = 0;
  bool converged = false;
  int iterations = 0;
  std::string failure;  // nonempty iff the run degenerated

  bool failed() const { return !failure.empty(); }
};

}  // namespace pfmr
