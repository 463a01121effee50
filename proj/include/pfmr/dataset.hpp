#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace pfmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Paired regression sample: N responses in R^d against N covariate
/// vectors in R^p. The design used everywhere downstream is the
/// covariate matrix augmented with a leading column of ones.
class Dataset {
 public:
  Dataset(Matrix responses, Matrix covariates)
      : y_(std::move(responses)), x_(std::move(covariates)) {
    if (y_.rows() < 1 || y_.cols() < 1)
      throw std::invalid_argument("Dataset: need N >= 1 responses of dimension >= 1");
    if (x_.rows() != y_.rows())
      throw std::invalid_argument("Dataset: responses and covariates must have equal row counts");
    xaug_.resize(x_.rows(), x_.cols() + 1);
    xaug_.col(0).setOnes();
    xaug_.rightCols(x_.cols()) = x_;
  }

  Eigen::Index n() const { return y_.rows(); }
  Eigen::Index d() const { return y_.cols(); }
  Eigen::Index p() const { return x_.cols(); }

  const Matrix& y() const { return y_; }
  const Matrix& x() const { return x_; }
  /// N x (p+1) design, leading column of ones.
  const Matrix& xaug() const { return xaug_; }

 private:
  Matrix y_;
  Matrix x_;
  Matrix xaug_;
};

}  // namespace pfmr
