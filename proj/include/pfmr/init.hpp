#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pfmr/dataset.hpp"
#include "pfmr/rng.hpp"

namespace pfmr {

namespace detail {

inline Matrix one_hot(const std::vector<int>& labels, int G) {
  Matrix tau = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), G);
  for (std::size_t i = 0; i < labels.size(); ++i) tau(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return tau;
}

inline bool all_components_present(const std::vector<int>& labels, int G) {
  std::vector<char> seen(G, 0);
  for (int l : labels) seen[l] = 1;
  for (char c : seen)
    if (!c) return false;
  return true;
}

}  // namespace detail

/// Uniform random hard assignment, resampled until every component is
/// nonempty. Deterministic per seed.
inline Matrix random_init(Eigen::Index N, int G, std::uint64_t seed) {
  if (N < G) throw std::invalid_argument("random_init: need N >= G");
  Rng rng(seed);
  std::vector<int> labels(N);
  do {
    for (auto& l : labels) l = static_cast<int>(rng.below(G));
  } while (!detail::all_components_present(labels, G));
  return detail::one_hot(labels, G);
}

/// Lloyd's k-means on the column-standardized [X | Y] concatenation,
/// returning one-hot responsibilities. Empty clusters are reseeded from
/// the point farthest from its assigned center. Deterministic per seed.
inline Matrix kmeans_init(const Dataset& data, int G, std::uint64_t seed,
                          int max_iter = 100) {
  const Eigen::Index N = data.n();
  if (N < G) throw std::invalid_argument("kmeans_init: need N >= G");
  Matrix Z(N, data.p() + data.d());
  Z.leftCols(data.p()) = data.x();
  Z.rightCols(data.d()) = data.y();
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const double mean = Z.col(j).mean();
    const double var = (Z.col(j).array() - mean).square().sum() /
                       std::max<double>(1.0, static_cast<double>(N - 1));
    const double sd = std::sqrt(var);
    Z.col(j).array() -= mean;
    if (sd > 0.0) Z.col(j) /= sd;
  }

  Rng rng(seed);
  // distinct random rows as initial centers
  std::vector<Eigen::Index> order(N);
  for (Eigen::Index i = 0; i < N; ++i) order[i] = i;
  for (Eigen::Index i = N - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  Matrix centers(G, Z.cols());
  for (int g = 0; g < G; ++g) centers.row(g) = Z.row(order[g]);

  std::vector<int> labels(N, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    std::vector<double> dist(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      int best = 0;
      double best_d = (Z.row(i) - centers.row(0)).squaredNorm();
      for (int g = 1; g < G; ++g) {
        const double dd = (Z.row(i) - centers.row(g)).squaredNorm();
        if (dd < best_d) { best_d = dd; best = g; }
      }
      dist[i] = best_d;
      if (labels[i] != best) { labels[i] = best; changed = true; }
    }
    // recompute centers; reseed empties from the farthest point
    std::vector<int> counts(G, 0);
    Matrix sums = Matrix::Zero(G, Z.cols());
    for (Eigen::Index i = 0; i < N; ++i) {
      counts[labels[i]]++;
      sums.row(labels[i]) += Z.row(i);
    }
    for (int g = 0; g < G; ++g) {
      if (counts[g] == 0) {
        Eigen::Index far = 0;
        for (Eigen::Index i = 1; i < N; ++i)
          if (dist[i] > dist[far]) far = i;
        centers.row(g) = Z.row(far);
        labels[far] = g;
        dist[far] = 0.0;
        changed = true;
      } else {
        centers.row(g) = sums.row(g) / counts[g];
      }
    }
    if (!changed) break;
  }
  return detail::one_hot(labels, G);
}

}  // namespace pfmr
