#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

namespace pfmr {

/// Contingency table of two label vectors; rows follow the sorted
/// distinct values of `a`, columns those of `b`.
struct Confusion {
  std::vector<int> row_values;
  std::vector<int> col_values;
  std::vector<std::vector<long>> counts;
};

namespace detail {

inline std::vector<int> compress_labels(const std::vector<int>& labels,
                                        std::vector<int>& values) {
  std::map<int, int> index;
  for (int l : labels) index.emplace(l, 0);
  values.clear();
  int next = 0;
  for (auto& [v, idx] : index) {
    idx = next++;
    values.push_back(v);
  }
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index[labels[i]];
  return out;
}

}  // namespace detail

inline Confusion confusion(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("confusion: partitions differ in length");
  if (a.empty()) throw std::invalid_argument("confusion: empty partitions");
  Confusion c;
  const auto ia = detail::compress_labels(a, c.row_values);
  const auto ib = detail::compress_labels(b, c.col_values);
  c.counts.assign(c.row_values.size(),
                  std::vector<long>(c.col_values.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i) c.counts[ia[i]][ib[i]]++;
  return c;
}

/// Adjusted Rand index from pair counting over the contingency table.
/// 1 for identical partitions; expected value 0 under random labelling.
/// Degenerate normalization (both partitions trivial) falls back to
/// 1 when identical, 0 otherwise.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  const Confusion c = confusion(a, b);
  const double n = static_cast<double>(a.size());
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };

  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  std::vector<long> row_tot(c.row_values.size(), 0), col_tot(c.col_values.size(), 0);
  for (std::size_t i = 0; i < c.counts.size(); ++i)
    for (std::size_t j = 0; j < c.counts[i].size(); ++j) {
      sum_cells += choose2(static_cast<double>(c.counts[i][j]));
      row_tot[i] += c.counts[i][j];
      col_tot[j] += c.counts[i][j];
    }
  for (long t : row_tot) sum_rows += choose2(static_cast<double>(t));
  for (long t : col_tot) sum_cols += choose2(static_cast<double>(t));

  const double total_pairs = choose2(n);
  const double expected = total_pairs > 0.0 ? sum_rows * sum_cols / total_pairs : 0.0;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  const double denom = maximum - expected;
  if (denom == 0.0) {
    // both partitions carry no pair information or agree completely
    bool identical = true;
    for (std::size_t i = 0; i < c.counts.size() && identical; ++i)
      for (std::size_t j = 0; j < c.counts[i].size(); ++j)
        if (c.counts[i][j] > 0 && (row_tot[i] != c.counts[i][j] || col_tot[j] != c.counts[i][j])) {
          identical = false;
          break;
        }
    return identical ? 1.0 : 0.0;
  }
  return (sum_cells - expected) / denom;
}

/// Unadjusted Rand index (fraction of concordant pairs).
inline double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const Confusion c = confusion(a, b);
  const double n = static_cast<double>(a.size());
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  std::vector<long> row_tot(c.row_values.size(), 0), col_tot(c.col_values.size(), 0);
  for (std::size_t i = 0; i < c.counts.size(); ++i)
    for (std::size_t j = 0; j < c.counts[i].size(); ++j) {
      sum_cells += choose2(static_cast<double>(c.counts[i][j]));
      row_tot[i] += c.counts[i][j];
      col_tot[j] += c.counts[i][j];
    }
  for (long t : row_tot) sum_rows += choose2(static_cast<double>(t));
  for (long t : col_tot) sum_cols += choose2(static_cast<double>(t));
  const double total = choose2(n);
  if (total == 0.0) return 1.0;
  return (total + 2.0 * sum_cells - sum_rows - sum_cols) / total;
}

}  // namespace pfmr
