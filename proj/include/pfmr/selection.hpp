#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pfmr/em.hpp"
#include "pfmr/init.hpp"
#include "pfmr/model.hpp"

namespace pfmr {

struct SearchSpec {
  std::vector<Family> families = {Family::eFMR, Family::eFMRC};
  int g_min = 1;
  int g_max = 4;
  std::vector<CovarianceStructure> structures{all_structures.begin(),
                                              all_structures.end()};
  int n_random_starts = 4;
  bool use_kmeans_start = true;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency

  int starts_per_cell() const {
    return n_random_starts + (use_kmeans_start ? 1 : 0);
  }
};

struct SearchCell {
  Family family;
  int G;
  CovarianceStructure structure;
  int best_start = -1;  // start index that won on log-likelihood
  FitResult result;     // best start, or the last failure if none converged

  bool usable() const { return !result.failed() && result.loglik_trace.size() > 0; }
};

struct SelectionReport {
  std::vector<SearchCell> cells;
  int best_index = -1;

  const SearchCell& best() const {
    if (best_index < 0) throw std::runtime_error("no model was selected");
    return cells[best_index];
  }
};

namespace detail {

inline int structure_order(CovarianceStructure s) {
  for (std::size_t i = 0; i < all_structures.size(); ++i)
    if (all_structures[i] == s) return static_cast<int>(i);
  return -1;
}

/// BIC-max ordering with the spec'd tie-breaks: fewer parameters, then
/// lower G, then structure table order.
inline bool better_cell(const SearchCell& a, const SearchCell& b) {
  if (a.result.bic != b.result.bic) return a.result.bic > b.result.bic;
  if (a.result.n_params != b.result.n_params)
    return a.result.n_params < b.result.n_params;
  if (a.G != b.G) return a.G < b.G;
  return structure_order(a.structure) < structure_order(b.structure);
}

}  // namespace detail

/// Initial responsibilities for one (G, start) pair. Starts are shared
/// across structures and families within the same G so every cell
/// competes from identical initializations.
inline Matrix make_start(const Dataset& data, int G, int start_index,
                         const SearchSpec& spec) {
  const std::uint64_t base = spec.seed + 1000ull * static_cast<std::uint64_t>(G);
  if (start_index < spec.n_random_starts)
    return random_init(data.n(), G, base + static_cast<std::uint64_t>(start_index));
  return kmeans_init(data, G, base);
}

/// Exhaustive grid over (family, G, structure); each cell keeps its
/// best start by final log-likelihood. Cells run in parallel; the
/// report does not depend on scheduling order.
inline SelectionReport search(const Dataset& data, const SearchSpec& spec,
                              const EmConfig& config = {},
                              const Matrix& concomitant = Matrix()) {
  if (spec.g_min < 1 || spec.g_max < spec.g_min)
    throw std::invalid_argument("search: bad G range");
  if (spec.structures.empty() || spec.families.empty())
    throw std::invalid_argument("search: empty grid");

  SelectionReport report;
  for (Family fam : spec.families)
    for (int G = spec.g_min; G <= spec.g_max; ++G)
      for (CovarianceStructure s : spec.structures)
        report.cells.push_back(SearchCell{fam, G, s});

  const int n_starts = spec.starts_per_cell();
  auto run_cell = [&](SearchCell& cell) {
    for (int si = 0; si < n_starts; ++si) {
      const Matrix init = make_start(data, cell.G, si, spec);
      FitResult r = fit(data, cell.family, cell.G, cell.structure, init, config,
                        concomitant);
      if (!r.failed()) {
        if (cell.best_start < 0 || cell.result.failed() ||
            r.loglik > cell.result.loglik) {
          cell.result = std::move(r);
          cell.best_start = si;
        }
      } else if (cell.best_start < 0) {
        cell.result = std::move(r);  // remember why the cell failed
      }
    }
  };

  int n_threads = spec.threads > 0
                      ? spec.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads,
                                        static_cast<int>(report.cells.size())));
  if (n_threads == 1) {
    for (auto& cell : report.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < report.cells.size();
             i = next.fetch_add(1))
          run_cell(report.cells[i]);
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    if (!report.cells[i].usable()) continue;
    if (report.best_index < 0 ||
        detail::better_cell(report.cells[i], report.cells[report.best_index]))
      report.best_index = static_cast<int>(i);
  }
  if (report.best_index < 0)
    throw std::runtime_error("search: every cell in the grid degenerated");
  return report;
}

}  // namespace pfmr
