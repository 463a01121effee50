#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfmr/dataset.hpp"

namespace pfmr {

class CsvError : public std::runtime_error {
 public:
  explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

/// A parsed delimiter-separated file: header plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    throw CsvError("column not found: " + name);
  }
};

inline CsvTable read_csv(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open file: " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, delim)) cells.push_back(cell);
    if (!line.empty() && line.back() == delim) cells.push_back("");
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw CsvError(path + ": row " + std::to_string(t.rows.size() + 2) +
                       " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw CsvError(path + ": missing header row");
  return t;
}

namespace detail {

inline double numeric_cell(const CsvTable& t, std::size_t i, int j,
                           const std::string& path) {
  const std::string& s = t.rows[i][j];
  const char* b = s.data();
  const char* e = b + s.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(b, e, value);
  if (ec != std::errc() || ptr != e)
    throw CsvError(path + ": non-numeric cell at row " + std::to_string(i + 2) +
                   ", column '" + t.header[j] + "': '" + s + "'");
  return value;
}

}  // namespace detail

/// Extract the named columns as a numeric matrix, reporting the exact
/// cell on parse failure.
inline Matrix numeric_columns(const CsvTable& t,
                              const std::vector<std::string>& names,
                              const std::string& path = "<csv>") {
  Matrix out(static_cast<Eigen::Index>(t.rows.size()),
             static_cast<Eigen::Index>(names.size()));
  std::vector<int> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(t.column(n));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::numeric_cell(t, i, idx[j], path);
  return out;
}

/// Map a categorical column to dense integer codes (sorted value order).
inline std::vector<int> label_column(const CsvTable& t, const std::string& name) {
  const int j = t.column(name);
  std::map<std::string, int> codes;
  for (const auto& row : t.rows) codes.emplace(row[j], 0);
  int next = 0;
  for (auto& [k, v] : codes) v = next++;
  std::vector<int> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) out.push_back(codes[row[j]]);
  return out;
}

struct LoadedData {
  Dataset data;
  Matrix concomitant;       // empty unless distinct concomitant columns given
  std::vector<int> truth;   // empty unless a truth column was given
};

/// Read responses/covariates (and optional concomitant and truth-label
/// columns) from a delimited file into a Dataset.
inline LoadedData load_csv(const std::string& path,
                           const std::vector<std::string>& response_cols,
                           const std::vector<std::string>& covariate_cols,
                           const std::vector<std::string>& concomitant_cols = {},
                           const std::string& truth_col = "",
                           char delim = ',') {
  if (response_cols.empty())
    throw CsvError("at least one response column is required");
  const CsvTable t = read_csv(path, delim);
  if (t.rows.empty()) throw CsvError(path + ": no data rows");
  Matrix y = numeric_columns(t, response_cols, path);
  Matrix x = covariate_cols.empty()
                 ? Matrix(y.rows(), 0)
                 : numeric_columns(t, covariate_cols, path);
  LoadedData out{Dataset(std::move(y), std::move(x)), Matrix(), {}};
  if (!concomitant_cols.empty() && concomitant_cols != covariate_cols)
    out.concomitant = numeric_columns(t, concomitant_cols, path);
  if (!truth_col.empty()) out.truth = label_column(t, truth_col);
  return out;
}

}  // namespace pfmr
