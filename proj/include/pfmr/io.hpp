#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pfmr/metrics.hpp"
#include "pfmr/model.hpp"
#include "pfmr/selection.hpp"
#include "pfmr/simulation.hpp"

namespace pfmr {

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto r = j.size();
  const auto c = r > 0 ? j.at(0).size() : 0;
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = 0; k < c; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j.at(i).at(k).get<double>();
  return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const MixtureModel& model) {
  nlohmann::json j;
  j["G"] = model.G;
  j["structure"] = std::string(to_string(model.structure));
  j["family"] = std::string(to_string(model.family()));
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : model.components) {
    nlohmann::json jc;
    jc["B"] = detail::matrix_to_json(c.B);
    jc["Sigma"] = detail::matrix_to_json(c.Sigma);
    comps.push_back(std::move(jc));
  }
  j["components"] = std::move(comps);
  if (const auto* sw = std::get_if<StaticWeights>(&model.weights)) {
    nlohmann::json pi = nlohmann::json::array();
    for (Eigen::Index g = 0; g < sw->pi.size(); ++g) pi.push_back(sw->pi[g]);
    j["weights"] = {{"kind", "static"}, {"pi", std::move(pi)}};
  } else {
    const auto& cw = std::get<ConcomitantWeights>(model.weights);
    j["weights"] = {{"kind", "concomitant"},
                    {"alpha", detail::matrix_to_json(cw.alpha)}};
  }
  return j;
}

inline MixtureModel model_from_json(const nlohmann::json& j) {
  MixtureModel m;
  m.G = j.at("G").get<int>();
  m.structure = structure_from_string(j.at("structure").get<std::string>());
  for (const auto& jc : j.at("components")) {
    ComponentParams c;
    c.B = detail::matrix_from_json(jc.at("B"));
    c.Sigma = detail::matrix_from_json(jc.at("Sigma"));
    m.components.push_back(std::move(c));
  }
  const auto& w = j.at("weights");
  if (w.at("kind").get<std::string>() == "static") {
    Vector pi(m.G);
    for (int g = 0; g < m.G; ++g) pi[g] = w.at("pi").at(g).get<double>();
    m.weights = StaticWeights{std::move(pi)};
  } else {
    m.weights = ConcomitantWeights{detail::matrix_from_json(w.at("alpha"))};
  }
  return m;
}

inline void write_model(const std::string& path, const MixtureModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17) << model_to_json(model).dump(2) << "\n";
}

inline MixtureModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

/// Ranked model table, one row per grid cell, best BIC first. Failed
/// cells sort last with their failure reason.
inline std::string ranked_table(const SelectionReport& report) {
  std::vector<const SearchCell*> order;
  for (const auto& c : report.cells) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const SearchCell* a, const SearchCell* b) {
                     if (a->usable() != b->usable()) return a->usable();
                     if (!a->usable()) return false;
                     return detail::better_cell(*a, *b);
                   });
  std::ostringstream out;
  out << "family\tstructure\tG\tBIC\tloglik\tn_params\tconverged\tstatus\n";
  out << std::fixed << std::setprecision(4);
  for (const auto* c : order) {
    out << to_string(c->family) << '\t' << to_string(c->structure) << '\t'
        << c->G << '\t';
    if (c->usable()) {
      out << c->result.bic << '\t' << c->result.loglik << '\t'
          << c->result.n_params << '\t' << (c->result.converged ? "yes" : "no")
          << "\tok\n";
    } else {
      out << "-\t-\t" << c->result.n_params << "\tno\t"
          << (c->result.failure.empty() ? "failed" : c->result.failure) << "\n";
    }
  }
  return out.str();
}

inline nlohmann::json scenario_to_json(const SimScenario& sc) {
  nlohmann::json j;
  j["n_obs"] = sc.n_obs;
  j["pi1"] = sc.pi1;
  j["replicates"] = sc.replicates;
  j["seed"] = sc.seed;
  for (int g = 0; g < 2; ++g) {
    nlohmann::json jg;
    jg["uniform"] = {sc.uniform_lo[g], sc.uniform_hi[g]};
    jg["gauss_mean"] = {sc.gauss_mean[g][0], sc.gauss_mean[g][1]};
    jg["gauss_cov"] = detail::matrix_to_json(sc.gauss_cov[g]);
    jg["B"] = detail::matrix_to_json(sc.B[g]);
    j["components"].push_back(std::move(jg));
  }
  j["error"] = {{"volume", sc.error_volume},
                {"orientation", detail::matrix_to_json(sc.error_orientation)},
                {"shape", {sc.error_shape[0], sc.error_shape[1], sc.error_shape[2]}}};
  return j;
}

inline SimScenario scenario_from_json(const nlohmann::json& j) {
  SimScenario sc;
  sc.n_obs = j.value("n_obs", sc.n_obs);
  sc.pi1 = j.value("pi1", sc.pi1);
  sc.replicates = j.value("replicates", sc.replicates);
  sc.seed = j.value("seed", sc.seed);
  if (j.contains("components")) {
    for (int g = 0; g < 2; ++g) {
      const auto& jg = j.at("components").at(g);
      sc.uniform_lo[g] = jg.at("uniform").at(0).get<double>();
      sc.uniform_hi[g] = jg.at("uniform").at(1).get<double>();
      sc.gauss_mean[g][0] = jg.at("gauss_mean").at(0).get<double>();
      sc.gauss_mean[g][1] = jg.at("gauss_mean").at(1).get<double>();
      sc.gauss_cov[g] = detail::matrix_from_json(jg.at("gauss_cov"));
      sc.B[g] = detail::matrix_from_json(jg.at("B"));
    }
  }
  if (j.contains("error")) {
    const auto& je = j.at("error");
    sc.error_volume = je.at("volume").get<double>();
    sc.error_orientation = detail::matrix_from_json(je.at("orientation"));
    for (int k = 0; k < 3; ++k)
      sc.error_shape[k] = je.at("shape").at(k).get<double>();
  }
  return sc;
}

inline std::string confusion_table(const Confusion& c) {
  std::ostringstream out;
  out << "truth\\est";
  for (int v : c.col_values) out << '\t' << v;
  out << '\n';
  for (std::size_t i = 0; i < c.counts.size(); ++i) {
    out << c.row_values[i];
    for (long n : c.counts[i]) out << '\t' << n;
    out << '\n';
  }
  return out.str();
}

}  // namespace pfmr
