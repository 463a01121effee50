// Command-line front end: grid fitting on delimited data files,
// the two-component simulation study, and partition agreement metrics.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfmr/pfmr.hpp"

namespace fs = std::filesystem;
using namespace pfmr;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Family> parse_families(const std::string& s) {
  std::vector<Family> out;
  for (const auto& f : split_list(s)) out.push_back(family_from_string(f));
  return out;
}

std::vector<CovarianceStructure> parse_structures(const std::string& s) {
  if (s == "all") return {all_structures.begin(), all_structures.end()};
  std::vector<CovarianceStructure> out;
  for (const auto& c : split_list(s)) out.push_back(structure_from_string(c));
  return out;
}

std::vector<int> read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  std::map<std::string, int> codes;
  std::vector<std::string> raw;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    raw.push_back(line);
    codes.emplace(line, 0);
  }
  int next = 0;
  for (auto& [k, v] : codes) v = next++;
  std::vector<int> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(codes[r]);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_labels(const fs::path& path, const FitResult& r) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "label";
  for (int g = 0; g < r.model.G; ++g) out << "\ttau" << g + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < r.tau.rows(); ++i) {
    out << r.labels[i];
    for (Eigen::Index g = 0; g < r.tau.cols(); ++g) out << '\t' << r.tau(i, g);
    out << '\n';
  }
  write_file(path, out.str());
}

struct FitArgs {
  std::string input;
  std::string responses, covariates, concomitant, truth;
  std::string families = "eFMR,eFMRC";
  std::string structures = "all";
  int g_min = 1, g_max = 4;
  int random_starts = 4;
  bool no_kmeans = false;
  std::uint64_t seed = 0;
  double epsilon = 1e-5;
  int max_iter = 1000;
  double min_component_frac = 0.02;
  int threads = 0;
  std::string output = "pfmr-out";
};

int run_fit(const FitArgs& a) {
  const LoadedData loaded =
      load_csv(a.input, split_list(a.responses), split_list(a.covariates),
               split_list(a.concomitant), a.truth);
  std::cout << "loaded " << loaded.data.n() << " observations, d="
            << loaded.data.d() << ", p=" << loaded.data.p() << "\n";

  SearchSpec spec;
  spec.families = parse_families(a.families);
  spec.structures = parse_structures(a.structures);
  spec.g_min = a.g_min;
  spec.g_max = a.g_max;
  spec.n_random_starts = a.random_starts;
  spec.use_kmeans_start = !a.no_kmeans;
  spec.seed = a.seed;
  spec.threads = a.threads;

  EmConfig config;
  config.epsilon = a.epsilon;
  config.max_iter = a.max_iter;
  config.min_component_frac = a.min_component_frac;

  const SelectionReport report =
      search(loaded.data, spec, config, loaded.concomitant);

  fs::create_directories(a.output);
  write_file(fs::path(a.output) / "ranked_models.tsv", ranked_table(report));

  for (Family fam : spec.families) {
    const SearchCell* best = nullptr;
    for (const auto& c : report.cells)
      if (c.family == fam && c.usable() &&
          (!best || detail::better_cell(c, *best)))
        best = &c;
    if (!best) continue;
    const std::string tag(to_string(fam));
    write_model(fs::path(a.output) / ("best_model_" + tag + ".json"),
                best->result.model);
    write_labels(fs::path(a.output) / ("labels_" + tag + ".tsv"), best->result);
    std::cout << tag << " best: " << to_string(best->structure)
              << " G=" << best->G << " BIC=" << std::fixed
              << std::setprecision(2) << best->result.bic;
    if (!loaded.truth.empty()) {
      const double ari = adjusted_rand(loaded.truth, best->result.labels);
      std::cout << " ARI=" << std::setprecision(3) << ari;
      std::ostringstream txt;
      txt << "ARI\t" << std::setprecision(6) << ari << "\n\n"
          << confusion_table(confusion(loaded.truth, best->result.labels));
      write_file(fs::path(a.output) / ("agreement_" + tag + ".txt"), txt.str());
    }
    std::cout << "\n";
  }
  std::cout << "artifacts written to " << a.output << "\n";
  return 0;
}

struct SimArgs {
  std::string scenario;
  int replicates = -1;
  std::uint64_t seed = 0;
  std::string families = "eFMR,eFMRC";
  std::string structures = "all";
  int g_min = 1, g_max = 4;
  int threads = 0;
  double epsilon = 1e-5;
  std::string output = "pfmr-sim";
  std::string dump_scenario;
};

int run_simulate(const SimArgs& a) {
  SimScenario sc;
  if (!a.scenario.empty()) {
    std::ifstream in(a.scenario);
    if (!in) throw std::runtime_error("cannot open scenario: " + a.scenario);
    nlohmann::json j;
    in >> j;
    sc = scenario_from_json(j);
  }
  if (a.replicates > 0) sc.replicates = a.replicates;
  sc.seed = a.seed;

  if (!a.dump_scenario.empty()) {
    std::ofstream out(a.dump_scenario);
    out << scenario_to_json(sc).dump(2) << "\n";
    std::cout << "scenario written to " << a.dump_scenario << "\n";
    return 0;
  }

  SearchSpec spec;
  spec.families = parse_families(a.families);
  spec.structures = parse_structures(a.structures);
  spec.g_min = a.g_min;
  spec.g_max = a.g_max;
  spec.seed = a.seed;
  spec.threads = a.threads;

  EmConfig config;
  config.epsilon = a.epsilon;

  const StudyReport study = replicate_study(sc, spec, config);

  fs::create_directories(a.output);
  std::ostringstream rows;
  rows << "replicate\tfamily\tstatus\tG\tstructure\tARI\tloglik\tBIC\tdf\n"
       << std::fixed << std::setprecision(4);
  for (const auto& o : study.outcomes) {
    rows << o.replicate << '\t' << to_string(o.family) << '\t'
         << (o.ok ? "ok" : "failed") << '\t' << o.G << '\t'
         << to_string(o.structure) << '\t' << o.ari << '\t' << o.loglik << '\t'
         << o.bic << '\t' << o.df << '\n';
  }
  write_file(fs::path(a.output) / "replicates.tsv", rows.str());

  std::ostringstream sum;
  sum << "family\tn_ok\tcorrect_G\tARI_median\tARI_range\tloglik_median\t"
         "loglik_range\tBIC_median\tBIC_range\tdf_median\tdf_range\n"
      << std::fixed << std::setprecision(3);
  for (const auto& s : study.summaries) {
    sum << to_string(s.family) << '\t' << s.n_ok << '\t' << s.correct_g << '\t'
        << s.ari_median << "\t(" << s.ari_min << ", " << s.ari_max << ")\t"
        << s.loglik_median << "\t(" << s.loglik_min << ", " << s.loglik_max
        << ")\t" << s.bic_median << "\t(" << s.bic_min << ", " << s.bic_max
        << ")\t" << s.df_median << "\t(" << s.df_min << ", " << s.df_max
        << ")\n";
  }
  write_file(fs::path(a.output) / "summary.tsv", sum.str());
  std::cout << sum.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parsimonious mixtures of multivariate Gaussian regressions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Grid-fit a delimited data file");
  fit_cmd->add_option("--input", fa.input, "Input CSV/TSV path")->required();
  fit_cmd->add_option("--responses", fa.responses,
                      "Comma-separated response columns")->required();
  fit_cmd->add_option("--covariates", fa.covariates,
                      "Comma-separated covariate columns");
  fit_cmd->add_option("--concomitant", fa.concomitant,
                      "Concomitant columns (default: the covariates)");
  fit_cmd->add_option("--truth", fa.truth, "Truth-label column for ARI");
  fit_cmd->add_option("--families", fa.families, "eFMR, eFMRC or both");
  fit_cmd->add_option("--structures", fa.structures,
                      "Comma-separated structure codes, or 'all'");
  fit_cmd->add_option("--g-min", fa.g_min, "Smallest component count");
  fit_cmd->add_option("--g-max", fa.g_max, "Largest component count");
  fit_cmd->add_option("--random-starts", fa.random_starts,
                      "Random initializations per cell");
  fit_cmd->add_flag("--no-kmeans", fa.no_kmeans, "Skip the k-means start");
  fit_cmd->add_option("--seed", fa.seed, "Master seed");
  fit_cmd->add_option("--epsilon", fa.epsilon, "Aitken stopping tolerance");
  fit_cmd->add_option("--max-iter", fa.max_iter, "EM iteration cap");
  fit_cmd->add_option("--min-component-frac", fa.min_component_frac,
                      "Minimum component size as a fraction of N");
  fit_cmd->add_option("--threads", fa.threads, "Worker threads (0 = auto)");
  fit_cmd->add_option("--output", fa.output, "Output directory");

  SimArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Replicate study on the "
                                     "built-in two-component scenario");
  sim_cmd->add_option("--scenario", sa.scenario, "Scenario JSON file");
  sim_cmd->add_option("--replicates", sa.replicates, "Replicate count");
  sim_cmd->add_option("--seed", sa.seed, "Master seed");
  sim_cmd->add_option("--families", sa.families, "eFMR, eFMRC or both");
  sim_cmd->add_option("--structures", sa.structures, "Structure codes or 'all'");
  sim_cmd->add_option("--g-min", sa.g_min, "Smallest component count");
  sim_cmd->add_option("--g-max", sa.g_max, "Largest component count");
  sim_cmd->add_option("--threads", sa.threads, "Worker threads (0 = auto)");
  sim_cmd->add_option("--epsilon", sa.epsilon, "Aitken stopping tolerance");
  sim_cmd->add_option("--output", sa.output, "Output directory");
  sim_cmd->add_option("--dump-scenario", sa.dump_scenario,
                      "Write the scenario as JSON and exit");

  std::string file_a, file_b;
  auto* met_cmd = app.add_subcommand("metrics",
                                     "ARI and confusion of two label files");
  met_cmd->add_option("a", file_a, "First label file (one label per line)")
      ->required();
  met_cmd->add_option("b", file_b, "Second label file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return run_fit(fa);
    if (sim_cmd->parsed()) return run_simulate(sa);
    const auto la = read_label_file(file_a);
    const auto lb = read_label_file(file_b);
    std::cout << "ARI\t" << std::setprecision(6) << adjusted_rand(la, lb)
              << "\n\n" << confusion_table(confusion(la, lb));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
