#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "pfmr/csv.hpp"
#include "pfmr/em.hpp"
#include "pfmr/io.hpp"
#include "pfmr/selection.hpp"

using namespace pfmr;
using Catch::Approx;

namespace {

const std::string kDataDir = PFMR_DATA_DIR;

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
  void write(const std::string& text) const {
    std::ofstream out(path);
    out << text;
  }
};

LoadedData load_crabs() {
  return load_csv(kDataDir + "/crabs.csv", {"CW", "FL", "RW"}, {"CL", "BD"},
                  {}, "group");
}

}  // namespace

TEST_CASE("csv reading") {
  SECTION("bundled dataset loads with the documented shape") {
    const LoadedData crabs = load_crabs();
    CHECK(crabs.data.n() == 200);
    CHECK(crabs.data.d() == 3);
    CHECK(crabs.data.p() == 2);
    REQUIRE(crabs.truth.size() == 200);
    std::set<int> groups(crabs.truth.begin(), crabs.truth.end());
    CHECK(groups.size() == 4);
    // spot-check column means against the published summaries
    CHECK(crabs.data.y().col(1).mean() == Approx(15.583).margin(1e-3));  // FL
    CHECK(crabs.data.y().col(2).mean() == Approx(12.7385).margin(1e-3)); // RW
    CHECK(crabs.data.x().col(0).mean() == Approx(32.1055).margin(1e-3)); // CL
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(read_csv(kDataDir + "/does-not-exist.csv"), CsvError);
  }
  SECTION("ragged row is reported with its row number") {
    TempFile f("pfmr_ragged.csv");
    f.write("a,b\n1,2\n3\n");
    try {
      read_csv(f.path);
      FAIL("expected CsvError");
    } catch (const CsvError& e) {
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SECTION("non-numeric cell is reported with row and column") {
    TempFile f("pfmr_nonnum.csv");
    f.write("a,b\n1,2\n3,oops\n");
    const CsvTable t = read_csv(f.path);
    try {
      numeric_columns(t, {"b"}, f.path);
      FAIL("expected CsvError");
    } catch (const CsvError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 3") != std::string::npos);
      CHECK(msg.find("'b'") != std::string::npos);
      CHECK(msg.find("oops") != std::string::npos);
    }
  }
  SECTION("unknown column name") {
    TempFile f("pfmr_cols.csv");
    f.write("a,b\n1,2\n");
    const CsvTable t = read_csv(f.path);
    CHECK_THROWS_AS(t.column("z"), CsvError);
  }
  SECTION("label_column codes values in sorted order") {
    TempFile f("pfmr_labels.csv");
    f.write("g\nB\nA\nB\nC\n");
    const CsvTable t = read_csv(f.path);
    const std::vector<int> codes = label_column(t, "g");
    CHECK(codes == std::vector<int>{1, 0, 1, 2});
  }
}

TEST_CASE("model JSON round trip preserves the likelihood") {
  const LoadedData crabs = load_crabs();
  const Matrix init = kmeans_init(crabs.data, 2, 42 + 2000);
  const FitResult r = fit(crabs.data, Family::eFMR, 2,
                          CovarianceStructure::VVI, init);
  REQUIRE_FALSE(r.failed());

  TempFile f("pfmr_model.json");
  write_model(f.path, r.model);
  const MixtureModel back = read_model(f.path);

  CHECK(back.G == r.model.G);
  CHECK(back.structure == r.model.structure);
  CHECK(back.family() == Family::eFMR);
  const double ll_orig = log_likelihood(r.model, crabs.data);
  const double ll_back = log_likelihood(back, crabs.data);
  CHECK(ll_back == Approx(ll_orig).margin(1e-6));
  CHECK(ll_orig == Approx(r.loglik).margin(1e-6));
}

TEST_CASE("concomitant model JSON round trip") {
  const LoadedData crabs = load_crabs();
  const Matrix init = kmeans_init(crabs.data, 2, 7);
  const FitResult r = fit(crabs.data, Family::eFMRC, 2,
                          CovarianceStructure::EEE, init);
  REQUIRE_FALSE(r.failed());
  TempFile f("pfmr_model_c.json");
  write_model(f.path, r.model);
  const MixtureModel back = read_model(f.path);
  CHECK(back.family() == Family::eFMRC);
  CHECK(log_likelihood(back, crabs.data) ==
        Approx(log_likelihood(r.model, crabs.data)).margin(1e-6));
  const auto& cw = std::get<ConcomitantWeights>(back.weights);
  CHECK(cw.alpha.rows() == 2);
  CHECK(cw.alpha.cols() == 3);
}

TEST_CASE("scenario JSON round trip") {
  SimScenario sc;
  sc.n_obs = 123;
  sc.pi1 = 0.37;
  sc.replicates = 7;
  sc.seed = 99;
  sc.B[0](2, 1) = -9.5;
  sc.error_volume = 2.5;
  const SimScenario back = scenario_from_json(scenario_to_json(sc));
  CHECK(back.n_obs == sc.n_obs);
  CHECK(back.pi1 == sc.pi1);
  CHECK(back.replicates == sc.replicates);
  CHECK(back.seed == sc.seed);
  CHECK(back.B[0] == sc.B[0]);
  CHECK(back.B[1] == sc.B[1]);
  CHECK(back.error_volume == sc.error_volume);
  CHECK((back.error_covariance() - sc.error_covariance()).norm() < 1e-12);
  // the same seed then generates the same data
  const auto a = generate(sc, 4);
  const auto b = generate(back, 4);
  CHECK(a.data.y() == b.data.y());
}

TEST_CASE("ranked table formatting") {
  std::mt19937 gen(2);
  std::normal_distribution<double> nd;
  Matrix x(60, 1), y(60, 1);
  for (int i = 0; i < 60; ++i) {
    x(i, 0) = nd(gen);
    y(i, 0) = (i % 2 == 0 ? 8.0 : -8.0) + x(i, 0) + 0.3 * nd(gen);
  }
  const Dataset data(y, x);
  SearchSpec spec;
  spec.families = {Family::eFMR};
  spec.g_min = 1;
  spec.g_max = 2;
  spec.structures = {CovarianceStructure::EII, CovarianceStructure::VVV};
  spec.seed = 5;
  spec.threads = 1;
  const SelectionReport rep = search(data, spec);
  const std::string table = ranked_table(rep);

  // header plus one row per cell
  const auto lines = std::count(table.begin(), table.end(), '\n');
  CHECK(lines == 1 + static_cast<long>(rep.cells.size()));
  CHECK(table.rfind("family\tstructure\tG\tBIC", 0) == 0);
  // the first data row is the selected model
  std::istringstream in(table);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  std::ostringstream want;
  want << to_string(rep.best().family) << '\t' << to_string(rep.best().structure)
       << '\t' << rep.best().G << '\t';
  CHECK(first.rfind(want.str(), 0) == 0);
  // byte-identical across repeated runs
  CHECK(table == ranked_table(search(data, spec)));
}

TEST_CASE("confusion table formatting") {
  const Confusion c = confusion({0, 0, 1, 1}, {1, 1, 0, 2});
  const std::string t = confusion_table(c);
  CHECK(t ==
        "truth\\est\t0\t1\t2\n"
        "0\t0\t2\t0\n"
        "1\t1\t0\t1\n");
}
