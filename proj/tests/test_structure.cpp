#include <catch2/catch_amalgamated.hpp>

#include "pfmr/structure.hpp"

using namespace pfmr;
using Catch::Approx;

TEST_CASE("parameter counts reproduce the published model sizes") {
  CHECK(n_free_params(Family::eFMR, CovarianceStructure::VVI, 2, 3, 2) == 25);
  CHECK(n_free_params(Family::eFMRC, CovarianceStructure::VEE, 4, 3, 2, 2) == 54);
  CHECK(n_free_params(Family::eFMR, CovarianceStructure::EII, 1, 1, 0) == 2);
}

TEST_CASE("covariance parameter counts follow the table") {
  const int d = 3, G = 2;
  CHECK(covariance_param_count(CovarianceStructure::EII, d, G) == 1);
  CHECK(covariance_param_count(CovarianceStructure::VII, d, G) == G);
  CHECK(covariance_param_count(CovarianceStructure::EEI, d, G) == d);
  CHECK(covariance_param_count(CovarianceStructure::VEI, d, G) == d + G - 1);
  CHECK(covariance_param_count(CovarianceStructure::EVI, d, G) == d * G - G + 1);
  CHECK(covariance_param_count(CovarianceStructure::VVI, d, G) == d * G);
  CHECK(covariance_param_count(CovarianceStructure::EEE, d, G) == 6);
  CHECK(covariance_param_count(CovarianceStructure::VEE, d, G) == 7);
  CHECK(covariance_param_count(CovarianceStructure::EVE, d, G) == 8);
  CHECK(covariance_param_count(CovarianceStructure::VVE, d, G) == 9);
  CHECK(covariance_param_count(CovarianceStructure::EEV, d, G) == 9);
  CHECK(covariance_param_count(CovarianceStructure::VEV, d, G) == 10);
  CHECK(covariance_param_count(CovarianceStructure::EVV, d, G) == 11);
  CHECK(covariance_param_count(CovarianceStructure::VVV, d, G) == 12);
}

TEST_CASE("counts are strictly increasing in G where G enters") {
  for (auto s : all_structures) {
    if (s == CovarianceStructure::EII || s == CovarianceStructure::EEI ||
        s == CovarianceStructure::EEE)
      continue;  // G-free covariance counts
    for (int d : {1, 2, 4}) {
      for (int G = 1; G < 5; ++G) {
        // full model count always grows with G through the regression part
        CHECK(n_free_params(Family::eFMR, s, G + 1, d, 2) >
              n_free_params(Family::eFMR, s, G, d, 2));
        if (!(d == 1 && (s == CovarianceStructure::VEI ||
                         s == CovarianceStructure::VEE ||
                         s == CovarianceStructure::EVE)))
          CHECK(covariance_param_count(s, d, G + 1) >=
                covariance_param_count(s, d, G));
      }
    }
  }
}

TEST_CASE("at d=1 shape and orientation carry no parameters") {
  const int G = 3;
  // everything collapses to the volume class: equal or variable
  const int equal_vol = covariance_param_count(CovarianceStructure::EII, 1, G);
  const int var_vol = covariance_param_count(CovarianceStructure::VII, 1, G);
  for (auto s : {CovarianceStructure::EEI, CovarianceStructure::EEE,
                 CovarianceStructure::EVI, CovarianceStructure::EVV,
                 CovarianceStructure::EEV, CovarianceStructure::EVE})
    CHECK(covariance_param_count(s, 1, G) == equal_vol);
  for (auto s : {CovarianceStructure::VVI, CovarianceStructure::VVV,
                 CovarianceStructure::VVE})
    CHECK(covariance_param_count(s, 1, G) == var_vol);
}

TEST_CASE("bic arithmetic and monotonicity") {
  CHECK(bic(0.0, 0, 10) == 0.0);
  CHECK(bic(-1000.0, 10, 100) == Approx(-2046.0517018599).epsilon(1e-10));
  CHECK(bic(-100.0, 5, 50) > bic(-101.0, 5, 50));
  CHECK(bic(-100.0, 5, 50) > bic(-100.0, 6, 50));
  CHECK_THROWS_AS(bic(0.0, 0, 0), std::invalid_argument);
}

TEST_CASE("structure codes round-trip and reject junk") {
  for (auto s : all_structures)
    CHECK(structure_from_string(std::string(to_string(s))) == s);
  CHECK_THROWS_AS(structure_from_string("XYZ"), std::invalid_argument);
  CHECK_THROWS_AS(n_free_params(Family::eFMR, CovarianceStructure::VVV, 0, 1, 0),
                  std::invalid_argument);
}
