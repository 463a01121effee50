#pragma once

// Parsimonious finite mixtures of multivariate-response Gaussian
// regressions: EM estimation under 14 eigen-decomposed covariance
// structures, with static (eFMR) or multinomial-logit (eFMRC) mixing
// weights, BIC model selection and ARI evaluation.

#include "pfmr/concomitant.hpp"
#include "pfmr/covariance.hpp"
#include "pfmr/csv.hpp"
#include "pfmr/dataset.hpp"
#include "pfmr/em.hpp"
#include "pfmr/init.hpp"
#include "pfmr/io.hpp"
#include "pfmr/metrics.hpp"
#include "pfmr/model.hpp"
#include "pfmr/rng.hpp"
#include "pfmr/selection.hpp"
#include "pfmr/simulation.hpp"
#include "pfmr/structure.hpp"
