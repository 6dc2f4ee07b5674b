#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gda/augment.hpp"
#include "gda/gcn.hpp"
#include "gda/graph.hpp"
#include "gda/lowrank.hpp"

namespace gda {

// Hyperparameter grids; defaults cover rank ratio 0.1..0.9, regularizer
// weight 0.05..0.50, and synthetic-budget multiplier 1..10.
struct CvGrids {
  std::vector<double> gammas;
  std::vector<double> taus;
  std::vector<int> betas;
};

CvGrids default_cv_grids();

// Supplies the synthetic batch for a given budget multiplier; the batch is
// reused across folds, so the provider is called once per multiplier.
using SynProvider = std::function<SyntheticBatch(int beta)>;

struct CvRecord {
  int beta = 0;
  double tau = 0.0;
  double gamma = 0.0;
  double mean_accuracy = 0.0;
};

struct CvSelection {
  int beta = 0;
  double tau = 0.0;
  double gamma = 0.0;
  double mean_accuracy = 0.0;
  std::vector<CvRecord> records;  // one per evaluated grid point, in scan order
};

// 5-fold selection on 20% of the train split: each fold in turn becomes the
// validation set while the remaining train nodes (plus the synthetic batch)
// train a classifier for 40% of the configured epochs. Grid points are
// scanned in ascending (beta, tau, gamma) order and compared by strict
// improvement of mean fold accuracy, so ties resolve to the lexicographically
// smallest triple. A positive budget caps the number of evaluated points.
CvSelection cross_validate(const AttributedGraph& g, const CvGrids& grids,
                           const SynProvider& provider, const GcnConfig& gcn_cfg,
                           const double eta, int budget, std::uint64_t seed);

}  // namespace gda
