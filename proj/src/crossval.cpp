#include "gda/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "gda/rng.hpp"

namespace gda {

CvGrids default_cv_grids() {
  CvGrids g;
  for (int i = 1; i <= 9; ++i) g.gammas.push_back(static_cast<double>(i) / 10.0);
  for (int i = 1; i <= 10; ++i) g.taus.push_back(static_cast<double>(i) / 20.0);
  for (int i = 1; i <= 10; ++i) g.betas.push_back(i);
  return g;
}

CvSelection cross_validate(const AttributedGraph& g, const CvGrids& grids,
                           const SynProvider& provider, const GcnConfig& gcn_cfg,
                           const double eta, int budget, std::uint64_t seed) {
  if (grids.gammas.empty() || grids.taus.empty() || grids.betas.empty()) {
    throw std::invalid_argument("cross_validate: empty hyperparameter grid");
  }
  if (!provider) throw std::invalid_argument("cross_validate: missing synthetic provider");
  g.validate();

  const auto train_nodes = g.nodes_in_split(Split::train);
  if (train_nodes.empty()) throw std::invalid_argument("cross_validate: no train nodes");
  constexpr int kFolds = 5;
  const int pool_size =
      static_cast<int>(std::ceil(0.2 * static_cast<double>(train_nodes.size())));
  if (pool_size < kFolds) {
    throw std::invalid_argument("cross_validate: training pool smaller than the fold count");
  }

  Rng root(seed);
  std::vector<int> order = train_nodes;
  {
    Rng shuffle_rng = root.fork(0);
    shuffle_rng.shuffle(order);
  }
  std::vector<std::vector<int>> folds(kFolds);
  for (int i = 0; i < pool_size; ++i) {
    folds[static_cast<std::size_t>(i % kFolds)].push_back(order[static_cast<std::size_t>(i)]);
  }

  std::set<int> required_classes;
  for (int v : train_nodes) required_classes.insert(g.labels[static_cast<std::size_t>(v)]);

  // One graph per fold: the fold becomes the validation split and the
  // original validation nodes step aside so they do not mix into it.
  std::vector<AttributedGraph> fold_graphs;
  fold_graphs.reserve(kFolds);
  for (int f = 0; f < kFolds; ++f) {
    AttributedGraph gf = g;
    for (int i = 0; i < gf.n_nodes; ++i) {
      if (gf.split[static_cast<std::size_t>(i)] == Split::val) {
        gf.split[static_cast<std::size_t>(i)] = Split::none;
      }
    }
    for (int v : folds[static_cast<std::size_t>(f)]) {
      gf.split[static_cast<std::size_t>(v)] = Split::val;
    }
    std::set<int> present;
    for (int v : gf.nodes_in_split(Split::train)) {
      present.insert(gf.labels[static_cast<std::size_t>(v)]);
    }
    if (present != required_classes) {
      throw std::invalid_argument(
          "cross_validate: a fold removes every training node of some class");
    }
    fold_graphs.push_back(std::move(gf));
  }

  std::vector<std::uint64_t> fold_seeds;
  for (int f = 0; f < kFolds; ++f) {
    fold_seeds.push_back(root.fork(static_cast<std::uint64_t>(1 + f)).seed());
  }

  // Ascending scan order makes the strict-improvement comparison resolve
  // ties to the smallest (beta, tau, gamma).
  std::vector<int> betas = grids.betas;
  std::vector<double> taus = grids.taus;
  std::vector<double> gammas = grids.gammas;
  std::sort(betas.begin(), betas.end());
  std::sort(taus.begin(), taus.end());
  std::sort(gammas.begin(), gammas.end());

  GcnConfig cv_cfg = gcn_cfg;
  cv_cfg.epochs = std::max(1, static_cast<int>(std::llround(0.4 * gcn_cfg.epochs)));

  CvSelection sel;
  double best = -1.0;
  int evaluated = 0;
  for (int beta : betas) {
    if (budget > 0 && evaluated >= budget) break;
    const SyntheticBatch batch = provider(beta);
    std::vector<AttributedGraph> aug_graphs;
    aug_graphs.reserve(kFolds);
    for (int f = 0; f < kFolds; ++f) {
      aug_graphs.push_back(assemble_augmented_graph(fold_graphs[static_cast<std::size_t>(f)],
                                                    batch)
                               .graph);
    }
    for (double tau : taus) {
      if (budget > 0 && evaluated >= budget) break;
      for (double gamma : gammas) {
        if (budget > 0 && evaluated >= budget) break;
        double acc_sum = 0.0;
        for (int f = 0; f < kFolds; ++f) {
          LowRankConfig reg;
          reg.tau = tau;
          reg.gamma = gamma;
          reg.eta = eta;
          GcnConfig run_cfg = cv_cfg;
          run_cfg.seed = fold_seeds[static_cast<std::size_t>(f)];
          const GcnTrainResult res =
              train_node_classifier(aug_graphs[static_cast<std::size_t>(f)], reg, run_cfg);
          acc_sum += evaluate_accuracy(res.model, aug_graphs[static_cast<std::size_t>(f)],
                                       Split::val);
        }
        const double mean_acc = acc_sum / static_cast<double>(kFolds);
        sel.records.push_back({beta, tau, gamma, mean_acc});
        ++evaluated;
        if (mean_acc > best) {
          best = mean_acc;
          sel.beta = beta;
          sel.tau = tau;
          sel.gamma = gamma;
          sel.mean_accuracy = mean_acc;
        }
      }
    }
  }
  return sel;
}

}  // namespace gda
