#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "gda/checkpoint.hpp"
#include "gda/graph.hpp"
#include "gda/lowrank.hpp"
#include "gda/rng.hpp"

namespace gda {

struct GcnConfig {
  int hidden = 64;            // width of the first propagation layer
  int feat = 64;              // width of the penultimate feature layer
  double dropout = 0.5;       // applied to the input of every layer at train time
  double lr = 0.01;
  double weight_decay = 5e-4; // coupled (L2 added to the gradient)
  int epochs = 200;           // full-batch steps
  std::uint64_t seed = 0;
};

// Two symmetric-normalized propagation layers followed by a linear classifier.
struct GcnModel {
  Eigen::MatrixXd w1;  // attr_dim × hidden
  Eigen::MatrixXd w2;  // hidden × feat
  Eigen::MatrixXd wc;  // feat × n_classes

  ParamList params();
};

GcnModel make_gcn(int attr_dim, int hidden, int feat, int n_classes, Rng& rng);

// Ŝ = D̃^{-1/2} (A + I) D̃^{-1/2} with D̃ the degree matrix of A + I.
Eigen::SparseMatrix<double> normalized_adjacency(const AttributedGraph& g);

// Rows scaled to unit L1 mass of absolute values (zero rows left untouched
// via a 1e-12 floor). Equals the usual per-document scaling on binary
// bag-of-words rows and stays bounded on dense real-valued rows.
Eigen::MatrixXd row_normalized_features(const Eigen::MatrixXd& x);

struct GcnForward {
  Eigen::MatrixXd h;       // N × feat, post-ReLU penultimate features
  Eigen::MatrixXd logits;  // N × n_classes
};

// Deterministic forward pass without dropout.
GcnForward gcn_forward(const GcnModel& model, const Eigen::SparseMatrix<double>& s_hat,
                       const Eigen::MatrixXd& x_norm);
GcnForward gcn_forward(const GcnModel& model, const AttributedGraph& g);

// Argmax accuracy over the nodes of a split; ties break to the smallest
// class index. Throws on an empty split or an unlabeled split node.
double split_accuracy(const Eigen::MatrixXd& logits, const AttributedGraph& g, Split split);
double evaluate_accuracy(const GcnModel& model, const AttributedGraph& g, Split split);

struct GcnMetricsRow {
  int epoch = 0;           // 1-based
  double train_loss = 0.0; // objective for the step, regularizer included
  double tnn = 0.0;        // trailing spectral mass of the step's features
  double val_acc = 0.0;    // NaN when the split is empty
  double test_acc = 0.0;   // NaN when the split is empty
};

struct GcnTrainResult {
  GcnModel model;
  std::vector<GcnMetricsRow> metrics;
  double final_tnn = 0.0;  // trailing mass of the deterministic features after training
};

// Full-batch Adam on mean cross-entropy over the train split plus
// tau * (trailing spectral mass of the penultimate features beyond
// r0 = ceil(gamma * min(N, feat))). With tau = 0 the spectral term never
// touches the gradients, so training matches a plain two-layer pipeline
// bit for bit under the same seed.
GcnTrainResult train_node_classifier(const AttributedGraph& g_aug, const LowRankConfig& reg,
                                     const GcnConfig& cfg);

}  // namespace gda
