#include "gda/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gda/optim.hpp"

namespace gda {

namespace {

Eigen::MatrixXd glorot_matrix(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      w(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return w;
}

// In-place inverted dropout; zero rate draws nothing.
void drop_in_place(Eigen::MatrixXd& m, double rate, Rng& rng) {
  if (rate == 0.0) return;
  const double keep = 1.0 - rate;
  const double inv_keep = 1.0 / keep;
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform() < keep ? m(i, j) * inv_keep : 0.0;
    }
  }
}

// Multiplier matrix (1/keep or 0) so the same realization can be replayed in
// the backward pass.
Eigen::MatrixXd drop_multiplier(int rows, int cols, double rate, Rng& rng) {
  if (rate == 0.0) return Eigen::MatrixXd::Ones(rows, cols);
  const double keep = 1.0 - rate;
  const double inv_keep = 1.0 / keep;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = rng.uniform() < keep ? inv_keep : 0.0;
    }
  }
  return m;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

ParamList GcnModel::params() {
  return {{"gcn.w1", &w1}, {"gcn.w2", &w2}, {"gcn.wc", &wc}};
}

GcnModel make_gcn(int attr_dim, int hidden, int feat, int n_classes, Rng& rng) {
  if (attr_dim < 1 || hidden < 1 || feat < 1 || n_classes < 1) {
    throw std::invalid_argument("make_gcn: dimensions must be positive");
  }
  GcnModel m;
  m.w1 = glorot_matrix(attr_dim, hidden, rng);
  m.w2 = glorot_matrix(hidden, feat, rng);
  m.wc = glorot_matrix(feat, n_classes, rng);
  return m;
}

Eigen::SparseMatrix<double> normalized_adjacency(const AttributedGraph& g) {
  const int n = g.n_nodes;
  const auto adj = g.adjacency();
  Eigen::VectorXd deg(n);
  for (int i = 0; i < n; ++i) {
    deg(i) = static_cast<double>(adj[static_cast<std::size_t>(i)].size()) + 1.0;
  }
  std::vector<Eigen::Triplet<double>> trips;
  std::size_t nnz = static_cast<std::size_t>(n);
  for (int i = 0; i < n; ++i) nnz += adj[static_cast<std::size_t>(i)].size();
  trips.reserve(nnz);
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, 1.0 / deg(i));
    for (int j : adj[static_cast<std::size_t>(i)]) {
      trips.emplace_back(i, j, 1.0 / std::sqrt(deg(i) * deg(j)));
    }
  }
  Eigen::SparseMatrix<double> s(n, n);
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  return s;
}

Eigen::MatrixXd row_normalized_features(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  for (int i = 0; i < out.rows(); ++i) {
    const double mass = out.row(i).cwiseAbs().sum();
    out.row(i) /= std::max(mass, 1e-12);
  }
  return out;
}

GcnForward gcn_forward(const GcnModel& model, const Eigen::SparseMatrix<double>& s_hat,
                       const Eigen::MatrixXd& x_norm) {
  if (x_norm.cols() != model.w1.rows()) {
    throw std::invalid_argument("gcn_forward: attribute dimension mismatch");
  }
  if (s_hat.rows() != x_norm.rows()) {
    throw std::invalid_argument("gcn_forward: adjacency size mismatch");
  }
  GcnForward f;
  const Eigen::MatrixXd p1 = s_hat * (x_norm * model.w1);
  const Eigen::MatrixXd h1 = p1.cwiseMax(0.0);
  const Eigen::MatrixXd p2 = s_hat * (h1 * model.w2);
  f.h = p2.cwiseMax(0.0);
  f.logits = f.h * model.wc;
  return f;
}

GcnForward gcn_forward(const GcnModel& model, const AttributedGraph& g) {
  return gcn_forward(model, normalized_adjacency(g), row_normalized_features(g.attributes));
}

double split_accuracy(const Eigen::MatrixXd& logits, const AttributedGraph& g, Split split) {
  if (logits.rows() != g.n_nodes) {
    throw std::invalid_argument("split_accuracy: logit row count mismatch");
  }
  const auto nodes = g.nodes_in_split(split);
  if (nodes.empty()) throw std::invalid_argument("split_accuracy: empty evaluation split");
  int hits = 0;
  for (int v : nodes) {
    const int label = g.labels[static_cast<std::size_t>(v)];
    if (label < 0) {
      throw std::invalid_argument("split_accuracy: node in evaluation split lacks a label");
    }
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits(v, c) > logits(v, best)) best = c;
    }
    if (best == label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

double evaluate_accuracy(const GcnModel& model, const AttributedGraph& g, Split split) {
  return split_accuracy(gcn_forward(model, g).logits, g, split);
}

GcnTrainResult train_node_classifier(const AttributedGraph& g_aug, const LowRankConfig& reg,
                                     const GcnConfig& cfg) {
  g_aug.validate();
  if (reg.tau < 0.0) throw std::invalid_argument("train_node_classifier: tau must be >= 0");
  if (!(reg.gamma > 0.0 && reg.gamma < 1.0)) {
    throw std::invalid_argument("train_node_classifier: gamma must lie in (0, 1)");
  }
  if (reg.tau > 0.0 && !(reg.eta > 0.0)) {
    throw std::invalid_argument("train_node_classifier: eta must be positive when tau > 0");
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("train_node_classifier: dropout must lie in [0, 1)");
  }
  if (cfg.epochs < 0) throw std::invalid_argument("train_node_classifier: negative epochs");
  const auto labeled = g_aug.nodes_in_split(Split::train);
  if (labeled.empty()) throw std::invalid_argument("train_node_classifier: no train nodes");
  for (int v : labeled) {
    if (g_aug.labels[static_cast<std::size_t>(v)] < 0) {
      throw std::invalid_argument("train_node_classifier: unlabeled train node");
    }
  }

  const int n = g_aug.n_nodes;
  const int n_classes = g_aug.n_classes();
  const int r0 = static_cast<int>(
      std::ceil(reg.gamma * static_cast<double>(std::min(n, cfg.feat))));
  const double inv_m = 1.0 / static_cast<double>(labeled.size());

  const Eigen::MatrixXd x_norm = row_normalized_features(g_aug.attributes);
  const Eigen::SparseMatrix<double> s_hat = normalized_adjacency(g_aug);

  Rng root(cfg.seed);
  Rng init = root.fork(0);
  Rng train = root.fork(1);

  GcnTrainResult res;
  res.model = make_gcn(static_cast<int>(x_norm.cols()), cfg.hidden, cfg.feat, n_classes, init);
  ParamList params = res.model.params();

  AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  acfg.decoupled = false;
  AdamState opt;
  opt.init(params);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool has_val = !g_aug.nodes_in_split(Split::val).empty();
  const bool has_test = !g_aug.nodes_in_split(Split::test).empty();

  res.metrics.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Train-mode forward: dropout on the input of every layer.
    Eigen::MatrixXd x_drop = x_norm;
    drop_in_place(x_drop, cfg.dropout, train);
    const Eigen::MatrixXd p1 = s_hat * (x_drop * res.model.w1);
    const Eigen::MatrixXd h1 = p1.cwiseMax(0.0);
    const Eigen::MatrixXd m1 = drop_multiplier(n, cfg.hidden, cfg.dropout, train);
    const Eigen::MatrixXd h1d = h1.cwiseProduct(m1);
    const Eigen::MatrixXd p2 = s_hat * (h1d * res.model.w2);
    const Eigen::MatrixXd h = p2.cwiseMax(0.0);
    const Eigen::MatrixXd mh = drop_multiplier(n, cfg.feat, cfg.dropout, train);
    const Eigen::MatrixXd hd = h.cwiseProduct(mh);
    const Eigen::MatrixXd logits = hd * res.model.wc;

    const TnnResult tnn = truncated_nuclear_norm(h, r0);

    double ce = 0.0;
    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(n, n_classes);
    for (int v : labeled) {
      const int y = g_aug.labels[static_cast<std::size_t>(v)];
      const Eigen::VectorXd row = logits.row(v).transpose();
      const double lse = log_sum_exp(row);
      ce += lse - row(y);
      Eigen::VectorXd soft = (row.array() - lse).exp();
      soft(y) -= 1.0;
      d_logits.row(v) = inv_m * soft.transpose();
    }
    ce *= inv_m;
    const double loss = ce + reg.tau * tnn.value;
    if (!std::isfinite(loss)) {
      throw std::runtime_error("train_node_classifier: non-finite loss");
    }

    const Eigen::MatrixXd relu2 = (p2.array() > 0.0).cast<double>().matrix();
    const Eigen::MatrixXd relu1 = (p1.array() > 0.0).cast<double>().matrix();

    Eigen::MatrixXd g_wc = hd.transpose() * d_logits;
    const Eigen::MatrixXd d_h = (d_logits * res.model.wc.transpose()).cwiseProduct(mh);
    const Eigen::MatrixXd d_p2 = d_h.cwiseProduct(relu2);
    const Eigen::MatrixXd t2 = s_hat * d_p2;  // Ŝ is symmetric
    Eigen::MatrixXd g_w2 = h1d.transpose() * t2;
    const Eigen::MatrixXd d_h1 = (t2 * res.model.w2.transpose()).cwiseProduct(m1);
    const Eigen::MatrixXd d_p1 = d_h1.cwiseProduct(relu1);
    const Eigen::MatrixXd t1 = s_hat * d_p1;
    Eigen::MatrixXd g_w1 = x_drop.transpose() * t1;

    std::vector<Eigen::MatrixXd> grads;
    grads.reserve(3);
    grads.push_back(std::move(g_w1));
    grads.push_back(std::move(g_w2));
    grads.push_back(std::move(g_wc));
    adam_step(params, grads, opt, acfg);

    // The rank penalty descends by plain gradient steps with its own rate eta,
    // decoupled from the adaptive step on the fit term. Running it through the
    // adaptive optimizer would rescale its (small but coherent) entries up to
    // full step size and crush the representation before it carries any signal.
    if (reg.tau != 0.0) {
      const Eigen::MatrixXd dr_p2 = (reg.tau * tnn.grad).cwiseProduct(relu2);
      const Eigen::MatrixXd tr2 = s_hat * dr_p2;
      const Eigen::MatrixXd gr_w2 = h1d.transpose() * tr2;
      const Eigen::MatrixXd dr_h1 = (tr2 * res.model.w2.transpose()).cwiseProduct(m1);
      const Eigen::MatrixXd dr_p1 = dr_h1.cwiseProduct(relu1);
      const Eigen::MatrixXd gr_w1 = x_drop.transpose() * (s_hat * dr_p1);
      res.model.w2 -= reg.eta * gr_w2;
      res.model.w1 -= reg.eta * gr_w1;
    }

    GcnMetricsRow row;
    row.epoch = epoch;
    row.train_loss = loss;
    row.tnn = tnn.value;
    if (has_val || has_test) {
      const GcnForward f = gcn_forward(res.model, s_hat, x_norm);
      row.val_acc = has_val ? split_accuracy(f.logits, g_aug, Split::val) : nan;
      row.test_acc = has_test ? split_accuracy(f.logits, g_aug, Split::test) : nan;
    } else {
      row.val_acc = nan;
      row.test_acc = nan;
    }
    res.metrics.push_back(row);
  }

  const GcnForward final_fwd = gcn_forward(res.model, s_hat, x_norm);
  res.final_tnn = truncated_nuclear_norm(final_fwd.h, r0).value;
  return res;
}

}  // namespace gda
