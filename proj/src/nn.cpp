#include "gda/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace gda {
namespace {

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::MatrixXd glorot_uniform(int out, int in, Rng& rng) {
  const double limit = std::sqrt(6.0 / (static_cast<double>(out) + static_cast<double>(in)));
  Eigen::MatrixXd w(out, in);
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
  return w;
}

}  // namespace

Eigen::MatrixXd activate(Act act, const Eigen::MatrixXd& pre) {
  switch (act) {
    case Act::identity:
      return pre;
    case Act::relu:
      return pre.cwiseMax(0.0);
    case Act::leaky_relu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? x : kLeakySlope * x; });
    case Act::elu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
    case Act::sigmoid:
      return pre.unaryExpr([](double x) { return sigmoid_scalar(x); });
  }
  throw std::logic_error("activate: unknown activation");
}

Eigen::MatrixXd activate_grad(Act act, const Eigen::MatrixXd& pre) {
  switch (act) {
    case Act::identity:
      return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case Act::relu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case Act::leaky_relu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : kLeakySlope; });
    case Act::elu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
    case Act::sigmoid:
      return pre.unaryExpr([](double x) {
        const double s = sigmoid_scalar(x);
        return s * (1.0 - s);
      });
  }
  throw std::logic_error("activate_grad: unknown activation");
}

DenseLayer make_dense(int out, int in, Act act, Rng& rng) {
  DenseLayer layer;
  layer.w = glorot_uniform(out, in, rng);
  layer.b = Eigen::MatrixXd::Zero(out, 1);
  layer.act = act;
  return layer;
}

std::vector<DenseGrad> zero_grads(const std::vector<DenseLayer>& layers) {
  std::vector<DenseGrad> grads;
  grads.reserve(layers.size());
  for (const auto& layer : layers)
    grads.push_back({Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()),
                     Eigen::MatrixXd::Zero(layer.b.rows(), 1)});
  return grads;
}

Eigen::MatrixXd mlp_forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x,
                            MlpCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->pres.clear();
  }
  Eigen::MatrixXd cur = x;
  for (const auto& layer : layers) {
    if (cur.rows() != layer.w.cols())
      throw std::invalid_argument("mlp_forward: input dimension mismatch");
    Eigen::MatrixXd pre = layer.w * cur;
    pre.colwise() += layer.b.col(0);
    if (cache) {
      cache->inputs.push_back(std::move(cur));
      cache->pres.push_back(pre);
    }
    cur = activate(layer.act, pre);
  }
  return cur;
}

Eigen::MatrixXd mlp_backward(const std::vector<DenseLayer>& layers, const MlpCache& cache,
                             const Eigen::MatrixXd& d_y, std::vector<DenseGrad>& grads) {
  if (cache.inputs.size() != layers.size() || grads.size() != layers.size())
    throw std::invalid_argument("mlp_backward: cache/grads mismatch");
  Eigen::MatrixXd d_cur = d_y;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const Eigen::MatrixXd d_pre =
        d_cur.cwiseProduct(activate_grad(layers[li].act, cache.pres[li]));
    grads[li].w.noalias() += d_pre * cache.inputs[li].transpose();
    grads[li].b.col(0) += d_pre.rowwise().sum();
    d_cur.noalias() = layers[li].w.transpose() * d_pre;
  }
  return d_cur;
}

Eigen::VectorXd mlp_apply(const std::vector<DenseLayer>& layers, const Eigen::VectorXd& x) {
  return mlp_forward(layers, x);
}

AttentionLayer make_attention(int out, int in, Rng& rng) {
  AttentionLayer layer;
  layer.w = glorot_uniform(out, in, rng);
  layer.attn = glorot_uniform(2 * out, 1, rng);
  return layer;
}

Eigen::VectorXd attention_forward_proj(const AttentionLayer& layer, const Eigen::MatrixXd& proj,
                                       int center, const std::vector<int>& nbrs,
                                       AttnCache* cache) {
  if (nbrs.empty()) throw std::invalid_argument("attention aggregation: empty neighbor list");
  const int out = layer.out_dim();
  const Eigen::VectorXd a1 = layer.attn.col(0).head(out);
  const Eigen::VectorXd a2 = layer.attn.col(0).tail(out);
  const double center_score = a1.dot(proj.col(center));
  const auto n = static_cast<Eigen::Index>(nbrs.size());
  Eigen::VectorXd s_pre(n);
  for (Eigen::Index j = 0; j < n; ++j)
    s_pre[j] = center_score + a2.dot(proj.col(nbrs[static_cast<std::size_t>(j)]));
  const Eigen::VectorXd e = activate(Act::leaky_relu, s_pre);
  const Eigen::VectorXd alpha = softmax(e);
  Eigen::VectorXd agg_pre = Eigen::VectorXd::Zero(out);
  for (Eigen::Index j = 0; j < n; ++j)
    agg_pre += alpha[j] * proj.col(nbrs[static_cast<std::size_t>(j)]);
  if (cache) {
    cache->center = center;
    cache->nbrs = nbrs;
    cache->s_pre = s_pre;
    cache->alpha = alpha;
    cache->agg_pre = agg_pre;
  }
  return activate(Act::elu, agg_pre);
}

void attention_backward_proj(const AttentionLayer& layer, const Eigen::MatrixXd& proj,
                             const AttnCache& cache, const Eigen::VectorXd& d_out,
                             Eigen::MatrixXd& d_proj, Eigen::MatrixXd& d_attn) {
  const int out = layer.out_dim();
  const Eigen::VectorXd a1 = layer.attn.col(0).head(out);
  const Eigen::VectorXd a2 = layer.attn.col(0).tail(out);
  const Eigen::VectorXd d_agg =
      d_out.cwiseProduct(activate_grad(Act::elu, cache.agg_pre).col(0));
  const auto n = static_cast<Eigen::Index>(cache.nbrs.size());

  Eigen::VectorXd d_alpha(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int col = cache.nbrs[static_cast<std::size_t>(j)];
    d_alpha[j] = d_agg.dot(proj.col(col));
    d_proj.col(col) += cache.alpha[j] * d_agg;
  }
  // softmax backward: de = α ⊙ (dα − ⟨α, dα⟩)
  const double inner = cache.alpha.dot(d_alpha);
  const Eigen::VectorXd d_e =
      cache.alpha.cwiseProduct(Eigen::VectorXd(d_alpha.array() - inner));
  const Eigen::VectorXd d_s =
      d_e.cwiseProduct(activate_grad(Act::leaky_relu, cache.s_pre).col(0));

  const double d_s_sum = d_s.sum();
  d_attn.col(0).head(out) += d_s_sum * proj.col(cache.center);
  d_proj.col(cache.center) += d_s_sum * a1;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int col = cache.nbrs[static_cast<std::size_t>(j)];
    d_attn.col(0).tail(out) += d_s[j] * proj.col(col);
    d_proj.col(col) += d_s[j] * a2;
  }
}

Eigen::VectorXd attention_aggregate(const AttentionLayer& layer, const Eigen::VectorXd& center,
                                    const std::vector<Eigen::VectorXd>& neighbors) {
  if (neighbors.empty()) throw std::invalid_argument("attention_aggregate: empty neighbor list");
  Eigen::MatrixXd inputs(layer.in_dim(), static_cast<Eigen::Index>(neighbors.size()) + 1);
  inputs.col(0) = center;
  std::vector<int> nbrs(neighbors.size());
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    inputs.col(static_cast<Eigen::Index>(j) + 1) = neighbors[j];
    nbrs[j] = static_cast<int>(j) + 1;
  }
  const Eigen::MatrixXd proj = layer.w * inputs;
  return attention_forward_proj(layer, proj, 0, nbrs);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw std::invalid_argument("softmax: empty input");
  const double m = x.maxCoeff();
  Eigen::VectorXd e = (x.array() - m).exp();
  return e / e.sum();
}

Eigen::VectorXd positional_embedding(int index, int dim) {
  if (dim <= 0 || dim % 2 != 0)
    throw std::invalid_argument("positional_embedding: dim must be positive and even");
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(dim));
    const double arg = index * freq;
    out[2 * i] = std::sin(arg);
    out[2 * i + 1] = std::cos(arg);
  }
  return out;
}

Eigen::VectorXd label_embedding(const Eigen::MatrixXd& table, std::optional<int> label) {
  const auto n_labels = table.rows() - 1;
  if (!label.has_value()) return table.row(n_labels).transpose();
  if (*label < 0 || *label >= n_labels)
    throw std::out_of_range("label_embedding: label out of range");
  return table.row(*label).transpose();
}

Eigen::MatrixXd make_embedding_table(int rows, int dim, Rng& rng) {
  Eigen::MatrixXd table(rows, dim);
  for (Eigen::Index c = 0; c < table.cols(); ++c)
    for (Eigen::Index r = 0; r < table.rows(); ++r) table(r, c) = 0.02 * rng.normal();
  return table;
}

}  // namespace gda
