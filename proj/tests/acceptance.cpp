// Acceptance gate: every shipped guarantee checked end to end, one
// [PASS]/[FAIL] line per criterion.  Exit code = number of failed criteria.
//
//   C1  neighbor-map codec round-trips adjacency exactly
//   C2  analytic gradients match finite differences across every module
//   C3  linear-probe gradient descent matches its closed-form residual
//   C4  diffusion identities (terminal noise, forward marginal, guidance)
//   C5  baseline node classifier reaches the published desk-scale accuracy
//   C6  spectral regularization keeps accuracy and shrinks trailing mass
//   C7  end-to-end augmentation preserves structure and accuracy
//   C8  label energy concentrates in the top of the feature spectrum
//   C9  same seed twice -> byte-identical artifacts
//
// An optional argv[1] overrides the data directory baked in at compile time.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gda/augment.hpp"
#include "gda/clustering.hpp"
#include "gda/config.hpp"
#include "gda/gae.hpp"
#include "gda/gcn.hpp"
#include "gda/grad_check.hpp"
#include "gda/graph.hpp"
#include "gda/ldm.hpp"
#include "gda/lowrank.hpp"
#include "gda/neighbor_maps.hpp"
#include "gda/nn.hpp"
#include "gda/pipeline.hpp"
#include "gda/rng.hpp"
#include "helpers.hpp"

using namespace gda;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Gate {
  int failures = 0;

  template <typename Body>
  void criterion(int id, Body&& body) {
    const auto t0 = Clock::now();
    bool pass = false;
    std::string detail;
    try {
      detail = body(pass);
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] C%d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Gives every bias a small random value: zero-initialized biases can leave
// relu pre-activations exactly at the kink (a dead previous layer feeds 0),
// where central differences are meaningless.
void randomize_biases(const ParamList& params, Rng& rng) {
  for (const auto& p : params) {
    if (p.name.size() >= 2 && p.name.compare(p.name.size() - 2, 2, ".b") == 0) {
      *p.value = 0.1 * rng.normal_matrix(p.value->rows(), p.value->cols());
    }
  }
}

// Conditional-only ancestral loop with the exact rng consumption pattern of
// the guided sampler: initial draw, then one noise draw per step except the
// last.  Guidance weight 0 must reproduce this samplewise.
Eigen::VectorXd conditional_sample(const Denoiser& den, int label,
                                   const DiffusionSchedule& sched, Rng& rng) {
  const int d = den.latent_dim();
  Eigen::VectorXd z = rng.normal_vector(d);
  for (int t = sched.t_max; t >= 1; --t) {
    const Eigen::VectorXd eps = denoise_eps(den, z, t, label);
    z = (z - sched.betas[t - 1] / std::sqrt(1.0 - sched.alpha_bars[t - 1]) * eps) /
        std::sqrt(sched.alphas[t - 1]);
    if (t > 1) z += sched.sigmas[t - 1] * rng.normal_vector(d);
  }
  return z;
}

// ---- C2 families -----------------------------------------------------------

double check_attention_instance(std::uint64_t seed) {
  Rng r(seed);
  const int in = 2 + static_cast<int>(r.uniform_int(0, 3));
  const int out = 2 + static_cast<int>(r.uniform_int(0, 3));
  const int cols = 3 + static_cast<int>(r.uniform_int(0, 4));
  AttentionLayer layer = make_attention(out, in, r);
  const Eigen::MatrixXd x = r.normal_matrix(in, cols);
  const int center = static_cast<int>(r.uniform_int(0, cols - 1));
  std::vector<int> nbrs;
  for (int j = 0; j < cols; ++j) {
    if (r.uniform() < 0.6) nbrs.push_back(j);
  }
  if (nbrs.empty()) nbrs.push_back((center + 1) % cols);

  Eigen::MatrixXd proj = layer.w * x;
  AttnCache cache;
  const Eigen::VectorXd y = attention_forward_proj(layer, proj, center, nbrs, &cache);
  Eigen::MatrixXd d_proj = Eigen::MatrixXd::Zero(out, cols);
  Eigen::MatrixXd d_attn = Eigen::MatrixXd::Zero(2 * out, 1);
  attention_backward_proj(layer, proj, cache, y, d_proj, d_attn);
  const Eigen::MatrixXd gw = d_proj * x.transpose();

  ParamList params{{"w", &layer.w}, {"attn", &layer.attn}};
  const auto loss = [&]() {
    const Eigen::MatrixXd pr = layer.w * x;
    return 0.5 * attention_forward_proj(layer, pr, center, nbrs).squaredNorm();
  };
  return grad_check(loss, params, {gw, d_attn});
}

double check_mlp_instance(std::uint64_t seed) {
  Rng r(seed);
  const Act acts[] = {Act::relu, Act::elu, Act::sigmoid, Act::identity, Act::leaky_relu};
  const int depth = 1 + static_cast<int>(r.uniform_int(0, 2));
  int in = 2 + static_cast<int>(r.uniform_int(0, 3));
  std::vector<DenseLayer> layers;
  for (int l = 0; l < depth; ++l) {
    const int out = 2 + static_cast<int>(r.uniform_int(0, 3));
    layers.push_back(make_dense(out, in, acts[r.uniform_int(0, 4)], r));
    layers.back().b = 0.3 * r.normal_matrix(out, 1);
    in = out;
  }
  const Eigen::MatrixXd x =
      r.normal_matrix(layers.front().in_dim(), 1 + static_cast<int>(r.uniform_int(0, 3)));

  MlpCache cache;
  const Eigen::MatrixXd y = mlp_forward(layers, x, &cache);
  std::vector<DenseGrad> grads = zero_grads(layers);
  mlp_backward(layers, cache, y, grads);

  ParamList params;
  std::vector<Eigen::MatrixXd> analytic;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    params.push_back({"w" + std::to_string(l), &layers[l].w});
    params.push_back({"b" + std::to_string(l), &layers[l].b});
    analytic.push_back(grads[l].w);
    analytic.push_back(grads[l].b);
  }
  const auto loss = [&]() { return 0.5 * mlp_forward(layers, x).squaredNorm(); };
  return grad_check(loss, params, analytic);
}

double check_gae_instance(std::uint64_t seed, bool structure) {
  Rng r(seed);
  const int n = 8 + static_cast<int>(r.uniform_int(0, 6));
  const int classes = 2 + static_cast<int>(r.uniform_int(0, 1));
  const int dim = 3 + static_cast<int>(r.uniform_int(0, 2));
  const int k = 3 + static_cast<int>(r.uniform_int(0, 1));
  const AttributedGraph g = testutil::toy_graph(n, classes, dim, seed + 7000);
  const ClusterAssignment clusters = testutil::random_clusters(n, k, seed + 8000);
  const NeighborMaps nm = build_neighbor_maps(g, clusters);
  GaeEncoder enc = make_gae_encoder(dim, 4, 3, r);
  GaeDecoder dec = make_gae_decoder(dim, 4, 3, k, clusters.capacity, r);

  ParamList params = enc.params();
  for (const auto& p : dec.params()) params.push_back(p);
  randomize_biases(params, r);

  std::vector<int> batch;
  for (int tries = 0; tries < 8 && batch.size() < 3; ++tries) {
    const int v = static_cast<int>(r.uniform_int(0, n - 1));
    if (std::find(batch.begin(), batch.end(), v) == batch.end()) batch.push_back(v);
  }

  const std::uint64_t dseed = seed + 9000;
  std::vector<Eigen::MatrixXd> grads;
  {
    Rng rg(dseed);
    gae_loss_and_grads(batch, enc, dec, g, nm, clusters, 2, structure, rg, grads);
  }
  const auto loss = [&]() {
    Rng rl(dseed);
    return gae_loss(batch, enc, dec, g, nm, clusters, 2, structure, rl);
  };
  return grad_check(loss, params, grads);
}

double check_ldm_instance(std::uint64_t seed) {
  Rng r(seed);
  const int latent = 2 + static_cast<int>(r.uniform_int(0, 2));
  const int hidden = 3 + static_cast<int>(r.uniform_int(0, 3));
  const int classes = 2 + static_cast<int>(r.uniform_int(0, 1));
  const int label_dim = 2 + static_cast<int>(r.uniform_int(0, 2));
  const int time_dim = r.uniform() < 0.5 ? 2 : 4;  // sinusoidal code needs even width
  Denoiser den = make_denoiser(latent, hidden, classes, label_dim, time_dim, r);
  for (auto& layer : den.mlp) layer.b = 0.1 * r.normal_matrix(layer.b.rows(), 1);

  const DiffusionSchedule s = make_schedule(5 + static_cast<int>(r.uniform_int(0, 15)), 0.02,
                                            0.2 + 0.2 * r.uniform());
  const int rows = 2 + static_cast<int>(r.uniform_int(0, 3));
  const Eigen::MatrixXd z0 = r.normal_matrix(rows, latent);
  std::vector<int> labels(static_cast<std::size_t>(rows));
  for (auto& l : labels) l = static_cast<int>(r.uniform_int(0, classes - 1));
  const double p_unconds[] = {0.0, 0.3, 0.6};
  const double p_uncond = p_unconds[r.uniform_int(0, 2)];

  const std::uint64_t dseed = seed + 11000;
  std::vector<Eigen::MatrixXd> grads;
  {
    Rng rg(dseed);
    ldm_loss_and_grads(den, z0, labels, s, p_uncond, rg, grads);
  }
  const auto loss = [&]() {
    Rng rl(dseed);
    return ldm_loss(den, z0, labels, s, p_uncond, rl);
  };
  return grad_check(loss, den.params(), grads);
}

double check_tnn_instance(std::uint64_t seed) {
  Rng r(seed);
  const int m = 3 + static_cast<int>(r.uniform_int(0, 7));
  const int n = 3 + static_cast<int>(r.uniform_int(0, 7));
  Eigen::MatrixXd h = r.normal_matrix(m, n);
  const int r0 = static_cast<int>(r.uniform_int(0, std::min(m, n) - 1));
  const TnnResult res = truncated_nuclear_norm(h, r0);
  ParamList params{{"h", &h}};
  const auto loss = [&]() { return truncated_nuclear_norm(h, r0).value; };
  return grad_check(loss, params, {res.grad});
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data_dir = argc > 1 ? argv[1] : GDA_DATA_DIR;
  const std::string cora_prefix = data_dir + "/cora/cora";
  Gate gate;

  // Shared state flowing between the Cora criteria.
  std::optional<AttributedGraph> cora;
  std::optional<GcnTrainResult> baseline;   // C5's model, reused by C6/C8
  std::vector<double> plain_accs;           // C6's tau=0 accuracies, reused by C7
  std::optional<RunConfig> run_a;           // C7's pipeline config, reused by C9

  // C1 — neighbor-map codec -------------------------------------------------
  gate.criterion(1, [&](bool& pass) {
    const auto t0 = Clock::now();
    Rng rng(101);
    const double ps[] = {0.01, 0.05, 0.2};
    const int ks[] = {4, 10, 50};
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
      const int n = 2 + static_cast<int>(rng.uniform_int(0, 498));
      const double p = ps[rng.uniform_int(0, 2)];
      const int k = std::min(n, ks[rng.uniform_int(0, 2)]);
      const AttributedGraph g = testutil::random_graph(n, p, 4, 1000 + i);
      const ClusterAssignment c = testutil::random_clusters(n, k, 2000 + i);
      const NeighborMaps nm = build_neighbor_maps(g, c);
      if (neighbor_maps_to_adjacency(nm, c) != g.edges) ++mismatches;
    }
    const double secs = seconds_since(t0);
    pass = mismatches == 0 && secs < 10.0;
    return "neighbor-map codec: 200 graphs, " + std::to_string(mismatches) +
           " adjacency mismatches, budget 10 s";
  });

  // C2 — gradient suite -----------------------------------------------------
  gate.criterion(2, [&](bool& pass) {
    const auto t0 = Clock::now();
    double attention = 0, mlp = 0, gae = 0, ldm = 0, tnn = 0;
    for (int i = 0; i < 20; ++i) {
      attention = std::max(attention, check_attention_instance(300 + i));
      mlp = std::max(mlp, check_mlp_instance(400 + i));
      gae = std::max(gae, check_gae_instance(500 + i, i % 2 == 1));
      ldm = std::max(ldm, check_ldm_instance(600 + i));
      tnn = std::max(tnn, check_tnn_instance(700 + i));
    }
    const double worst = std::max({attention, mlp, gae, ldm, tnn});
    const double secs = seconds_since(t0);
    pass = worst < 1e-4 && secs < 60.0;
    return "gradient suite (20 instances each): max rel err attention " + fmt(attention) +
           ", mlp " + fmt(mlp) + ", autoencoder loss " + fmt(gae) + ", diffusion loss " +
           fmt(ldm) + ", trailing spectral mass " + fmt(tnn) + ", tolerance 1e-4";
  });

  // C3 — gradient-descent residual oracle -----------------------------------
  gate.criterion(3, [&](bool& pass) {
    const auto t0 = Clock::now();
    Rng rng(140);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const int n = 10 + static_cast<int>(rng.uniform_int(0, 30));
      const int d = 2 + static_cast<int>(rng.uniform_int(0, 6));
      const int c = 1 + static_cast<int>(rng.uniform_int(0, 2));
      const Eigen::MatrixXd h = rng.normal_matrix(n, d);
      const Eigen::MatrixXd y = rng.normal_matrix(n, c);
      std::vector<int> labeled;
      for (int v = 0; v < n; ++v) {
        if (rng.uniform() < 0.5) labeled.push_back(v);
      }
      if (labeled.empty()) labeled.push_back(static_cast<int>(rng.uniform_int(0, n - 1)));

      Eigen::MatrixXd hl(static_cast<int>(labeled.size()), d);
      for (std::size_t j = 0; j < labeled.size(); ++j) {
        hl.row(static_cast<int>(j)) = h.row(labeled[j]);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hl * hl.transpose());
      const double lam = std::max(0.0, eig.eigenvalues().maxCoeff());
      const double eta = lam > 0.0 ? 0.9 / lam : 0.1;
      const int t = static_cast<int>(rng.uniform_int(0, 200));
      const auto [iter, closed] = linear_gd_oracle(h, y, labeled, eta, t);
      worst = std::max(worst, (iter - closed).norm());
    }
    const double secs = seconds_since(t0);
    pass = worst < 1e-8 && secs < 30.0;
    return "descent residual vs closed form: 50 instances, t <= 200, max Frobenius gap " +
           fmt(worst) + ", tolerance 1e-8";
  });

  // C4 — diffusion identities -----------------------------------------------
  gate.criterion(4, [&](bool& pass) {
    const auto t0 = Clock::now();
    const DiffusionSchedule prod = make_schedule(1000, 1e-4, 0.02);
    RunConfig desk_cfg;
    apply_desk_preset(desk_cfg);
    const DiffusionSchedule desk =
        make_schedule(desk_cfg.ldm.t_max, desk_cfg.ldm.beta_start, desk_cfg.ldm.beta_end);
    const bool terminal_ok =
        prod.terminal_alpha_bar() < 1e-3 && desk.terminal_alpha_bar() < 1e-3;

    // Monte-Carlo forward chain vs the closed-form marginal.
    const DiffusionSchedule mc = make_schedule(40, 0.02, 0.3);
    const int dim = 8, draws = 10000;
    Rng rng(909);
    const Eigen::VectorXd z0 = rng.normal_vector(dim);
    const std::vector<int> mean_ts = {2, 5, 10};      // means need modest noise
    const std::vector<int> std_ts = {2, 5, 10, 40};   // stds are scale-free
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, mc.t_max);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(dim, mc.t_max);
    for (int i = 0; i < draws; ++i) {
      Eigen::VectorXd z = z0;
      for (int t = 1; t <= mc.t_max; ++t) {
        z = std::sqrt(1.0 - mc.betas[t - 1]) * z +
            std::sqrt(mc.betas[t - 1]) * rng.normal_vector(dim);
        sum.col(t - 1) += z;
        sumsq.col(t - 1) += z.cwiseAbs2();
      }
    }
    double mean_err = 0.0, std_err = 0.0;
    for (const int t : mean_ts) {
      const Eigen::VectorXd emp = sum.col(t - 1) / draws;
      const Eigen::VectorXd cf = std::sqrt(mc.alpha_bars[t - 1]) * z0;
      for (int d = 0; d < dim; ++d) {
        mean_err = std::max(mean_err, std::abs(emp[d] - cf[d]) / std::max(1.0, std::abs(cf[d])));
      }
    }
    for (const int t : std_ts) {
      const double cf_std = std::sqrt(1.0 - mc.alpha_bars[t - 1]);
      for (int d = 0; d < dim; ++d) {
        const double m = sum(d, t - 1) / draws;
        const double var = sumsq(d, t - 1) / draws - m * m;
        std_err = std::max(std_err, std::abs(std::sqrt(var) - cf_std) / cf_std);
      }
    }
    const bool marginal_ok = mean_err <= 0.02 && std_err <= 0.02;

    // Guidance weight 0 must equal conditional sampling, sample for sample.
    Rng init(77);
    const Denoiser den = make_denoiser(6, 16, 3, 4, 4, init);
    const DiffusionSchedule gs = make_schedule(30, 0.01, 0.3);
    double guided_gap = 0.0;
    for (int label = 0; label < 3; ++label) {
      for (int rep = 0; rep < 4; ++rep) {
        const std::uint64_t seed = 4200 + 10 * label + rep;
        Rng a(seed), b(seed);
        const Eigen::VectorXd zg = cfg_sample(den, label, 0.0, gs, a);
        const Eigen::VectorXd zc = conditional_sample(den, label, gs, b);
        guided_gap = std::max(guided_gap, (zg - zc).cwiseAbs().maxCoeff());
      }
    }
    const bool guided_ok = guided_gap == 0.0;

    const double secs = seconds_since(t0);
    pass = terminal_ok && marginal_ok && guided_ok && secs < 120.0;
    return "diffusion identities: terminal signal " + fmt(prod.terminal_alpha_bar()) +
           " (quick preset " + fmt(desk.terminal_alpha_bar()) +
           ") < 1e-3; forward-chain marginal err mean " + fmt(mean_err) + ", std " +
           fmt(std_err) + " (10k draws, tol 2%); guidance-0 vs conditional gap " +
           fmt(guided_gap);
  });

  // C5 — baseline classifier on Cora ----------------------------------------
  gate.criterion(5, [&](bool& pass) {
    const auto t0 = Clock::now();
    cora = load_graph(cora_prefix + ".features", cora_prefix + ".edges",
                      cora_prefix + ".labels");
    GcnConfig gc;
    gc.seed = 1;
    baseline = train_node_classifier(*cora, LowRankConfig{0.0, 0.2, 0.01}, gc);
    const double acc = baseline->metrics.back().test_acc;
    plain_accs.push_back(acc);
    const double secs = seconds_since(t0);
    pass = acc >= 0.78 && secs < 300.0;
    return "baseline classifier on Cora (standard split): test accuracy " + fmt(acc) +
           ", floor 0.78, budget 5 min";
  });

  // C6 — spectral regularization effect --------------------------------------
  gate.criterion(6, [&](bool& pass) {
    const auto t0 = Clock::now();
    if (!cora || !baseline) return std::string("skipped: needs the Cora baseline from C5");
    std::vector<double> reg_accs;
    int tnn_violations = 0;
    double plain_tnn_1 = baseline->final_tnn;
    for (int seed = 1; seed <= 10; ++seed) {
      GcnConfig gc;
      gc.seed = static_cast<std::uint64_t>(seed);
      double plain_tnn;
      if (seed == 1) {
        plain_tnn = plain_tnn_1;  // C5 already trained this exact configuration
      } else {
        const GcnTrainResult plain =
            train_node_classifier(*cora, LowRankConfig{0.0, 0.2, 0.01}, gc);
        plain_accs.push_back(plain.metrics.back().test_acc);
        plain_tnn = plain.final_tnn;
      }
      const GcnTrainResult reg =
          train_node_classifier(*cora, LowRankConfig{0.10, 0.2, 0.01}, gc);
      reg_accs.push_back(reg.metrics.back().test_acc);
      if (!(reg.final_tnn < plain_tnn)) ++tnn_violations;
    }
    const double mean_plain = mean_of(plain_accs);
    const double mean_reg = mean_of(reg_accs);
    const double secs = seconds_since(t0);
    pass = mean_reg >= mean_plain - 0.002 && tnn_violations == 0 && secs < 1800.0;
    return "regularization over 10 seeds: mean accuracy " + fmt(mean_reg) + " vs plain " +
           fmt(mean_plain) + " (allowed drop 0.002); trailing-mass violations " +
           std::to_string(tnn_violations) + "/10";
  });

  // C7 — end-to-end augmentation on Cora -------------------------------------
  gate.criterion(7, [&](bool& pass) {
    const auto t0 = Clock::now();
    if (!cora || plain_accs.size() < 5) {
      return std::string("skipped: needs the Cora baselines from C5/C6");
    }
    RunConfig cfg;
    cfg.features_path = cora_prefix + ".features";
    cfg.edges_path = cora_prefix + ".edges";
    cfg.labels_path = cora_prefix + ".labels";
    cfg.out_dir = testutil::fresh_dir("acceptance_pipeline_a");
    cfg.seed = 1;
    apply_desk_preset(cfg);
    run_pipeline(cfg);
    stage_metrics(cfg);
    run_a = cfg;

    const std::string rd = run_dir_for(cfg);
    const auto quality = nlohmann::json::parse(testutil::read_file_bytes(rd + "/quality.json"));
    const double orig_h = quality.at("original_homophily").get<double>();
    const double orig_d = quality.at("original_avg_degree").get<double>();
    const double syn_h = quality.at("synthetic_homophily").get<double>();
    const double syn_d = quality.at("synthetic_avg_degree").get<double>();
    const bool homophily_ok = std::abs(syn_h - orig_h) <= 0.10;
    const bool degree_ok = std::abs(syn_d - orig_d) <= 0.30 * orig_d;

    const AttributedGraph aug =
        load_graph(rd + "/aug.features", rd + "/aug.edges", rd + "/aug.labels");
    std::vector<double> aug_accs;
    for (int seed = 1; seed <= 5; ++seed) {
      GcnConfig gc;
      gc.seed = static_cast<std::uint64_t>(seed);
      const GcnTrainResult res =
          train_node_classifier(aug, LowRankConfig{0.10, 0.2, 0.01}, gc);
      aug_accs.push_back(res.metrics.back().test_acc);
    }
    const double mean_aug = mean_of(aug_accs);
    const std::vector<double> base_first5(plain_accs.begin(), plain_accs.begin() + 5);
    const double mean_base = mean_of(base_first5);
    const bool acc_ok = mean_aug >= mean_base - 0.005;

    const double secs = seconds_since(t0);
    pass = homophily_ok && degree_ok && acc_ok && secs < 5400.0;
    return "end-to-end augmentation: synthetic homophily " + fmt(syn_h) + " vs " + fmt(orig_h) +
           " (tol 0.10), synthetic degree " + fmt(syn_d) + " vs " + fmt(orig_d) +
           " (tol 30%), augmented accuracy " + fmt(mean_aug) + " vs baseline " +
           fmt(mean_base) + " (allowed drop 0.005) over 5 seeds";
  });

  // C8 — spectral concentration of label energy -------------------------------
  gate.criterion(8, [&](bool& pass) {
    const auto t0 = Clock::now();
    // Full-rank concentration is exactly 1 on any input: the basis is complete.
    Rng rng(808);
    double full_gap = 0.0;
    for (int i = 0; i < 30; ++i) {
      const int n = 3 + static_cast<int>(rng.uniform_int(0, 37));
      const int d = 1 + static_cast<int>(rng.uniform_int(0, 9));
      Eigen::MatrixXd h = rng.normal_matrix(n, d);
      if (i % 10 == 1) h.setOnes();                    // rank one
      if (i % 10 == 2) h = Eigen::MatrixXd::Zero(n, d);  // rank zero
      const int c = 2 + static_cast<int>(rng.uniform_int(0, 2));
      Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, c);
      for (int v = 0; v < n; ++v) y(v, v % c) = 1.0;
      const EigenProjection proj = eigen_projection(gram_matrix(h), y);
      full_gap = std::max(full_gap, std::abs(proj.concentration(n - 1) - 1.0));
    }
    const bool full_ok = full_gap <= 1e-8;

    if (!cora || !baseline) return std::string("skipped: needs the Cora baseline from C5");
    const GcnForward fwd = gcn_forward(baseline->model, *cora);
    const int n = cora->n_nodes;
    const int c = cora->n_classes();
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, c);
    for (int v = 0; v < n; ++v) y(v, cora->labels[static_cast<std::size_t>(v)]) = 1.0;
    const EigenProjection proj = eigen_projection(gram_matrix(fwd.h), y);
    const int r20 = static_cast<int>(std::ceil(
        0.2 * static_cast<double>(std::min<int>(n, static_cast<int>(fwd.h.cols())))));
    const double conc = proj.concentration(r20 - 1);
    const bool cora_ok = conc >= 0.76 && conc <= 0.92;

    const double secs = seconds_since(t0);
    pass = full_ok && cora_ok && secs < 300.0;
    return "label-energy concentration: full-rank gap " + fmt(full_gap) +
           " (tol 1e-8, 30 inputs); Cora at rank " + std::to_string(r20) + " = " + fmt(conc) +
           ", window [0.76, 0.92]";
  });

  // C9 — determinism -----------------------------------------------------------
  gate.criterion(9, [&](bool& pass) {
    if (!run_a) return std::string("skipped: needs C7's pipeline run");
    RunConfig cfg_b = *run_a;
    cfg_b.out_dir = testutil::fresh_dir("acceptance_pipeline_b");
    run_pipeline(cfg_b);
    stage_metrics(cfg_b);

    const std::string da = run_dir_for(*run_a);
    const std::string db = run_dir_for(cfg_b);
    std::vector<std::string> diffs;
    for (const char* name : {"synthetic_edges.csv", "metrics.csv", "quality.csv",
                             "gae_losses.csv", "ldm_losses.csv"}) {
      if (testutil::read_file_bytes(da + "/" + name) !=
          testutil::read_file_bytes(db + "/" + name)) {
        diffs.push_back(name);
      }
    }
    pass = diffs.empty();
    std::string detail = "same-seed reruns: 5 artifact files compared byte for byte";
    if (!diffs.empty()) {
      detail += "; differing:";
      for (const auto& d : diffs) detail += " " + d;
    }
    return detail;
  });

  std::printf("acceptance: %d/9 criteria passed\n", 9 - gate.failures);
  return gate.failures;
}
