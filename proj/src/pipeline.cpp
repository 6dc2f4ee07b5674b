#include "gda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gda/augment.hpp"
#include "gda/checkpoint.hpp"
#include "gda/clustering.hpp"
#include "gda/crossval.hpp"
#include "gda/gae.hpp"
#include "gda/gcn.hpp"
#include "gda/graph.hpp"
#include "gda/ldm.hpp"
#include "gda/lowrank.hpp"
#include "gda/rng.hpp"

namespace gda {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Paths {
  std::string dir;
  std::string config;
  std::string clusters_csv, clusters_json;
  std::string gae_ckpt, gae_json, gae_losses;
  std::string latents_ckpt, latents_json;
  std::string ldm_ckpt, ldm_json, ldm_losses;
  std::string syn_ckpt, syn_json;
  std::string aug_features, aug_edges, aug_labels, syn_edges_csv, aug_json;
  std::string gcn_ckpt, gcn_json, metrics_csv;
  std::string eval_json;
  std::string diag_csv, diag_json;
  std::string quality_csv, quality_json;
  std::string cv_csv, cv_json;
};

Paths make_paths(const RunConfig& cfg) {
  Paths p;
  p.dir = run_dir_for(cfg);
  const std::string d = p.dir + "/";
  p.config = d + "config.json";
  p.clusters_csv = d + "clusters.csv";
  p.clusters_json = d + "clusters.json";
  p.gae_ckpt = d + "gae.ckpt";
  p.gae_json = d + "gae.json";
  p.gae_losses = d + "gae_losses.csv";
  p.latents_ckpt = d + "latents.ckpt";
  p.latents_json = d + "latents.json";
  p.ldm_ckpt = d + "ldm.ckpt";
  p.ldm_json = d + "ldm.json";
  p.ldm_losses = d + "ldm_losses.csv";
  p.syn_ckpt = d + "syn_latents.ckpt";
  p.syn_json = d + "syn.json";
  p.aug_features = d + "aug.features";
  p.aug_edges = d + "aug.edges";
  p.aug_labels = d + "aug.labels";
  p.syn_edges_csv = d + "synthetic_edges.csv";
  p.aug_json = d + "aug.json";
  p.gcn_ckpt = d + "gcn.ckpt";
  p.gcn_json = d + "gcn.json";
  p.metrics_csv = d + "metrics.csv";
  p.eval_json = d + "eval.json";
  p.diag_csv = d + "diag.csv";
  p.diag_json = d + "diag.json";
  p.quality_csv = d + "quality.csv";
  p.quality_json = d + "quality.json";
  p.cv_csv = d + "cv_records.csv";
  p.cv_json = d + "cv.json";
  return p;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed while writing " + path);
}

void write_json_file(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void require_artifact(const std::string& path, const char* producer) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing upstream artifact " + path + "; run the '" +
                             std::string(producer) + "' stage first");
  }
}

// True when every artifact exists and the sidecar carries the current config
// hash. A foreign hash aborts unless `force`; `force` always rebuilds.
bool stage_current(const std::vector<std::string>& artifacts, const std::string& sidecar,
                   const std::string& hash, bool force, const char* stage) {
  if (force) return false;
  if (!fs::exists(sidecar)) return false;
  std::string have;
  try {
    have = read_json_file(sidecar).value("config_hash", std::string());
  } catch (const std::exception&) {
    return false;  // unreadable sidecar: rebuild
  }
  if (have != hash) {
    throw std::runtime_error(std::string("stage '") + stage + "': artifacts in place were " +
                             "produced by config " + have + " but the current config is " +
                             hash + "; pass --force to rebuild");
  }
  for (const auto& a : artifacts) {
    if (!fs::exists(a)) return false;
  }
  return true;
}

void ensure_run_dir(const RunConfig& cfg, const Paths& p) {
  fs::create_directories(p.dir);
  write_file(p.config, config_to_json(cfg));
}

json base_sidecar(const RunConfig& cfg, const char* stage) {
  json j;
  j["config_hash"] = config_hash_hex(cfg);
  j["stage"] = stage;
  return j;
}

struct StageTimer {
  const char* name;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  explicit StageTimer(const char* n) : name(n) {}
  ~StageTimer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count();
    std::fprintf(stderr, "[%s] %.1f s\n", name, s);
  }
};

AttributedGraph load_base_graph(const RunConfig& cfg) {
  return load_graph(cfg.features_path, cfg.edges_path, cfg.labels_path);
}

ParamList prefixed(const std::string& prefix, ParamList list) {
  for (auto& p : list) p.name = prefix + p.name;
  return list;
}

ClusterAssignment load_clusters(const Paths& p, int n_nodes) {
  require_artifact(p.clusters_csv, "cluster");
  require_artifact(p.clusters_json, "cluster");
  const json meta = read_json_file(p.clusters_json);
  ClusterAssignment a;
  a.k = meta.at("k").get<int>();
  a.capacity = meta.at("capacity").get<int>();
  a.cluster_of.assign(static_cast<std::size_t>(n_nodes), -1);
  a.index_in_cluster.assign(static_cast<std::size_t>(n_nodes), -1);
  a.members.assign(static_cast<std::size_t>(a.k), {});

  std::ifstream in(p.clusters_csv, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.clusters_csv);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int node = 0, cluster = 0, idx = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%d", &node, &cluster, &idx) != 3) {
      throw std::runtime_error("malformed row in " + p.clusters_csv + ": " + line);
    }
    if (node < 0 || node >= n_nodes || cluster < 0 || cluster >= a.k) {
      throw std::runtime_error("cluster row out of range in " + p.clusters_csv);
    }
    a.cluster_of[static_cast<std::size_t>(node)] = cluster;
    a.index_in_cluster[static_cast<std::size_t>(node)] = idx;
    ++rows;
  }
  if (rows != n_nodes) {
    throw std::runtime_error(p.clusters_csv + " does not cover every node of the graph");
  }
  for (auto& m : a.members) m.clear();
  for (int v = 0; v < n_nodes; ++v) {
    a.members[static_cast<std::size_t>(a.cluster_of[static_cast<std::size_t>(v)])].push_back(v);
  }
  for (auto& m : a.members) std::sort(m.begin(), m.end());
  a.validate(n_nodes);
  return a;
}

GaeEncoder load_gae_encoder(const std::map<std::string, Eigen::MatrixXd>& t,
                            const RunConfig& cfg, int attr_dim, const std::string& prefix) {
  Rng r(0);
  GaeEncoder enc = make_gae_encoder(attr_dim, cfg.gae.hidden, cfg.gae.latent, r);
  assign_tensors(prefixed(prefix, enc.params()), t);
  return enc;
}

GaeDecoder load_gae_decoder(const std::map<std::string, Eigen::MatrixXd>& t,
                            const RunConfig& cfg, int attr_dim, const std::string& prefix) {
  const auto inter = t.find(prefix + "dec.inter.0.w");
  const auto intra = t.find(prefix + "dec.intra.0.w");
  if (inter == t.end() || intra == t.end()) {
    throw std::runtime_error("autoencoder checkpoint lacks decoder tensors");
  }
  const int k = static_cast<int>(inter->second.rows());
  const int capacity = static_cast<int>(intra->second.rows());
  Rng r(0);
  GaeDecoder dec = make_gae_decoder(attr_dim, cfg.gae.hidden, cfg.gae.latent, k, capacity, r);
  assign_tensors(prefixed(prefix, dec.params()), t);
  return dec;
}

Denoiser load_denoiser(const std::map<std::string, Eigen::MatrixXd>& t, const RunConfig& cfg,
                       const std::string& prefix) {
  const auto table = t.find(prefix + "den.table");
  if (table == t.end()) throw std::runtime_error("diffusion checkpoint lacks the label table");
  const int n_classes = static_cast<int>(table->second.rows()) - 1;
  Rng r(0);
  Denoiser den = make_denoiser(cfg.gae.latent, cfg.ldm.hidden, n_classes, cfg.ldm.label_dim,
                               cfg.ldm.time_dim, r);
  assign_tensors(prefixed(prefix, den.params()), t);
  return den;
}

// Per-dimension affine map from the denoiser's unit-scale space back to
// encoder latent space, stored alongside the diffusion weights.
struct LatentScaler {
  Eigen::RowVectorXd mu;
  Eigen::RowVectorXd sd;

  void unscale(Eigen::MatrixXd& z) const {
    z = (z.array().rowwise() * sd.array()).matrix();
    z.rowwise() += mu;
  }
};

LatentScaler load_latent_scaler(const std::map<std::string, Eigen::MatrixXd>& t) {
  const auto mu = t.find("norm.mu");
  const auto sd = t.find("norm.sd");
  if (mu == t.end() || sd == t.end()) {
    throw std::runtime_error(
        "diffusion checkpoint lacks latent normalization tensors; re-run train-ldm");
  }
  return {mu->second.col(0).transpose(), sd->second.col(0).transpose()};
}

GcnModel load_gcn_model(const std::map<std::string, Eigen::MatrixXd>& t, const RunConfig& cfg,
                        int attr_dim) {
  const auto wc = t.find("gcn.wc");
  if (wc == t.end()) throw std::runtime_error("classifier checkpoint lacks gcn.wc");
  const int n_classes = static_cast<int>(wc->second.cols());
  Rng r(0);
  GcnModel m = make_gcn(attr_dim, cfg.gcn.hidden, cfg.gcn.feat, n_classes, r);
  assign_tensors(m.params(), t);
  return m;
}

void require_terminal_noise(const DiffusionSchedule& sched) {
  if (!(sched.terminal_alpha_bar() < 1e-3)) {
    throw std::runtime_error(
        "diffusion schedule keeps too much signal at the final step (alpha_bar_T = " +
        fmt_g(sched.terminal_alpha_bar()) + ", need < 1e-3); lengthen it or raise beta");
  }
}

int synthetic_per_class(const RunConfig& cfg, const AttributedGraph& g) {
  if (cfg.beta_syn < 0) throw std::invalid_argument("beta_syn must be nonnegative");
  if (cfg.beta_syn == 0) return 0;
  const int m = static_cast<int>(g.nodes_in_split(Split::train).size());
  const int c = g.n_classes();
  if (c < 1) throw std::runtime_error("cannot size the synthetic set: no labeled classes");
  return static_cast<int>(
      std::ceil(static_cast<double>(cfg.beta_syn) * static_cast<double>(m) /
                static_cast<double>(c)));
}

// Reads the synthetic latents plus labels back from the generate artifact.
std::pair<Eigen::MatrixXd, std::vector<int>> load_synthetic_latents(const Paths& p) {
  require_artifact(p.syn_ckpt, "generate");
  auto t = load_tensors(p.syn_ckpt);
  const auto z = t.find("z");
  const auto y = t.find("y");
  if (z == t.end() || y == t.end()) {
    throw std::runtime_error(p.syn_ckpt + " lacks the z/y tensors");
  }
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(y->second.rows()));
  for (int i = 0; i < y->second.rows(); ++i) {
    labels.push_back(static_cast<int>(std::llround(y->second(i, 0))));
  }
  return {z->second, std::move(labels)};
}

}  // namespace

std::uint64_t stage_seed(const RunConfig& cfg, StageSeed tag) {
  return Rng(cfg.seed).fork(static_cast<std::uint64_t>(tag)).seed();
}

std::string run_dir_for(const RunConfig& cfg) {
  return cfg.out_dir + "/run-" + config_hash_hex(cfg);
}

void stage_cluster(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.clusters_csv}, p.clusters_json, hash, force, "cluster")) {
    std::cout << "[cluster] up to date\n";
    return;
  }
  StageTimer timer("cluster");
  const AttributedGraph g = load_base_graph(cfg);
  const ClusterAssignment a =
      balanced_kmeans(g.attributes, cfg.n_clusters, cfg.kmeans_iters,
                      stage_seed(cfg, StageSeed::cluster), cfg.kmeans_restarts);
  std::string csv = "node,cluster,index_in_cluster\n";
  for (int v = 0; v < g.n_nodes; ++v) {
    csv += std::to_string(v) + "," + std::to_string(a.cluster_of[static_cast<std::size_t>(v)]) +
           "," + std::to_string(a.index_in_cluster[static_cast<std::size_t>(v)]) + "\n";
  }
  write_file(p.clusters_csv, csv);
  json side = base_sidecar(cfg, "cluster");
  side["k"] = a.k;
  side["capacity"] = a.capacity;
  side["cost"] = within_cluster_cost(g.attributes, a);
  write_json_file(p.clusters_json, side);
  std::cout << "[cluster] k=" << a.k << " capacity=" << a.capacity << "\n";
}

void stage_train_gae(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.gae_ckpt, p.gae_losses}, p.gae_json, hash, force, "train-gae")) {
    std::cout << "[train-gae] up to date\n";
    return;
  }
  StageTimer timer("train-gae");
  const AttributedGraph g = load_base_graph(cfg);
  const ClusterAssignment a = load_clusters(p, g.n_nodes);
  GaeConfig gc = cfg.gae;
  gc.seed = stage_seed(cfg, StageSeed::gae);
  GaeTrainResult res = train_gae(g, a, gc);

  ParamList all = res.enc.params();
  {
    ParamList dec_params = res.dec.params();
    all.insert(all.end(), dec_params.begin(), dec_params.end());
    ParamList ema_enc = prefixed("ema.", res.enc_ema.params());
    ParamList ema_dec = prefixed("ema.", res.dec_ema.params());
    all.insert(all.end(), ema_enc.begin(), ema_enc.end());
    all.insert(all.end(), ema_dec.begin(), ema_dec.end());
    save_tensors(p.gae_ckpt, all);
  }

  std::string csv = "epoch,phase,loss\n";
  for (std::size_t i = 0; i < res.epoch_losses.size(); ++i) {
    const int epoch = static_cast<int>(i) + 1;
    const int phase = epoch <= gc.phase1_epochs ? 1 : 2;
    csv += std::to_string(epoch) + "," + std::to_string(phase) + "," +
           fmt_g(res.epoch_losses[i]) + "\n";
  }
  write_file(p.gae_losses, csv);

  json side = base_sidecar(cfg, "train-gae");
  side["epochs"] = static_cast<int>(res.epoch_losses.size());
  side["final_loss"] = res.epoch_losses.empty() ? 0.0 : res.epoch_losses.back();
  write_json_file(p.gae_json, side);
  std::cout << "[train-gae] epochs=" << res.epoch_losses.size()
            << " final_loss=" << fmt_g(side["final_loss"].get<double>()) << "\n";
}

void stage_encode(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.latents_ckpt}, p.latents_json, hash, force, "encode")) {
    std::cout << "[encode] up to date\n";
    return;
  }
  StageTimer timer("encode");
  const AttributedGraph g = load_base_graph(cfg);
  require_artifact(p.gae_ckpt, "train-gae");
  const auto tensors = load_tensors(p.gae_ckpt);
  // Averaged (EMA) weights drive every post-training use of the autoencoder.
  const GaeEncoder enc = load_gae_encoder(tensors, cfg, g.dim(), "ema.");
  LatentTable table = encode_all(enc, g);
  ParamList out{{"z", &table.z}};
  save_tensors(p.latents_ckpt, out);
  json side = base_sidecar(cfg, "encode");
  side["nodes"] = static_cast<int>(table.z.rows());
  side["dim"] = static_cast<int>(table.z.cols());
  write_json_file(p.latents_json, side);
  std::cout << "[encode] nodes=" << table.z.rows() << " dim=" << table.z.cols() << "\n";
}

void stage_train_ldm(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.ldm_ckpt, p.ldm_losses}, p.ldm_json, hash, force, "train-ldm")) {
    std::cout << "[train-ldm] up to date\n";
    return;
  }
  StageTimer timer("train-ldm");
  const AttributedGraph g = load_base_graph(cfg);
  require_artifact(p.latents_ckpt, "encode");
  const auto tensors = load_tensors(p.latents_ckpt);
  const auto zit = tensors.find("z");
  if (zit == tensors.end()) throw std::runtime_error(p.latents_ckpt + " lacks tensor z");
  const Eigen::MatrixXd& z = zit->second;
  if (z.rows() != g.n_nodes) {
    throw std::runtime_error("latent table row count does not match the graph");
  }

  const auto train_nodes = g.nodes_in_split(Split::train);
  if (train_nodes.empty()) throw std::runtime_error("train-ldm: no train nodes");
  Eigen::MatrixXd z0(static_cast<int>(train_nodes.size()), z.cols());
  std::vector<int> labels;
  labels.reserve(train_nodes.size());
  for (std::size_t i = 0; i < train_nodes.size(); ++i) {
    z0.row(static_cast<int>(i)) = z.row(train_nodes[i]);
    labels.push_back(g.labels[static_cast<std::size_t>(train_nodes[i])]);
  }

  // The reverse chain starts from N(0, I), so the denoiser works in a
  // unit-scale space; encoder latents carry arbitrary per-dimension scales.
  // Train on standardized latents and store the affine map so samples can be
  // folded back into latent space before decoding.
  Eigen::MatrixXd norm_mu = z0.colwise().mean().transpose();
  Eigen::MatrixXd norm_sd =
      ((z0.rowwise() - norm_mu.col(0).transpose()).array().square().colwise().mean())
          .sqrt()
          .matrix()
          .transpose();
  for (Eigen::Index j = 0; j < norm_sd.rows(); ++j) {
    norm_sd(j, 0) = std::max(norm_sd(j, 0), 1e-8);
  }
  const Eigen::MatrixXd z0n =
      (z0.rowwise() - norm_mu.col(0).transpose()).array().rowwise() /
      norm_sd.col(0).transpose().array();

  LdmConfig lc = cfg.ldm;
  lc.latent = cfg.gae.latent;
  lc.seed = stage_seed(cfg, StageSeed::ldm);
  require_terminal_noise(make_schedule(lc.t_max, lc.beta_start, lc.beta_end));
  LdmTrainResult res = train_ldm(z0n, labels, lc);

  ParamList all = res.den.params();
  ParamList ema = prefixed("ema.", res.den_ema.params());
  all.insert(all.end(), ema.begin(), ema.end());
  all.push_back({"norm.mu", &norm_mu});
  all.push_back({"norm.sd", &norm_sd});
  save_tensors(p.ldm_ckpt, all);

  std::string csv = "epoch,loss\n";
  for (std::size_t i = 0; i < res.epoch_losses.size(); ++i) {
    csv += std::to_string(static_cast<int>(i) + 1) + "," + fmt_g(res.epoch_losses[i]) + "\n";
  }
  write_file(p.ldm_losses, csv);

  json side = base_sidecar(cfg, "train-ldm");
  side["n_classes"] = res.den.n_classes();
  side["epochs"] = static_cast<int>(res.epoch_losses.size());
  side["final_loss"] = res.epoch_losses.empty() ? 0.0 : res.epoch_losses.back();
  write_json_file(p.ldm_json, side);
  std::cout << "[train-ldm] epochs=" << res.epoch_losses.size()
            << " final_loss=" << fmt_g(side["final_loss"].get<double>()) << "\n";
}

void stage_generate(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.syn_ckpt}, p.syn_json, hash, force, "generate")) {
    std::cout << "[generate] up to date\n";
    return;
  }
  StageTimer timer("generate");
  const AttributedGraph g = load_base_graph(cfg);
  require_artifact(p.ldm_ckpt, "train-ldm");
  const auto ldm_tensors = load_tensors(p.ldm_ckpt);
  const Denoiser den = load_denoiser(ldm_tensors, cfg, "ema.");
  const LatentScaler scaler = load_latent_scaler(ldm_tensors);
  const DiffusionSchedule sched =
      make_schedule(cfg.ldm.t_max, cfg.ldm.beta_start, cfg.ldm.beta_end);
  require_terminal_noise(sched);
  const int n_per_class = synthetic_per_class(cfg, g);
  auto [z, labels] = generate_synthetic_latents(den, n_per_class, cfg.omega, sched,
                                                stage_seed(cfg, StageSeed::generate));
  scaler.unscale(z);
  Eigen::MatrixXd y(static_cast<int>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<int>(i), 0) = static_cast<double>(labels[i]);
  }
  ParamList out{{"z", &z}, {"y", &y}};
  save_tensors(p.syn_ckpt, out);
  json side = base_sidecar(cfg, "generate");
  side["n_per_class"] = n_per_class;
  side["n_synthetic"] = static_cast<int>(labels.size());
  side["omega"] = cfg.omega;
  write_json_file(p.syn_json, side);
  std::cout << "[generate] synthetic=" << labels.size() << " (" << n_per_class
            << " per class)\n";
}

void stage_assemble(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.aug_features, p.aug_edges, p.aug_labels, p.syn_edges_csv}, p.aug_json,
                    hash, force, "assemble")) {
    std::cout << "[assemble] up to date\n";
    return;
  }
  StageTimer timer("assemble");
  const AttributedGraph g = load_base_graph(cfg);
  require_artifact(p.gae_ckpt, "train-gae");
  const GaeDecoder dec = load_gae_decoder(load_tensors(p.gae_ckpt), cfg, g.dim(), "ema.");
  const ClusterAssignment clusters = load_clusters(p, g.n_nodes);
  auto [z, labels] = load_synthetic_latents(p);

  DecodeOptions opts;
  opts.threshold = cfg.decode_threshold;
  opts.max_degree = cfg.max_degree;
  const SyntheticBatch batch = make_synthetic_batch(dec, z, labels, clusters, opts);
  const AugmentedGraph aug = assemble_augmented_graph(g, batch);
  save_graph(aug.graph, p.aug_features, p.aug_edges, p.aug_labels);

  std::string csv = "synthetic_node,base_node\n";
  for (int s = 0; s < batch.size(); ++s) {
    for (int b : batch.edges_to_base[static_cast<std::size_t>(s)]) {
      csv += std::to_string(aug.n_base + s) + "," + std::to_string(b) + "\n";
    }
  }
  write_file(p.syn_edges_csv, csv);

  json side = base_sidecar(cfg, "assemble");
  side["n_base"] = aug.n_base;
  side["n_synthetic"] = aug.n_syn;
  side["original_homophily"] = homophily_ratio(g);
  side["original_avg_degree"] = average_degree(g);
  if (aug.n_syn > 0) {
    const StructureQuality q = synthetic_quality(g, batch);
    side["synthetic_homophily"] = q.homophily;
    side["synthetic_avg_degree"] = q.avg_degree;
  } else {
    side["synthetic_homophily"] = nullptr;
    side["synthetic_avg_degree"] = nullptr;
  }
  write_json_file(p.aug_json, side);
  std::cout << "[assemble] base=" << aug.n_base << " synthetic=" << aug.n_syn << "\n";
}

void stage_train_gnn(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.gcn_ckpt, p.metrics_csv}, p.gcn_json, hash, force, "train-gnn")) {
    std::cout << "[train-gnn] up to date\n";
    return;
  }
  StageTimer timer("train-gnn");
  require_artifact(p.aug_features, "assemble");
  const AttributedGraph aug = load_graph(p.aug_features, p.aug_edges, p.aug_labels);
  GcnConfig tc = cfg.gcn;
  tc.seed = stage_seed(cfg, StageSeed::gcn);
  GcnTrainResult res = train_node_classifier(aug, cfg.lowrank, tc);
  save_tensors(p.gcn_ckpt, res.model.params());

  std::string csv = "epoch,train_loss,tnn,val_acc,test_acc\n";
  for (const auto& r : res.metrics) {
    csv += std::to_string(r.epoch) + "," + fmt_g(r.train_loss) + "," + fmt_g(r.tnn) + "," +
           fmt_g(r.val_acc) + "," + fmt_g(r.test_acc) + "\n";
  }
  write_file(p.metrics_csv, csv);

  json side = base_sidecar(cfg, "train-gnn");
  side["final_tnn"] = res.final_tnn;
  if (!res.metrics.empty()) {
    const auto& last = res.metrics.back();
    side["train_loss"] = last.train_loss;
    if (std::isfinite(last.val_acc)) side["val_acc"] = last.val_acc;
    if (std::isfinite(last.test_acc)) side["test_acc"] = last.test_acc;
  }
  write_json_file(p.gcn_json, side);
  std::cout << "[train-gnn] epochs=" << res.metrics.size()
            << " final_tnn=" << fmt_g(res.final_tnn) << "\n";
}

void stage_eval(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({}, p.eval_json, hash, force, "eval")) {
    std::cout << "[eval] up to date\n";
    return;
  }
  StageTimer timer("eval");
  require_artifact(p.aug_features, "assemble");
  require_artifact(p.gcn_ckpt, "train-gnn");
  const AttributedGraph aug = load_graph(p.aug_features, p.aug_edges, p.aug_labels);
  const GcnModel model = load_gcn_model(load_tensors(p.gcn_ckpt), cfg, aug.dim());

  const GcnForward fwd = gcn_forward(model, aug);
  json side = base_sidecar(cfg, "eval");
  side["train_acc"] = split_accuracy(fwd.logits, aug, Split::train);
  side["val_acc"] = aug.nodes_in_split(Split::val).empty()
                        ? json(nullptr)
                        : json(split_accuracy(fwd.logits, aug, Split::val));
  side["test_acc"] = aug.nodes_in_split(Split::test).empty()
                         ? json(nullptr)
                         : json(split_accuracy(fwd.logits, aug, Split::test));
  const int r0 = static_cast<int>(std::ceil(
      cfg.lowrank.gamma * static_cast<double>(std::min<int>(aug.n_nodes, cfg.gcn.feat))));
  side["tnn"] = truncated_nuclear_norm(fwd.h, r0).value;
  write_json_file(p.eval_json, side);
  std::cout << "[eval] test_acc="
            << (side["test_acc"].is_null() ? std::string("n/a")
                                           : fmt_g(side["test_acc"].get<double>()))
            << "\n";
}

void stage_diag(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.diag_csv}, p.diag_json, hash, force, "diag")) {
    std::cout << "[diag] up to date\n";
    return;
  }
  StageTimer timer("diag");
  require_artifact(p.aug_features, "assemble");
  require_artifact(p.gcn_ckpt, "train-gnn");
  const AttributedGraph aug = load_graph(p.aug_features, p.aug_edges, p.aug_labels);
  const GcnModel model = load_gcn_model(load_tensors(p.gcn_ckpt), cfg, aug.dim());
  const GcnForward fwd = gcn_forward(model, aug);

  const GramSpectrum spectrum = gram_matrix(fwd.h);
  const int n_classes = aug.n_classes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(aug.n_nodes, n_classes);
  for (int v = 0; v < aug.n_nodes; ++v) {
    const int label = aug.labels[static_cast<std::size_t>(v)];
    if (label >= 0) y(v, label) = 1.0;
  }
  const EigenProjection proj = eigen_projection(spectrum, y);

  std::string csv = "rank,projection,concentration\n";
  for (int i = 0; i < proj.concentration.size(); ++i) {
    csv += std::to_string(i + 1) + "," + fmt_g(proj.mean_abs(i)) + "," +
           fmt_g(proj.concentration(i)) + "\n";
  }
  write_file(p.diag_csv, csv);

  const int r20 = std::max(1, static_cast<int>(std::ceil(
                                  0.2 * static_cast<double>(std::min<int>(
                                            aug.n_nodes, static_cast<int>(fwd.h.cols()))))));
  json side = base_sidecar(cfg, "diag");
  side["concentration_20pct_rank"] = proj.concentration(r20 - 1);
  side["full_rank_concentration"] = proj.concentration(proj.concentration.size() - 1);
  write_json_file(p.diag_json, side);
  std::cout << "[diag] concentration@20%rank="
            << fmt_g(side["concentration_20pct_rank"].get<double>()) << "\n";
}

void stage_metrics(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.quality_csv}, p.quality_json, hash, force, "metrics")) {
    std::cout << "[metrics] up to date\n";
    return;
  }
  StageTimer timer("metrics");
  const AttributedGraph g = load_base_graph(cfg);
  require_artifact(p.syn_edges_csv, "assemble");
  auto [z, labels] = load_synthetic_latents(p);
  (void)z;

  SyntheticBatch batch;
  batch.labels = labels;
  batch.edges_to_base.assign(labels.size(), {});
  {
    std::ifstream in(p.syn_edges_csv, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.syn_edges_csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      int syn = 0, base = 0;
      if (std::sscanf(line.c_str(), "%d,%d", &syn, &base) != 2) {
        throw std::runtime_error("malformed row in " + p.syn_edges_csv + ": " + line);
      }
      const int s = syn - g.n_nodes;
      if (s < 0 || s >= batch.size() || base < 0 || base >= g.n_nodes) {
        throw std::runtime_error("edge row out of range in " + p.syn_edges_csv);
      }
      batch.edges_to_base[static_cast<std::size_t>(s)].push_back(base);
    }
  }

  const double orig_h = homophily_ratio(g);
  const double orig_d = average_degree(g);
  std::string csv = "set,homophily,avg_degree\n";
  csv += "original," + fmt_g(orig_h) + "," + fmt_g(orig_d) + "\n";
  json side = base_sidecar(cfg, "metrics");
  side["original_homophily"] = orig_h;
  side["original_avg_degree"] = orig_d;
  if (batch.size() > 0) {
    const StructureQuality q = synthetic_quality(g, batch);
    csv += "synthetic," + fmt_g(q.homophily) + "," + fmt_g(q.avg_degree) + "\n";
    side["synthetic_homophily"] = q.homophily;
    side["synthetic_avg_degree"] = q.avg_degree;
  } else {
    csv += "synthetic,,\n";
    side["synthetic_homophily"] = nullptr;
    side["synthetic_avg_degree"] = nullptr;
  }
  write_file(p.quality_csv, csv);
  write_json_file(p.quality_json, side);
  std::cout << "[metrics] original " << fmt_g(orig_h) << "/" << fmt_g(orig_d) << "\n";
}

void stage_cv(const RunConfig& cfg, bool force) {
  const Paths p = make_paths(cfg);
  const std::string hash = config_hash_hex(cfg);
  ensure_run_dir(cfg, p);
  if (stage_current({p.cv_csv}, p.cv_json, hash, force, "cv")) {
    std::cout << "[cv] up to date\n";
    return;
  }
  StageTimer timer("cv");
  const AttributedGraph g = load_base_graph(cfg);
  require_artifact(p.gae_ckpt, "train-gae");
  require_artifact(p.ldm_ckpt, "train-ldm");
  const auto gae_tensors = load_tensors(p.gae_ckpt);
  const GaeDecoder dec = load_gae_decoder(gae_tensors, cfg, g.dim(), "ema.");
  const auto ldm_tensors = load_tensors(p.ldm_ckpt);
  const Denoiser den = load_denoiser(ldm_tensors, cfg, "ema.");
  const LatentScaler scaler = load_latent_scaler(ldm_tensors);
  const ClusterAssignment clusters = load_clusters(p, g.n_nodes);
  const DiffusionSchedule sched =
      make_schedule(cfg.ldm.t_max, cfg.ldm.beta_start, cfg.ldm.beta_end);
  require_terminal_noise(sched);

  const int m = static_cast<int>(g.nodes_in_split(Split::train).size());
  const int c = g.n_classes();
  DecodeOptions opts;
  opts.threshold = cfg.decode_threshold;
  opts.max_degree = cfg.max_degree;
  const std::uint64_t gen_seed = stage_seed(cfg, StageSeed::generate);
  SynProvider provider = [&](int beta) {
    const int per_class = static_cast<int>(std::ceil(
        static_cast<double>(beta) * static_cast<double>(m) / static_cast<double>(c)));
    auto [z, labels] = generate_synthetic_latents(den, per_class, cfg.omega, sched, gen_seed);
    scaler.unscale(z);
    return make_synthetic_batch(dec, z, labels, clusters, opts);
  };

  const CvSelection sel = cross_validate(g, default_cv_grids(), provider, cfg.gcn,
                                         cfg.lowrank.eta, cfg.cv_budget,
                                         stage_seed(cfg, StageSeed::cv));

  std::string csv = "beta,tau,gamma,mean_accuracy\n";
  for (const auto& r : sel.records) {
    csv += std::to_string(r.beta) + "," + fmt_g(r.tau) + "," + fmt_g(r.gamma) + "," +
           fmt_g(r.mean_accuracy) + "\n";
  }
  write_file(p.cv_csv, csv);

  json side = base_sidecar(cfg, "cv");
  side["beta"] = sel.beta;
  side["tau"] = sel.tau;
  side["gamma"] = sel.gamma;
  side["mean_accuracy"] = sel.mean_accuracy;
  side["evaluated"] = static_cast<int>(sel.records.size());
  write_json_file(p.cv_json, side);
  std::cout << "[cv] selected beta=" << sel.beta << " tau=" << fmt_g(sel.tau)
            << " gamma=" << fmt_g(sel.gamma) << " acc=" << fmt_g(sel.mean_accuracy) << "\n";
}

void run_pipeline(const RunConfig& cfg, bool force) {
  stage_cluster(cfg, force);
  stage_train_gae(cfg, force);
  stage_encode(cfg, force);
  stage_train_ldm(cfg, force);
  stage_generate(cfg, force);
  stage_assemble(cfg, force);
  stage_train_gnn(cfg, force);
  stage_eval(cfg, force);
  std::cout << "[pipeline] complete: " << run_dir_for(cfg) << "\n";
}

}  // namespace gda
