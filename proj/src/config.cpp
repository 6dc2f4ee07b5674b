#include "gda/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gda/checkpoint.hpp"

namespace gda {

namespace {

using nlohmann::json;

json to_json_doc(const RunConfig& c) {
  json j;
  j["data"] = {{"features", c.features_path},
               {"edges", c.edges_path},
               {"labels", c.labels_path}};
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["clusters"] = {{"k", c.n_clusters},
                   {"max_iters", c.kmeans_iters},
                   {"restarts", c.kmeans_restarts}};
  j["gae"] = {{"hidden", c.gae.hidden},
              {"latent", c.gae.latent},
              {"batch", c.gae.batch},
              {"neg_clusters", c.gae.neg_clusters},
              {"phase1_epochs", c.gae.phase1_epochs},
              {"phase2_epochs", c.gae.phase2_epochs},
              {"lr", c.gae.lr},
              {"weight_decay", c.gae.weight_decay},
              {"ema_decay", c.gae.ema_decay}};
  j["ldm"] = {{"hidden", c.ldm.hidden},
              {"time_dim", c.ldm.time_dim},
              {"label_dim", c.ldm.label_dim},
              {"t_max", c.ldm.t_max},
              {"beta_start", c.ldm.beta_start},
              {"beta_end", c.ldm.beta_end},
              {"epochs", c.ldm.epochs},
              {"batch", c.ldm.batch},
              {"lr", c.ldm.lr},
              {"weight_decay", c.ldm.weight_decay},
              {"ema_decay", c.ldm.ema_decay},
              {"p_uncond", c.ldm.p_uncond}};
  j["gcn"] = {{"hidden", c.gcn.hidden},
              {"feat", c.gcn.feat},
              {"dropout", c.gcn.dropout},
              {"lr", c.gcn.lr},
              {"weight_decay", c.gcn.weight_decay},
              {"epochs", c.gcn.epochs}};
  j["lowrank"] = {{"tau", c.lowrank.tau}, {"gamma", c.lowrank.gamma}, {"eta", c.lowrank.eta}};
  j["sampling"] = {{"omega", c.omega},
                   {"beta_syn", c.beta_syn},
                   {"threshold", c.decode_threshold},
                   {"max_degree", c.max_degree}};
  j["cv"] = {{"budget", c.cv_budget}};
  return j;
}

RunConfig from_json_doc(const json& j) {
  RunConfig c;
  if (j.contains("data")) {
    const json& d = j.at("data");
    c.features_path = d.value("features", c.features_path);
    c.edges_path = d.value("edges", c.edges_path);
    c.labels_path = d.value("labels", c.labels_path);
  }
  c.out_dir = j.value("out_dir", c.out_dir);
  c.seed = j.value("seed", c.seed);
  if (j.contains("clusters")) {
    const json& d = j.at("clusters");
    c.n_clusters = d.value("k", c.n_clusters);
    c.kmeans_iters = d.value("max_iters", c.kmeans_iters);
    c.kmeans_restarts = d.value("restarts", c.kmeans_restarts);
  }
  if (j.contains("gae")) {
    const json& d = j.at("gae");
    c.gae.hidden = d.value("hidden", c.gae.hidden);
    c.gae.latent = d.value("latent", c.gae.latent);
    c.gae.batch = d.value("batch", c.gae.batch);
    c.gae.neg_clusters = d.value("neg_clusters", c.gae.neg_clusters);
    c.gae.phase1_epochs = d.value("phase1_epochs", c.gae.phase1_epochs);
    c.gae.phase2_epochs = d.value("phase2_epochs", c.gae.phase2_epochs);
    c.gae.lr = d.value("lr", c.gae.lr);
    c.gae.weight_decay = d.value("weight_decay", c.gae.weight_decay);
    c.gae.ema_decay = d.value("ema_decay", c.gae.ema_decay);
  }
  if (j.contains("ldm")) {
    const json& d = j.at("ldm");
    c.ldm.hidden = d.value("hidden", c.ldm.hidden);
    c.ldm.time_dim = d.value("time_dim", c.ldm.time_dim);
    c.ldm.label_dim = d.value("label_dim", c.ldm.label_dim);
    c.ldm.t_max = d.value("t_max", c.ldm.t_max);
    c.ldm.beta_start = d.value("beta_start", c.ldm.beta_start);
    c.ldm.beta_end = d.value("beta_end", c.ldm.beta_end);
    c.ldm.epochs = d.value("epochs", c.ldm.epochs);
    c.ldm.batch = d.value("batch", c.ldm.batch);
    c.ldm.lr = d.value("lr", c.ldm.lr);
    c.ldm.weight_decay = d.value("weight_decay", c.ldm.weight_decay);
    c.ldm.ema_decay = d.value("ema_decay", c.ldm.ema_decay);
    c.ldm.p_uncond = d.value("p_uncond", c.ldm.p_uncond);
  }
  if (j.contains("gcn")) {
    const json& d = j.at("gcn");
    c.gcn.hidden = d.value("hidden", c.gcn.hidden);
    c.gcn.feat = d.value("feat", c.gcn.feat);
    c.gcn.dropout = d.value("dropout", c.gcn.dropout);
    c.gcn.lr = d.value("lr", c.gcn.lr);
    c.gcn.weight_decay = d.value("weight_decay", c.gcn.weight_decay);
    c.gcn.epochs = d.value("epochs", c.gcn.epochs);
  }
  if (j.contains("lowrank")) {
    const json& d = j.at("lowrank");
    c.lowrank.tau = d.value("tau", c.lowrank.tau);
    c.lowrank.gamma = d.value("gamma", c.lowrank.gamma);
    c.lowrank.eta = d.value("eta", c.lowrank.eta);
  }
  if (j.contains("sampling")) {
    const json& d = j.at("sampling");
    c.omega = d.value("omega", c.omega);
    c.beta_syn = d.value("beta_syn", c.beta_syn);
    c.decode_threshold = d.value("threshold", c.decode_threshold);
    c.max_degree = d.value("max_degree", c.max_degree);
  }
  if (j.contains("cv")) c.cv_budget = j.at("cv").value("budget", c.cv_budget);
  // The diffusion model denoises the autoencoder's latents, so the widths
  // are tied rather than configured twice.
  c.ldm.latent = c.gae.latent;
  return c;
}

}  // namespace

void apply_desk_preset(RunConfig& cfg) {
  cfg.gae.phase1_epochs = 200;
  cfg.gae.phase2_epochs = 200;
  cfg.ldm.epochs = 3000;
  cfg.ldm.t_max = 200;
  cfg.ldm.beta_start = 5e-4;
  cfg.ldm.beta_end = 0.1;
}

std::string config_to_json(const RunConfig& cfg) { return to_json_doc(cfg).dump(2) + "\n"; }

RunConfig config_from_json(const std::string& text) {
  return from_json_doc(json::parse(text));
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json(cfg);
}

std::string config_hash_hex(const RunConfig& cfg) {
  json j = to_json_doc(cfg);
  j.erase("out_dir");  // where results land does not change what they are
  const std::string canonical = j.dump();
  const std::uint64_t h = fnv1a64(canonical);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace gda
