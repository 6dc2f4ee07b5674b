#pragma once

#include <cstdint>
#include <string>

#include "gda/gae.hpp"
#include "gda/gcn.hpp"
#include "gda/ldm.hpp"
#include "gda/lowrank.hpp"

namespace gda {

// One JSON document drives every stage. Per-stage seeds are derived from the
// single root seed at run time and are therefore not part of the document;
// the latent width of the diffusion model is tied to the autoencoder's.
struct RunConfig {
  std::string features_path;
  std::string edges_path;
  std::string labels_path;
  std::string out_dir = "runs";
  std::uint64_t seed = 1;

  int n_clusters = 100;
  int kmeans_iters = 50;
  int kmeans_restarts = 4;

  GaeConfig gae;
  LdmConfig ldm;
  GcnConfig gcn;
  LowRankConfig lowrank{0.10, 0.2, 0.01};

  double omega = 0.5;         // guidance strength for sampling
  int beta_syn = 3;           // synthetic nodes ≈ beta_syn · |train| (class-balanced)
  double decode_threshold = 0.5;
  int max_degree = 0;         // 0 = uncapped synthetic degree
  int cv_budget = 0;          // grid points for `cv`; 0 = exhaustive
};

// Shrinks the schedule for quick runs: autoencoder 200+200 epochs, diffusion
// 500 epochs with 200 steps over a proportionally hotter noise range (the
// terminal signal level stays below 1e-3).
void apply_desk_preset(RunConfig& cfg);

std::string config_to_json(const RunConfig& cfg);  // canonical: sorted keys, compact
RunConfig config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

// 16 lowercase hex digits over the canonical document; names run directories
// and ties artifacts to the settings that produced them.
std::string config_hash_hex(const RunConfig& cfg);

}  // namespace gda
