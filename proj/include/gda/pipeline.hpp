#pragma once

#include <cstdint>
#include <string>

#include "gda/config.hpp"

namespace gda {

// Stable tags for deriving per-stage seeds from the root seed.
enum class StageSeed : std::uint64_t {
  cluster = 1,
  gae = 2,
  ldm = 3,
  generate = 4,
  gcn = 5,
  cv = 6,
};

std::uint64_t stage_seed(const RunConfig& cfg, StageSeed tag);

// All artifacts for a configuration live under
// <out_dir>/run-<config hash>/; the hash ignores out_dir itself.
std::string run_dir_for(const RunConfig& cfg);

// Each stage loads its upstream artifacts from the run directory, writes its
// own artifact plus a JSON sidecar carrying the config hash, and skips work
// when a current artifact (matching hash) already exists. A sidecar with a
// foreign hash aborts unless force is set; a missing upstream artifact is an
// error naming the stage to run first.
void stage_cluster(const RunConfig& cfg, bool force = false);
void stage_train_gae(const RunConfig& cfg, bool force = false);
void stage_encode(const RunConfig& cfg, bool force = false);
void stage_train_ldm(const RunConfig& cfg, bool force = false);
void stage_generate(const RunConfig& cfg, bool force = false);
void stage_assemble(const RunConfig& cfg, bool force = false);
void stage_train_gnn(const RunConfig& cfg, bool force = false);
void stage_eval(const RunConfig& cfg, bool force = false);
void stage_diag(const RunConfig& cfg, bool force = false);
void stage_metrics(const RunConfig& cfg, bool force = false);
void stage_cv(const RunConfig& cfg, bool force = false);

// cluster → train-gae → encode → train-ldm → generate → assemble →
// train-gnn → eval.
void run_pipeline(const RunConfig& cfg, bool force = false);

}  // namespace gda
