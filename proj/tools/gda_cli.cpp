#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gda/config.hpp"
#include "gda/pipeline.hpp"

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("GDA_THREADS")) {
    Eigen::setNbThreads(std::atoi(threads));
  }

  CLI::App app{"graph data augmentation: latent-diffusion synthetic nodes for a node classifier"};
  app.require_subcommand(1);

  std::string config_path;
  bool desk = false;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> omega, tau, gamma;
  std::optional<int> t_max, max_degree, beta_syn;
  std::optional<std::string> out_dir;

  using Handler = std::function<void(const gda::RunConfig&, bool)>;
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> stages = {
      {"cluster", {"balanced k-means over node attributes", gda::stage_cluster}},
      {"train-gae", {"train the graph autoencoder", gda::stage_train_gae}},
      {"encode", {"write per-node latents with the averaged encoder", gda::stage_encode}},
      {"train-ldm", {"train the class-conditional latent diffusion model",
                     gda::stage_train_ldm}},
      {"generate", {"sample class-balanced synthetic latents", gda::stage_generate}},
      {"assemble", {"decode synthetic nodes and build the augmented graph",
                    gda::stage_assemble}},
      {"train-gnn", {"train the node classifier on the augmented graph",
                     gda::stage_train_gnn}},
      {"eval", {"evaluate the trained classifier", gda::stage_eval}},
      {"diag", {"spectral projection/concentration diagnostics", gda::stage_diag}},
      {"metrics", {"structure quality of original vs synthetic edges", gda::stage_metrics}},
      {"cv", {"grid-search (beta, tau, gamma) by 5-fold selection", gda::stage_cv}},
      {"pipeline", {"run every stage in order", gda::run_pipeline}},
  };

  for (const auto& [name, entry] : stages) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("-c,--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_flag("--desk", desk, "apply the quick desk-scale preset");
    sub->add_flag("--force", force, "rebuild even when current artifacts exist");
    sub->add_option("--seed", seed, "override the root seed");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--omega", omega, "override the guidance strength");
    sub->add_option("--tau", tau, "override the regularizer weight");
    sub->add_option("--gamma", gamma, "override the rank ratio");
    sub->add_option("--t-max", t_max, "override the diffusion step count");
    sub->add_option("--max-degree", max_degree, "override the synthetic degree cap");
    sub->add_option("--beta-syn", beta_syn, "override the synthetic budget multiplier");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    gda::RunConfig cfg = gda::load_run_config(config_path);
    if (desk) gda::apply_desk_preset(cfg);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out_dir = *out_dir;
    if (omega) cfg.omega = *omega;
    if (tau) cfg.lowrank.tau = *tau;
    if (gamma) cfg.lowrank.gamma = *gamma;
    if (t_max) cfg.ldm.t_max = *t_max;
    if (max_degree) cfg.max_degree = *max_degree;
    if (beta_syn) cfg.beta_syn = *beta_syn;

    for (const auto& [name, entry] : stages) {
      if (app.got_subcommand(name)) {
        entry.second(cfg, force);
        return 0;
      }
    }
    std::cerr << "no subcommand matched\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
