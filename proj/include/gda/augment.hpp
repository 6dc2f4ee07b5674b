#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "gda/clustering.hpp"
#include "gda/gae.hpp"
#include "gda/graph.hpp"
#include "gda/ldm.hpp"

namespace gda {

// Synthetic nodes before assembly: class-balanced latents plus their decoded
// attributes and edges into the original graph. Every node keeps ≥ 1 edge.
struct SyntheticBatch {
  Eigen::MatrixXd latents;                 // N′ × D′
  std::vector<int> labels;                 // class-major blocks: 0,0,…,1,1,…
  Eigen::MatrixXd attributes;              // N′ × D
  std::vector<std::vector<int>> edges_to_base;  // per node, ascending base ids

  int size() const { return static_cast<int>(labels.size()); }
};

struct AugmentedGraph {
  AttributedGraph graph;  // original nodes 0..N−1, synthetic nodes N..N̄−1
  int n_base = 0;
  int n_syn = 0;
};

// n_per_class samples per class via guided ancestral sampling; sample s draws
// its noise from stream fork(seed, s).
std::pair<Eigen::MatrixXd, std::vector<int>> generate_synthetic_latents(
    const Denoiser& den, int n_per_class, double omega, const DiffusionSchedule& sched,
    std::uint64_t seed);

struct DecodeOptions {
  double threshold = 0.5;
  int max_degree = 0;  // 0 = uncapped; otherwise keep the top-scoring slots
};

// Attributes via the attribute head; edges via thresholded inter row, then
// thresholded intra rows mapped through cluster membership. A node whose
// thresholded maps produce no edge falls back to the single (cluster, slot)
// with the largest inter×intra score.
std::pair<Eigen::MatrixXd, std::vector<std::vector<int>>> decode_synthetic_structures(
    const GaeDecoder& dec, const Eigen::MatrixXd& latents, const ClusterAssignment& clusters,
    const DecodeOptions& opts = {});

SyntheticBatch make_synthetic_batch(const GaeDecoder& dec, const Eigen::MatrixXd& latents,
                                    const std::vector<int>& labels,
                                    const ClusterAssignment& clusters,
                                    const DecodeOptions& opts = {});

// Appends synthetic nodes (split "train") and their undirected edges to the
// base graph. No synthetic–synthetic edges exist by construction.
AugmentedGraph assemble_augmented_graph(const AttributedGraph& base, const SyntheticBatch& syn);

// Homophily and mean degree of the synthetic↔base structure alone. Homophily
// counts edges whose base endpoint is labeled; mean degree is edges per
// synthetic node.
struct StructureQuality {
  double homophily = 0.0;
  double avg_degree = 0.0;
};
StructureQuality synthetic_quality(const AttributedGraph& base, const SyntheticBatch& syn);

}  // namespace gda
