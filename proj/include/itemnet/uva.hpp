#pragma once

#include <string>
#include <utility>
#include <vector>

#include "itemnet/items.hpp"
#include "itemnet/network.hpp"

namespace itemnet {

// Weighted topological overlap of a network's absolute weights:
//   omega_ij = (sum_u a_iu * a_uj + a_ij) / (min(k_i, k_j) + 1 - a_ij)
// with k_i the absolute strength of node i. Zero diagonal.
Eigen::MatrixXd wto_matrix(const Network& net);

// One redundancy cluster resolved during a sweep.
struct UvaCluster {
  int sweep = 0;       // 1-based sweep index
  int cluster_id = 0;  // 1-based within the sweep
  std::vector<std::string> member_ids;
  std::string kept_id;
  std::vector<std::string> removed_ids;
  double wto_max = 0.0;  // largest pairwise overlap inside the cluster
};

// Snapshot of one sweep: the pool it saw and the overlap matrix it judged,
// kept so every keep/remove decision can be re-checked after the fact.
struct UvaSweep {
  int index = 0;  // 1-based
  std::vector<std::string> item_ids;
  Eigen::MatrixXd wto;
  double lambda = 0.0;  // glasso-selected penalty; 0 under tmfg
};

struct UvaReport {
  int n_removed = 0;
  int n_sweeps = 0;
  std::vector<UvaCluster> redundant_pairs;
  std::vector<UvaSweep> sweeps;
  bool truncated = false;
};

struct UvaOptions {
  NetworkMethod method = NetworkMethod::kGlasso;
  double cutoff = 0.25;
  GlassoOptions glasso;
};

// Iteratively removes redundant items. Each sweep estimates a network on the
// current pool, thresholds the wTO matrix at `cutoff`, groups redundant pairs
// into connected components, and keeps only the member with the lowest mean
// wTO to the whole current pool (ties to the lexicographically smallest id).
// Stops when a sweep removes nothing; a sweep that would leave fewer than
// four items is not applied and the report is marked truncated.
std::pair<ItemPool, UvaReport> uva_reduce(const ItemPool& pool,
                                          const EmbeddingMatrix& emb,
                                          const UvaOptions& opts = {});

// Audit log rows: sweep, cluster_id, kept, removed, wto_max.
std::string uva_log_to_csv(const UvaReport& report);

}  // namespace itemnet
