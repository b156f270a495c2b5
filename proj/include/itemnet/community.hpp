#pragma once

#include "itemnet/items.hpp"
#include "itemnet/network.hpp"

namespace itemnet {

// Weighted Newman modularity of a labelling, computed on absolute edge
// weights. An edgeless network has modularity 0.
double modularity(const Network& net, const Partition& part);

// Walktrap community detection (short random walks of `steps`, agglomerative
// merging by smallest walk-distance increase, dendrogram cut at maximum
// modularity). Runs on absolute weights; isolated vertices come back as
// singleton communities. Labels are canonical: 1, 2, ... in first-appearance
// order over the network's item order.
Partition walktrap(const Network& net, int steps = 4);

// Normalized mutual information between two labellings of the same items,
// as a percentage in [0, 100] (sum normalization). Items are matched by id,
// not by position. Two trivial one-community partitions agree perfectly
// (100); if exactly one side is trivial the score is 0.
double nmi(const Partition& a, const Partition& b);

struct EgaOptions {
  NetworkMethod method = NetworkMethod::kGlasso;
  GlassoOptions glasso{};
};

struct EgaOutcome {
  Network network;
  Partition partition;
  double lambda = 0.0;  // glasso-selected penalty; 0 under tmfg
};

// One EGA pass: PD-repaired item correlations -> network (glasso n_obs =
// embedding dimension count) -> walktrap communities.
EgaOutcome run_ega(const EmbeddingMatrix& emb, const EgaOptions& opts = {});

}  // namespace itemnet
