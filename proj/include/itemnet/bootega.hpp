#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "itemnet/community.hpp"
#include "itemnet/items.hpp"

namespace itemnet {

// One bootstrap pass over a pool: how often each dimension count appeared
// and how consistently each item stayed in its empirical community.
struct BootResult {
  int n_replicates = 0;
  std::map<int, double> dimension_frequency;       // community count -> share
  std::map<std::string, double> item_stability;    // item id -> [0, 1]
  std::uint64_t replicate_seed_base = 0;
  Partition empirical;  // the partition the replicates were aligned against
};

struct BootRemoval {
  int iteration = 0;  // 1-based pruning iteration
  std::string item_id;
  double stability = 0.0;
};

struct BootReport {
  BootResult initial_boot;  // on the pool as handed in (post-redundancy)
  BootResult final_boot;    // after pruning converged
  int n_removed = 0;
  std::vector<BootRemoval> items_removed;
  // Filled by the pipeline from the pre-redundancy pool; pruning itself
  // never sees that pool.
  std::optional<BootResult> initial_boot_with_redundancies;
  bool truncated = false;
};

// Draws n replicate embedding matrices from MVN(0, R) with
// R = ensure_positive_definite(item_correlations(emb)), each with the same
// row count as emb. Replicate k (1-based) uses seed ^ k, so any single
// replicate is independently reproducible.
std::vector<EmbeddingMatrix> parametric_replicates(const EmbeddingMatrix& emb,
                                                   int n = 100,
                                                   std::uint64_t seed = 0);

// Aligns every replicate partition to the empirical one by maximum-overlap
// assignment on the contingency table (replicate communities left unmatched
// receive fresh labels) and returns, per item, the fraction of replicates in
// which its aligned label equals its empirical label.
std::map<std::string, double> item_stability(
    const Partition& empirical, const std::vector<Partition>& replicates);

// Full bootstrap at a fixed pool: replicates, per-replicate EGA, stability.
BootResult bootstrap_ega(const EmbeddingMatrix& emb, const Partition& empirical,
                         const EgaOptions& ega, int n, std::uint64_t seed_base);

struct BootOptions {
  EgaOptions ega{};
  double threshold = 0.75;
  int n_replicates = 100;
  std::uint64_t seed = 0;
  bool prune_one_at_a_time = false;
};

// Iteratively prunes unstable items: bootstrap the current pool, remove every
// item below threshold (if all fall below, only the single least stable item
// goes; ties to the lexicographically smallest id), and repeat until every
// stability clears the threshold. An iteration that would leave fewer than
// four items is not applied and the report is marked truncated.
std::pair<ItemPool, BootReport> stability_reduce(const ItemPool& pool,
                                                 const EmbeddingMatrix& emb,
                                                 const BootOptions& opts = {});

// Stability table rows: item, statement, stability, empirical_community.
std::string stability_to_csv(const BootResult& boot, const ItemPool& pool);

}  // namespace itemnet
