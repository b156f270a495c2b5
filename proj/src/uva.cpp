#include "itemnet/uva.hpp"

#include <algorithm>
#include <cmath>

#include "itemnet/community.hpp"
#include "itemnet/csv.hpp"
#include "itemnet/errors.hpp"

namespace itemnet {

Eigen::MatrixXd wto_matrix(const Network& net) {
  const Eigen::Index p = net.size();
  Eigen::MatrixXd a = net.weights.cwiseAbs().cwiseMin(1.0);
  a.diagonal().setZero();
  const Eigen::VectorXd k = a.rowwise().sum();
  const Eigen::MatrixXd l = a * a;  // zero diagonal keeps u != i, j implicit
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double denom = std::min(k(i), k(j)) + 1.0 - a(i, j);
      const double w = (l(i, j) + a(i, j)) / denom;
      omega(i, j) = w;
      omega(j, i) = w;
    }
  }
  return omega;
}

std::pair<ItemPool, UvaReport> uva_reduce(const ItemPool& pool,
                                          const EmbeddingMatrix& emb,
                                          const UvaOptions& opts) {
  if (pool.size() < 4) throw InputError("uva_reduce needs at least four items");
  if (!(opts.cutoff > 0.0)) throw InputError("uva cutoff must be positive");

  ItemPool current = pool;
  UvaReport report;

  while (true) {
    const int sweep_index = report.n_sweeps + 1;
    const std::vector<std::string> ids = current.ids();
    const EmbeddingMatrix sub = emb.subset(ids);
    const EgaOutcome ega = run_ega(sub, {opts.method, opts.glasso});
    const Eigen::MatrixXd omega = wto_matrix(ega.network);
    report.sweeps.push_back({sweep_index, ids, omega, ega.lambda});
    report.n_sweeps = sweep_index;

    const Eigen::Index p = omega.rows();
    // Redundancy clusters: connected components of the thresholded overlap
    // graph, so chains of near-duplicates collapse together.
    std::vector<int> component(static_cast<size_t>(p), -1);
    int n_components = 0;
    for (Eigen::Index v = 0; v < p; ++v) {
      if (component[static_cast<size_t>(v)] >= 0) continue;
      bool in_any_pair = false;
      for (Eigen::Index u = 0; u < p && !in_any_pair; ++u)
        in_any_pair = u != v && omega(v, u) >= opts.cutoff;
      if (!in_any_pair) continue;
      std::vector<Eigen::Index> stack{v};
      component[static_cast<size_t>(v)] = n_components;
      while (!stack.empty()) {
        const Eigen::Index x = stack.back();
        stack.pop_back();
        for (Eigen::Index u = 0; u < p; ++u) {
          if (u != x && omega(x, u) >= opts.cutoff &&
              component[static_cast<size_t>(u)] < 0) {
            component[static_cast<size_t>(u)] = n_components;
            stack.push_back(u);
          }
        }
      }
      ++n_components;
    }
    if (n_components == 0) break;  // fixed point: nothing redundant

    // Mean overlap to the whole current pool decides each cluster's keeper.
    Eigen::VectorXd mean_wto = omega.rowwise().sum() / static_cast<double>(p - 1);
    std::vector<UvaCluster> clusters(static_cast<size_t>(n_components));
    std::vector<Eigen::Index> keeper(static_cast<size_t>(n_components), -1);
    for (Eigen::Index v = 0; v < p; ++v) {
      const int comp = component[static_cast<size_t>(v)];
      if (comp < 0) continue;
      auto& cluster = clusters[static_cast<size_t>(comp)];
      cluster.member_ids.push_back(ids[static_cast<size_t>(v)]);
      Eigen::Index& best = keeper[static_cast<size_t>(comp)];
      if (best < 0 || mean_wto(v) < mean_wto(best) ||
          (mean_wto(v) == mean_wto(best) &&
           ids[static_cast<size_t>(v)] < ids[static_cast<size_t>(best)])) {
        best = v;
        cluster.kept_id = ids[static_cast<size_t>(v)];
      }
    }
    for (Eigen::Index v = 0; v < p; ++v) {
      const int comp = component[static_cast<size_t>(v)];
      if (comp < 0) continue;
      auto& cluster = clusters[static_cast<size_t>(comp)];
      for (Eigen::Index u = 0; u < v; ++u)
        if (component[static_cast<size_t>(u)] == comp)
          cluster.wto_max = std::max(cluster.wto_max, omega(v, u));
      if (ids[static_cast<size_t>(v)] != cluster.kept_id)
        cluster.removed_ids.push_back(ids[static_cast<size_t>(v)]);
    }

    int n_to_remove = 0;
    for (const auto& cluster : clusters)
      n_to_remove += static_cast<int>(cluster.removed_ids.size());
    if (current.size() - static_cast<size_t>(n_to_remove) < 4) {
      report.truncated = true;
      break;
    }

    std::vector<std::string> keep;
    for (size_t c = 0; c < clusters.size(); ++c) {
      auto& cluster = clusters[c];
      cluster.sweep = sweep_index;
      cluster.cluster_id = static_cast<int>(c) + 1;
      report.redundant_pairs.push_back(cluster);
      report.n_removed += static_cast<int>(cluster.removed_ids.size());
    }
    for (Eigen::Index v = 0; v < p; ++v) {
      const int comp = component[static_cast<size_t>(v)];
      const std::string& id = ids[static_cast<size_t>(v)];
      if (comp < 0 || clusters[static_cast<size_t>(comp)].kept_id == id)
        keep.push_back(id);
    }
    current = current.subset_by_ids(keep);
  }

  return {std::move(current), std::move(report)};
}

std::string uva_log_to_csv(const UvaReport& report) {
  std::vector<csv::Row> rows;
  rows.push_back({"sweep", "cluster_id", "kept", "removed", "wto_max"});
  for (const auto& cluster : report.redundant_pairs) {
    std::string removed;
    for (size_t i = 0; i < cluster.removed_ids.size(); ++i) {
      if (i) removed += ';';
      removed += cluster.removed_ids[i];
    }
    rows.push_back({std::to_string(cluster.sweep),
                    std::to_string(cluster.cluster_id), cluster.kept_id,
                    removed, format_double(cluster.wto_max)});
  }
  return csv::emit(rows);
}

}  // namespace itemnet
