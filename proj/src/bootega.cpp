#include "itemnet/bootega.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "itemnet/csv.hpp"
#include "itemnet/errors.hpp"
#include "itemnet/network.hpp"
#include "itemnet/rng.hpp"

namespace itemnet {

std::vector<EmbeddingMatrix> parametric_replicates(const EmbeddingMatrix& emb,
                                                   int n, std::uint64_t seed) {
  if (n < 1) throw InputError("parametric_replicates needs n >= 1");
  const CorrelationMatrix R =
      ensure_positive_definite(item_correlations(emb));
  Eigen::LLT<Eigen::MatrixXd> llt(R.values);
  if (llt.info() != Eigen::Success)
    throw EstimationError("replicate correlation is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  const Eigen::Index dims = emb.values.rows();
  const Eigen::Index p = emb.values.cols();
  std::vector<EmbeddingMatrix> out;
  out.reserve(static_cast<size_t>(n));
  for (int k = 1; k <= n; ++k) {
    Rng rng(replicate_seed(seed, static_cast<std::uint64_t>(k)));
    EmbeddingMatrix rep;
    rep.kind = emb.kind;
    rep.item_ids = emb.item_ids;
    rep.values.resize(dims, p);
    Eigen::VectorXd z(p);
    for (Eigen::Index r = 0; r < dims; ++r) {
      for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.gaussian();
      rep.values.row(r) = (L * z).transpose();
    }
    out.push_back(std::move(rep));
  }
  return out;
}

namespace {

// Square assignment problem, minimization (the classic potentials method).
// Deterministic for a given cost matrix.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<size_t>(n) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = match[static_cast<size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] -
                           v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<size_t>(j)] > 0)
      row_to_col[static_cast<size_t>(match[static_cast<size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::map<std::string, double> item_stability(
    const Partition& empirical, const std::vector<Partition>& replicates) {
  if (replicates.empty()) throw InputError("item_stability needs replicates");

  std::unordered_map<std::string, size_t> emp_index;
  for (size_t i = 0; i < empirical.ids.size(); ++i)
    emp_index[empirical.ids[i]] = i;

  std::vector<int> emp_labels;  // distinct, ascending
  {
    std::set<int> s(empirical.labels.begin(), empirical.labels.end());
    emp_labels.assign(s.begin(), s.end());
  }
  std::unordered_map<int, int> emp_col;
  for (size_t c = 0; c < emp_labels.size(); ++c)
    emp_col[emp_labels[static_cast<size_t>(c)]] = static_cast<int>(c);
  const int emp_max_label =
      emp_labels.empty() ? 0 : emp_labels.back();

  std::map<std::string, int> hits;
  for (const auto& id : empirical.ids) hits[id] = 0;

  for (const auto& rep : replicates) {
    if (rep.ids.size() != empirical.ids.size())
      throw InputError("item_stability: partitions cover different item sets");
    std::vector<int> rep_labels;
    {
      std::set<int> s(rep.labels.begin(), rep.labels.end());
      rep_labels.assign(s.begin(), s.end());
    }
    std::unordered_map<int, int> rep_row;
    for (size_t r = 0; r < rep_labels.size(); ++r)
      rep_row[rep_labels[static_cast<size_t>(r)]] = static_cast<int>(r);

    const int side = static_cast<int>(
        std::max(rep_labels.size(), emp_labels.size()));
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(side, side);
    for (size_t i = 0; i < rep.ids.size(); ++i) {
      auto it = emp_index.find(rep.ids[i]);
      if (it == emp_index.end())
        throw InputError("item_stability: partitions cover different item sets");
      overlap(rep_row[rep.labels[i]],
              emp_col[empirical.labels[it->second]]) += 1.0;
    }
    const double big = static_cast<double>(rep.ids.size());
    const Eigen::MatrixXd cost =
        Eigen::MatrixXd::Constant(side, side, big) - overlap;
    const std::vector<int> assign = hungarian_min(cost);

    // Matched replicate communities inherit the empirical label; communities
    // assigned to padding columns get fresh labels past the empirical range.
    std::unordered_map<int, int> aligned;
    int next_fresh = emp_max_label + 1;
    for (size_t r = 0; r < rep_labels.size(); ++r) {
      const int col = assign[r];
      if (col >= 0 && col < static_cast<int>(emp_labels.size()))
        aligned[rep_labels[r]] = emp_labels[static_cast<size_t>(col)];
      else
        aligned[rep_labels[r]] = next_fresh++;
    }
    for (size_t i = 0; i < rep.ids.size(); ++i) {
      const size_t e = emp_index[rep.ids[i]];
      if (aligned[rep.labels[i]] == empirical.labels[e]) ++hits[rep.ids[i]];
    }
  }

  std::map<std::string, double> out;
  const double denom = static_cast<double>(replicates.size());
  for (const auto& [id, count] : hits)
    out[id] = static_cast<double>(count) / denom;
  return out;
}

BootResult bootstrap_ega(const EmbeddingMatrix& emb, const Partition& empirical,
                         const EgaOptions& ega, int n, std::uint64_t seed_base) {
  BootResult out;
  out.n_replicates = n;
  out.replicate_seed_base = seed_base;
  out.empirical = empirical;

  const std::vector<EmbeddingMatrix> reps =
      parametric_replicates(emb, n, seed_base);
  std::vector<Partition> parts;
  parts.reserve(reps.size());
  for (const auto& rep : reps) parts.push_back(run_ega(rep, ega).partition);

  for (const auto& part : parts)
    out.dimension_frequency[part.n_communities()] += 1.0 / static_cast<double>(n);
  out.item_stability = item_stability(empirical, parts);
  return out;
}

std::pair<ItemPool, BootReport> stability_reduce(const ItemPool& pool,
                                                 const EmbeddingMatrix& emb,
                                                 const BootOptions& opts) {
  if (pool.size() < 4)
    throw InputError("stability_reduce needs at least four items");
  if (opts.n_replicates < 1)
    throw InputError("stability_reduce needs at least one replicate");

  ItemPool current = pool;
  BootReport report;

  for (int iteration = 1;; ++iteration) {
    const std::vector<std::string> ids = current.ids();
    const EmbeddingMatrix sub = emb.subset(ids);
    const Partition empirical = run_ega(sub, opts.ega).partition;
    const std::uint64_t iter_seed =
        iteration == 1 ? opts.seed
                       : derive_seed(opts.seed,
                                     "bootega/iteration/" +
                                         std::to_string(iteration));
    const BootResult boot =
        bootstrap_ega(sub, empirical, opts.ega, opts.n_replicates, iter_seed);
    if (iteration == 1) report.initial_boot = boot;

    std::vector<std::pair<std::string, double>> unstable;
    for (const auto& [id, stability] : boot.item_stability)
      if (stability < opts.threshold) unstable.emplace_back(id, stability);
    if (unstable.empty()) {
      report.final_boot = boot;
      break;
    }
    // Least stable first; ties resolve to the smaller id (map order).
    std::stable_sort(unstable.begin(), unstable.end(),
                     [](const auto& a, const auto& b) {
                       return a.second < b.second;
                     });
    if (opts.prune_one_at_a_time || unstable.size() == current.size())
      unstable.resize(1);

    if (current.size() - unstable.size() < 4) {
      report.truncated = true;
      report.final_boot = boot;
      break;
    }
    std::vector<std::string> keep = ids;
    for (const auto& [id, stability] : unstable) {
      report.items_removed.push_back({iteration, id, stability});
      ++report.n_removed;
      keep.erase(std::find(keep.begin(), keep.end(), id));
    }
    current = current.subset_by_ids(keep);
  }

  return {std::move(current), std::move(report)};
}

std::string stability_to_csv(const BootResult& boot, const ItemPool& pool) {
  std::vector<csv::Row> rows;
  rows.push_back({"item", "statement", "stability", "empirical_community"});
  for (size_t i = 0; i < boot.empirical.ids.size(); ++i) {
    const std::string& id = boot.empirical.ids[i];
    const Item* item = pool.find(id);
    rows.push_back({id, item ? item->statement : "",
                    format_double(boot.item_stability.at(id)),
                    std::to_string(boot.empirical.labels[i])});
  }
  return csv::emit(rows);
}

}  // namespace itemnet
