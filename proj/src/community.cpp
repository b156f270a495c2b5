#include "itemnet/community.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "itemnet/errors.hpp"

namespace itemnet {

namespace {

double modularity_of_labels(const Eigen::MatrixXd& A,
                            const std::vector<int>& labels) {
  const Eigen::Index p = A.rows();
  const double two_m = A.sum();
  if (two_m <= 0.0) return 0.0;
  std::unordered_map<int, double> internal;   // twice the internal weight
  std::unordered_map<int, double> degree_sum;
  for (Eigen::Index i = 0; i < p; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      d += A(i, j);
      if (labels[static_cast<size_t>(i)] == labels[static_cast<size_t>(j)])
        internal[labels[static_cast<size_t>(i)]] += A(i, j);
    }
    degree_sum[labels[static_cast<size_t>(i)]] += d;
  }
  double q = 0.0;
  for (const auto& [label, within] : internal) {
    const double d = degree_sum[label];
    q += within / two_m - (d / two_m) * (d / two_m);
  }
  // Communities whose every edge weight is zero never enter `internal`.
  for (const auto& [label, d] : degree_sum) {
    if (internal.find(label) == internal.end()) q -= (d / two_m) * (d / two_m);
  }
  return q;
}

}  // namespace

double modularity(const Network& net, const Partition& part) {
  if (net.item_ids != part.ids)
    throw InputError("modularity: partition does not cover the network's items");
  std::vector<int> labels = part.labels;
  return modularity_of_labels(net.weights.cwiseAbs(), labels);
}

Partition walktrap(const Network& net, int steps) {
  if (steps < 1) throw InputError("walktrap needs at least one step");
  const Eigen::Index p = net.size();
  if (p == 0) throw InputError("walktrap needs a non-empty network");
  Partition out;
  out.ids = net.item_ids;
  out.labels.assign(static_cast<size_t>(p), 0);

  const Eigen::MatrixXd A = net.weights.cwiseAbs();
  const Eigen::VectorXd deg = A.rowwise().sum();

  // Transition probabilities after `steps` walk steps; isolated vertices
  // keep a zero row and never take part in merging.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    if (deg(i) > 0.0) P.row(i) = A.row(i) / deg(i);
  Eigen::MatrixXd Pt = P;
  for (int s = 1; s < steps; ++s) Pt = Pt * P;

  Eigen::VectorXd inv_deg = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i)
    if (deg(i) > 0.0) inv_deg(i) = 1.0 / deg(i);

  // Agglomeration state: each alive community holds its member list, its
  // mean walk profile, and its smallest vertex index (the tie-break key).
  struct Community {
    std::vector<int> members;
    Eigen::VectorXd profile;
    int rep = 0;
    bool alive = false;
  };
  std::vector<Community> comms(static_cast<size_t>(p));
  std::vector<int> owner(static_cast<size_t>(p));  // vertex -> community slot
  for (Eigen::Index v = 0; v < p; ++v) {
    auto& cm = comms[static_cast<size_t>(v)];
    cm.members = {static_cast<int>(v)};
    cm.profile = Pt.row(v).transpose();
    cm.rep = static_cast<int>(v);
    cm.alive = deg(v) > 0.0;
    owner[static_cast<size_t>(v)] = static_cast<int>(v);
  }

  auto adjacent = [&](const Community& a, const Community& b) {
    for (int u : a.members)
      for (int v : b.members)
        if (A(u, v) > 0.0) return true;
    return false;
  };
  auto delta_sigma = [&](const Community& a, const Community& b) {
    const double na = static_cast<double>(a.members.size());
    const double nb = static_cast<double>(b.members.size());
    const double diff =
        (a.profile - b.profile).array().square().matrix().dot(inv_deg);
    return na * nb / (na + nb) * diff / static_cast<double>(p);
  };

  // Record the labelling after every merge and cut where modularity peaks.
  auto current_labels = [&]() {
    std::vector<int> labels(static_cast<size_t>(p));
    for (Eigen::Index v = 0; v < p; ++v)
      labels[static_cast<size_t>(v)] = owner[static_cast<size_t>(v)];
    return labels;
  };
  std::vector<int> best_labels = current_labels();
  double best_q = modularity_of_labels(A, best_labels);

  while (true) {
    int best_a = -1;
    int best_b = -1;
    double best_ds = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < comms.size(); ++a) {
      if (!comms[a].alive) continue;
      for (size_t b = a + 1; b < comms.size(); ++b) {
        if (!comms[b].alive || !adjacent(comms[a], comms[b])) continue;
        const double ds = delta_sigma(comms[a], comms[b]);
        const int lo = std::min(comms[a].rep, comms[b].rep);
        const int hi = std::max(comms[a].rep, comms[b].rep);
        const int cur_lo = best_a < 0 ? 0 : std::min(comms[static_cast<size_t>(best_a)].rep, comms[static_cast<size_t>(best_b)].rep);
        const int cur_hi = best_a < 0 ? 0 : std::max(comms[static_cast<size_t>(best_a)].rep, comms[static_cast<size_t>(best_b)].rep);
        const bool better =
            best_a < 0 || ds < best_ds ||
            (ds == best_ds && std::pair(lo, hi) < std::pair(cur_lo, cur_hi));
        if (better) {
          best_ds = ds;
          best_a = static_cast<int>(a);
          best_b = static_cast<int>(b);
        }
      }
    }
    if (best_a < 0) break;  // nothing adjacent left to merge

    Community& ca = comms[static_cast<size_t>(best_a)];
    Community& cb = comms[static_cast<size_t>(best_b)];
    const double na = static_cast<double>(ca.members.size());
    const double nb = static_cast<double>(cb.members.size());
    ca.profile = (na * ca.profile + nb * cb.profile) / (na + nb);
    for (int v : cb.members) owner[static_cast<size_t>(v)] = best_a;
    ca.members.insert(ca.members.end(), cb.members.begin(), cb.members.end());
    ca.rep = std::min(ca.rep, cb.rep);
    cb.alive = false;
    cb.members.clear();

    const std::vector<int> labels = current_labels();
    const double q = modularity_of_labels(A, labels);
    if (q > best_q) {
      best_q = q;
      best_labels = labels;
    }
  }

  out.labels = best_labels;
  return out.canonicalized();
}

double nmi(const Partition& a, const Partition& b) {
  if (a.ids.size() != b.ids.size())
    throw InputError("nmi: partitions cover different item sets");
  std::unordered_map<std::string, int> b_label;
  b_label.reserve(b.ids.size());
  for (size_t i = 0; i < b.ids.size(); ++i) b_label[b.ids[i]] = b.labels[i];

  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ma;
  std::map<int, double> mb;
  for (size_t i = 0; i < a.ids.size(); ++i) {
    auto it = b_label.find(a.ids[i]);
    if (it == b_label.end())
      throw InputError("nmi: partitions cover different item sets");
    joint[{a.labels[i], it->second}] += 1.0;
    ma[a.labels[i]] += 1.0;
    mb[it->second] += 1.0;
  }
  const double n = static_cast<double>(a.ids.size());
  if (n == 0.0) throw InputError("nmi: empty partitions");
  if (ma.size() == 1 && mb.size() == 1) return 100.0;

  double numer = 0.0;
  for (const auto& [cell, nij] : joint) {
    const double ni = ma[cell.first];
    const double nj = mb[cell.second];
    numer += -2.0 * nij * std::log(nij * n / (ni * nj));
  }
  double denom = 0.0;
  for (const auto& [label, ni] : ma) denom += ni * std::log(ni / n);
  for (const auto& [label, nj] : mb) denom += nj * std::log(nj / n);
  if (denom == 0.0) return 0.0;
  return 100.0 * numer / denom;
}

EgaOutcome run_ega(const EmbeddingMatrix& emb, const EgaOptions& opts) {
  const CorrelationMatrix corr =
      ensure_positive_definite(item_correlations(emb));
  EgaOutcome out;
  if (opts.method == NetworkMethod::kTmfg) {
    out.network = tmfg(corr).network;
  } else {
    GlassoResult res =
        ebic_glasso(corr, static_cast<int>(emb.values.rows()), opts.glasso);
    out.network = std::move(res.network);
    out.lambda = res.selected_lambda;
  }
  out.partition = walktrap(out.network);
  return out;
}

}  // namespace itemnet
