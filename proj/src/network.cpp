#include "itemnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "itemnet/errors.hpp"

namespace itemnet {

void CorrelationMatrix::check() const {
  const Eigen::Index p = values.rows();
  if (values.cols() != p) throw EstimationError("correlation matrix is not square");
  if (static_cast<Eigen::Index>(item_ids.size()) != p)
    throw EstimationError("correlation matrix ids do not match its dimension");
  for (Eigen::Index i = 0; i < p; ++i) {
    if (values(i, i) != 1.0)
      throw EstimationError("correlation diagonal is not 1 at " + item_ids[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(values(i, j) - values(j, i)) > 1e-12)
        throw EstimationError("correlation matrix is not symmetric");
      if (std::abs(values(i, j)) > 1.0 + 1e-12)
        throw EstimationError("correlation out of [-1, 1]");
    }
  }
}

std::string to_string(NetworkMethod m) {
  return m == NetworkMethod::kGlasso ? "glasso" : "tmfg";
}

NetworkMethod network_method_from_string(const std::string& s) {
  if (s == "glasso") return NetworkMethod::kGlasso;
  if (s == "tmfg") return NetworkMethod::kTmfg;
  throw ConfigError("unknown network method: " + s);
}

int Network::edge_count() const {
  int e = 0;
  for (Eigen::Index i = 0; i < weights.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (weights(i, j) != 0.0) ++e;
  return e;
}

bool Network::is_connected() const {
  const Eigen::Index p = weights.rows();
  if (p == 0) return true;
  std::vector<char> seen(static_cast<size_t>(p), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index u = 0; u < p; ++u) {
      if (!seen[static_cast<size_t>(u)] && weights(v, u) != 0.0) {
        seen[static_cast<size_t>(u)] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == p;
}

CorrelationMatrix item_correlations(const EmbeddingMatrix& emb) {
  emb.check();
  const Eigen::Index n = emb.values.rows();  // dimensions (observations)
  const Eigen::Index p = emb.values.cols();  // items (variables)
  if (n < 2) throw InputError("correlations need at least two embedding dimensions");
  if (p < 2) throw InputError("correlations need at least two items");

  Eigen::MatrixXd centered = emb.values.rowwise() - emb.values.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (norms(j) == 0.0)
      throw DegenerateInputError("embedding column for item '" +
                                     emb.item_ids[j] + "' has zero variance",
                                 emb.item_ids[j]);
  }

  CorrelationMatrix out;
  out.item_ids = emb.item_ids;
  out.values = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      double r = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
      r = std::clamp(r, -1.0, 1.0);
      out.values(i, j) = r;
      out.values(j, i) = r;
    }
  }
  return out;
}

namespace {

// Linear-interpolation quantile over a sorted vector (the convention used by
// the usual statistical software default).
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = q * static_cast<double>(n - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

EmbeddingMatrix sparsify_embeddings(const EmbeddingMatrix& emb,
                                    double middle_fraction) {
  emb.check();
  if (!(middle_fraction > 0.0) || !(middle_fraction < 1.0))
    throw InputError("middle_fraction must lie strictly between 0 and 1");

  std::vector<double> pooled(emb.values.data(),
                             emb.values.data() + emb.values.size());
  std::sort(pooled.begin(), pooled.end());
  const double q_lo = (1.0 - middle_fraction) / 2.0;
  const double lo = sorted_quantile(pooled, q_lo);
  const double hi = sorted_quantile(pooled, 1.0 - q_lo);

  EmbeddingMatrix out = emb;
  out.kind = EmbeddingMatrix::Kind::kSparse;
  for (Eigen::Index idx = 0; idx < out.values.size(); ++idx) {
    const double v = out.values.data()[idx];
    const bool inside = (lo < v && v < hi) || (lo == hi && v == lo);
    if (inside) out.values.data()[idx] = 0.0;
  }
  return out;
}

CorrelationMatrix ensure_positive_definite(const CorrelationMatrix& c,
                                           double eps) {
  c.check();
  CorrelationMatrix out = c;
  // A handful of passes always suffices: each ridge lifts the spectrum floor
  // to eps before the unit-diagonal rescale shrinks it by 1/(1 + delta).
  for (int pass = 0; pass < 64; ++pass) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.values);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig >= eps - 1e-12) return out;
    const double delta = eps - min_eig;
    out.values.diagonal().array() += delta;
    out.values /= (1.0 + delta);
    out.values.diagonal().setOnes();
  }
  throw EstimationError("positive definite repair did not converge");
}

}  // namespace itemnet
