#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "itemnet/items.hpp"

namespace itemnet {

// p x p Pearson correlation matrix between item columns. Symmetric, unit
// diagonal, entries in [-1, 1].
struct CorrelationMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> item_ids;

  Eigen::Index size() const { return values.rows(); }
  void check() const;
};

enum class NetworkMethod { kGlasso, kTmfg };

std::string to_string(NetworkMethod m);
NetworkMethod network_method_from_string(const std::string& s);

// Symmetric weighted adjacency with zero diagonal. glasso weights are
// partial correlations; tmfg weights are the retained correlations.
struct Network {
  Eigen::MatrixXd weights;
  std::vector<std::string> item_ids;
  NetworkMethod method = NetworkMethod::kGlasso;

  Eigen::Index size() const { return weights.rows(); }
  int edge_count() const;
  bool is_connected() const;
};

// Pearson correlations between item columns over embedding dimensions.
// Requires >= 2 dimensions and >= 2 items; a zero-variance column raises
// DegenerateInputError naming the item.
CorrelationMatrix item_correlations(const EmbeddingMatrix& emb);

// Zeroes every entry strictly inside the pooled middle band of the value
// distribution (middle_fraction of the mass, linear-interpolation quantiles).
// Values equal to a band edge survive; if the band collapses to a single
// point (constant input), values at that point are treated as inside.
EmbeddingMatrix sparsify_embeddings(const EmbeddingMatrix& emb,
                                    double middle_fraction = 0.95);

// Ridge-repairs the smallest eigenvalue up to eps, re-standardizing to a
// unit diagonal after each ridge. Positive definite inputs pass through
// unchanged.
CorrelationMatrix ensure_positive_definite(const CorrelationMatrix& c,
                                           double eps = 1e-8);

struct GlassoOptions {
  double gamma = 0.5;
  int n_lambda = 100;
  double lambda_min_ratio = 0.1;
  int max_iterations = 10000;  // outer coordinate-descent sweeps per lambda
  double tolerance = 1e-6;
};

struct GlassoResult {
  Network network;
  Eigen::MatrixXd precision;  // selected Theta, support == network edges
  int selected_index = -1;
  double selected_lambda = 0.0;
  std::vector<double> lambda_path;
  std::vector<double> ebic_path;
  std::vector<int> edge_counts;
};

// L1-penalized Gaussian precision estimation over a log-spaced lambda path
// (lambda_max = max off-diagonal |c|), selecting the path point minimizing
// EBIC = -2*loglik + E*log(n_obs) + 4*E*gamma*log(p). Off-diagonals only are
// penalized. n_obs is the number of embedding dimensions behind c.
GlassoResult ebic_glasso(const CorrelationMatrix& c, int n_obs,
                         const GlassoOptions& opts = {});

struct TmfgResult {
  Network network;
  std::vector<std::array<int, 3>> faces;  // triangular faces, maintained list
};

// Triangulated maximally filtered graph: seeds the four vertices with the
// largest total absolute correlation, then repeatedly inserts the
// highest-gain vertex into a triangular face. Exactly 3p-6 edges, planar.
TmfgResult tmfg(const CorrelationMatrix& c);

}  // namespace itemnet
