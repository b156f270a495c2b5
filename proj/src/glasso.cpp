#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "itemnet/errors.hpp"
#include "itemnet/network.hpp"

namespace itemnet {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// One penalized regression for column j of the working covariance W:
//   minimize 0.5 * b' W11 b - s12' b + lambda * |b|_1
// via coordinate descent with an incrementally maintained q = sum_l W(:,l) b_l.
// `q` is caller-owned scratch. On success stores the total W(:,j) movement
// in w_change; returns false if the coordinate passes did not converge.
bool solve_column(const Eigen::MatrixXd& S, Eigen::MatrixXd& W,
                  Eigen::MatrixXd& B, Eigen::Index j, double lambda,
                  double tol, int max_passes, Eigen::VectorXd& q,
                  double& w_change) {
  const Eigen::Index p = S.rows();
  auto beta = B.col(j);
  q.setZero(p);
  for (Eigen::Index l = 0; l < p; ++l)
    if (l != j && beta(l) != 0.0) q += W.col(l) * beta(l);

  auto update = [&](Eigen::Index k) {
    const double num = S(k, j) - q(k) + W(k, k) * beta(k);
    const double next = soft_threshold(num, lambda) / W(k, k);
    const double delta = next - beta(k);
    if (delta != 0.0) {
      beta(k) = next;
      q += W.col(k) * delta;
    }
    return std::abs(delta);
  };

  bool converged = false;
  for (int pass = 0; pass < max_passes && !converged; ++pass) {
    // Sweep the active set until stable, then one full sweep to let
    // coordinates (re-)enter; stop when the full sweep moves nothing.
    for (int inner = 0; inner < max_passes; ++inner) {
      double change = 0.0;
      for (Eigen::Index k = 0; k < p; ++k)
        if (k != j && beta(k) != 0.0) change = std::max(change, update(k));
      if (change <= tol) break;
    }
    double change = 0.0;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) change = std::max(change, update(k));
    converged = change <= tol;
  }
  if (!converged) return false;

  w_change = 0.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    if (k != j) {
      w_change += std::abs(q(k) - W(k, j));
      W(k, j) = q(k);
      W(j, k) = q(k);
    }
  }
  beta(j) = 0.0;
  return true;
}

// Blockwise coordinate-descent graphical lasso at a single penalty, warm
// started from (W, B). Fills theta with the implied precision estimate.
void glasso_at(const Eigen::MatrixXd& S, double lambda, const GlassoOptions& opts,
               int lambda_index, Eigen::MatrixXd& W, Eigen::MatrixXd& B,
               Eigen::MatrixXd& theta, Eigen::VectorXd& scratch) {
  const Eigen::Index p = S.rows();
  // Converge on the mean absolute off-diagonal movement of W per sweep, the
  // customary blockwise criterion; a max-movement rule needs ~2x the sweeps
  // for no measurable change in the selected supports.
  const double denom = static_cast<double>(p) * static_cast<double>(p - 1);
  bool converged = false;
  for (int sweep = 0; sweep < opts.max_iterations && !converged; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      double w_change = 0.0;
      if (!solve_column(S, W, B, j, lambda, opts.tolerance,
                        opts.max_iterations, scratch, w_change))
        throw EstimationError("graphical lasso column regression did not converge",
                              lambda_index);
      change += w_change;
    }
    converged = change <= opts.tolerance * denom;
  }
  if (!converged)
    throw EstimationError("graphical lasso did not converge", lambda_index);

  theta.resize(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double quad = 0.0;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) quad += W(k, j) * B(k, j);
    const double theta_jj = 1.0 / (W(j, j) - quad);
    theta(j, j) = theta_jj;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) theta(k, j) = -B(k, j) * theta_jj;
  }
  // Support must be symmetric; a one-sided exact zero is a boundary case the
  // regressions can disagree on, so resolve it as no edge.
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (B(i, j) == 0.0 || B(j, i) == 0.0) {
        theta(i, j) = 0.0;
        theta(j, i) = 0.0;
      } else {
        const double avg = 0.5 * (theta(i, j) + theta(j, i));
        theta(i, j) = avg;
        theta(j, i) = avg;
      }
    }
  }
}

double gaussian_loglik(const Eigen::MatrixXd& S, const Eigen::MatrixXd& theta,
                       int n_obs) {
  Eigen::LLT<Eigen::MatrixXd> llt(theta);
  if (llt.info() != Eigen::Success)
    throw EstimationError("precision estimate is not positive definite");
  double logdet = 0.0;
  const auto& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < theta.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  // tr(S * theta) without forming the product.
  double trace = 0.0;
  for (Eigen::Index i = 0; i < theta.rows(); ++i)
    trace += S.row(i).dot(theta.col(i));
  return 0.5 * static_cast<double>(n_obs) * (logdet - trace);
}

}  // namespace

GlassoResult ebic_glasso(const CorrelationMatrix& c, int n_obs,
                         const GlassoOptions& opts) {
  c.check();
  if (n_obs < 3) throw InputError("ebic_glasso needs at least three observations");
  if (opts.n_lambda < 1) throw InputError("ebic_glasso needs a non-empty lambda path");
  const Eigen::Index p = c.size();
  const Eigen::MatrixXd& S = c.values;

  double lambda_max = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      lambda_max = std::max(lambda_max, std::abs(S(i, j)));

  GlassoResult res;
  res.lambda_path.resize(static_cast<size_t>(opts.n_lambda));
  if (lambda_max <= 0.0) {
    std::fill(res.lambda_path.begin(), res.lambda_path.end(), 0.0);
  } else if (opts.n_lambda == 1) {
    res.lambda_path[0] = lambda_max;
  } else {
    const double log_max = std::log(lambda_max);
    const double log_min = std::log(lambda_max * opts.lambda_min_ratio);
    for (int i = 0; i < opts.n_lambda; ++i) {
      const double t = static_cast<double>(i) / (opts.n_lambda - 1);
      res.lambda_path[static_cast<size_t>(i)] =
          std::exp(log_max + t * (log_min - log_max));
    }
  }

  Eigen::MatrixXd W = S;  // warm-started along the path
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd scratch(p);
  Eigen::MatrixXd theta;
  Eigen::MatrixXd best_theta;
  double best_ebic = std::numeric_limits<double>::infinity();
  const double log_n = std::log(static_cast<double>(n_obs));
  const double log_p = std::log(static_cast<double>(p));

  for (size_t i = 0; i < res.lambda_path.size(); ++i) {
    glasso_at(S, res.lambda_path[i], opts, static_cast<int>(i), W, B, theta,
              scratch);
    int edges = 0;
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b < a; ++b)
        if (theta(a, b) != 0.0) ++edges;
    const double ebic = -2.0 * gaussian_loglik(S, theta, n_obs) +
                        edges * log_n + 4.0 * edges * opts.gamma * log_p;
    res.ebic_path.push_back(ebic);
    res.edge_counts.push_back(edges);
    if (ebic < best_ebic) {
      best_ebic = ebic;
      best_theta = theta;
      res.selected_index = static_cast<int>(i);
      res.selected_lambda = res.lambda_path[i];
    }
  }

  res.precision = best_theta;
  res.network.item_ids = c.item_ids;
  res.network.method = NetworkMethod::kGlasso;
  res.network.weights = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (best_theta(i, j) != 0.0) {
        double w = -best_theta(i, j) /
                   std::sqrt(best_theta(i, i) * best_theta(j, j));
        w = std::clamp(w, -1.0, 1.0);
        res.network.weights(i, j) = w;
        res.network.weights(j, i) = w;
      }
    }
  }
  return res;
}

}  // namespace itemnet
