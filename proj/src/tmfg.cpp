#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "itemnet/errors.hpp"
#include "itemnet/network.hpp"

namespace itemnet {

namespace {

std::array<int, 3> sorted_face(int a, int b, int c) {
  std::array<int, 3> f{a, b, c};
  std::sort(f.begin(), f.end());
  return f;
}

}  // namespace

TmfgResult tmfg(const CorrelationMatrix& c) {
  c.check();
  const int p = static_cast<int>(c.size());
  if (p < 4)
    throw InputError("tmfg needs at least four items; use glasso for smaller pools");
  const Eigen::MatrixXd A = c.values.cwiseAbs();

  // Seed tetrahedron: the four vertices with the largest total absolute
  // correlation to everything else; ties go to the lower index.
  std::vector<int> order(static_cast<size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(static_cast<size_t>(p), 0.0);
  for (int v = 0; v < p; ++v)
    score[static_cast<size_t>(v)] = A.col(v).sum() - A(v, v);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = score[static_cast<size_t>(a)];
    const double sb = score[static_cast<size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  });

  TmfgResult res;
  res.network.item_ids = c.item_ids;
  res.network.method = NetworkMethod::kTmfg;
  res.network.weights = Eigen::MatrixXd::Zero(p, p);
  auto add_edge = [&](int a, int b) {
    res.network.weights(a, b) = c.values(a, b);
    res.network.weights(b, a) = c.values(b, a);
  };

  std::vector<int> seed(order.begin(), order.begin() + 4);
  std::sort(seed.begin(), seed.end());
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < i; ++j) add_edge(seed[i], seed[j]);
  res.faces = {sorted_face(seed[0], seed[1], seed[2]),
               sorted_face(seed[0], seed[1], seed[3]),
               sorted_face(seed[0], seed[2], seed[3]),
               sorted_face(seed[1], seed[2], seed[3])};

  std::vector<int> remaining;
  std::vector<char> in_graph(static_cast<size_t>(p), 0);
  for (int v : seed) in_graph[static_cast<size_t>(v)] = 1;
  for (int v = 0; v < p; ++v)
    if (!in_graph[static_cast<size_t>(v)]) remaining.push_back(v);

  while (!remaining.empty()) {
    int best_v = -1;
    size_t best_face = 0;
    double best_gain = -1.0;
    for (int v : remaining) {
      for (size_t f = 0; f < res.faces.size(); ++f) {
        const auto& face = res.faces[f];
        const double gain = A(v, face[0]) + A(v, face[1]) + A(v, face[2]);
        if (gain > best_gain) {
          best_gain = gain;
          best_v = v;
          best_face = f;
        }
      }
    }
    const std::array<int, 3> face = res.faces[best_face];
    for (int u : face) add_edge(best_v, u);
    res.faces.erase(res.faces.begin() + static_cast<ptrdiff_t>(best_face));
    res.faces.push_back(sorted_face(face[0], face[1], best_v));
    res.faces.push_back(sorted_face(face[0], face[2], best_v));
    res.faces.push_back(sorted_face(face[1], face[2], best_v));
    remaining.erase(std::find(remaining.begin(), remaining.end(), best_v));
  }

  // Euler sanity on the maintained triangulation: V - E + F must be 2.
  const int edges = res.network.edge_count();
  const int faces = static_cast<int>(res.faces.size());
  if (edges != 3 * p - 6 || p - edges + faces != 2)
    throw EstimationError("tmfg produced a non-planar triangulation");
  return res;
}

}  // namespace itemnet
