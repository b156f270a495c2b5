#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "itemnet/errors.hpp"
#include "itemnet/rng.hpp"
#include "itemnet/uva.hpp"
#include "oracles.hpp"

using namespace itemnet;

namespace {

Network random_network(int p, unsigned seed) {
  Network net;
  net.weights = Eigen::MatrixXd::Zero(p, p);
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution keep(0.6);
  for (int i = 0; i < p; ++i) {
    net.item_ids.push_back("n" + std::to_string(i + 1));
    for (int j = 0; j < i; ++j) {
      if (!keep(gen)) continue;
      const double w = unif(gen);
      net.weights(i, j) = w;
      net.weights(j, i) = w;
    }
  }
  return net;
}

// Pool with two planted near-duplicate clusters inside a larger block
// structure: base items load on one of two latent factors; duplicates copy a
// source column with a whisper of noise.
struct PlantedPool {
  ItemPool pool;
  EmbeddingMatrix emb;
  std::vector<std::string> duplicate_ids;
};

PlantedPool planted_redundancy(unsigned seed) {
  PlantedPool out;
  Rng rng(seed);
  const int dims = 96;
  Eigen::VectorXd g1(dims), g2(dims);
  for (int d = 0; d < dims; ++d) {
    g1(d) = rng.gaussian();
    g2(d) = rng.gaussian();
  }
  const int base = 12;
  out.emb.values.resize(dims, base + 3);
  for (int c = 0; c < base; ++c) {
    const std::string id = "it" + std::to_string(c + 1);
    out.pool.items.push_back({id, "statement " + id,
                              c % 2 ? "attr-a" : "attr-b", "scale", {}});
    out.emb.item_ids.push_back(id);
    const Eigen::VectorXd& g = c < base / 2 ? g1 : g2;
    for (int d = 0; d < dims; ++d)
      out.emb.values(d, c) = 0.8 * g(d) + 0.6 * rng.gaussian();
  }
  // Duplicates of it1 (two copies -> one three-way cluster) and of it7.
  const int sources[3] = {0, 0, 6};
  for (int k = 0; k < 3; ++k) {
    const std::string id = "dup" + std::to_string(k + 1);
    out.pool.items.push_back({id, "statement " + id,
                              sources[k] % 2 ? "attr-a" : "attr-b", "scale",
                              {}});
    out.emb.item_ids.push_back(id);
    for (int d = 0; d < dims; ++d)
      out.emb.values(d, base + k) =
          out.emb.values(d, sources[k]) + 0.02 * rng.gaussian();
    out.duplicate_ids.push_back(id);
  }
  return out;
}

}  // namespace

TEST_SUITE("uva") {
  TEST_CASE("wto matches the direct formula") {
    for (unsigned seed = 1; seed <= 10; ++seed) {
      CAPTURE(seed);
      const Network net = random_network(8, seed);
      const Eigen::MatrixXd got = wto_matrix(net);
      const Eigen::MatrixXd want = oracle::wto_direct(net.weights);
      CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
      for (int i = 0; i < 8; ++i) CHECK(got(i, i) == 0.0);
      CHECK((got - got.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("uva removes planted duplicates and keeps one per cluster") {
    const PlantedPool planted = planted_redundancy(5);
    const auto [reduced, report] = uva_reduce(planted.pool, planted.emb);

    // The three-way cluster {it1, dup1, dup2} keeps exactly one member and
    // the pair {it7, dup3} keeps one member.
    int survivors_c1 = 0, survivors_c2 = 0;
    for (const auto& item : reduced.items) {
      if (item.id == "it1" || item.id == "dup1" || item.id == "dup2")
        ++survivors_c1;
      if (item.id == "it7" || item.id == "dup3") ++survivors_c2;
    }
    CHECK(survivors_c1 == 1);
    CHECK(survivors_c2 == 1);
    CHECK(report.n_removed == static_cast<int>(planted.pool.size()) -
                                  static_cast<int>(reduced.size()));
    CHECK(report.n_removed >= 3);

    // Survivors keep their statements byte-identical.
    for (const auto& item : reduced.items) {
      const Item* original = planted.pool.find(item.id);
      REQUIRE(original != nullptr);
      CHECK(item.statement == original->statement);
    }

    // The last sweep is the recorded no-op sweep.
    CHECK(report.n_sweeps >= 2);
    CHECK(static_cast<int>(report.sweeps.size()) == report.n_sweeps);
    CHECK_FALSE(report.truncated);
  }

  TEST_CASE("keeper is the member with minimal mean wto to the pool") {
    const PlantedPool planted = planted_redundancy(5);
    const auto [reduced, report] = uva_reduce(planted.pool, planted.emb);
    REQUIRE_FALSE(report.redundant_pairs.empty());
    for (const auto& cluster : report.redundant_pairs) {
      // Recompute from the persisted sweep matrix.
      const UvaSweep& sweep = report.sweeps[cluster.sweep - 1];
      auto index_of = [&](const std::string& id) {
        for (std::size_t i = 0; i < sweep.item_ids.size(); ++i)
          if (sweep.item_ids[i] == id) return static_cast<int>(i);
        return -1;
      };
      const int kept = index_of(cluster.kept_id);
      REQUIRE(kept >= 0);
      const double p = static_cast<double>(sweep.item_ids.size());
      const double kept_mean = sweep.wto.row(kept).sum() / (p - 1.0);
      for (const auto& id : cluster.member_ids) {
        const int member = index_of(id);
        REQUIRE(member >= 0);
        const double member_mean = sweep.wto.row(member).sum() / (p - 1.0);
        CHECK(kept_mean <= member_mean + 1e-12);
      }
    }
  }

  TEST_CASE("clean pools pass through with a single no-op sweep") {
    PlantedPool planted = planted_redundancy(9);
    // Strip the duplicates; remaining items are far below the cutoff.
    ItemPool pool;
    EmbeddingMatrix emb;
    std::vector<std::string> keep;
    for (const auto& item : planted.pool.items)
      if (item.id.rfind("dup", 0) != 0) keep.push_back(item.id);
    pool = planted.pool.subset_by_ids(keep);
    emb = planted.emb.subset(keep);
    const auto [reduced, report] = uva_reduce(pool, emb);
    CHECK(reduced.size() == pool.size());
    CHECK(report.n_removed == 0);
    CHECK(report.n_sweeps == 1);
    CHECK(report.redundant_pairs.empty());
  }

  TEST_CASE("a sweep that would cross the four-item floor is not applied") {
    // Four items, all near-duplicates: applying the sweep would leave one.
    ItemPool pool;
    EmbeddingMatrix emb;
    Rng rng(3);
    const int dims = 48;
    Eigen::VectorXd g(dims);
    for (int d = 0; d < dims; ++d) g(d) = rng.gaussian();
    emb.values.resize(dims, 4);
    for (int c = 0; c < 4; ++c) {
      const std::string id = "t" + std::to_string(c + 1);
      pool.items.push_back({id, "s" + id, c % 2 ? "a" : "b", "scale", {}});
      emb.item_ids.push_back(id);
      for (int d = 0; d < dims; ++d)
        emb.values(d, c) = g(d) + 0.01 * rng.gaussian();
    }
    const auto [reduced, report] = uva_reduce(pool, emb);
    CHECK(reduced.size() == 4);
    CHECK(report.truncated);
    CHECK(report.n_removed == 0);
  }

  TEST_CASE("audit log csv lists kept and removed ids") {
    const PlantedPool planted = planted_redundancy(5);
    const auto [reduced, report] = uva_reduce(planted.pool, planted.emb);
    const std::string csv = uva_log_to_csv(report);
    CHECK(csv.find("sweep") != std::string::npos);
    for (const auto& cluster : report.redundant_pairs) {
      CHECK(csv.find(cluster.kept_id) != std::string::npos);
      for (const auto& removed : cluster.removed_ids)
        CHECK(csv.find(removed) != std::string::npos);
    }
  }
}
