#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "itemnet/errors.hpp"
#include "itemnet/pipeline.hpp"
#include "itemnet/rng.hpp"

using namespace itemnet;

namespace {

struct Planted {
  ItemPool pool;
  EmbeddingMatrix emb;
};

// One item type with two attribute blocks (within-block r ~= loading^2) plus
// optional near-duplicates of the first item of each block.
Planted planted_type(const std::string& prefix, const std::string& type,
                     int per_block, int dims, double loading, int n_dups,
                     std::uint64_t seed) {
  Planted out;
  Rng rng(seed);
  Eigen::VectorXd g1(dims), g2(dims);
  for (int d = 0; d < dims; ++d) {
    g1(d) = rng.gaussian();
    g2(d) = rng.gaussian();
  }
  const int base_n = 2 * per_block;
  const int total = base_n + n_dups;
  out.emb.values.resize(dims, total);
  const double noise = std::sqrt(1.0 - loading * loading);
  for (int c = 0; c < base_n; ++c) {
    const std::string id = prefix + std::to_string(c + 1);
    const bool first_block = c < per_block;
    Item item;
    item.id = id;
    item.statement = "statement " + id;
    item.attribute = first_block ? "a1" : "a2";
    item.item_type = type;
    out.pool.items.push_back(item);
    out.emb.item_ids.push_back(id);
    const Eigen::VectorXd& g = first_block ? g1 : g2;
    for (int d = 0; d < dims; ++d)
      out.emb.values(d, c) = loading * g(d) + noise * rng.gaussian();
  }
  for (int k = 0; k < n_dups; ++k) {
    const int source = k % 2 == 0 ? 0 : per_block;  // alternate blocks
    const std::string id = prefix + "dup" + std::to_string(k + 1);
    Item item = out.pool.items[static_cast<size_t>(source)];
    item.id = id;
    item.statement = "duplicate " + id;
    out.pool.items.push_back(item);
    out.emb.item_ids.push_back(id);
    for (int d = 0; d < dims; ++d)
      out.emb.values(d, base_n + k) =
          out.emb.values(d, source) + 0.02 * rng.gaussian();
  }
  return out;
}

EmbeddingMatrix hstack(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  EmbeddingMatrix out = a;
  out.values.conservativeResize(a.values.rows(),
                                a.values.cols() + b.values.cols());
  out.values.rightCols(b.values.cols()) = b.values;
  out.item_ids.insert(out.item_ids.end(), b.item_ids.begin(),
                      b.item_ids.end());
  return out;
}

Partition attribute_truth(const ItemPool& pool) {
  std::vector<std::string> labels;
  for (const auto& item : pool.items) labels.push_back(item.attribute);
  return partition_from_labels(pool.ids(), labels);
}

void check_accounting(const TypeResult& tr) {
  CHECK(tr.uva.n_removed + tr.bootega.n_removed + tr.final_n == tr.start_n);
}

PipelineOptions fast_options(std::uint64_t seed) {
  PipelineOptions opts;
  opts.n_boot = 12;
  opts.seed = seed;
  return opts;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("option combinations are validated") {
    PipelineOptions opts;
    opts.items_only = true;
    opts.embeddings_only = true;
    CHECK_THROWS_AS(opts.check(), InputError);
    PipelineOptions cutoff;
    cutoff.uva_cutoff = 0.0;
    CHECK_THROWS_AS(cutoff.check(), InputError);
    PipelineOptions threshold;
    threshold.stability_threshold = 1.5;
    CHECK_THROWS_AS(threshold.check(), InputError);
    PipelineOptions boots;
    boots.n_boot = 0;
    CHECK_THROWS_AS(boots.check(), InputError);
    CHECK_NOTHROW(PipelineOptions{}.check());

    CHECK(model_choice_from_string("auto") == ModelChoice::kAuto);
    CHECK(model_choice_from_string("glasso") == ModelChoice::kGlasso);
    CHECK(model_choice_from_string("tmfg") == ModelChoice::kTmfg);
    CHECK(to_string(ModelChoice::kTmfg) == "tmfg");
    CHECK_THROWS_AS(model_choice_from_string("lasso"), ConfigError);
  }

  TEST_CASE("partition_from_labels numbers labels by first appearance") {
    const Partition part = partition_from_labels({"a", "b", "c", "d"},
                                                 {"x", "y", "x", "z"});
    CHECK(part.labels == std::vector<int>{1, 2, 1, 3});
    CHECK_THROWS_AS(partition_from_labels({"a"}, {"x", "y"}), InputError);
  }

  TEST_CASE("orthogonal blocks survive reduction with perfect recovery") {
    // Ten items per block: small pools bootstrap poorly (four-item floor),
    // while mid-size blocks push within-block wTO toward the 0.25 cutoff.
    // Larger blocks shrink the partial correlations well below it.
    const Planted planted =
        planted_type("c", "clarity", 10, 128, std::sqrt(0.6), 0, 91);
    PipelineOptions opts = fast_options(5);
    opts.n_boot = 20;
    const TypeResult tr = run_reduction(planted.pool, planted.emb,
                                        attribute_truth(planted.pool), opts);
    CHECK_FALSE(tr.degraded);
    CHECK(tr.start_n == 20);
    CHECK(tr.final_n == 20);
    CHECK(tr.initial_nmi == 100.0);
    CHECK(tr.final_nmi == 100.0);
    CHECK(tr.uva.n_removed == 0);
    CHECK(tr.bootega.n_removed == 0);
    check_accounting(tr);
    CHECK(tr.final_ega.partition.n_communities() == 2);
    for (const auto& item : tr.final_items.items) {
      REQUIRE(item.ega_community.has_value());
      CHECK((*item.ega_community == 1 || *item.ega_community == 2));
    }
  }

  TEST_CASE("planted duplicates are removed and the accounting identity holds") {
    const Planted planted =
        planted_type("p", "poise", 6, 96, std::sqrt(0.6), 2, 17);
    const PipelineOptions opts = fast_options(29);
    const TypeResult tr = run_reduction(planted.pool, planted.emb,
                                        attribute_truth(planted.pool), opts);
    CHECK(tr.start_n == 14);
    CHECK(tr.uva.n_removed >= 2);  // both near-duplicates must fall
    check_accounting(tr);
    CHECK(tr.final_n >= 4);
    CHECK(tr.final_nmi >= tr.initial_nmi - 1e-9);
    CHECK(tr.emb_full.item_ids == planted.pool.ids());
    // The removed ids are gone from the final pool.
    for (const auto& cluster : tr.uva.redundant_pairs)
      for (const auto& id : cluster.removed_ids)
        CHECK(tr.final_items.find(id) == nullptr);
    // Pre-reduction bootstrap is attached for the report layer.
    REQUIRE(tr.bootega.initial_boot_with_redundancies.has_value());
    CHECK(tr.bootega.initial_boot_with_redundancies->n_replicates ==
          opts.n_boot);
  }

  TEST_CASE("pools under eight items come back degraded") {
    Planted planted = planted_type("s", "small", 3, 64, std::sqrt(0.6), 0, 3);
    const PipelineOptions opts = fast_options(7);
    const TypeResult tr = run_reduction(planted.pool, planted.emb,
                                        attribute_truth(planted.pool), opts);
    CHECK(tr.degraded);
    CHECK(tr.degraded_reason.find("below the minimum viable size") !=
          std::string::npos);
    CHECK(tr.start_n == 6);
    CHECK(tr.final_n == 6);
    CHECK(tr.final_items.size() == 6);
    CHECK(tr.uva.n_removed == 0);
    CHECK(tr.bootega.n_removed == 0);
    // An EGA still runs when at least four items exist.
    CHECK(tr.final_ega.partition.ids.size() == 6);
    CHECK(tr.initial_nmi == tr.final_nmi);
    for (const auto& item : tr.final_items.items)
      CHECK(item.ega_community.has_value());
  }

  TEST_CASE("pools under four items skip even the degraded EGA") {
    Planted planted = planted_type("t", "tiny", 3, 64, std::sqrt(0.6), 0, 4);
    planted.pool.items.resize(3);
    const std::vector<std::string> keep = planted.pool.ids();
    const TypeResult tr =
        run_reduction(planted.pool, planted.emb.subset(keep),
                      attribute_truth(planted.pool), fast_options(7));
    CHECK(tr.degraded);
    CHECK(tr.final_n == 3);
    CHECK(tr.final_ega.partition.ids.empty());
    for (const auto& item : tr.final_items.items)
      CHECK_FALSE(item.ega_community.has_value());
  }

  TEST_CASE("truth labels must cover every pool item") {
    const Planted planted =
        planted_type("m", "missing", 4, 48, std::sqrt(0.6), 0, 23);
    Partition truth = attribute_truth(planted.pool);
    truth.ids.pop_back();
    truth.labels.pop_back();
    CHECK_THROWS_WITH_AS(run_reduction(planted.pool, planted.emb, truth,
                                       fast_options(1)),
                         doctest::Contains("missing item"), InputError);
  }

  TEST_CASE("a type's reduction is unaffected by other types in the run") {
    const Planted alpha =
        planted_type("a", "alpha", 5, 80, std::sqrt(0.6), 1, 41);
    const Planted beta =
        planted_type("b", "beta", 5, 80, std::sqrt(0.6), 1, 43);
    const PipelineOptions opts = fast_options(99);

    const GenieResult solo = run_genie(alpha.pool, alpha.emb, opts);
    ItemPool combined_pool = alpha.pool;
    for (const auto& item : beta.pool.items) combined_pool.items.push_back(item);
    const GenieResult joint =
        run_genie(combined_pool, hstack(alpha.emb, beta.emb), opts);

    REQUIRE(solo.item_type_level.size() == 1);
    REQUIRE(joint.item_type_level.size() == 2);
    CHECK_FALSE(joint.collapsed);
    const TypeResult& solo_alpha = solo.item_type_level[0].second;
    const TypeResult* joint_alpha = nullptr;
    for (const auto& [type, tr] : joint.item_type_level)
      if (type == "alpha") joint_alpha = &tr;
    REQUIRE(joint_alpha != nullptr);

    CHECK(solo_alpha.final_items.ids() == joint_alpha->final_items.ids());
    CHECK(solo_alpha.final_nmi == joint_alpha->final_nmi);
    CHECK(solo_alpha.initial_nmi == joint_alpha->initial_nmi);
    CHECK(solo_alpha.uva.n_removed == joint_alpha->uva.n_removed);
    CHECK(solo_alpha.bootega.final_boot.item_stability ==
          joint_alpha->bootega.final_boot.item_stability);
    CHECK(solo_alpha.bootega.final_boot.replicate_seed_base ==
          joint_alpha->bootega.final_boot.replicate_seed_base);
    check_accounting(*joint_alpha);

    // Types get distinct derived seeds.
    const TypeResult* joint_beta = nullptr;
    for (const auto& [type, tr] : joint.item_type_level)
      if (type == "beta") joint_beta = &tr;
    REQUIRE(joint_beta != nullptr);
    CHECK(joint_alpha->bootega.final_boot.replicate_seed_base !=
          joint_beta->bootega.final_boot.replicate_seed_base);
  }

  TEST_CASE("run_genie is deterministic for a fixed seed") {
    const Planted alpha =
        planted_type("a", "alpha", 5, 64, std::sqrt(0.6), 1, 47);
    const PipelineOptions opts = fast_options(1234);
    const GenieResult first = run_genie(alpha.pool, alpha.emb, opts);
    const GenieResult second = run_genie(alpha.pool, alpha.emb, opts);
    REQUIRE(first.item_type_level.size() == second.item_type_level.size());
    const TypeResult& a = first.item_type_level[0].second;
    const TypeResult& b = second.item_type_level[0].second;
    CHECK(a.final_items.ids() == b.final_items.ids());
    CHECK(a.final_nmi == b.final_nmi);
    CHECK(a.nmi_embedding_full == b.nmi_embedding_full);
    CHECK(a.bootega.final_boot.item_stability ==
          b.bootega.final_boot.item_stability);
    CHECK(a.uva.n_sweeps == b.uva.n_sweeps);
  }

  TEST_CASE("all_together collapses multiple types into one analysis") {
    const Planted alpha =
        planted_type("a", "alpha", 3, 72, std::sqrt(0.6), 0, 51);
    const Planted beta = planted_type("b", "beta", 3, 72, std::sqrt(0.6), 0, 53);
    ItemPool combined_pool = alpha.pool;
    for (const auto& item : beta.pool.items) combined_pool.items.push_back(item);
    PipelineOptions opts = fast_options(77);
    opts.all_together = true;
    const GenieResult result =
        run_genie(combined_pool, hstack(alpha.emb, beta.emb), opts);
    CHECK(result.collapsed);
    REQUIRE(result.item_type_level.size() == 1);
    CHECK(result.item_type_level[0].first == "all");
    const TypeResult& tr = result.item_type_level[0].second;
    CHECK(tr.start_n == 12);
    check_accounting(tr);
    // Attributes carry their original type as a prefix.
    bool saw_alpha = false, saw_beta = false;
    for (const auto& item : tr.initial_items.items) {
      if (item.attribute.rfind("alpha ", 0) == 0) saw_alpha = true;
      if (item.attribute.rfind("beta ", 0) == 0) saw_beta = true;
      CHECK(item.item_type == "all");
    }
    CHECK(saw_alpha);
    CHECK(saw_beta);
  }

  TEST_CASE("all_together is ignored for a single type") {
    const Planted alpha =
        planted_type("a", "alpha", 4, 64, std::sqrt(0.6), 0, 57);
    PipelineOptions opts = fast_options(3);
    opts.all_together = true;
    const GenieResult result = run_genie(alpha.pool, alpha.emb, opts);
    CHECK_FALSE(result.collapsed);
    REQUIRE(result.item_type_level.size() == 1);
    CHECK(result.item_type_level[0].first == "alpha");
  }

  TEST_CASE("run_overall scores the combined pool against type labels") {
    const Planted alpha =
        planted_type("a", "alpha", 3, 72, std::sqrt(0.6), 0, 61);
    const Planted beta = planted_type("b", "beta", 3, 72, std::sqrt(0.6), 0, 63);
    ItemPool combined_pool = alpha.pool;
    for (const auto& item : beta.pool.items) combined_pool.items.push_back(item);
    PipelineOptions opts = fast_options(11);
    opts.run_overall = true;
    const GenieResult result =
        run_genie(combined_pool, hstack(alpha.emb, beta.emb), opts);
    const OverallResult& overall = result.overall;
    CHECK(overall.analyzed);
    CHECK(overall.final_items.size() >= 8);
    CHECK(overall.embeddings.item_ids == overall.final_items.ids());
    CHECK(overall.ega.partition.ids.size() == overall.final_items.size());
    CHECK(overall.nmi_vs_types >= 0.0);
    CHECK(overall.nmi_vs_types <= 100.0);

    // Without the flag the combined pool is still aggregated but unanalyzed.
    PipelineOptions plain = fast_options(11);
    const GenieResult bare =
        run_genie(combined_pool, hstack(alpha.emb, beta.emb), plain);
    CHECK_FALSE(bare.overall.analyzed);
    CHECK(bare.overall.final_items.size() >= 8);
  }

  TEST_CASE("run_genie rejects invalid pools") {
    Planted alpha = planted_type("a", "alpha", 4, 48, std::sqrt(0.6), 0, 67);
    alpha.pool.items[1].id = alpha.pool.items[0].id;  // duplicate id
    CHECK_THROWS_WITH_AS(run_genie(alpha.pool, alpha.emb, fast_options(1)),
                         doctest::Contains("invalid item pool"), InputError);
  }

  TEST_CASE("an embedder must key its columns by item id") {
    const Planted alpha =
        planted_type("a", "alpha", 4, 48, std::sqrt(0.6), 0, 71);
    const Embedder bad = [&](const ItemPool& items) {
      EmbeddingMatrix emb = alpha.emb.subset(items.ids());
      emb.item_ids[0] = "not-an-item";
      return emb;
    };
    CHECK_THROWS_AS(run_genie(alpha.pool, bad, fast_options(1)), InputError);

    const Embedder good = [&](const ItemPool& items) {
      return alpha.emb.subset(items.ids());
    };
    const GenieResult viaEmbedder = run_genie(alpha.pool, good, fast_options(1));
    const GenieResult direct = run_genie(alpha.pool, alpha.emb, fast_options(1));
    CHECK(viaEmbedder.item_type_level[0].second.final_items.ids() ==
          direct.item_type_level[0].second.final_items.ids());
  }

  TEST_CASE("run_aigenie honours items_only and embeddings_only") {
    GenerationSpec spec;
    spec.attribute_spec = AttributeSpec{{
        {"alpha", {"a1", "a2"}},
        {"beta", {"b1", "b2"}},
    }};
    spec.target_n = 8;
    int serial = 0;
    const ChatFn chat = [&](const std::string&) -> std::string {
      std::string out;
      for (const char* attr : {"a1", "a2", "b1", "b2"}) {
        ++serial;
        out += std::string(attr) + " | generated statement " +
               std::to_string(serial) + "\n";
      }
      return out;
    };
    const Embedder embed = [](const ItemPool& items) {
      EmbeddingMatrix emb;
      emb.item_ids = items.ids();
      emb.values.resize(24, static_cast<Eigen::Index>(items.size()));
      for (Eigen::Index c = 0; c < emb.values.cols(); ++c) {
        Rng rng(fnv1a(items.items[static_cast<size_t>(c)].statement));
        for (Eigen::Index d = 0; d < 24; ++d) emb.values(d, c) = rng.gaussian();
      }
      return emb;
    };

    PipelineOptions items_only = fast_options(2);
    items_only.items_only = true;
    const AigenieResult stage1 = run_aigenie(spec, items_only, chat, embed);
    CHECK(stage1.pool.size() == 16);
    CHECK(stage1.pool.provenance == Provenance::kGenerated);
    CHECK_FALSE(stage1.embeddings.has_value());
    CHECK_FALSE(stage1.genie.has_value());

    serial = 0;
    PipelineOptions emb_only = fast_options(2);
    emb_only.embeddings_only = true;
    const AigenieResult stage2 = run_aigenie(spec, emb_only, chat, embed);
    REQUIRE(stage2.embeddings.has_value());
    CHECK(stage2.embeddings->item_ids == stage2.pool.ids());
    CHECK(stage2.embeddings->values.cols() == 16);
    CHECK_FALSE(stage2.genie.has_value());

    serial = 0;
    const AigenieResult full = run_aigenie(spec, fast_options(2), chat, embed);
    REQUIRE(full.genie.has_value());
    CHECK(full.genie->item_type_level.size() == 2);
    for (const auto& [type, tr] : full.genie->item_type_level)
      check_accounting(tr);
  }
}
