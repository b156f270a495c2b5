#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "itemnet/errors.hpp"
#include "itemnet/items.hpp"

using namespace itemnet;

namespace {

ItemPool big_five_mini() {
  ItemPool pool;
  pool.items = {
      {"AI_1", "I enjoy trying new AI tools.", "openness", "ai attitude", {}},
      {"AI_2", "I plan my AI usage carefully.", "conscientiousness",
       "ai attitude", {}},
      {"AI_3", "Talking about AI energizes me.", "extraversion", "ai attitude",
       {}},
      {"W_1", "I worry about AI at work.", "anxiety", "ai worry", {}},
      {"W_2", "AI decisions make me uneasy.", "distrust", "ai worry", {}},
  };
  return pool;
}

}  // namespace

TEST_SUITE("items") {
  TEST_CASE("derive_attribute_spec keeps first-appearance order") {
    const AttributeSpec spec = derive_attribute_spec(big_five_mini());
    REQUIRE(spec.type_names() ==
            std::vector<std::string>{"ai attitude", "ai worry"});
    CHECK(spec.attributes_of("ai attitude") ==
          std::vector<std::string>{"openness", "conscientiousness",
                                   "extraversion"});
    CHECK(spec.attributes_of("ai worry") ==
          std::vector<std::string>{"anxiety", "distrust"});
  }

  TEST_CASE("attribute spec rejects duplicates") {
    CHECK_THROWS_AS(AttributeSpec({{"t", {"a", "a"}}}), InputError);
    CHECK_THROWS_AS(AttributeSpec({{"t", {"a"}}, {"t", {"b"}}}), InputError);
  }

  TEST_CASE("validate_pool reports instead of throwing") {
    ItemPool pool = big_five_mini();
    pool.items.push_back(
        {"AI_1", "duplicate id", "openness", "ai attitude", {}});
    pool.items.push_back({"X_1", "", "openness", "ai attitude", {}});
    pool.items.push_back({"X_2", "statement", "bogus", "ai attitude", {}});
    pool.items.push_back({"X_3", "statement", "openness", "bogus type", {}});
    const AttributeSpec spec = derive_attribute_spec(big_five_mini());
    const ValidationReport report = validate_pool(pool, spec);
    REQUIRE(report.has_errors());
    int dup = 0, empty = 0, attr = 0, type = 0;
    for (const auto& v : report.violations()) {
      if (v.code == "duplicate-id") ++dup;
      if (v.code == "empty-statement") ++empty;
      if (v.code == "unknown-attribute") ++attr;
      if (v.code == "unknown-type") ++type;
    }
    CHECK(dup == 1);
    CHECK(empty == 1);
    CHECK(attr == 1);
    CHECK(type == 1);
  }

  TEST_CASE("single-attribute type is flagged") {
    ItemPool pool;
    pool.items = {{"A", "s1", "only", "t", {}}, {"B", "s2", "only", "t", {}}};
    const ValidationReport report =
        validate_pool(pool, derive_attribute_spec(pool));
    CHECK(report.has_errors());
  }

  TEST_CASE("valid pool has no errors") {
    const ItemPool pool = big_five_mini();
    const ValidationReport report =
        validate_pool(pool, derive_attribute_spec(pool));
    CHECK_FALSE(report.has_errors());
  }

  TEST_CASE("pool csv round-trips") {
    const ItemPool pool = big_five_mini();
    const ItemPool back = pool_from_csv(pool_to_csv(pool), Provenance::kUserSupplied);
    REQUIRE(back.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
      CHECK(back.items[i] == pool.items[i]);
  }

  TEST_CASE("pool csv escapes embedded separators") {
    ItemPool pool;
    pool.items = {{"A1", "I say \"yes, and\" a lot.", "openness", "t", {}},
                  {"A2", "line\nbreak", "focus", "t", {}}};
    const ItemPool back = pool_from_csv(pool_to_csv(pool), Provenance::kUserSupplied);
    REQUIRE(back.size() == 2);
    CHECK(back.items[0].statement == "I say \"yes, and\" a lot.");
    CHECK(back.items[1].statement == "line\nbreak");
  }

  TEST_CASE("pool json round-trips") {
    const ItemPool pool = big_five_mini();
    const ItemPool back = pool_from_json(pool_to_json(pool), Provenance::kUserSupplied);
    REQUIRE(back.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
      CHECK(back.items[i] == pool.items[i]);
  }

  TEST_CASE("load_pool sniffs json versus csv") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "itemnet_items_test";
    fs::create_directories(dir);
    const ItemPool pool = big_five_mini();
    {
      std::ofstream((dir / "pool.csv").string()) << pool_to_csv(pool);
      std::ofstream((dir / "pool.json").string()) << pool_to_json(pool).dump(2);
    }
    CHECK(load_pool((dir / "pool.csv").string()).size() == pool.size());
    CHECK(load_pool((dir / "pool.json").string()).size() == pool.size());
    CHECK_THROWS_AS(load_pool((dir / "missing.csv").string()), IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("csv pool with bad header raises SchemaError") {
    CHECK_THROWS_AS(pool_from_csv("id,text\n1,hello\n", Provenance::kUserSupplied), SchemaError);
  }

  TEST_CASE("embedding csv round-trips exactly") {
    EmbeddingMatrix emb;
    emb.item_ids = {"a", "b", "c"};
    emb.values.resize(2, 3);
    emb.values << 0.1, -1.0 / 3.0, 1e-17, 2.0, 0.0, -0.7071067811865476;
    const EmbeddingMatrix back = embeddings_from_csv(embeddings_to_csv(emb));
    REQUIRE(back.item_ids == emb.item_ids);
    REQUIRE(back.dims() == 2);
    CHECK((back.values - emb.values).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("embedding subset keeps requested order and flags missing ids") {
    EmbeddingMatrix emb;
    emb.item_ids = {"a", "b", "c"};
    emb.values.resize(2, 3);
    emb.values << 1, 2, 3, 4, 5, 6;
    const EmbeddingMatrix sub = emb.subset({"c", "a"});
    REQUIRE(sub.item_ids == std::vector<std::string>{"c", "a"});
    CHECK(sub.values(0, 0) == 3);
    CHECK(sub.values(1, 1) == 4);
    CHECK_THROWS_WITH_AS(emb.subset({"z"}), doctest::Contains("z"), InputError);
  }

  TEST_CASE("partition helpers") {
    Partition part;
    part.ids = {"a", "b", "c", "d"};
    part.labels = {7, 2, 7, 9};
    CHECK(part.n_communities() == 3);
    CHECK(part.label_of("c") == 7);
    CHECK(part.label_of("zz") == -1);
    const Partition canon = part.canonicalized();
    CHECK(canon.labels == std::vector<int>{1, 2, 1, 3});
  }

  TEST_CASE("format_double survives a round-trip") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.123456789})
      CHECK(std::stod(format_double(v)) == v);
  }
}
