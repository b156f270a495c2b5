#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "itemnet/errors.hpp"
#include "itemnet/pipeline.hpp"
#include "itemnet/report.hpp"
#include "itemnet/rng.hpp"

using namespace itemnet;
namespace fs = std::filesystem;

namespace {

struct Planted {
  ItemPool pool;
  EmbeddingMatrix emb;
};

Planted planted_type(const std::string& prefix, const std::string& type,
                     int per_block, int dims, std::uint64_t seed) {
  Planted out;
  Rng rng(seed);
  const double loading = std::sqrt(0.6);
  const double noise = std::sqrt(0.4);
  Eigen::VectorXd g1(dims), g2(dims);
  for (int d = 0; d < dims; ++d) {
    g1(d) = rng.gaussian();
    g2(d) = rng.gaussian();
  }
  const int total = 2 * per_block;
  out.emb.values.resize(dims, total);
  for (int c = 0; c < total; ++c) {
    const std::string id = prefix + std::to_string(c + 1);
    Item item;
    item.id = id;
    item.statement = "statement " + id;
    item.attribute = c < per_block ? "a1" : "a2";
    item.item_type = type;
    out.pool.items.push_back(item);
    out.emb.item_ids.push_back(id);
    const Eigen::VectorXd& g = c < per_block ? g1 : g2;
    for (int d = 0; d < dims; ++d)
      out.emb.values(d, c) = loading * g(d) + noise * rng.gaussian();
  }
  return out;
}

PipelineOptions fast_options(std::uint64_t seed) {
  PipelineOptions opts;
  opts.n_boot = 10;
  opts.seed = seed;
  return opts;
}

Partition attribute_truth(const ItemPool& pool) {
  std::vector<std::string> labels;
  for (const auto& item : pool.items) labels.push_back(item.attribute);
  return partition_from_labels(pool.ids(), labels);
}

// Shared fixtures, computed once per binary run.
const TypeResult& clean_type_result() {
  static const TypeResult tr = [] {
    const Planted p = planted_type("c", "clarity", 6, 96, 301);
    return run_reduction(p.pool, p.emb, attribute_truth(p.pool),
                         fast_options(9));
  }();
  return tr;
}

const GenieResult& two_type_genie() {
  static const GenieResult result = [] {
    const Planted a = planted_type("a", "alpha", 6, 72, 311);
    const Planted b = planted_type("b", "beta", 6, 72, 313);
    ItemPool pool = a.pool;
    for (const auto& item : b.pool.items) pool.items.push_back(item);
    EmbeddingMatrix emb = a.emb;
    emb.values.conservativeResize(emb.values.rows(),
                                  emb.values.cols() + b.emb.values.cols());
    emb.values.rightCols(b.emb.values.cols()) = b.emb.values;
    emb.item_ids.insert(emb.item_ids.end(), b.emb.item_ids.begin(),
                        b.emb.item_ids.end());
    PipelineOptions opts = fast_options(21);
    opts.run_overall = true;
    return run_genie(pool, emb, opts);
  }();
  return result;
}

const GenieResult& degraded_genie() {
  static const GenieResult result = [] {
    const Planted p = planted_type("d", "dimmed", 3, 64, 331);  // 6 items
    return run_genie(p.pool, p.emb, fast_options(13));
  }();
  return result;
}

std::vector<std::string> key_order(const nlohmann::ordered_json& obj) {
  std::vector<std::string> keys;
  for (auto it = obj.begin(); it != obj.end(); ++it) keys.push_back(it.key());
  return keys;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream stream(path, std::ios::binary);
  REQUIRE(stream.good());
  std::ostringstream out;
  out << stream.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("itemnet_report_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("sanitize_type_name produces safe file tags") {
    CHECK(sanitize_type_name("Openness to Experience") ==
          "openness_to_experience");
    CHECK(sanitize_type_name("calm") == "calm");
    CHECK(sanitize_type_name("self-worth_2") == "self-worth_2");
    CHECK(sanitize_type_name("a/b\\c") == "a_b_c");
    CHECK(sanitize_type_name("") == "type");
  }

  TEST_CASE("per-type results serialize the thirteen elements in order") {
    const GenieResult& result = two_type_genie();
    const nlohmann::ordered_json doc = result_to_json(result);
    CHECK(key_order(doc) ==
          std::vector<std::string>{"options", "item_type_level", "overall"});

    const auto& types = doc.at("item_type_level");
    REQUIRE(types.contains("alpha"));
    REQUIRE(types.contains("beta"));
    const std::vector<std::string> expected = {
        "final_NMI", "initial_NMI", "embeddings", "UVA", "bootEGA", "EGA",
        "final_items", "final_EGA", "initial_EGA", "start_N", "final_N",
        "network_plot", "stability_plot", "degraded"};
    CHECK(key_order(types.at("alpha")) == expected);
    CHECK(key_order(types.at("beta")) == expected);

    const auto& alpha = types.at("alpha");
    CHECK(alpha.at("start_N") == 12);
    CHECK(alpha.at("EGA").at("model_selected").is_string());
    CHECK(alpha.at("embeddings").at("selected").is_string());
    CHECK(alpha.at("network_plot").at("file") == "network_alpha.svg");
    CHECK(alpha.at("network_plot").at("data_file") == "network_alpha.csv");
    CHECK(alpha.at("stability_plot").at("threshold") == doctest::Approx(0.75));
    CHECK(alpha.at("degraded") == false);

    // The overall block mirrors the per-type shape without reduction fields.
    const auto& overall = doc.at("overall");
    CHECK(overall.at("final_NMI") == overall.at("initial_NMI"));
    CHECK(overall.at("start_N") == overall.at("final_N"));
    CHECK(overall.at("network_plot").at("file") == "network_overall.svg");
  }

  TEST_CASE("keep_org adds original pools and embeddings") {
    const Planted p = planted_type("k", "keep", 6, 64, 351);
    PipelineOptions opts = fast_options(31);
    opts.keep_org = true;
    const GenieResult result = run_genie(p.pool, p.emb, opts);
    const nlohmann::ordered_json doc = result_to_json(result);
    const auto& tr = doc.at("item_type_level").at("keep");
    const std::vector<std::string> keys = key_order(tr);
    // initial_items slots in right after final_items.
    const auto at = std::find(keys.begin(), keys.end(), "final_items");
    REQUIRE(at != keys.end());
    REQUIRE(std::next(at) != keys.end());
    CHECK(*std::next(at) == "initial_items");
    CHECK(tr.at("embeddings").contains("full_org"));
    CHECK(tr.at("embeddings").contains("sparse_org"));
    CHECK(tr.at("initial_items").size() == 12);
    // Without the flag none of those keys exist.
    const nlohmann::ordered_json plain_doc = result_to_json(two_type_genie());
    const auto& plain = plain_doc.at("item_type_level").at("alpha");
    CHECK_FALSE(plain.contains("initial_items"));
    CHECK_FALSE(plain.at("embeddings").contains("full_org"));
  }

  TEST_CASE("all_together reports one flat result") {
    const Planted a = planted_type("a", "alpha", 3, 64, 361);
    const Planted b = planted_type("b", "beta", 3, 64, 363);
    ItemPool pool = a.pool;
    for (const auto& item : b.pool.items) pool.items.push_back(item);
    EmbeddingMatrix emb = a.emb;
    emb.values.conservativeResize(emb.values.rows(),
                                  emb.values.cols() + b.emb.values.cols());
    emb.values.rightCols(b.emb.values.cols()) = b.emb.values;
    emb.item_ids.insert(emb.item_ids.end(), b.emb.item_ids.begin(),
                        b.emb.item_ids.end());
    PipelineOptions opts = fast_options(41);
    opts.all_together = true;
    const GenieResult result = run_genie(pool, emb, opts);
    REQUIRE(result.collapsed);
    const nlohmann::ordered_json doc = result_to_json(result);
    CHECK_FALSE(doc.contains("item_type_level"));
    const std::vector<std::string> keys = key_order(doc);
    REQUIRE(keys.size() >= 2);
    CHECK(keys[0] == "options");
    CHECK(keys[1] == "final_NMI");
    CHECK(doc.contains("stability_plot"));
    CHECK(doc.at("network_plot").at("file") == "network_all.svg");
    CHECK_FALSE(doc.contains("overall"));  // run_overall was off
  }

  TEST_CASE("plot annotations quote the report NMIs to two decimals") {
    const TypeResult& tr = clean_type_result();
    const nlohmann::ordered_json doc = [&] {
      GenieResult wrapper;
      wrapper.item_type_level.emplace_back("clarity", tr);
      wrapper.options = fast_options(9);
      return result_to_json(wrapper);
    }();
    const auto& plot = doc.at("item_type_level").at("clarity").at("network_plot");
    CHECK(plot.at("initial_annotation") ==
          "NMI: " + fmt2(tr.initial_nmi) + "%");
    CHECK(plot.at("final_annotation") == "NMI: " + fmt2(tr.final_nmi) + "%");

    const auto [network, stability] = render_plots(tr, 77);
    CHECK(network.svg.find("NMI: " + fmt2(tr.final_nmi) + "%") !=
          std::string::npos);
    CHECK(network.svg.find("<svg") == 0);
    CHECK(stability.svg.find("<svg") == 0);
    // Every final item id appears in the stability data.
    for (const auto& item : tr.final_items.items)
      CHECK(stability.data_csv.find(item.id) != std::string::npos);
  }

  TEST_CASE("rendering twice yields identical bytes") {
    const TypeResult& tr = clean_type_result();
    const auto [net_a, stab_a] = render_plots(tr, 123, 0.75);
    const auto [net_b, stab_b] = render_plots(tr, 123, 0.75);
    CHECK(net_a.svg == net_b.svg);
    CHECK(net_a.data_csv == net_b.data_csv);
    CHECK(stab_a.svg == stab_b.svg);
    CHECK(stab_a.data_csv == stab_b.data_csv);
    // A different layout seed moves nodes.
    const auto [net_c, stab_c] = render_plots(tr, 124, 0.75);
    CHECK(net_a.svg != net_c.svg);

    const std::string json_a = result_to_json(two_type_genie()).dump(2);
    const std::string json_b = result_to_json(two_type_genie()).dump(2);
    CHECK(json_a == json_b);
  }

  TEST_CASE("degraded runs carry the notice into plots and json") {
    const GenieResult& result = degraded_genie();
    REQUIRE(result.item_type_level.size() == 1);
    const TypeResult& tr = result.item_type_level[0].second;
    REQUIRE(tr.degraded);
    const auto [network, stability] = render_plots(tr, 5);
    CHECK(network.svg.find("degraded run:") != std::string::npos);
    CHECK(network.svg.find("below the minimum viable size") !=
          std::string::npos);
    const nlohmann::ordered_json doc = result_to_json(result);
    const auto& entry = doc.at("item_type_level").at("dimmed");
    CHECK(entry.at("degraded") == true);
    CHECK(entry.at("degraded_reason").get<std::string>().find("reduction") !=
          std::string::npos);
    // 13 elements plus the reason.
    CHECK(key_order(entry).back() == "degraded_reason");
  }

  TEST_CASE("NaN values serialize as null") {
    TypeResult tr;
    tr.nmi_embedding_sparse = std::numeric_limits<double>::quiet_NaN();
    GenieResult wrapper;
    wrapper.item_type_level.emplace_back("empty", tr);
    const nlohmann::ordered_json doc = result_to_json(wrapper);
    const auto& emb = doc.at("item_type_level").at("empty").at("embeddings");
    CHECK(std::isnan(emb.at("sparse_NMI").get<double>()));
    CHECK(emb.at("sparse").is_null());
    // NaN has no JSON literal; the dump degrades it to null.
    CHECK(doc.dump(2).find("\"sparse_NMI\": null") != std::string::npos);
  }

  TEST_CASE("write_artifacts emits the documented files deterministically") {
    const GenieResult& result = two_type_genie();
    const fs::path dir_a = fresh_dir("a");
    const fs::path dir_b = fresh_dir("b");
    const std::vector<std::string> names_a =
        write_artifacts(result, dir_a.string());
    const std::vector<std::string> names_b =
        write_artifacts(result, dir_b.string());
    CHECK(names_a == names_b);
    CHECK(names_a.back() == "result.json");

    const std::vector<std::string> expected = {
        "final_items_alpha.csv", "network_alpha.svg", "network_alpha.csv",
        "stability_alpha.svg", "stability_alpha.csv",
        "embeddings_alpha_full.csv", "embeddings_alpha_sparse.csv",
        "uva_log_alpha.csv", "final_items_beta.csv", "network_beta.svg",
        "network_beta.csv", "stability_beta.svg", "stability_beta.csv",
        "embeddings_beta_full.csv", "embeddings_beta_sparse.csv",
        "uva_log_beta.csv", "network_overall.svg", "network_overall.csv",
        "result.json"};
    CHECK(names_a == expected);

    for (const auto& name : names_a) {
      CAPTURE(name);
      CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }

    // result.json parses and matches the in-memory serialization.
    const std::string on_disk = slurp(dir_a / "result.json");
    CHECK(on_disk == result_to_json(result).dump(2) + "\n");

    // The items table uses the documented five-column header.
    const std::string items_csv = slurp(dir_a / "final_items_alpha.csv");
    CHECK(items_csv.rfind("ID,statement,attribute,type,EGA_com", 0) == 0);

    // Re-running into the same directory atomically overwrites.
    const std::vector<std::string> again =
        write_artifacts(result, dir_a.string());
    CHECK(again == names_a);
    CHECK(slurp(dir_a / "result.json") == on_disk);
    CHECK_FALSE(fs::exists(dir_a / "result.json.tmp"));

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
  }

  TEST_CASE("degraded runs leave the sparse embedding artifact empty") {
    const fs::path dir = fresh_dir("degraded");
    const std::vector<std::string> names =
        write_artifacts(degraded_genie(), dir.string());
    CHECK(std::find(names.begin(), names.end(),
                    "embeddings_dimmed_sparse.csv") != names.end());
    CHECK(slurp(dir / "embeddings_dimmed_sparse.csv").empty());
    CHECK_FALSE(slurp(dir / "embeddings_dimmed_full.csv").empty());
    fs::remove_all(dir);
  }

  TEST_CASE("write_text_atomic replaces content in place") {
    const fs::path dir = fresh_dir("atomic");
    fs::create_directories(dir);
    const fs::path file = dir / "note.txt";
    write_text_atomic(file.string(), "first\n");
    CHECK(slurp(file) == "first\n");
    write_text_atomic(file.string(), "second\n");
    CHECK(slurp(file) == "second\n");
    CHECK_FALSE(fs::exists(dir / "note.txt.tmp"));
    CHECK_THROWS_AS(
        write_text_atomic((dir / "missing" / "note.txt").string(), "x"),
        IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("stability threshold flows from options into the report") {
    const Planted p = planted_type("t", "thresh", 6, 64, 371);
    PipelineOptions opts = fast_options(51);
    opts.stability_threshold = 0.8;
    const GenieResult result = run_genie(p.pool, p.emb, opts);
    const nlohmann::ordered_json doc = result_to_json(result);
    CHECK(doc.at("item_type_level")
              .at("thresh")
              .at("stability_plot")
              .at("threshold") == doctest::Approx(0.8));
    CHECK(doc.at("options").at("stability_threshold") == doctest::Approx(0.8));
    CHECK(doc.at("options").at("n_boot") == 10);
    CHECK(doc.at("options").at("glasso").contains("gamma"));
  }
}
