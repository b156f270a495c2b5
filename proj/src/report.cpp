#include "itemnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "itemnet/csv.hpp"
#include "itemnet/errors.hpp"
#include "itemnet/rng.hpp"

namespace itemnet {

namespace {

// Tableau-style categorical palette; community labels cycle through it.
const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                          "#b07aa1", "#edc948", "#76b7b2", "#ff9da7",
                          "#9c755f", "#bab0ac"};
constexpr int kPaletteSize = 10;

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string nmi_annotation(double v) { return "NMI: " + fmt2(v) + "%"; }

std::string node_color(int label) {
  if (label < 1) return "#999999";
  return kPalette[(label - 1) % kPaletteSize];
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Fruchterman-Reingold force-directed layout on absolute edge weights,
// normalized into the unit square. Fixed iteration count and a seeded start
// keep the output byte-reproducible.
std::vector<Point> force_layout(const Eigen::MatrixXd& weights, Rng& rng) {
  const int n = static_cast<int>(weights.rows());
  std::vector<Point> pos(static_cast<std::size_t>(n));
  if (n == 0) return pos;
  for (auto& p : pos) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  if (n == 1) {
    pos[0] = {0.5, 0.5};
    return pos;
  }
  double wmax = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      wmax = std::max(wmax, std::abs(weights(i, j)));
  const double k = std::sqrt(1.0 / n);
  const int iterations = 250;
  std::vector<Point> disp(static_cast<std::size_t>(n));
  for (int it = 0; it < iterations; ++it) {
    const double temp = 0.1 * (1.0 - static_cast<double>(it) / iterations);
    for (auto& d : disp) d = {0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double dx = pos[i].x - pos[j].x;
        double dy = pos[i].y - pos[j].y;
        double dist = std::sqrt(dx * dx + dy * dy);
        if (dist < 1e-9) {
          // Deterministic nudge for coincident points.
          dx = 1e-4 * (i - j);
          dy = 1e-4;
          dist = std::sqrt(dx * dx + dy * dy);
        }
        const double repulse = k * k / dist;
        disp[i].x += dx / dist * repulse;
        disp[i].y += dy / dist * repulse;
        disp[j].x -= dx / dist * repulse;
        disp[j].y -= dy / dist * repulse;
        const double w = std::abs(weights(i, j));
        if (w > 0.0 && wmax > 0.0) {
          const double attract = dist * dist / k * (w / wmax);
          disp[i].x -= dx / dist * attract;
          disp[i].y -= dy / dist * attract;
          disp[j].x += dx / dist * attract;
          disp[j].y += dy / dist * attract;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      const double len =
          std::sqrt(disp[i].x * disp[i].x + disp[i].y * disp[i].y);
      if (len < 1e-12) continue;
      const double step = std::min(len, temp);
      pos[i].x += disp[i].x / len * step;
      pos[i].y += disp[i].y / len * step;
    }
  }
  double lo_x = pos[0].x, hi_x = pos[0].x, lo_y = pos[0].y, hi_y = pos[0].y;
  for (const auto& p : pos) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  for (auto& p : pos) {
    p.x = (hi_x - lo_x) < 1e-12 ? 0.5 : (p.x - lo_x) / (hi_x - lo_x);
    p.y = (hi_y - lo_y) < 1e-12 ? 0.5 : (p.y - lo_y) / (hi_y - lo_y);
  }
  return pos;
}

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 400.0;
constexpr double kPanelTop = 56.0;
constexpr double kPad = 30.0;

void svg_header(std::ostringstream& svg, double width, double height,
                const std::string& heading) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << fmt2(width / 2)
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\" fill=\"#222222\">"
      << xml_escape(heading) << "</text>\n";
}

void svg_notice(std::ostringstream& svg, double x, double y,
                const std::string& notice) {
  svg << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(y)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" fill=\"#b30000\">"
      << xml_escape(notice) << "</text>\n";
}

// One network panel: edges, community-colored nodes, title, annotation.
void network_panel(std::ostringstream& svg, const Network& net,
                   const Partition& part, const std::string& title,
                   const std::string& annotation, double x0, Rng& rng) {
  const int n = static_cast<int>(net.size());
  svg << "<text x=\"" << fmt2(x0 + kPanelW / 2) << "\" y=\""
      << fmt2(kPanelTop - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" fill=\"#222222\">"
      << xml_escape(title) << "</text>\n";
  const std::vector<Point> pos = force_layout(net.weights, rng);
  auto px = [&](const Point& p) { return x0 + kPad + p.x * (kPanelW - 2 * kPad); };
  auto py = [&](const Point& p) {
    return kPanelTop + kPad + p.y * (kPanelH - 2 * kPad);
  };
  double wmax = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      wmax = std::max(wmax, std::abs(net.weights(i, j)));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = net.weights(i, j);
      if (w == 0.0) continue;
      const double rel = wmax > 0.0 ? std::abs(w) / wmax : 0.0;
      svg << "<line x1=\"" << fmt2(px(pos[i])) << "\" y1=\"" << fmt2(py(pos[i]))
          << "\" x2=\"" << fmt2(px(pos[j])) << "\" y2=\"" << fmt2(py(pos[j]))
          << "\" stroke=\"" << (w >= 0.0 ? "#2c7fb8" : "#d7301f")
          << "\" stroke-width=\"" << fmt2(0.6 + 2.4 * rel)
          << "\" stroke-opacity=\"" << fmt2(0.35 + 0.55 * rel) << "\"/>\n";
    }
  }
  for (int i = 0; i < n; ++i) {
    const int label = part.label_of(net.item_ids[static_cast<std::size_t>(i)]);
    svg << "<circle cx=\"" << fmt2(px(pos[i])) << "\" cy=\"" << fmt2(py(pos[i]))
        << "\" r=\"7\" fill=\"" << node_color(label)
        << "\" stroke=\"#333333\" stroke-width=\"0.8\"><title>"
        << xml_escape(net.item_ids[static_cast<std::size_t>(i)])
        << "</title></circle>\n";
  }
  svg << "<text x=\"" << fmt2(x0 + kPanelW / 2) << "\" y=\""
      << fmt2(kPanelTop + kPanelH + 24)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" fill=\"#222222\">"
      << xml_escape(annotation) << "</text>\n";
}

// One stability panel: per-item bars sorted by stability, threshold line.
void stability_panel(std::ostringstream& svg, const BootResult& boot,
                     double threshold, const std::string& title, double x0) {
  svg << "<text x=\"" << fmt2(x0 + kPanelW / 2) << "\" y=\""
      << fmt2(kPanelTop - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" fill=\"#222222\">"
      << xml_escape(title) << "</text>\n";
  std::vector<std::pair<std::string, double>> rows(boot.item_stability.begin(),
                                                   boot.item_stability.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  const double plot_x = x0 + kPad + 18;
  const double plot_w = kPanelW - 2 * kPad - 18;
  const double plot_y = kPanelTop + kPad;
  const double plot_h = kPanelH - 2 * kPad;
  // Axis and ticks.
  svg << "<line x1=\"" << fmt2(plot_x) << "\" y1=\"" << fmt2(plot_y)
      << "\" x2=\"" << fmt2(plot_x) << "\" y2=\"" << fmt2(plot_y + plot_h)
      << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = 0.25 * t;
    const double y = plot_y + plot_h * (1.0 - v);
    svg << "<text x=\"" << fmt2(plot_x - 4) << "\" y=\"" << fmt2(y + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\" "
           "fill=\"#444444\">"
        << fmt2(v) << "</text>\n";
  }
  if (!rows.empty()) {
    const double slot = plot_w / static_cast<double>(rows.size());
    const double bar = std::max(slot * 0.8, 0.5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double h = plot_h * std::min(std::max(rows[i].second, 0.0), 1.0);
      const double bx = plot_x + slot * static_cast<double>(i) + (slot - bar) / 2;
      svg << "<rect x=\"" << fmt2(bx) << "\" y=\"" << fmt2(plot_y + plot_h - h)
          << "\" width=\"" << fmt2(bar) << "\" height=\"" << fmt2(h)
          << "\" fill=\""
          << (rows[i].second < threshold ? "#d7301f" : "#2c7fb8") << "\"><title>"
          << xml_escape(rows[i].first) << "</title></rect>\n";
    }
  }
  const double ty = plot_y + plot_h * (1.0 - threshold);
  svg << "<line x1=\"" << fmt2(plot_x) << "\" y1=\"" << fmt2(ty) << "\" x2=\""
      << fmt2(plot_x + plot_w) << "\" y2=\"" << fmt2(ty)
      << "\" stroke=\"#b30000\" stroke-width=\"1\" "
         "stroke-dasharray=\"4 3\"/>\n";
  svg << "<text x=\"" << fmt2(plot_x + plot_w) << "\" y=\"" << fmt2(ty - 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" "
         "fill=\"#b30000\">"
      << fmt2(threshold) << "</text>\n";
}

void append_network_rows(std::vector<csv::Row>& rows, const std::string& phase,
                         const Network& net, const Partition& part) {
  const int n = static_cast<int>(net.size());
  for (int i = 0; i < n; ++i) {
    const std::string& id = net.item_ids[static_cast<std::size_t>(i)];
    rows.push_back({phase, "node", id, "",
                    std::to_string(std::max(part.label_of(id), 0))});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (net.weights(i, j) != 0.0)
        rows.push_back({phase, "edge", net.item_ids[static_cast<std::size_t>(i)],
                        net.item_ids[static_cast<std::size_t>(j)],
                        format_double(net.weights(i, j))});
}

void append_stability_rows(std::vector<csv::Row>& rows,
                           const std::string& phase, const BootResult& boot,
                           const ItemPool& pool) {
  for (const auto& [id, stability] : boot.item_stability) {
    const Item* item = pool.find(id);
    rows.push_back({phase, id, item ? item->statement : "",
                    format_double(stability),
                    std::to_string(std::max(boot.empirical.label_of(id), 0))});
  }
}

nlohmann::ordered_json json_matrix(const EmbeddingMatrix& emb) {
  nlohmann::ordered_json out;
  out["item_ids"] = emb.item_ids;
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < emb.dims(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < emb.n_items(); ++c) row.push_back(emb.values(r, c));
    values.push_back(std::move(row));
  }
  out["values"] = std::move(values);
  return out;
}

nlohmann::ordered_json json_communities(const Partition& part) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < part.size(); ++i)
    out[part.ids[i]] = part.labels[i];
  return out;
}

nlohmann::ordered_json json_ega(const EgaOutcome& ega) {
  nlohmann::ordered_json out;
  out["model"] = to_string(ega.network.method);
  out["lambda"] = ega.lambda;
  out["n_communities"] = ega.partition.n_communities();
  out["communities"] = json_communities(ega.partition);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  const int n = static_cast<int>(ega.network.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (ega.network.weights(i, j) != 0.0)
        edges.push_back({ega.network.item_ids[static_cast<std::size_t>(i)],
                         ega.network.item_ids[static_cast<std::size_t>(j)],
                         ega.network.weights(i, j)});
  out["n_edges"] = edges.size();
  out["edges"] = std::move(edges);
  return out;
}

nlohmann::ordered_json json_boot(const BootResult& boot) {
  nlohmann::ordered_json out;
  out["n_replicates"] = boot.n_replicates;
  out["replicate_seed_base"] = boot.replicate_seed_base;
  nlohmann::ordered_json freq = nlohmann::ordered_json::object();
  for (const auto& [dims, share] : boot.dimension_frequency)
    freq[std::to_string(dims)] = share;
  out["dimension_frequency"] = std::move(freq);
  nlohmann::ordered_json stability = nlohmann::ordered_json::object();
  for (const auto& [id, value] : boot.item_stability) stability[id] = value;
  out["item_stability"] = std::move(stability);
  out["empirical_communities"] = json_communities(boot.empirical);
  return out;
}

nlohmann::ordered_json json_uva(const UvaReport& uva) {
  nlohmann::ordered_json out;
  out["n_removed"] = uva.n_removed;
  out["n_sweeps"] = uva.n_sweeps;
  out["truncated"] = uva.truncated;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& cluster : uva.redundant_pairs) {
    nlohmann::ordered_json row;
    row["sweep"] = cluster.sweep;
    row["cluster"] = cluster.cluster_id;
    row["members"] = cluster.member_ids;
    row["kept"] = cluster.kept_id;
    row["removed"] = cluster.removed_ids;
    row["wto_max"] = cluster.wto_max;
    pairs.push_back(std::move(row));
  }
  out["redundant_pairs"] = std::move(pairs);
  nlohmann::ordered_json sweeps = nlohmann::ordered_json::array();
  for (const auto& sweep : uva.sweeps) {
    nlohmann::ordered_json row;
    row["index"] = sweep.index;
    row["lambda"] = sweep.lambda;
    row["item_ids"] = sweep.item_ids;
    nlohmann::ordered_json wto = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < sweep.wto.rows(); ++r) {
      nlohmann::ordered_json wto_row = nlohmann::ordered_json::array();
      for (Eigen::Index c = 0; c < sweep.wto.cols(); ++c)
        wto_row.push_back(sweep.wto(r, c));
      wto.push_back(std::move(wto_row));
    }
    row["wto"] = std::move(wto);
    sweeps.push_back(std::move(row));
  }
  out["sweeps"] = std::move(sweeps);
  return out;
}

nlohmann::ordered_json json_items(const ItemPool& pool) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& item : pool.items) {
    nlohmann::ordered_json row;
    row["ID"] = item.id;
    row["statement"] = item.statement;
    row["attribute"] = item.attribute;
    row["type"] = item.item_type;
    if (item.ega_community)
      row["EGA_com"] = *item.ega_community;
    else
      row["EGA_com"] = nullptr;
    out.push_back(std::move(row));
  }
  return out;
}

nlohmann::ordered_json json_options(const PipelineOptions& opts) {
  nlohmann::ordered_json out;
  out["ega_model"] = to_string(opts.ega_model);
  out["all_together"] = opts.all_together;
  out["run_overall"] = opts.run_overall;
  out["keep_org"] = opts.keep_org;
  out["items_only"] = opts.items_only;
  out["embeddings_only"] = opts.embeddings_only;
  out["uva_cutoff"] = opts.uva_cutoff;
  out["stability_threshold"] = opts.stability_threshold;
  out["n_boot"] = opts.n_boot;
  out["seed"] = opts.seed;
  nlohmann::ordered_json glasso;
  glasso["gamma"] = opts.glasso.gamma;
  glasso["n_lambda"] = opts.glasso.n_lambda;
  glasso["lambda_min_ratio"] = opts.glasso.lambda_min_ratio;
  glasso["max_iterations"] = opts.glasso.max_iterations;
  glasso["tolerance"] = opts.glasso.tolerance;
  out["glasso"] = std::move(glasso);
  return out;
}

// The thirteen-element result for one item type, in report order.
nlohmann::ordered_json json_type_result(const TypeResult& tr,
                                        const std::string& tag, bool keep_org,
                                        double threshold) {
  nlohmann::ordered_json out;
  out["final_NMI"] = tr.final_nmi;
  out["initial_NMI"] = tr.initial_nmi;

  nlohmann::ordered_json emb;
  emb["selected"] =
      tr.embedding_selected == EmbeddingMatrix::Kind::kSparse ? "sparse" : "full";
  emb["full_NMI"] = tr.nmi_embedding_full;
  emb["sparse_NMI"] = tr.nmi_embedding_sparse;
  const std::vector<std::string> final_ids = tr.final_items.ids();
  emb["full"] = json_matrix(tr.emb_full.subset(final_ids));
  if (tr.emb_sparse.n_items() > 0)
    emb["sparse"] = json_matrix(tr.emb_sparse.subset(final_ids));
  else
    emb["sparse"] = nullptr;
  if (keep_org) {
    emb["full_org"] = json_matrix(tr.emb_full);
    emb["sparse_org"] = json_matrix(sparsify_embeddings(tr.emb_full));
  }
  out["embeddings"] = std::move(emb);

  out["UVA"] = json_uva(tr.uva);

  nlohmann::ordered_json boot;
  boot["initial_boot"] = json_boot(tr.bootega.initial_boot);
  boot["final_boot"] = json_boot(tr.bootega.final_boot);
  boot["n_removed"] = tr.bootega.n_removed;
  nlohmann::ordered_json removed = nlohmann::ordered_json::array();
  for (const auto& r : tr.bootega.items_removed) {
    nlohmann::ordered_json row;
    row["iteration"] = r.iteration;
    row["ID"] = r.item_id;
    row["stability"] = r.stability;
    removed.push_back(std::move(row));
  }
  boot["items_removed"] = std::move(removed);
  if (tr.bootega.initial_boot_with_redundancies)
    boot["initial_boot_with_redundancies"] =
        json_boot(*tr.bootega.initial_boot_with_redundancies);
  else
    boot["initial_boot_with_redundancies"] = nullptr;
  boot["truncated"] = tr.bootega.truncated;
  out["bootEGA"] = std::move(boot);

  out["EGA"] = nlohmann::ordered_json{{"model_selected",
                                       to_string(tr.model_selected)}};
  out["final_items"] = json_items(tr.final_items);
  if (keep_org) out["initial_items"] = json_items(tr.initial_items);
  out["final_EGA"] = json_ega(tr.final_ega);
  out["initial_EGA"] = json_ega(tr.initial_ega);
  out["start_N"] = tr.start_n;
  out["final_N"] = tr.final_n;

  nlohmann::ordered_json net_plot;
  net_plot["file"] = "network_" + tag + ".svg";
  net_plot["data_file"] = "network_" + tag + ".csv";
  net_plot["initial_annotation"] = nmi_annotation(tr.initial_nmi);
  net_plot["final_annotation"] = nmi_annotation(tr.final_nmi);
  out["network_plot"] = std::move(net_plot);

  nlohmann::ordered_json stab_plot;
  stab_plot["file"] = "stability_" + tag + ".svg";
  stab_plot["data_file"] = "stability_" + tag + ".csv";
  stab_plot["threshold"] = threshold;
  out["stability_plot"] = std::move(stab_plot);

  out["degraded"] = tr.degraded;
  if (tr.degraded) out["degraded_reason"] = tr.degraded_reason;
  return out;
}

nlohmann::ordered_json json_overall(const GenieResult& result) {
  const OverallResult& overall = result.overall;
  nlohmann::ordered_json out;
  out["final_items"] = json_items(overall.final_items);
  nlohmann::ordered_json emb;
  emb["full"] = json_matrix(overall.embeddings);
  if (result.options.keep_org) {
    // Pre-reduction pool across every type, in type order.
    EmbeddingMatrix org;
    org.kind = EmbeddingMatrix::Kind::kFull;
    bool first = true;
    for (const auto& [type, tr] : result.item_type_level) {
      if (first) {
        org = tr.emb_full;
        first = false;
        continue;
      }
      const Eigen::Index old_n = org.n_items();
      org.values.conservativeResize(org.dims(), old_n + tr.emb_full.n_items());
      org.values.rightCols(tr.emb_full.n_items()) = tr.emb_full.values;
      org.item_ids.insert(org.item_ids.end(), tr.emb_full.item_ids.begin(),
                          tr.emb_full.item_ids.end());
    }
    emb["full_org"] = json_matrix(org);
    emb["sparse_org"] = json_matrix(sparsify_embeddings(org));
  }
  out["embeddings"] = std::move(emb);
  if (result.options.keep_org) {
    ItemPool initial;
    for (const auto& [type, tr] : result.item_type_level)
      for (const auto& item : tr.initial_items.items)
        initial.items.push_back(item);
    out["initial_items"] = json_items(initial);
  }
  if (overall.analyzed) {
    // No further reduction happens here, so initial and final coincide.
    out["final_NMI"] = overall.nmi_vs_types;
    out["initial_NMI"] = overall.nmi_vs_types;
    out["EGA"] = nlohmann::ordered_json{{"model_selected",
                                         to_string(overall.model_selected)}};
    out["final_EGA"] = json_ega(overall.ega);
    out["initial_EGA"] = json_ega(overall.ega);
    out["start_N"] = static_cast<int>(overall.final_items.size());
    out["final_N"] = static_cast<int>(overall.final_items.size());
    nlohmann::ordered_json net_plot;
    net_plot["file"] = "network_overall.svg";
    net_plot["data_file"] = "network_overall.csv";
    net_plot["final_annotation"] = nmi_annotation(overall.nmi_vs_types);
    out["network_plot"] = std::move(net_plot);
  }
  return out;
}

}  // namespace

std::string sanitize_type_name(const std::string& type) {
  std::string out;
  out.reserve(type.size());
  for (char c : type) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_')
      out += c;
    else if (c >= 'A' && c <= 'Z')
      out += static_cast<char>(c - 'A' + 'a');
    else
      out += '_';
  }
  if (out.empty()) out = "type";
  return out;
}

std::pair<PlotDocument, PlotDocument> render_plots(const TypeResult& result,
                                                   std::uint64_t layout_seed,
                                                   double threshold) {
  PlotDocument network_doc;
  PlotDocument stability_doc;

  const bool two_panels = !result.degraded;
  const double width = two_panels ? 2 * kPanelW + 60 : kPanelW + 40;
  const double height = kPanelTop + kPanelH + 44;

  {
    std::ostringstream svg;
    svg_header(svg, width, height, "Exploratory graph analysis");
    Rng initial_rng(derive_seed(layout_seed, "network/initial"));
    network_panel(svg, result.initial_ega.network, result.initial_ega.partition,
                  "Initial EGA (N=" + std::to_string(result.start_n) + ")",
                  nmi_annotation(result.initial_nmi), 20.0, initial_rng);
    if (two_panels) {
      Rng final_rng(derive_seed(layout_seed, "network/final"));
      network_panel(svg, result.final_ega.network, result.final_ega.partition,
                    "Final EGA (N=" + std::to_string(result.final_n) + ")",
                    nmi_annotation(result.final_nmi), kPanelW + 40.0, final_rng);
    } else {
      svg_notice(svg, width / 2, height - 6,
                 "degraded run: " + result.degraded_reason);
    }
    svg << "</svg>\n";
    network_doc.svg = svg.str();

    std::vector<csv::Row> rows;
    rows.push_back({"phase", "kind", "id_a", "id_b", "value"});
    append_network_rows(rows, "initial", result.initial_ega.network,
                        result.initial_ega.partition);
    if (two_panels)
      append_network_rows(rows, "final", result.final_ega.network,
                          result.final_ega.partition);
    network_doc.data_csv = csv::emit(rows);
  }

  {
    const bool have_boot = result.bootega.initial_boot.n_replicates > 0;
    std::ostringstream svg;
    svg_header(svg, width, height, "Bootstrap item stability");
    if (have_boot) {
      stability_panel(svg, result.bootega.initial_boot, threshold,
                      "Pre-pruning (N=" +
                          std::to_string(result.bootega.initial_boot
                                             .item_stability.size()) +
                          ")",
                      20.0);
      stability_panel(svg, result.bootega.final_boot, threshold,
                      "Post-pruning (N=" +
                          std::to_string(result.bootega.final_boot
                                             .item_stability.size()) +
                          ")",
                      two_panels ? kPanelW + 40.0 : 20.0);
    }
    if (result.degraded)
      svg_notice(svg, width / 2, height - 6,
                 "degraded run: " + result.degraded_reason);
    svg << "</svg>\n";
    stability_doc.svg = svg.str();

    std::vector<csv::Row> rows;
    rows.push_back(
        {"phase", "ID", "statement", "stability", "empirical_community"});
    if (result.bootega.initial_boot_with_redundancies)
      append_stability_rows(rows, "pre_uva",
                            *result.bootega.initial_boot_with_redundancies,
                            result.initial_items);
    if (have_boot) {
      append_stability_rows(rows, "initial", result.bootega.initial_boot,
                            result.initial_items);
      append_stability_rows(rows, "final", result.bootega.final_boot,
                            result.initial_items);
    }
    stability_doc.data_csv = csv::emit(rows);
  }

  return {std::move(network_doc), std::move(stability_doc)};
}

PlotDocument render_overall_network(const OverallResult& overall,
                                    std::uint64_t layout_seed) {
  PlotDocument doc;
  const double width = kPanelW + 40;
  const double height = kPanelTop + kPanelH + 44;
  std::ostringstream svg;
  svg_header(svg, width, height, "Overall EGA (post-reduction pool)");
  Rng rng(derive_seed(layout_seed, "network/overall"));
  network_panel(svg, overall.ega.network, overall.ega.partition,
                "Overall EGA (N=" +
                    std::to_string(overall.final_items.size()) + ")",
                nmi_annotation(overall.nmi_vs_types), 20.0, rng);
  svg << "</svg>\n";
  doc.svg = svg.str();

  std::vector<csv::Row> rows;
  rows.push_back({"phase", "kind", "id_a", "id_b", "value"});
  append_network_rows(rows, "overall", overall.ega.network,
                      overall.ega.partition);
  doc.data_csv = csv::emit(rows);
  return doc;
}

nlohmann::ordered_json result_to_json(const GenieResult& result) {
  nlohmann::ordered_json out;
  out["options"] = json_options(result.options);
  if (result.collapsed && result.item_type_level.size() == 1) {
    // all_together runs report one flat result.
    const auto& [type, tr] = result.item_type_level.front();
    nlohmann::ordered_json flat =
        json_type_result(tr, sanitize_type_name(type), result.options.keep_org,
                         result.options.stability_threshold);
    for (auto& [key, value] : flat.items()) out[key] = std::move(value);
    if (result.options.run_overall && result.overall.analyzed)
      out["overall"] = json_overall(result);
    return out;
  }
  nlohmann::ordered_json types = nlohmann::ordered_json::object();
  for (const auto& [type, tr] : result.item_type_level)
    types[type] =
        json_type_result(tr, sanitize_type_name(type), result.options.keep_org,
                         result.options.stability_threshold);
  out["item_type_level"] = std::move(types);
  out["overall"] = json_overall(result);
  return out;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw IoError("cannot open " + tmp.string() + " for writing");
    stream << text;
    stream.flush();
    if (!stream) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + target.string() +
                  ": " + ec.message());
  }
}

std::vector<std::string> write_artifacts(const GenieResult& result,
                                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text_atomic((fs::path(out_dir) / name).string(), text);
    written.push_back(name);
  };

  for (const auto& [type, tr] : result.item_type_level) {
    const std::string tag = sanitize_type_name(type);
    const auto [network_doc, stability_doc] =
        render_plots(tr, derive_seed(result.options.seed, "plot/" + type),
                     result.options.stability_threshold);

    std::vector<csv::Row> item_rows;
    item_rows.push_back({"ID", "statement", "attribute", "type", "EGA_com"});
    for (const auto& item : tr.final_items.items)
      item_rows.push_back({item.id, item.statement, item.attribute,
                           item.item_type,
                           item.ega_community
                               ? std::to_string(*item.ega_community)
                               : ""});
    emit("final_items_" + tag + ".csv", csv::emit(item_rows));

    emit("network_" + tag + ".svg", network_doc.svg);
    emit("network_" + tag + ".csv", network_doc.data_csv);
    emit("stability_" + tag + ".svg", stability_doc.svg);
    emit("stability_" + tag + ".csv", stability_doc.data_csv);

    const std::vector<std::string> final_ids = tr.final_items.ids();
    emit("embeddings_" + tag + "_full.csv",
         embeddings_to_csv(tr.emb_full.subset(final_ids)));
    emit("embeddings_" + tag + "_sparse.csv",
         tr.emb_sparse.n_items() > 0
             ? embeddings_to_csv(tr.emb_sparse.subset(final_ids))
             : std::string());
    emit("uva_log_" + tag + ".csv", uva_log_to_csv(tr.uva));
  }

  if (result.overall.analyzed) {
    const PlotDocument overall_doc = render_overall_network(
        result.overall, derive_seed(result.options.seed, "plot/overall"));
    emit("network_overall.svg", overall_doc.svg);
    emit("network_overall.csv", overall_doc.data_csv);
  }

  emit("result.json", result_to_json(result).dump(2) + "\n");
  return written;
}

}  // namespace itemnet
