#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "itemnet/pipeline.hpp"

namespace itemnet {

// A rendered SVG plus the table of numbers behind it. Every number drawn in
// the SVG comes from the report fields, so the two never disagree.
struct PlotDocument {
  std::string svg;
  std::string data_csv;
};

// Network document (initial vs final EGA side by side, nodes colored by
// community, NMI annotations) and stability document (pre/post-pruning item
// stabilities as sorted bars with the threshold line). Layouts are seeded
// from `layout_seed`, so reruns are byte-identical. Degraded results render
// a single panel with an explanatory notice.
std::pair<PlotDocument, PlotDocument> render_plots(const TypeResult& result,
                                                   std::uint64_t layout_seed,
                                                   double threshold = 0.75);

// Network document for the combined post-reduction pool (run_overall).
PlotDocument render_overall_network(const OverallResult& overall,
                                    std::uint64_t layout_seed);

// File-safe version of an item-type name (lowercase, [a-z0-9_-] only).
std::string sanitize_type_name(const std::string& type);

// Full report as ordered JSON. Runs that collapsed every type into one pool
// serialize flat (the per-type fields at the top level); otherwise the
// report holds item_type_level and overall sections. Plot entries reference
// the artifact files by name and repeat the annotation strings drawn into
// the SVGs.
nlohmann::ordered_json result_to_json(const GenieResult& result);

// Serializes the result and writes the artifact set atomically under
// out_dir (created if missing): result.json plus, per item type,
// final_items_<type>.csv, network_<type>.svg/.csv, stability_<type>.svg/.csv,
// embeddings_<type>_full.csv, embeddings_<type>_sparse.csv, and
// uva_log_<type>.csv. Returns the relative names of the files written.
std::vector<std::string> write_artifacts(const GenieResult& result,
                                         const std::string& out_dir);

// Writes text to a temporary file in the target directory, then renames it
// over the destination, so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace itemnet
