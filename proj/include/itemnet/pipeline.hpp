#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "itemnet/bootega.hpp"
#include "itemnet/community.hpp"
#include "itemnet/items.hpp"
#include "itemnet/llm/client.hpp"
#include "itemnet/network.hpp"
#include "itemnet/prompt.hpp"
#include "itemnet/uva.hpp"

namespace itemnet {

enum class ModelChoice { kAuto, kGlasso, kTmfg };

std::string to_string(ModelChoice m);
ModelChoice model_choice_from_string(const std::string& s);

struct PipelineOptions {
  ModelChoice ega_model = ModelChoice::kAuto;
  bool all_together = false;   // ignored when only one item type exists
  bool run_overall = false;
  bool keep_org = false;
  bool items_only = false;     // mutually exclusive with embeddings_only
  bool embeddings_only = false;
  double uva_cutoff = 0.25;
  double stability_threshold = 0.75;
  int n_boot = 100;
  std::uint64_t seed = 0;
  GlassoOptions glasso{};

  void check() const;
};

// Everything the reduction produced for one item type.
struct TypeResult {
  double initial_nmi = 0.0;
  double final_nmi = 0.0;
  EmbeddingMatrix emb_full;    // start pool, as provided
  EmbeddingMatrix emb_sparse;  // post-redundancy pool, sparsified
  EmbeddingMatrix::Kind embedding_selected = EmbeddingMatrix::Kind::kFull;
  double nmi_embedding_full = 0.0;    // Step-4 comparison detail
  double nmi_embedding_sparse = 0.0;  // NaN when the sparse branch degenerated
  UvaReport uva;
  BootReport bootega;
  NetworkMethod model_selected = NetworkMethod::kGlasso;
  ItemPool final_items;  // carry ega_community from the final partition
  EgaOutcome final_ega;
  EgaOutcome initial_ega;
  int start_n = 0;
  int final_n = 0;
  std::string network_plot;    // SVG, attached by the report layer
  std::string stability_plot;  // SVG, attached by the report layer
  bool degraded = false;
  std::string degraded_reason;
  ItemPool initial_items;  // pre-reduction pool (serialized under keep_org)
  Partition truth;         // ground-truth labelling the NMIs were scored on
};

struct OverallResult {
  ItemPool final_items;        // concatenation of per-type final items
  EmbeddingMatrix embeddings;  // full embeddings of those items
  bool analyzed = false;       // true under run_overall
  NetworkMethod model_selected = NetworkMethod::kGlasso;
  EgaOutcome ega;              // when analyzed
  double nmi_vs_types = 0.0;   // when analyzed
  std::string network_plot;
};

struct GenieResult {
  std::vector<std::pair<std::string, TypeResult>> item_type_level;
  OverallResult overall;
  PipelineOptions options;  // resolved options, embedded in every report
  bool collapsed = false;   // all_together actually collapsed multiple types
};

// Ground-truth partition from per-item label strings (labels become 1, 2, ...
// in first-appearance order).
Partition partition_from_labels(const std::vector<std::string>& ids,
                                const std::vector<std::string>& labels);

// Steps 2-6 for one pool: model selection against `truth`, redundancy
// removal, embedding (full vs sparse) selection, stability pruning, final
// EGA. Pools under 8 items skip reduction and come back flagged degraded.
TypeResult run_reduction(const ItemPool& pool, const EmbeddingMatrix& emb_full,
                         const Partition& truth, const PipelineOptions& opts);

// Per-type reduction over a validated pool with precomputed embeddings
// (columns keyed by item id). all_together collapses the pool to one nominal
// type with "<type> <attribute>" labels; run_overall adds a no-reduction EGA
// of the combined final pool against type labels.
GenieResult run_genie(const ItemPool& pool, const EmbeddingMatrix& emb,
                      const PipelineOptions& opts);

// As above, but embeddings are fetched per type through `embed` (statements
// in pool order -> matrix keyed by the same ids).
using Embedder = std::function<EmbeddingMatrix(const ItemPool& items)>;
GenieResult run_genie(const ItemPool& pool, const Embedder& embed,
                      const PipelineOptions& opts);

// Full generation pipeline: generate -> (items_only?) -> embed ->
// (embeddings_only?) -> run_genie.
struct AigenieResult {
  ItemPool pool;
  std::optional<EmbeddingMatrix> embeddings;
  std::optional<GenieResult> genie;
};

AigenieResult run_aigenie(const GenerationSpec& spec, const PipelineOptions& opts,
                          const ChatFn& chat, const Embedder& embed);

}  // namespace itemnet
