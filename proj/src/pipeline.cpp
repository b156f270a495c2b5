#include "itemnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "itemnet/errors.hpp"
#include "itemnet/rng.hpp"

namespace itemnet {

std::string to_string(ModelChoice m) {
  switch (m) {
    case ModelChoice::kAuto: return "auto";
    case ModelChoice::kGlasso: return "glasso";
    case ModelChoice::kTmfg: return "tmfg";
  }
  return "auto";
}

ModelChoice model_choice_from_string(const std::string& s) {
  if (s == "auto") return ModelChoice::kAuto;
  if (s == "glasso") return ModelChoice::kGlasso;
  if (s == "tmfg") return ModelChoice::kTmfg;
  throw ConfigError("unknown ega model: " + s + " (expected auto, glasso, or tmfg)");
}

void PipelineOptions::check() const {
  if (items_only && embeddings_only)
    throw InputError("items_only and embeddings_only are mutually exclusive");
  if (!(uva_cutoff > 0.0)) throw InputError("uva cutoff must be positive");
  if (stability_threshold < 0.0 || stability_threshold > 1.0)
    throw InputError("stability threshold must lie in [0, 1]");
  if (n_boot < 1) throw InputError("n_boot must be positive");
}

Partition partition_from_labels(const std::vector<std::string>& ids,
                                const std::vector<std::string>& labels) {
  if (ids.size() != labels.size())
    throw InputError("partition_from_labels: ids and labels differ in length");
  Partition out;
  out.ids = ids;
  std::unordered_map<std::string, int> mapping;
  for (const auto& label : labels) {
    auto [it, inserted] =
        mapping.try_emplace(label, static_cast<int>(mapping.size()) + 1);
    out.labels.push_back(it->second);
  }
  return out;
}

namespace {

Partition restrict_truth(const Partition& truth,
                         const std::vector<std::string>& ids) {
  Partition out;
  out.ids = ids;
  for (const auto& id : ids) {
    const int label = truth.label_of(id);
    if (label < 0)
      throw InputError("truth labelling is missing item " + id);
    out.labels.push_back(label);
  }
  return out;
}

// Step 2: pick the network model. Under `auto`, both are estimated and the
// one agreeing better with the truth labelling wins; ties go to glasso.
std::pair<NetworkMethod, EgaOutcome> select_model(const EmbeddingMatrix& emb,
                                                  const Partition& truth,
                                                  const PipelineOptions& opts,
                                                  double* nmi_out) {
  if (opts.ega_model == ModelChoice::kGlasso ||
      (opts.ega_model == ModelChoice::kAuto && emb.n_items() < 4)) {
    EgaOutcome ega = run_ega(emb, {NetworkMethod::kGlasso, opts.glasso});
    *nmi_out = nmi(ega.partition, truth);
    return {NetworkMethod::kGlasso, std::move(ega)};
  }
  if (opts.ega_model == ModelChoice::kTmfg) {
    EgaOutcome ega = run_ega(emb, {NetworkMethod::kTmfg, opts.glasso});
    *nmi_out = nmi(ega.partition, truth);
    return {NetworkMethod::kTmfg, std::move(ega)};
  }
  EgaOutcome glasso_ega = run_ega(emb, {NetworkMethod::kGlasso, opts.glasso});
  EgaOutcome tmfg_ega = run_ega(emb, {NetworkMethod::kTmfg, opts.glasso});
  const double glasso_nmi = nmi(glasso_ega.partition, truth);
  const double tmfg_nmi = nmi(tmfg_ega.partition, truth);
  if (tmfg_nmi > glasso_nmi) {
    *nmi_out = tmfg_nmi;
    return {NetworkMethod::kTmfg, std::move(tmfg_ega)};
  }
  *nmi_out = glasso_nmi;
  return {NetworkMethod::kGlasso, std::move(glasso_ega)};
}

void attach_communities(ItemPool& pool, const Partition& part) {
  for (auto& item : pool.items) {
    const int label = part.label_of(item.id);
    item.ega_community = label < 0 ? std::nullopt : std::optional<int>(label);
  }
}

}  // namespace

TypeResult run_reduction(const ItemPool& pool, const EmbeddingMatrix& emb_full,
                         const Partition& truth, const PipelineOptions& opts) {
  opts.check();
  TypeResult res;
  res.start_n = static_cast<int>(pool.size());
  res.initial_items = pool;
  res.emb_full = emb_full.subset(pool.ids());
  res.truth = restrict_truth(truth, pool.ids());

  if (pool.size() < 8) {
    res.degraded = true;
    res.degraded_reason = "pool of " + std::to_string(pool.size()) +
                          " items is below the minimum viable size of 8; "
                          "reduction skipped";
    res.final_items = pool;
    res.final_n = res.start_n;
    if (pool.size() >= 4) {
      double selected_nmi = 0.0;
      auto [method, ega] =
          select_model(res.emb_full, res.truth, opts, &selected_nmi);
      res.model_selected = method;
      res.initial_ega = ega;
      res.initial_nmi = selected_nmi;
      res.final_ega = std::move(ega);
      res.final_nmi = selected_nmi;
      attach_communities(res.final_items, res.final_ega.partition);
    }
    return res;
  }

  // Step 2: initial EGA and model selection.
  double initial_nmi = 0.0;
  auto [method, initial_ega] =
      select_model(res.emb_full, res.truth, opts, &initial_nmi);
  res.model_selected = method;
  res.initial_ega = std::move(initial_ega);
  res.initial_nmi = initial_nmi;

  // Step 3: redundancy removal on the full embedding.
  UvaOptions uva_opts;
  uva_opts.method = method;
  uva_opts.cutoff = opts.uva_cutoff;
  uva_opts.glasso = opts.glasso;
  auto [uva_pool, uva_report] = uva_reduce(pool, emb_full, uva_opts);
  res.uva = std::move(uva_report);

  // Step 4: full vs sparse embedding on the surviving items.
  const EmbeddingMatrix emb_uva = emb_full.subset(uva_pool.ids());
  res.emb_sparse = sparsify_embeddings(emb_uva);
  const Partition truth_uva = restrict_truth(truth, uva_pool.ids());
  const EgaOptions ega_opts{method, opts.glasso};
  res.nmi_embedding_full = nmi(run_ega(emb_uva, ega_opts).partition, truth_uva);
  bool sparse_usable = true;
  try {
    res.nmi_embedding_sparse =
        nmi(run_ega(res.emb_sparse, ega_opts).partition, truth_uva);
  } catch (const EstimationError&) {
    // A sparsified column can lose all variance; the sparse branch then
    // simply loses the comparison.
    res.nmi_embedding_sparse = std::numeric_limits<double>::quiet_NaN();
    sparse_usable = false;
  }
  const bool use_sparse =
      sparse_usable && res.nmi_embedding_sparse > res.nmi_embedding_full;
  res.embedding_selected = use_sparse ? EmbeddingMatrix::Kind::kSparse
                                      : EmbeddingMatrix::Kind::kFull;
  const EmbeddingMatrix& emb_selected = use_sparse ? res.emb_sparse : emb_uva;

  // Step 5: stability pruning on the selected embedding.
  BootOptions boot_opts;
  boot_opts.ega = ega_opts;
  boot_opts.threshold = opts.stability_threshold;
  boot_opts.n_replicates = opts.n_boot;
  boot_opts.seed = derive_seed(opts.seed, "bootega");
  auto [final_pool, boot_report] =
      stability_reduce(uva_pool, emb_selected, boot_opts);
  res.bootega = std::move(boot_report);
  res.bootega.initial_boot_with_redundancies = bootstrap_ega(
      res.emb_full, res.initial_ega.partition, ega_opts, opts.n_boot,
      derive_seed(opts.seed, "bootega/pre-uva"));

  // Step 6: final EGA on the reduced pool.
  const EmbeddingMatrix emb_final = emb_selected.subset(final_pool.ids());
  res.final_ega = run_ega(emb_final, ega_opts);
  res.final_nmi =
      nmi(res.final_ega.partition, restrict_truth(truth, final_pool.ids()));
  res.final_items = std::move(final_pool);
  attach_communities(res.final_items, res.final_ega.partition);
  res.final_n = static_cast<int>(res.final_items.size());

  if (res.uva.truncated || res.bootega.truncated) {
    res.degraded = true;
    res.degraded_reason = res.uva.truncated
                              ? "redundancy removal stopped at the four-item floor"
                              : "stability pruning stopped at the four-item floor";
  }
  return res;
}

namespace {

GenieResult run_genie_impl(const ItemPool& pool,
                           const EmbeddingMatrix* precomputed,
                           const Embedder* embed, const PipelineOptions& opts) {
  opts.check();
  const AttributeSpec spec = derive_attribute_spec(pool);
  const ValidationReport report = validate_pool(pool, spec);
  if (report.has_errors())
    throw InputError("invalid item pool:\n" + report.to_string());

  GenieResult result;
  result.options = opts;

  // Original type per id, for overall truth labels (survives all_together).
  std::unordered_map<std::string, std::string> type_of;
  for (const auto& item : pool.items) type_of[item.id] = item.item_type;

  ItemPool working = pool;
  const bool collapse = opts.all_together && spec.types().size() > 1;
  result.collapsed = collapse;
  if (collapse) {
    for (auto& item : working.items) {
      item.attribute = item.item_type + " " + item.attribute;
      item.item_type = "all";
    }
  }
  const AttributeSpec working_spec = derive_attribute_spec(working);

  for (const auto& type : working_spec.type_names()) {
    const ItemPool subpool = working.subset_by_type(type);
    EmbeddingMatrix emb_t;
    if (precomputed) {
      emb_t = precomputed->subset(subpool.ids());
    } else {
      emb_t = (*embed)(subpool);
      emb_t.check();
      if (emb_t.item_ids != subpool.ids())
        throw InputError("embedder returned columns not keyed by the item ids");
    }
    std::vector<std::string> attr_labels;
    for (const auto& item : subpool.items) attr_labels.push_back(item.attribute);
    const Partition truth = partition_from_labels(subpool.ids(), attr_labels);

    PipelineOptions type_opts = opts;
    type_opts.seed = derive_seed(opts.seed, "type/" + type);
    result.item_type_level.emplace_back(
        type, run_reduction(subpool, emb_t, truth, type_opts));
  }

  // Overall aggregation: concatenated final items plus their full embeddings.
  OverallResult& overall = result.overall;
  overall.final_items.provenance = pool.provenance;
  for (const auto& [type, tr] : result.item_type_level)
    for (const auto& item : tr.final_items.items)
      overall.final_items.items.push_back(item);
  {
    const std::vector<std::string> ids = overall.final_items.ids();
    bool first = true;
    for (const auto& [type, tr] : result.item_type_level) {
      const EmbeddingMatrix part = tr.emb_full.subset(tr.final_items.ids());
      if (first) {
        overall.embeddings = part;
        first = false;
        continue;
      }
      if (part.dims() != overall.embeddings.dims())
        throw InputError(
            "embedding dimensions differ across item types; overall analysis "
            "needs one space");
      const Eigen::Index old_n = overall.embeddings.n_items();
      overall.embeddings.values.conservativeResize(
          overall.embeddings.dims(), old_n + part.n_items());
      overall.embeddings.values.rightCols(part.n_items()) = part.values;
      overall.embeddings.item_ids.insert(overall.embeddings.item_ids.end(),
                                         part.item_ids.begin(),
                                         part.item_ids.end());
    }
  }

  if (opts.run_overall && overall.final_items.size() >= 4) {
    std::vector<std::string> type_labels;
    for (const auto& item : overall.final_items.items)
      type_labels.push_back(type_of.at(item.id));
    const Partition truth =
        partition_from_labels(overall.final_items.ids(), type_labels);
    double overall_nmi = 0.0;
    auto [method, ega] =
        select_model(overall.embeddings, truth, opts, &overall_nmi);
    overall.analyzed = true;
    overall.model_selected = method;
    overall.ega = std::move(ega);
    overall.nmi_vs_types = overall_nmi;
  }
  return result;
}

}  // namespace

GenieResult run_genie(const ItemPool& pool, const EmbeddingMatrix& emb,
                      const PipelineOptions& opts) {
  return run_genie_impl(pool, &emb, nullptr, opts);
}

GenieResult run_genie(const ItemPool& pool, const Embedder& embed,
                      const PipelineOptions& opts) {
  return run_genie_impl(pool, nullptr, &embed, opts);
}

AigenieResult run_aigenie(const GenerationSpec& spec, const PipelineOptions& opts,
                          const ChatFn& chat, const Embedder& embed) {
  opts.check();
  AigenieResult out;
  out.pool = generate_item_pool(spec, chat);
  if (opts.items_only) return out;

  // Embed per type, then stitch the columns back into pool order.
  const AttributeSpec aspec = derive_attribute_spec(out.pool);
  std::vector<EmbeddingMatrix> parts;
  for (const auto& type : aspec.type_names())
    parts.push_back(embed(out.pool.subset_by_type(type)));
  EmbeddingMatrix combined;
  combined.kind = EmbeddingMatrix::Kind::kFull;
  Eigen::Index dims = -1;
  Eigen::Index total = 0;
  for (const auto& part : parts) {
    part.check();
    if (dims < 0) dims = part.dims();
    if (part.dims() != dims)
      throw ProtocolError("embedding dimension changed across item types", "");
    total += part.n_items();
  }
  combined.values.resize(dims, total);
  Eigen::Index col = 0;
  for (const auto& part : parts) {
    combined.values.middleCols(col, part.n_items()) = part.values;
    combined.item_ids.insert(combined.item_ids.end(), part.item_ids.begin(),
                             part.item_ids.end());
    col += part.n_items();
  }
  out.embeddings = combined.subset(out.pool.ids());  // pool order
  if (opts.embeddings_only) return out;

  out.genie = run_genie(out.pool, *out.embeddings, opts);
  return out;
}

}  // namespace itemnet
