#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itemnet/config.hpp"
#include "itemnet/errors.hpp"
#include "itemnet/items.hpp"
#include "itemnet/llm/client.hpp"
#include "itemnet/pipeline.hpp"
#include "itemnet/report.hpp"

namespace {

using itemnet::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitProvider = 2;
constexpr int kExitDegraded = 3;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool offline = false;
};

RunConfig resolve_config(const GlobalArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) {
    if (!std::filesystem::exists(args.config_path))
      throw itemnet::InputError("config file not found: " + args.config_path);
    cfg = itemnet::load_run_config(args.config_path);
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed) cfg.pipeline.seed = *args.seed;
  if (args.offline) cfg.offline = true;
  return cfg;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty())
    throw itemnet::InputError(what + " path missing (pass --" + what +
                              " or set it in the config)");
  if (!std::filesystem::exists(path))
    throw itemnet::InputError(what + " file not found: " + path);
}

itemnet::Embedder make_embedder(itemnet::llm::Client& client,
                                const RunConfig& cfg) {
  const auto provider =
      itemnet::llm::provider_from_string(cfg.models.embedding_provider);
  const std::string model =
      itemnet::llm::resolve_model_alias(provider, cfg.models.embedding_model);
  const itemnet::llm::ProviderConfig pc = cfg.provider(provider);
  return [&client, model, pc](const itemnet::ItemPool& pool) {
    itemnet::EmbeddingMatrix emb =
        client.embed_texts(pool.statements(), model, pc);
    emb.item_ids = pool.ids();  // responses arrive in input order
    return emb;
  };
}

itemnet::ChatFn make_chat(itemnet::llm::Client& client, const RunConfig& cfg) {
  const auto provider =
      itemnet::llm::provider_from_string(cfg.models.chat_provider);
  itemnet::llm::ChatParams params = cfg.chat_params();
  params.model = itemnet::llm::resolve_model_alias(provider, params.model);
  params.reps = 1;  // generation consumes one completion per prompt
  const itemnet::llm::ProviderConfig pc = cfg.provider(provider);
  return [&client, params, pc](const std::string& prompt) {
    const itemnet::llm::ChatResult result = client.chat({prompt}, params, pc);
    return result.responses.at(0).at(0).text;
  };
}

int finish_run(const itemnet::GenieResult& result, const RunConfig& cfg) {
  const std::vector<std::string> written =
      itemnet::write_artifacts(result, cfg.out_dir);
  std::cout << "wrote " << written.size() << " artifacts to " << cfg.out_dir
            << "\n";
  for (const auto& [type, tr] : result.item_type_level) {
    std::cout << "  " << type << ": " << tr.start_n << " -> " << tr.final_n
              << " items, final NMI " << itemnet::format_double(tr.final_nmi);
    if (tr.degraded) std::cout << " [degraded: " << tr.degraded_reason << "]";
    std::cout << "\n";
  }
  for (const auto& [type, tr] : result.item_type_level)
    if (tr.degraded) return kExitDegraded;
  return kExitOk;
}

int cmd_run(const GlobalArgs& args, bool items_only, bool embeddings_only) {
  RunConfig cfg = resolve_config(args);
  if (args.config_path.empty())
    throw itemnet::InputError("run needs --config with a generation section");
  if (items_only) cfg.pipeline.items_only = true;
  if (embeddings_only) cfg.pipeline.embeddings_only = true;

  itemnet::llm::Client client(cfg.offline);
  const itemnet::AigenieResult result = itemnet::run_aigenie(
      cfg.generation, cfg.pipeline, make_chat(client, cfg),
      make_embedder(client, cfg));

  std::filesystem::create_directories(cfg.out_dir);
  itemnet::write_text_atomic(
      (std::filesystem::path(cfg.out_dir) / "generated_items.csv").string(),
      itemnet::pool_to_csv(result.pool));
  std::cout << "generated " << result.pool.size() << " items\n";
  if (cfg.pipeline.items_only) return kExitOk;

  itemnet::write_text_atomic(
      (std::filesystem::path(cfg.out_dir) / "embeddings_full.csv").string(),
      itemnet::embeddings_to_csv(*result.embeddings));
  if (cfg.pipeline.embeddings_only) return kExitOk;

  return finish_run(*result.genie, cfg);
}

int cmd_reduce(const GlobalArgs& args, std::string items_path,
               std::string embeddings_path) {
  RunConfig cfg = resolve_config(args);
  if (items_path.empty()) items_path = cfg.items_path;
  if (embeddings_path.empty()) embeddings_path = cfg.embeddings_path;
  require_file(items_path, "items");
  require_file(embeddings_path, "embeddings");

  const itemnet::ItemPool pool = itemnet::load_pool(items_path);
  const itemnet::EmbeddingMatrix emb = itemnet::load_embeddings(embeddings_path);
  const itemnet::GenieResult result =
      itemnet::run_genie(pool, emb, cfg.pipeline);
  return finish_run(result, cfg);
}

int cmd_generate(const GlobalArgs& args) { return cmd_run(args, true, false); }

int cmd_models(const GlobalArgs& args, const std::string& provider_filter,
               const std::string& type_filter) {
  const RunConfig cfg = resolve_config(args);
  std::optional<itemnet::llm::Provider> provider;
  if (!provider_filter.empty())
    provider = itemnet::llm::provider_from_string(provider_filter);
  std::optional<std::string> type;
  if (!type_filter.empty()) {
    if (type_filter != "chat" && type_filter != "embedding")
      throw itemnet::InputError("--type must be chat or embedding");
    type = type_filter;
  }

  std::vector<itemnet::llm::ProviderConfig> targets;
  for (const auto p :
       {itemnet::llm::Provider::kOpenai, itemnet::llm::Provider::kAnthropic,
        itemnet::llm::Provider::kGroq, itemnet::llm::Provider::kJina,
        itemnet::llm::Provider::kHuggingface})
    if (!provider || *provider == p) targets.push_back(cfg.provider(p));

  itemnet::llm::Client client(cfg.offline);
  const itemnet::llm::ModelCatalog catalog =
      client.list_available_models(targets, provider, type);
  for (const auto& entry : catalog.entries)
    std::cout << itemnet::llm::to_string(entry.provider) << "\t" << entry.id
              << "\t" << entry.type << "\n";
  for (const auto& [p, note] : catalog.errors)
    std::cerr << "warning: " << itemnet::llm::to_string(p) << ": " << note
              << "\n";
  if (catalog.entries.empty() && !catalog.errors.empty()) return kExitProvider;
  return kExitOk;
}

int cmd_chat(const GlobalArgs& args, const std::string& provider_name,
             std::string model, const std::string& prompt, double temperature,
             double top_p, int reps, int max_tokens,
             const std::string& system_role) {
  const RunConfig cfg = resolve_config(args);
  const auto provider = itemnet::llm::provider_from_string(
      provider_name.empty() ? cfg.models.chat_provider : provider_name);
  if (model.empty()) model = cfg.models.chat_model;

  itemnet::llm::ChatParams params;
  params.model = itemnet::llm::resolve_model_alias(provider, model);
  params.temperature = temperature;
  params.top_p = top_p;
  params.reps = reps;
  if (max_tokens > 0) params.max_tokens = max_tokens;
  if (!system_role.empty()) params.system_role = system_role;

  itemnet::llm::Client client(cfg.offline);
  const itemnet::llm::ChatResult result =
      client.chat({prompt}, params, cfg.provider(provider));
  const auto& reps_out = result.responses.at(0);
  for (std::size_t r = 0; r < reps_out.size(); ++r) {
    if (r > 0) std::cout << "\n---\n";
    std::cout << reps_out[r].text << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "itemnet: AI-assisted psychometric item generation and network "
      "reduction"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "TOML run configuration");
  app.add_option("--out", args.out_dir, "output directory for artifacts");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_value, "run seed (overrides config)");
  app.add_flag("--offline", args.offline,
               "forbid network access; any attempted connection fails");

  CLI::App* run = app.add_subcommand(
      "run", "generate items, embed them, and reduce the pool");
  bool items_only = false;
  bool embeddings_only = false;
  run->add_flag("--items-only", items_only, "stop after generation");
  run->add_flag("--embeddings-only", embeddings_only,
                "stop after generation and embedding");

  CLI::App* reduce = app.add_subcommand(
      "reduce", "reduce an existing pool with precomputed embeddings");
  std::string items_path;
  std::string embeddings_path;
  reduce->add_option("--items", items_path, "item pool CSV or JSON");
  reduce->add_option("--embeddings", embeddings_path,
                     "embedding matrix CSV (header = item ids)");

  CLI::App* generate =
      app.add_subcommand("generate", "generate items only (no reduction)");

  CLI::App* models =
      app.add_subcommand("models", "list models available per provider");
  std::string provider_filter;
  std::string type_filter;
  models->add_option("--provider", provider_filter,
                     "openai|anthropic|groq|jina|huggingface");
  models->add_option("--type", type_filter, "chat|embedding");

  CLI::App* chat = app.add_subcommand("chat", "one-shot chat completion");
  std::string chat_provider;
  std::string chat_model;
  std::string chat_prompt;
  std::string chat_system;
  double chat_temperature = 1.0;
  double chat_top_p = 1.0;
  int chat_reps = 1;
  int chat_max_tokens = 0;
  chat->add_option("--provider", chat_provider,
                   "openai|anthropic|groq|jina|huggingface");
  chat->add_option("--model", chat_model, "model id or alias");
  chat->add_option("--prompt", chat_prompt, "user prompt")->required();
  chat->add_option("--temperature", chat_temperature, "sampling temperature");
  chat->add_option("--top-p", chat_top_p, "nucleus sampling mass");
  chat->add_option("--reps", chat_reps, "completions per prompt");
  chat->add_option("--max-tokens", chat_max_tokens, "completion token cap");
  chat->add_option("--system", chat_system, "system role text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (seed_opt->count() > 0) args.seed = seed_value;

  try {
    if (run->parsed()) return cmd_run(args, items_only, embeddings_only);
    if (reduce->parsed()) return cmd_reduce(args, items_path, embeddings_path);
    if (generate->parsed()) return cmd_generate(args);
    if (models->parsed()) return cmd_models(args, provider_filter, type_filter);
    if (chat->parsed())
      return cmd_chat(args, chat_provider, chat_model, chat_prompt,
                      chat_temperature, chat_top_p, chat_reps, chat_max_tokens,
                      chat_system);
  } catch (const itemnet::OfflineViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const itemnet::RateLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const itemnet::ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const itemnet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const itemnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
