#include "itemnet/config.hpp"

#include <cstdlib>
#include <set>

#include "itemnet/errors.hpp"

namespace itemnet {

namespace {

// "${VAR}" -> contents of VAR. Only API keys get this treatment.
std::string interpolate_key(const std::string& raw) {
  if (raw.size() >= 3 && raw.rfind("${", 0) == 0 && raw.back() == '}') {
    const std::string var = raw.substr(2, raw.size() - 3);
    const char* value = std::getenv(var.c_str());
    if (!value || !*value)
      throw ConfigError("api_key references unset environment variable " + var);
    return value;
  }
  return raw;
}

std::string env_or_empty(const char* var) {
  const char* value = std::getenv(var);
  return value ? value : "";
}

void reject_unknown(const std::vector<std::pair<std::string, toml::Value>>& entries,
                    const std::set<std::string>& known,
                    const std::string& section) {
  for (const auto& [key, value] : entries) {
    if (known.find(key) == known.end())
      throw SchemaError("unknown config key '" + key + "' in [" + section + "]");
  }
}

}  // namespace

llm::ProviderConfig RunConfig::provider(llm::Provider p) const {
  for (const auto& cfg : providers)
    if (cfg.provider == p) return cfg;
  llm::ProviderConfig cfg;
  cfg.provider = p;
  cfg.api_key = env_or_empty(llm::env_key_variable(p).c_str());
  return cfg;
}

llm::ChatParams RunConfig::chat_params() const {
  llm::ChatParams params;
  params.model = models.chat_model;
  params.temperature = models.temperature;
  params.top_p = models.top_p;
  params.reps = models.reps;
  params.max_tokens = models.max_tokens;
  params.system_role = generation.system_role;
  return params;
}

RunConfig run_config_from_toml(const toml::Table& table) {
  RunConfig cfg;

  reject_unknown(table.section("run"), {"seed", "out", "offline"}, "run");
  if (const auto* v = table.find("run.seed"))
    cfg.pipeline.seed = static_cast<std::uint64_t>(v->as_integer("run.seed"));
  if (const auto* v = table.find("run.out")) cfg.out_dir = v->as_string("run.out");
  if (const auto* v = table.find("run.offline"))
    cfg.offline = v->as_boolean("run.offline");

  reject_unknown(table.section("generation"),
                 {"domain", "scale_title", "audience", "target_n", "adaptive",
                  "prompt_notes", "system_role", "response_options"},
                 "generation");
  auto& gen = cfg.generation;
  if (const auto* v = table.find("generation.domain"))
    gen.domain = v->as_string("generation.domain");
  if (const auto* v = table.find("generation.scale_title"))
    gen.scale_title = v->as_string("generation.scale_title");
  if (const auto* v = table.find("generation.audience"))
    gen.audience = v->as_string("generation.audience");
  if (const auto* v = table.find("generation.target_n"))
    gen.target_n = static_cast<int>(v->as_integer("generation.target_n"));
  if (const auto* v = table.find("generation.adaptive"))
    gen.adaptive = v->as_boolean("generation.adaptive");
  if (const auto* v = table.find("generation.prompt_notes"))
    gen.prompt_notes = v->as_string("generation.prompt_notes");
  if (const auto* v = table.find("generation.system_role"))
    gen.system_role = v->as_string("generation.system_role");
  if (const auto* v = table.find("generation.response_options"))
    gen.response_options = v->as_string_array("generation.response_options");

  std::vector<std::pair<std::string, std::vector<std::string>>> types;
  for (const auto& [type, value] : table.section("attributes"))
    types.emplace_back(type, value.as_string_array("attributes." + type));
  if (!types.empty()) gen.attribute_spec = AttributeSpec(std::move(types));

  for (const auto& [type, value] : table.section("type_definitions")) {
    if (!gen.attribute_spec.has_type(type))
      throw SchemaError("type_definitions names unknown item type '" + type + "'");
    gen.item_type_definitions[type] = value.as_string("type_definitions." + type);
  }
  for (const auto& [type, value] : table.section("custom_prompts"))
    gen.main_prompts[type] = value.as_string("custom_prompts." + type);

  reject_unknown(table.section("item_examples"), {"statements"}, "item_examples");
  if (const auto* v = table.find("item_examples.statements")) {
    int n = 0;
    for (const auto& s : v->as_string_array("item_examples.statements")) {
      Item ex;
      ex.id = "example-" + std::to_string(++n);
      ex.statement = s;
      gen.item_examples.push_back(std::move(ex));
    }
  }

  reject_unknown(table.section("pipeline"),
                 {"ega_model", "all_together", "run_overall", "keep_org",
                  "items_only", "embeddings_only", "uva_cutoff",
                  "stability_threshold", "n_boot"},
                 "pipeline");
  auto& pipe = cfg.pipeline;
  if (const auto* v = table.find("pipeline.ega_model"))
    pipe.ega_model = model_choice_from_string(v->as_string("pipeline.ega_model"));
  if (const auto* v = table.find("pipeline.all_together"))
    pipe.all_together = v->as_boolean("pipeline.all_together");
  if (const auto* v = table.find("pipeline.run_overall"))
    pipe.run_overall = v->as_boolean("pipeline.run_overall");
  if (const auto* v = table.find("pipeline.keep_org"))
    pipe.keep_org = v->as_boolean("pipeline.keep_org");
  if (const auto* v = table.find("pipeline.items_only"))
    pipe.items_only = v->as_boolean("pipeline.items_only");
  if (const auto* v = table.find("pipeline.embeddings_only"))
    pipe.embeddings_only = v->as_boolean("pipeline.embeddings_only");
  if (const auto* v = table.find("pipeline.uva_cutoff"))
    pipe.uva_cutoff = v->as_float("pipeline.uva_cutoff");
  if (const auto* v = table.find("pipeline.stability_threshold"))
    pipe.stability_threshold = v->as_float("pipeline.stability_threshold");
  if (const auto* v = table.find("pipeline.n_boot"))
    pipe.n_boot = static_cast<int>(v->as_integer("pipeline.n_boot"));
  pipe.check();

  reject_unknown(table.section("models"),
                 {"chat_provider", "chat", "embedding_provider", "embedding",
                  "temperature", "top_p", "reps", "max_tokens"},
                 "models");
  auto& models = cfg.models;
  if (const auto* v = table.find("models.chat_provider"))
    models.chat_provider = v->as_string("models.chat_provider");
  if (const auto* v = table.find("models.chat"))
    models.chat_model = v->as_string("models.chat");
  if (const auto* v = table.find("models.embedding_provider"))
    models.embedding_provider = v->as_string("models.embedding_provider");
  if (const auto* v = table.find("models.embedding"))
    models.embedding_model = v->as_string("models.embedding");
  if (const auto* v = table.find("models.temperature"))
    models.temperature = v->as_float("models.temperature");
  if (const auto* v = table.find("models.top_p"))
    models.top_p = v->as_float("models.top_p");
  if (const auto* v = table.find("models.reps"))
    models.reps = static_cast<int>(v->as_integer("models.reps"));
  if (const auto* v = table.find("models.max_tokens"))
    models.max_tokens = static_cast<int>(v->as_integer("models.max_tokens"));
  llm::provider_from_string(models.chat_provider);
  llm::provider_from_string(models.embedding_provider);

  for (const char* name : {"openai", "anthropic", "groq", "jina", "huggingface"}) {
    const std::string section = std::string("provider.") + name;
    const auto entries = table.section(section);
    if (entries.empty()) continue;
    reject_unknown(entries,
                   {"api_key", "base_url", "max_in_flight", "max_attempts",
                    "backoff_base_seconds"},
                   section);
    llm::ProviderConfig pc;
    pc.provider = llm::provider_from_string(name);
    pc.api_key = env_or_empty(llm::env_key_variable(pc.provider).c_str());
    if (const auto* v = table.find(section + ".api_key"))
      pc.api_key = interpolate_key(v->as_string(section + ".api_key"));
    if (const auto* v = table.find(section + ".base_url"))
      pc.base_url = v->as_string(section + ".base_url");
    if (const auto* v = table.find(section + ".max_in_flight"))
      pc.max_in_flight =
          static_cast<int>(v->as_integer(section + ".max_in_flight"));
    if (const auto* v = table.find(section + ".max_attempts"))
      pc.retry.max_attempts =
          static_cast<int>(v->as_integer(section + ".max_attempts"));
    if (const auto* v = table.find(section + ".backoff_base_seconds"))
      pc.retry.backoff_base_seconds =
          v->as_float(section + ".backoff_base_seconds");
    cfg.providers.push_back(std::move(pc));
  }

  reject_unknown(table.section("inputs"), {"items", "embeddings"}, "inputs");
  if (const auto* v = table.find("inputs.items"))
    cfg.items_path = v->as_string("inputs.items");
  if (const auto* v = table.find("inputs.embeddings"))
    cfg.embeddings_path = v->as_string("inputs.embeddings");

  if (!gen.main_prompts.empty() && !gen.attribute_spec.type_names().empty()) {
    const ValidationReport report = validate_custom_prompts(gen);
    if (report.has_errors())
      throw ConfigError("invalid custom prompts:\n" + report.to_string());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_toml(toml::parse_file(path));
}

}  // namespace itemnet
