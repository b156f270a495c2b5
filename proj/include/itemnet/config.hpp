#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itemnet/llm/types.hpp"
#include "itemnet/pipeline.hpp"
#include "itemnet/prompt.hpp"
#include "itemnet/toml.hpp"

namespace itemnet {

struct ModelsConfig {
  std::string chat_provider = "openai";
  std::string chat_model = "gpt-4o";
  std::string embedding_provider = "openai";
  std::string embedding_model = "text-embedding-3-small";
  double temperature = 1.0;
  double top_p = 1.0;
  int reps = 1;
  std::optional<int> max_tokens;
};

// Fully resolved run configuration. Loading validates everything up front so
// a bad config never gets as far as a network call.
struct RunConfig {
  GenerationSpec generation;
  PipelineOptions pipeline;
  std::vector<llm::ProviderConfig> providers;
  ModelsConfig models;
  std::string items_path;       // precomputed item pool (reduce runs)
  std::string embeddings_path;  // precomputed embeddings (reduce runs)
  std::string out_dir = "aigenie_out";
  bool offline = false;

  // Config entry for the provider, or a default entry whose key comes from
  // the provider's environment variable.
  llm::ProviderConfig provider(llm::Provider p) const;
  llm::ChatParams chat_params() const;
};

RunConfig run_config_from_toml(const toml::Table& table);
RunConfig load_run_config(const std::string& path);

}  // namespace itemnet
