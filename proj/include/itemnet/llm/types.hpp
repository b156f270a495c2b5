#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace itemnet::llm {

enum class Provider { kOpenai, kAnthropic, kGroq, kJina, kHuggingface };

std::string to_string(Provider p);
Provider provider_from_string(const std::string& s);

// Environment variable consulted when a config omits the key.
std::string env_key_variable(Provider p);

std::string default_base_url(Provider p);

struct RetryPolicy {
  int max_attempts = 5;
  double backoff_base_seconds = 1.0;
};

struct ProviderConfig {
  Provider provider = Provider::kOpenai;
  std::string api_key;   // never logged, never written to artifacts
  std::string base_url;  // empty -> provider default
  int max_in_flight = 4;
  RetryPolicy retry;
};

struct ChatParams {
  std::string model;
  double temperature = 1.0;
  double top_p = 1.0;
  std::optional<std::string> system_role;
  int reps = 1;
  std::optional<int> max_tokens;
};

struct TokenUsage {
  long long input_tokens = -1;  // -1 when the provider did not report it
  long long output_tokens = -1;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
};

// responses[i][r] is rep r for prompt i; always reps entries per prompt.
struct ChatResult {
  std::vector<std::vector<ChatResponse>> responses;
};

struct ModelEntry {
  Provider provider;
  std::string id;
  std::string type;  // "chat" | "embedding"
};

struct ModelCatalog {
  std::vector<ModelEntry> entries;
  std::vector<std::pair<Provider, std::string>> errors;  // per-provider notes
};

// Shorthand aliases ("sonnet", "gpt4o", ...) resolved against a static table;
// unknown names pass through untouched so full model ids always work.
std::string resolve_model_alias(Provider p, const std::string& name);

}  // namespace itemnet::llm
