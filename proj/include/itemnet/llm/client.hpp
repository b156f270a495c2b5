#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itemnet/items.hpp"
#include "itemnet/llm/types.hpp"

namespace itemnet::llm {

// HTTP client over the provider APIs. Requests run sequentially in input
// order (well below any provider's concurrency ceiling), 429s retry with
// jittered exponential backoff, and offline mode turns every would-be socket
// open into an OfflineViolation before a connection is attempted.
class Client {
 public:
  explicit Client(bool offline = false) : offline_(offline) {}

  void set_offline(bool on) { offline_ = on; }
  bool offline() const { return offline_; }

  ChatResult chat(const std::vector<std::string>& prompts,
                  const ChatParams& params, const ProviderConfig& cfg);

  EmbeddingMatrix embed_texts(const std::vector<std::string>& texts,
                              const std::string& model,
                              const ProviderConfig& cfg);

  ModelCatalog list_available_models(
      const std::vector<ProviderConfig>& cfgs,
      std::optional<Provider> provider_filter = std::nullopt,
      std::optional<std::string> type_filter = std::nullopt);

  // One line per completed HTTP exchange: method, URL, status. Keys and
  // bodies never appear here.
  const std::vector<std::string>& request_log() const { return request_log_; }

  // Number of texts sent per embedding request.
  static constexpr int kEmbedBatchSize = 96;

 private:
  struct Response {
    int status = 0;
    std::string body;
  };
  Response execute(const ProviderConfig& cfg, const std::string& method,
                   const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   const std::string& body);
  Response execute_with_retry(const ProviderConfig& cfg, const std::string& method,
                              const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              const std::string& body);

  bool offline_ = false;
  std::uint64_t backoff_nonce_ = 0;
  std::vector<std::string> request_log_;
};

}  // namespace itemnet::llm
