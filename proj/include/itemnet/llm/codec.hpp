#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "itemnet/llm/types.hpp"

namespace itemnet::llm {

// Translation between our request/response types and the two wire dialects:
// OpenAI-compatible JSON (openai, groq, jina, huggingface) and the Anthropic
// messages format. Pure functions; the transport lives in the client.

struct HttpRequest {
  std::string path;  // appended to the provider base URL
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;  // empty for GET
};

HttpRequest build_chat_request(const ProviderConfig& cfg, const ChatParams& params,
                               const std::string& prompt);
ChatResponse parse_chat_response(Provider provider, const std::string& body);

HttpRequest build_embed_request(const ProviderConfig& cfg, const std::string& model,
                                const std::vector<std::string>& texts);
std::vector<std::vector<double>> parse_embed_response(Provider provider,
                                                      const std::string& body);

HttpRequest build_models_request(const ProviderConfig& cfg);
std::vector<ModelEntry> parse_models_response(Provider provider,
                                              const std::string& body);

}  // namespace itemnet::llm
