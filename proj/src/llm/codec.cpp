#include "itemnet/llm/codec.hpp"

#include <algorithm>
#include <cctype>

#include "itemnet/errors.hpp"

namespace itemnet::llm {

using nlohmann::json;

std::string to_string(Provider p) {
  switch (p) {
    case Provider::kOpenai: return "openai";
    case Provider::kAnthropic: return "anthropic";
    case Provider::kGroq: return "groq";
    case Provider::kJina: return "jina";
    case Provider::kHuggingface: return "huggingface";
  }
  return "openai";
}

Provider provider_from_string(const std::string& s) {
  if (s == "openai") return Provider::kOpenai;
  if (s == "anthropic") return Provider::kAnthropic;
  if (s == "groq") return Provider::kGroq;
  if (s == "jina") return Provider::kJina;
  if (s == "huggingface") return Provider::kHuggingface;
  throw ConfigError("unknown provider: " + s);
}

std::string env_key_variable(Provider p) {
  switch (p) {
    case Provider::kOpenai: return "OPENAI_API_KEY";
    case Provider::kAnthropic: return "ANTHROPIC_API_KEY";
    case Provider::kGroq: return "GROQ_API_KEY";
    case Provider::kJina: return "JINA_API_KEY";
    case Provider::kHuggingface: return "HF_TOKEN";
  }
  return "";
}

std::string default_base_url(Provider p) {
  switch (p) {
    case Provider::kOpenai: return "https://api.openai.com/v1";
    case Provider::kAnthropic: return "https://api.anthropic.com/v1";
    case Provider::kGroq: return "https://api.groq.com/openai/v1";
    case Provider::kJina: return "https://api.jina.ai/v1";
    case Provider::kHuggingface: return "https://router.huggingface.co/v1";
  }
  return "";
}

std::string resolve_model_alias(Provider p, const std::string& name) {
  // Snapshot table; full model ids pass through unchanged.
  static const std::vector<std::pair<std::pair<Provider, std::string>, std::string>>
      kAliases = {
          {{Provider::kOpenai, "gpt4o"}, "gpt-4o"},
          {{Provider::kOpenai, "chatgpt"}, "gpt-4o"},
          {{Provider::kAnthropic, "claude"}, "claude-opus-4.6"},
          {{Provider::kAnthropic, "opus"}, "claude-opus-4.6"},
          {{Provider::kAnthropic, "sonnet"}, "claude-opus-4"},
          {{Provider::kAnthropic, "haiku"}, "claude-opus-4"},
          {{Provider::kGroq, "llama3"}, "llama-3.3-70b-versatile"},
          {{Provider::kGroq, "qwen"}, "qwen-2.5-72b"},
          {{Provider::kGroq, "mixtral"}, "mixtral-8x7b-32768"},
          {{Provider::kGroq, "gemma"}, "gemma2-9b-it"},
      };
  for (const auto& [key, id] : kAliases)
    if (key.first == p && key.second == name) return id;
  return name;
}

namespace {

std::vector<std::pair<std::string, std::string>> auth_headers(
    const ProviderConfig& cfg) {
  if (cfg.provider == Provider::kAnthropic) {
    return {{"x-api-key", cfg.api_key},
            {"anthropic-version", "2023-06-01"},
            {"content-type", "application/json"}};
  }
  return {{"Authorization", "Bearer " + cfg.api_key},
          {"content-type", "application/json"}};
}

json parse_body(Provider provider, const std::string& body,
                const char* context) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded())
    throw ProtocolError(std::string(context) + " from " + to_string(provider) +
                            " is not valid JSON",
                        body);
  return parsed;
}

}  // namespace

HttpRequest build_chat_request(const ProviderConfig& cfg, const ChatParams& params,
                               const std::string& prompt) {
  HttpRequest req;
  req.headers = auth_headers(cfg);
  json body;
  body["model"] = resolve_model_alias(cfg.provider, params.model);
  if (cfg.provider == Provider::kAnthropic) {
    req.path = "/messages";
    // The messages endpoint requires an explicit output budget.
    body["max_tokens"] = params.max_tokens.value_or(4096);
    if (params.system_role) body["system"] = *params.system_role;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  } else {
    req.path = "/chat/completions";
    if (params.max_tokens) body["max_tokens"] = *params.max_tokens;
    json messages = json::array();
    if (params.system_role)
      messages.push_back({{"role", "system"}, {"content", *params.system_role}});
    messages.push_back({{"role", "user"}, {"content", prompt}});
    body["messages"] = std::move(messages);
  }
  body["temperature"] = params.temperature;
  body["top_p"] = params.top_p;
  req.body = body.dump();
  return req;
}

ChatResponse parse_chat_response(Provider provider, const std::string& body) {
  const json parsed = parse_body(provider, body, "chat response");
  ChatResponse out;
  try {
    if (provider == Provider::kAnthropic) {
      for (const auto& block : parsed.at("content"))
        if (block.at("type") == "text")
          out.text += block.at("text").get<std::string>();
      if (parsed.contains("usage")) {
        out.usage.input_tokens = parsed["usage"].value("input_tokens", -1LL);
        out.usage.output_tokens = parsed["usage"].value("output_tokens", -1LL);
      }
    } else {
      out.text =
          parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      if (parsed.contains("usage")) {
        out.usage.input_tokens = parsed["usage"].value("prompt_tokens", -1LL);
        out.usage.output_tokens = parsed["usage"].value("completion_tokens", -1LL);
      }
    }
  } catch (const json::exception&) {
    throw ProtocolError("chat response from " + to_string(provider) +
                            " is missing expected fields",
                        body);
  }
  return out;
}

HttpRequest build_embed_request(const ProviderConfig& cfg, const std::string& model,
                                const std::vector<std::string>& texts) {
  if (cfg.provider == Provider::kAnthropic)
    throw ConfigError("anthropic offers no embedding endpoint; use openai, jina, or huggingface");
  HttpRequest req;
  req.path = "/embeddings";
  req.headers = auth_headers(cfg);
  json body;
  body["model"] = resolve_model_alias(cfg.provider, model);
  body["input"] = texts;
  req.body = body.dump();
  return req;
}

std::vector<std::vector<double>> parse_embed_response(Provider provider,
                                                      const std::string& body) {
  const json parsed = parse_body(provider, body, "embedding response");
  std::vector<std::vector<double>> out;
  try {
    std::vector<std::pair<int, std::vector<double>>> keyed;
    for (const auto& row : parsed.at("data")) {
      keyed.emplace_back(row.value("index", static_cast<int>(keyed.size())),
                         row.at("embedding").get<std::vector<double>>());
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [index, vec] : keyed) out.push_back(std::move(vec));
  } catch (const json::exception&) {
    throw ProtocolError("embedding response from " + to_string(provider) +
                            " is missing expected fields",
                        body);
  }
  return out;
}

HttpRequest build_models_request(const ProviderConfig& cfg) {
  HttpRequest req;
  req.path = "/models";
  req.headers = auth_headers(cfg);
  return req;
}

std::vector<ModelEntry> parse_models_response(Provider provider,
                                              const std::string& body) {
  const json parsed = parse_body(provider, body, "model catalog");
  std::vector<ModelEntry> out;
  try {
    for (const auto& row : parsed.at("data")) {
      ModelEntry entry;
      entry.provider = provider;
      entry.id = row.at("id").get<std::string>();
      std::string lowered = entry.id;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      entry.type =
          lowered.find("embed") != std::string::npos ? "embedding" : "chat";
      out.push_back(std::move(entry));
    }
  } catch (const json::exception&) {
    throw ProtocolError("model catalog from " + to_string(provider) +
                            " is missing expected fields",
                        body);
  }
  return out;
}

}  // namespace itemnet::llm
