#include "itemnet/llm/client.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "itemnet/errors.hpp"
#include "itemnet/llm/codec.hpp"
#include "itemnet/rng.hpp"

namespace itemnet::llm {

namespace {

// Splits "https://host[:port]/prefix" into an httplib origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("base_url must start with http:// or https://: " + base);
  const auto path_start = base.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base, ""};
  std::string prefix = base.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base.substr(0, path_start), prefix};
}

}  // namespace

Client::Response Client::execute(
    const ProviderConfig& cfg, const std::string& method, const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& headers,
    const std::string& body) {
  const std::string base =
      cfg.base_url.empty() ? default_base_url(cfg.provider) : cfg.base_url;
  const auto [origin, prefix] = split_base_url(base);
  const std::string full_path = prefix + path;
  if (offline_)
    throw OfflineViolation("offline mode forbids opening a connection to " +
                           origin + full_path);

  httplib::Client http(origin);
  http.set_connection_timeout(30);
  http.set_read_timeout(300);
  httplib::Headers hdrs(headers.begin(), headers.end());

  httplib::Result res = method == "GET"
                            ? http.Get(full_path, hdrs)
                            : http.Post(full_path, hdrs, body, "application/json");
  if (!res)
    throw IoError("request to " + origin + full_path + " failed: " +
                  httplib::to_string(res.error()));
  request_log_.push_back(method + " " + origin + full_path + " -> " +
                         std::to_string(res->status));
  return {res->status, res->body};
}

Client::Response Client::execute_with_retry(
    const ProviderConfig& cfg, const std::string& method, const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& headers,
    const std::string& body) {
  const int attempts = std::max(1, cfg.retry.max_attempts);
  for (int attempt = 1;; ++attempt) {
    Response res = execute(cfg, method, path, headers, body);
    if (res.status == 401 || res.status == 403)
      throw ConfigError("authentication with " + to_string(cfg.provider) +
                        " failed (HTTP " + std::to_string(res.status) +
                        "); check the API key");
    if (res.status != 429) return res;
    if (attempt >= attempts)
      throw RateLimitError(to_string(cfg.provider) + " rate limit persisted after " +
                           std::to_string(attempts) + " attempts");
    // Exponential backoff with jitter in [0.5, 1.5) of the nominal delay.
    Rng rng(splitmix64(0x927f6b1d5c3a84e1ULL ^ backoff_nonce_++));
    const double nominal =
        cfg.retry.backoff_base_seconds * std::pow(2.0, attempt - 1);
    const double delay = nominal * (0.5 + rng.uniform());
    std::this_thread::sleep_for(std::chrono::duration<double>(delay));
  }
}

ChatResult Client::chat(const std::vector<std::string>& prompts,
                        const ChatParams& params, const ProviderConfig& cfg) {
  if (prompts.empty()) throw InputError("chat needs at least one prompt");
  if (params.model.empty()) throw InputError("chat needs a model");
  if (params.reps < 1) throw InputError("chat reps must be positive");
  if (params.temperature < 0.0) throw InputError("temperature must be >= 0");
  if (!(params.top_p > 0.0) || params.top_p > 1.0)
    throw InputError("top_p must lie in (0, 1]");

  ChatResult out;
  out.responses.resize(prompts.size());
  for (size_t i = 0; i < prompts.size(); ++i) {
    const HttpRequest req = build_chat_request(cfg, params, prompts[i]);
    for (int rep = 0; rep < params.reps; ++rep) {
      Response res =
          execute_with_retry(cfg, "POST", req.path, req.headers, req.body);
      if (res.status != 200)
        throw ProtocolError("chat request to " + to_string(cfg.provider) +
                                " returned HTTP " + std::to_string(res.status),
                            res.body);
      out.responses[i].push_back(parse_chat_response(cfg.provider, res.body));
    }
  }
  return out;
}

EmbeddingMatrix Client::embed_texts(const std::vector<std::string>& texts,
                                    const std::string& model,
                                    const ProviderConfig& cfg) {
  if (texts.empty()) throw InputError("embed_texts needs at least one text");
  for (const auto& t : texts)
    if (t.empty()) throw InputError("embed_texts forbids empty texts");
  if (model.empty()) throw InputError("embed_texts needs a model");

  std::vector<std::vector<double>> vectors;
  vectors.reserve(texts.size());
  for (size_t start = 0; start < texts.size(); start += kEmbedBatchSize) {
    const size_t stop = std::min(texts.size(), start + kEmbedBatchSize);
    const std::vector<std::string> batch(texts.begin() + static_cast<ptrdiff_t>(start),
                                         texts.begin() + static_cast<ptrdiff_t>(stop));
    const HttpRequest req = build_embed_request(cfg, model, batch);
    Response res = execute_with_retry(cfg, "POST", req.path, req.headers, req.body);
    if (res.status != 200)
      throw ProtocolError("embedding request to " + to_string(cfg.provider) +
                              " returned HTTP " + std::to_string(res.status),
                          res.body);
    auto parsed = parse_embed_response(cfg.provider, res.body);
    if (parsed.size() != batch.size())
      throw ProtocolError("embedding response covers " +
                              std::to_string(parsed.size()) + " of " +
                              std::to_string(batch.size()) + " texts",
                          res.body);
    for (auto& vec : parsed) vectors.push_back(std::move(vec));
  }

  const size_t dims = vectors.front().size();
  for (const auto& vec : vectors)
    if (vec.size() != dims)
      throw ProtocolError("embedding dimension changed across batches: " +
                              std::to_string(vec.size()) + " vs " +
                              std::to_string(dims),
                          "");

  EmbeddingMatrix out;
  out.kind = EmbeddingMatrix::Kind::kFull;
  out.values.resize(static_cast<Eigen::Index>(dims),
                    static_cast<Eigen::Index>(vectors.size()));
  out.item_ids.resize(vectors.size());
  for (size_t j = 0; j < vectors.size(); ++j) {
    out.item_ids[j] = std::to_string(j);  // placeholder; callers re-key by item
    for (size_t d = 0; d < dims; ++d)
      out.values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) =
          vectors[j][d];
  }
  return out;
}

ModelCatalog Client::list_available_models(
    const std::vector<ProviderConfig>& cfgs,
    std::optional<Provider> provider_filter,
    std::optional<std::string> type_filter) {
  ModelCatalog catalog;
  if (cfgs.empty()) {
    catalog.errors.emplace_back(Provider::kOpenai, "no providers configured");
    return catalog;
  }
  for (const auto& cfg : cfgs) {
    if (provider_filter && cfg.provider != *provider_filter) continue;
    const HttpRequest req = build_models_request(cfg);
    try {
      Response res = execute_with_retry(cfg, "GET", req.path, req.headers, "");
      if (res.status != 200)
        throw ProtocolError("model catalog request returned HTTP " +
                                std::to_string(res.status),
                            res.body);
      for (auto& entry : parse_models_response(cfg.provider, res.body)) {
        if (type_filter && entry.type != *type_filter) continue;
        const bool seen = std::any_of(
            catalog.entries.begin(), catalog.entries.end(), [&](const auto& e) {
              return e.provider == entry.provider && e.id == entry.id;
            });
        if (!seen) catalog.entries.push_back(std::move(entry));
      }
    } catch (const Error& err) {
      catalog.errors.emplace_back(cfg.provider, err.what());
    }
  }
  return catalog;
}

}  // namespace itemnet::llm
