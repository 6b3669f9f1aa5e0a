#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsg/policy.hpp"

namespace hsg {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 1024;
  int timeout_ms = 30000;
  int max_retries = 3;          // retry budget after the first attempt
  int backoff_initial_ms = 250; // doubled per retry
  bool request_logprobs = true;
  std::string cache_dir;        // empty disables the on-disk response cache
  std::string api_key_env = "HSG_API_KEY";  // credentials come from the environment only

  static EndpointConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Transport seam: production uses cpp-httplib, tests inject scripted
/// transports. Connection-level failures throw a backend error.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                 const std::map<std::string, std::string>& headers,
                                 int timeout_ms) = 0;
};

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url);

/// Prompt templates with {q} / {a_truth} / {a_s} / {a_d} / {diag_first} /
/// {diag_second} placeholders, keyed by template id.
class TemplateSet {
 public:
  void add(std::string id, std::string text);
  /// Loads every "*.txt" in the directory; the id is the file stem.
  static TemplateSet load_dir(const std::string& dir);
  std::string render(const RoleContext& ctx) const;
  bool has(const std::string& id) const { return templates_.count(id) > 0; }

 private:
  std::map<std::string, std::string> templates_;
};

/// Chat-completion client over any OpenAI-style server. Sampling draws n
/// choices in one request; responses parse out text plus token-summed
/// log-probabilities when the server returns them. Well-formed responses are
/// never retried; connect failures and 429/5xx retry with exponential backoff
/// until the budget runs out (endpoint_unreachable). Responses are cached on
/// disk keyed by a request hash so reruns are reproducible and cheap.
class EndpointPolicy : public Policy {
 public:
  EndpointPolicy(EndpointConfig cfg, TemplateSet templates,
                 std::unique_ptr<HttpTransport> transport = nullptr);

  std::vector<Generation> sample(const RoleContext& ctx, int n, std::uint64_t seed) override;
  /// Chat servers cannot score arbitrary text: always unsupported_scoring.
  double logprob(const RoleContext& ctx, const std::string& text) override;
  std::string backend_id() const override { return "endpoint:" + cfg_.model; }

  /// Requests actually sent over the wire (cache hits excluded).
  long requests_sent() const { return requests_sent_; }

 private:
  nlohmann::json build_request(const RoleContext& ctx, int n, std::uint64_t seed) const;
  nlohmann::json post_with_retries(const nlohmann::json& request);

  EndpointConfig cfg_;
  TemplateSet templates_;
  std::unique_ptr<HttpTransport> transport_;
  std::atomic<long> requests_sent_{0};
};

/// Stable 64-bit content hash used for cache keys (FNV-1a).
std::uint64_t content_hash(const std::string& data);

}  // namespace hsg
