#include "hsg/endpoint_client.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "hsg/errors.hpp"

namespace hsg {

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
  EndpointConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "base_url") {
      cfg.base_url = value.get<std::string>();
    } else if (key == "path") {
      cfg.path = value.get<std::string>();
    } else if (key == "model") {
      cfg.model = value.get<std::string>();
    } else if (key == "temperature") {
      cfg.temperature = value.get<double>();
    } else if (key == "top_p") {
      cfg.top_p = value.get<double>();
    } else if (key == "max_tokens") {
      cfg.max_tokens = value.get<int>();
    } else if (key == "timeout_ms") {
      cfg.timeout_ms = value.get<int>();
    } else if (key == "max_retries") {
      cfg.max_retries = value.get<int>();
    } else if (key == "backoff_initial_ms") {
      cfg.backoff_initial_ms = value.get<int>();
    } else if (key == "request_logprobs") {
      cfg.request_logprobs = value.get<bool>();
    } else if (key == "cache_dir") {
      cfg.cache_dir = value.get<std::string>();
    } else if (key == "api_key_env") {
      cfg.api_key_env = value.get<std::string>();
    } else if (key == "api_key") {
      throw config_error("endpoint_config",
                         "api_key must not appear in config files; set it via the environment "
                         "variable named by api_key_env");
    } else {
      throw config_error("endpoint_config", "unknown endpoint config field: " + key);
    }
  }
  return cfg;
}

nlohmann::json EndpointConfig::to_json() const {
  return {{"base_url", base_url},
          {"path", path},
          {"model", model},
          {"temperature", temperature},
          {"top_p", top_p},
          {"max_tokens", max_tokens},
          {"timeout_ms", timeout_ms},
          {"max_retries", max_retries},
          {"backoff_initial_ms", backoff_initial_ms},
          {"request_logprobs", request_logprobs},
          {"cache_dir", cache_dir},
          {"api_key_env", api_key_env}};
}

std::uint64_t content_hash(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::string base_url) : base_url_(std::move(base_url)) {}

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& headers,
                         int timeout_ms) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    httplib::Headers hh(headers.begin(), headers.end());
    auto result = client.Post(path, hh, body, "application/json");
    if (!result) {
      throw backend_error("connect_failure",
                          "HTTP request failed: " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }

 private:
  std::string base_url_;
};

std::string cache_file_for(const std::string& cache_dir, const std::string& request_body) {
  std::ostringstream name;
  name << std::hex << content_hash(request_body) << ".json";
  return (std::filesystem::path(cache_dir) / name.str()).string();
}

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(const std::string& base_url) {
  return std::make_unique<HttplibTransport>(base_url);
}

void TemplateSet::add(std::string id, std::string text) {
  templates_[std::move(id)] = std::move(text);
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
  TemplateSet set;
  if (!std::filesystem::is_directory(dir)) {
    throw config_error("template_dir", "prompt template directory not found: " + dir);
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::stringstream buffer;
    buffer << in.rdbuf();
    set.add(entry.path().stem().string(), buffer.str());
  }
  return set;
}

std::string TemplateSet::render(const RoleContext& ctx) const {
  auto it = templates_.find(ctx.prompt_template_id);
  if (it == templates_.end()) {
    throw config_error("missing_template",
                       "no prompt template with id: " + ctx.prompt_template_id);
  }
  std::string out = it->second;
  for (const auto& [name, value] : ctx.inputs) {
    const std::string placeholder = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

EndpointPolicy::EndpointPolicy(EndpointConfig cfg, TemplateSet templates,
                               std::unique_ptr<HttpTransport> transport)
    : cfg_(std::move(cfg)), templates_(std::move(templates)), transport_(std::move(transport)) {
  if (!transport_) transport_ = make_httplib_transport(cfg_.base_url);
}

nlohmann::json EndpointPolicy::build_request(const RoleContext& ctx, int n,
                                             std::uint64_t seed) const {
  nlohmann::json req{{"model", cfg_.model},
                     {"messages",
                      nlohmann::json::array({{{"role", "user"}, {"content", templates_.render(ctx)}}})},
                     {"temperature", cfg_.temperature},
                     {"top_p", cfg_.top_p},
                     {"max_tokens", cfg_.max_tokens},
                     {"n", n},
                     {"seed", seed}};
  if (cfg_.request_logprobs) req["logprobs"] = true;
  return req;
}

nlohmann::json EndpointPolicy::post_with_retries(const nlohmann::json& request) {
  const std::string body = request.dump();

  std::string cache_file;
  if (!cfg_.cache_dir.empty()) {
    std::filesystem::create_directories(cfg_.cache_dir);
    cache_file = cache_file_for(cfg_.cache_dir, body);
    std::ifstream cached(cache_file);
    if (cached) {
      try {
        const auto entry = nlohmann::json::parse(cached);
        if (entry.value("request", "") == body) return entry.at("response");
      } catch (const nlohmann::json::exception&) {
        // corrupt cache entry: fall through and refetch
      }
    }
  }

  std::map<std::string, std::string> headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers["Authorization"] = std::string("Bearer ") + key;
  }

  int attempt = 0;
  std::string last_failure;
  while (attempt <= cfg_.max_retries) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg_.backoff_initial_ms << (attempt - 1)));
    }
    ++attempt;
    HttpResponse response;
    try {
      ++requests_sent_;
      response = transport_->post_json(cfg_.path, body, headers, cfg_.timeout_ms);
    } catch (const Error& e) {
      last_failure = e.what();
      continue;
    }
    if (response.status == 429 || response.status >= 500) {
      last_failure = "HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status != 200) {
      // Well-formed error responses are never retried.
      throw backend_error("endpoint_rejected",
                          "endpoint returned HTTP " + std::to_string(response.status) + ": " +
                              response.body.substr(0, 200));
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& e) {
      throw backend_error("malformed_response",
                          std::string("endpoint returned unparseable JSON: ") + e.what());
    }
    if (!cache_file.empty()) {
      std::ofstream out(cache_file);
      out << nlohmann::json{{"request", body}, {"response", parsed}}.dump();
    }
    return parsed;
  }
  throw backend_error("endpoint_unreachable",
                      "retry budget exhausted (" + std::to_string(cfg_.max_retries) +
                          " retries): " + last_failure);
}

std::vector<Generation> EndpointPolicy::sample(const RoleContext& ctx, int n,
                                               std::uint64_t seed) {
  if (n < 1) throw assertion_error("bad_sample_count", "sample count must be >= 1");
  ctx.validate();
  const auto response = post_with_retries(build_request(ctx, n, seed));

  if (!response.contains("choices") || !response.at("choices").is_array() ||
      response.at("choices").empty()) {
    throw backend_error("malformed_response", "endpoint response carries no choices");
  }
  std::vector<Generation> out;
  for (const auto& choice : response.at("choices")) {
    Generation g;
    g.text = choice.at("message").at("content").get<std::string>();
    g.truncated = choice.value("finish_reason", "") == "length";
    if (choice.contains("logprobs") && choice.at("logprobs").is_object() &&
        choice.at("logprobs").contains("content")) {
      double total = 0.0;
      for (const auto& token : choice.at("logprobs").at("content")) {
        total += token.at("logprob").get<double>();
      }
      g.logprob = total;  // sequence log-probability as the token sum
    }
    out.push_back(std::move(g));
  }
  for (const auto& g : out) {
    if (g.truncated) {
      throw backend_error("generation_truncated",
                          "generation hit max_tokens; raise max_tokens or shorten the prompt");
    }
  }
  if (static_cast<int>(out.size()) != n) {
    throw backend_error("malformed_response",
                        "asked for " + std::to_string(n) + " choices, got " +
                            std::to_string(out.size()));
  }
  return out;
}

double EndpointPolicy::logprob(const RoleContext& ctx, const std::string& text) {
  (void)ctx;
  (void)text;
  throw backend_error("unsupported_scoring",
                      "chat-completion endpoints cannot score arbitrary text");
}

}  // namespace hsg
