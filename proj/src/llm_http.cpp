#include "testgen/errors.hpp"
#include "testgen/llm.hpp"

#include <httplib.h>

#include <cstdlib>

namespace testgen {

namespace {

struct UrlParts {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/chat/completions
};

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/v1/chat/completions"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

class LiveBackend : public LlmBackend {
public:
  explicit LiveBackend(const LiveBackendConfig& config) : config_(config), url_(split_url(config.endpoint_url)) {
    if (!config_.api_key_env.empty()) {
      const char* key = std::getenv(config_.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw ConfigError("API key environment variable is not set: " + config_.api_key_env);
      }
      api_key_ = key;
    }
  }

  CompletionResult complete(const std::string& /*session_id*/,
                            const std::vector<ChatMessage>& messages,
                            double temperature) override {
    Json body;
    body["model"] = config_.model_name;
    Json msgs = Json::array();
    for (const auto& m : messages) {
      msgs.push_back(Json{{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = temperature;

    httplib::Client client(url_.base);
    client.set_connection_timeout(config_.http_timeout_s, 0);
    client.set_read_timeout(config_.http_timeout_s, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }

    auto res = client.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("request to " + url_.base + " failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      throw TransportError("endpoint returned status " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error("endpoint returned status " + std::to_string(res->status) + ": " +
                  res->body.substr(0, 200));
    }

    Json reply;
    try {
      reply = Json::parse(res->body);
    } catch (const std::exception& e) {
      throw Error(std::string("malformed completion response: ") + e.what());
    }
    if (!reply.contains("choices") || reply["choices"].empty()) {
      throw Error("completion response has no choices");
    }
    const Json& choice = reply["choices"][0];
    CompletionResult result;
    result.text = choice.at("message").at("content").get<std::string>();
    result.truncated = choice.value("finish_reason", "stop") == "length";
    return result;
  }

  std::string name() const override { return "live"; }

private:
  LiveBackendConfig config_;
  UrlParts url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<LlmBackend> make_live_backend(const LiveBackendConfig& config) {
  return std::make_unique<LiveBackend>(config);
}

}  // namespace testgen
