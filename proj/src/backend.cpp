#include "radeval/backend.hpp"

#include <cstdlib>
#include <thread>

#ifdef RADEVAL_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

namespace radeval {

namespace {

/// Splits "https://host[:port]" from the endpoint; the request path comes from
/// the backend config.
class HttpBackend : public Backend {
 public:
  HttpBackend(HttpBackendConfig config, std::string identity)
      : config_(std::move(config)), identity_(std::move(identity)) {
    const char* secret = std::getenv(config_.api_key_env.c_str());
    if (!secret || !*secret)
      throw BackendError("SecretUnset: environment variable " + config_.api_key_env);
    api_key_ = secret;
  }

  std::string identity() const override { return identity_; }
  bool deterministic() const override { return false; }

  std::string send(const ChatHistory& history, const SessionView&) override {
    nlohmann::ordered_json body;
    body["model"] = config_.model;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& m : history) messages.push_back({{"role", m.role},
                                                      {"content", m.content}});
    body["messages"] = std::move(messages);
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::seconds(1));
      try {
        httplib::Client client(config_.endpoint);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) {
          last_error = "transport error " + httplib::to_string(res.error());
          continue;
        }
        if (res->status != 200) {
          last_error = "http status " + std::to_string(res->status);
          continue;
        }
        const auto reply = nlohmann::ordered_json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content")
            .get<std::string>();
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    throw BackendError("chat completion failed after retries: " + last_error);
  }

 private:
  HttpBackendConfig config_;
  std::string identity_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& config,
                                           std::string identity) {
  return std::make_unique<HttpBackend>(config, std::move(identity));
}

}  // namespace radeval
