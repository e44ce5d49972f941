/* Copyright 2026 The recloop Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "recloop/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "recloop/error.hpp"

namespace recloop {

Endpoint parse_endpoint(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) {
    throw UsageError("endpoint URL needs a scheme: '" + std::string(url) + "'");
  }
  const std::string_view scheme = url.substr(0, sep);
  if (scheme != "http" && scheme != "https") {
    throw UsageError("unsupported endpoint scheme '" + std::string(scheme) + "'");
  }
  const std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  const std::string_view host = rest.substr(0, slash);
  if (host.empty()) throw UsageError("endpoint URL has no host: '" + std::string(url) + "'");
  std::string path = slash == std::string_view::npos ? "" : std::string(rest.substr(slash));
  while (!path.empty() && path.back() == '/') path.pop_back();
  constexpr std::string_view kSuffix = "/chat/completions";
  if (path.empty()) {
    path = "/v1/chat/completions";
  } else if (path.size() < kSuffix.size() ||
             path.compare(path.size() - kSuffix.size(), kSuffix.size(), kSuffix) != 0) {
    path += kSuffix;
  }
  return {std::string(scheme) + "://" + std::string(host), path};
}

std::string build_chat_body(const HttpBackendConfig& cfg, const ModelRequest& request) {
  nlohmann::ordered_json image_part = {
      {"type", "image_url"},
      {"image_url", {{"url", "data:image/png;base64," + base64_encode(request.image_png)}}}};
  nlohmann::ordered_json text_part = {{"type", "text"}, {"text", request.prompt}};
  nlohmann::ordered_json body = {
      {"model", cfg.model},
      {"messages",
       nlohmann::ordered_json::array(
           {{{"role", "user"}, {"content", nlohmann::ordered_json::array({image_part, text_part})}}})},
      {"temperature", 0},
      {"max_tokens", cfg.max_tokens},
  };
  if (cfg.seed) body["seed"] = *cfg.seed;
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed chat response: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw BackendError("chat response has no choices");
  }
  const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
  const auto content = msg.value("content", nlohmann::json());
  if (content.is_string()) return content.get<std::string>();
  if (content.is_null()) return "";
  if (content.is_array()) {
    std::string out;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text") {
        out += part.value("text", "");
      }
    }
    return out;
  }
  throw BackendError("chat response content has unexpected type");
}

HttpBackend::HttpBackend(HttpBackendConfig cfg)
    : cfg_(std::move(cfg)), endpoint_(parse_endpoint(cfg_.endpoint)) {
  if (cfg_.model.empty()) throw UsageError("live backend needs a model name");
  if (cfg_.max_attempts < 1) throw UsageError("max_attempts must be >= 1");
  if (cfg_.max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }
  slots_ = std::make_unique<std::counting_semaphore<>>(cfg_.max_in_flight);
}

HttpBackend::~HttpBackend() = default;

ModelReply HttpBackend::complete(const ModelRequest& request) {
  const std::string body = build_chat_body(cfg_, request);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  slots_->acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  std::string last_error;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms) *
                                  (1 << std::min(attempt - 2, 10)));
    }
    httplib::Client client(endpoint_.scheme_host_port);
    client.set_connection_timeout(cfg_.connect_timeout_s, 0);
    client.set_read_timeout(cfg_.read_timeout_s, 0);
    auto res = client.Post(endpoint_.path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("HTTP " + std::to_string(res->status) + " from " +
                             endpoint_.scheme_host_port + endpoint_.path + ": " +
                             res->body.substr(0, 500),
                         attempt);
    }
    return {parse_chat_response(res->body), 0.0, id()};
  }
  throw BackendError("live backend failed after " + std::to_string(cfg_.max_attempts) +
                         " attempts: " + last_error,
                     cfg_.max_attempts);
}

std::optional<std::string> HttpBackend::probe() const {
  httplib::Client client(endpoint_.scheme_host_port);
  client.set_connection_timeout(cfg_.connect_timeout_s, 0);
  client.set_read_timeout(cfg_.connect_timeout_s, 0);
  auto res = client.Get("/");
  if (!res) {
    return "cannot reach " + endpoint_.scheme_host_port + ": " + httplib::to_string(res.error());
  }
  return std::nullopt;
}

}  // namespace recloop
