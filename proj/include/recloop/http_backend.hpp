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

#pragma once

#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include "recloop/model.hpp"

namespace recloop {

struct HttpBackendConfig {
  // Full chat-completions URL, or a base URL to which "/chat/completions"
  // (or "/v1/chat/completions" for a bare host) is appended.
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the API key; never the key.
  std::string api_key_env = "OPENAI_API_KEY";
  int max_attempts = 3;
  int backoff_ms = 250;
  int connect_timeout_s = 10;
  int read_timeout_s = 300;
  int max_in_flight = 8;
  int max_tokens = 512;
  std::optional<int> seed = 0;
};

struct Endpoint {
  std::string scheme_host_port;  // "http://host:8000"
  std::string path;              // "/v1/chat/completions"
};

// Throws UsageError on a URL without scheme or host.
Endpoint parse_endpoint(std::string_view url);

// Request body for one chat-completions call: one user message holding one
// base64 PNG image part followed by one text part, temperature 0.
std::string build_chat_body(const HttpBackendConfig& cfg, const ModelRequest& request);

// Text of the first choice. Throws BackendError on malformed bodies.
std::string parse_chat_response(std::string_view body);

// OpenAI-compatible chat-completions client.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  ~HttpBackend() override;

  // Retries transport failures, 429 and 5xx with exponential backoff; throws
  // BackendError carrying the attempt count once attempts are exhausted.
  ModelReply complete(const ModelRequest& request) override;
  std::string id() const override { return "live:" + cfg_.model; }

  // Any HTTP answer from the server counts as reachable. Returns the failure
  // reason otherwise.
  std::optional<std::string> probe() const;

 private:
  HttpBackendConfig cfg_;
  Endpoint endpoint_;
  std::string api_key_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace recloop
