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

#include "recloop/model.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include <openssl/evp.h>

#include "recloop/error.hpp"

namespace recloop {

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::kRec: return "REC";
    case TaskKind::kGdesc: return "GDESC";
    case TaskKind::kVqa: return "VQA";
    case TaskKind::kCaption: return "CAPTION";
  }
  return "?";
}

TaskKind task_from_string(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (TaskKind t : {TaskKind::kRec, TaskKind::kGdesc, TaskKind::kVqa, TaskKind::kCaption}) {
    if (up == to_string(t)) return t;
  }
  throw UsageError("unknown task '" + std::string(name) + "'");
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool matches(TaskKind task, const PromptParams& params) {
  switch (task) {
    case TaskKind::kRec: return std::holds_alternative<RecPrompt>(params);
    case TaskKind::kGdesc: return std::holds_alternative<GdescPrompt>(params);
    case TaskKind::kVqa: return std::holds_alternative<VqaPrompt>(params);
    case TaskKind::kCaption: return std::holds_alternative<CaptionPrompt>(params);
  }
  return false;
}

}  // namespace

std::string build_prompt(TaskKind task, const PromptParams& params) {
  if (!matches(task, params)) {
    throw UsageError("prompt parameters do not match task " + std::string(to_string(task)));
  }
  return std::visit(
      overloaded{
          [](const RecPrompt& p) -> std::string {
            if (p.context.empty()) throw UsageError("REC prompt needs a context");
            return p.context;
          },
          [](const GdescPrompt& p) -> std::string {
            if (p.n_objects < 1) throw UsageError("GDESC prompt needs n_objects >= 1");
            std::string s = "Detect " + std::to_string(p.n_objects) +
                            " objects in the image. List them as a numbered list, one "
                            "object per line, in the format \"<number>. <short "
                            "description> [x1, y1, x2, y2]\" where [x1, y1, x2, y2] is "
                            "the bounding box in normalized coordinates (top-left x, "
                            "top-left y, bottom-right x, bottom-right y) between 0 and 1.";
            if (p.expression) {
              s += " Include the object described as \"" + *p.expression +
                   "\" and the objects around it.";
            }
            return s;
          },
          [](const VqaPrompt& p) -> std::string {
            if (p.expression.empty()) throw UsageError("VQA prompt needs an expression");
            return "Does this image show \"" + p.expression +
                   "\"? Answer with a single word: yes or no.";
          },
          [](const CaptionPrompt&) -> std::string {
            return "Describe the main object shown in this image in one short phrase.";
          },
      },
      params);
}

ModelRequest make_request(TaskKind task, PromptParams params,
                          std::vector<std::uint8_t> image_png, ImageSize image_size,
                          NormBox frame, std::string sample_id, int trial) {
  ModelRequest r;
  r.task = task;
  r.prompt = build_prompt(task, params);
  r.params = std::move(params);
  r.image_png = std::move(image_png);
  r.image_size = image_size;
  r.frame = frame;
  r.sample_id = std::move(sample_id);
  r.trial = trial;
  return r;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string request_digest(TaskKind task, std::string_view prompt,
                           std::span<const std::uint8_t> image_png) {
  std::vector<std::uint8_t> buf;
  const auto name = to_string(task);
  buf.reserve(name.size() + prompt.size() + image_png.size() + 2);
  buf.insert(buf.end(), name.begin(), name.end());
  buf.push_back(0);
  buf.insert(buf.end(), prompt.begin(), prompt.end());
  buf.push_back(0);
  buf.insert(buf.end(), image_png.begin(), image_png.end());
  return sha256_hex(buf);
}

std::string request_digest(const ModelRequest& request) {
  return request_digest(request.task, request.prompt, request.image_png);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

ModelReply complete(Backend& backend, const ModelRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  ModelReply reply = backend.complete(request);
  reply.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  if (reply.backend_id.empty()) reply.backend_id = backend.id();
  return reply;
}

ScriptedBackend& ScriptedBackend::on(TaskKind task, Rule rule) {
  rules_[task] = std::move(rule);
  return *this;
}

ScriptedBackend& ScriptedBackend::on(TaskKind task, std::string reply) {
  return on(task, [reply = std::move(reply)](const ModelRequest&) { return reply; });
}

ModelReply ScriptedBackend::complete(const ModelRequest& request) {
  const auto it = rules_.find(request.task);
  if (it == rules_.end()) {
    throw BackendError("mock backend has no reply for task " +
                       std::string(to_string(request.task)));
  }
  std::string text = it->second(request);
  {
    std::lock_guard lock(mu_);
    ++calls_[request.task];
  }
  return {std::move(text), 0.0, id()};
}

int ScriptedBackend::calls(TaskKind task) const {
  std::lock_guard lock(mu_);
  const auto it = calls_.find(task);
  return it == calls_.end() ? 0 : it->second;
}

}  // namespace recloop
