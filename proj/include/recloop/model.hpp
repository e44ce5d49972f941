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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recloop/geometry.hpp"
#include "recloop/imaging.hpp"

namespace recloop {

enum class TaskKind { kRec, kGdesc, kVqa, kCaption };

std::string_view to_string(TaskKind task);
// Accepts "REC", "GDESC", "VQA", "CAPTION" (any case). Throws UsageError.
TaskKind task_from_string(std::string_view name);

// Stamped into every transcript record; bump whenever a template changes.
inline constexpr std::string_view kPromptVersion = "recloop-prompts/1";

struct RecPrompt {
  std::string context;  // output of assemble_context
};
struct GdescPrompt {
  int n_objects = 5;
  std::optional<std::string> expression;  // targeted scan when set
};
struct VqaPrompt {
  std::string expression;
};
struct CaptionPrompt {};

using PromptParams = std::variant<RecPrompt, GdescPrompt, VqaPrompt, CaptionPrompt>;

// Deterministic prompt text. Throws UsageError when `params` does not belong
// to `task`.
std::string build_prompt(TaskKind task, const PromptParams& params);

// One image plus one text prompt addressed to one task.
struct ModelRequest {
  TaskKind task = TaskKind::kRec;
  PromptParams params;
  std::string prompt;
  std::vector<std::uint8_t> image_png;
  ImageSize image_size;
  // Region of the source image that `image_png` shows.
  NormBox frame = NormBox::unit();
  std::string sample_id;
  int trial = 0;
};

ModelRequest make_request(TaskKind task, PromptParams params,
                          std::vector<std::uint8_t> image_png, ImageSize image_size,
                          NormBox frame, std::string sample_id, int trial);

// Hex SHA-256 over task name, prompt bytes and PNG bytes, NUL separated.
std::string request_digest(TaskKind task, std::string_view prompt,
                           std::span<const std::uint8_t> image_png);
std::string request_digest(const ModelRequest& request);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::span<const std::uint8_t> bytes);

struct ModelReply {
  std::string text;
  double latency_ms = 0.0;
  std::string backend_id;
};

// A completion backend. Implementations must be safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ModelReply complete(const ModelRequest& request) = 0;
  virtual std::string id() const = 0;
};

// backend.complete with latency filled in.
ModelReply complete(Backend& backend, const ModelRequest& request);

// Replies produced by per-task rules. A task without a rule throws BackendError.
class ScriptedBackend : public Backend {
 public:
  using Rule = std::function<std::string(const ModelRequest&)>;

  ScriptedBackend& on(TaskKind task, Rule rule);
  ScriptedBackend& on(TaskKind task, std::string reply);

  ModelReply complete(const ModelRequest& request) override;
  std::string id() const override { return "mock"; }

  // Number of completed calls for a task.
  int calls(TaskKind task) const;

 private:
  std::map<TaskKind, Rule> rules_;
  mutable std::mutex mu_;
  std::map<TaskKind, int> calls_;
};

}  // namespace recloop
