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

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "recloop/model.hpp"

namespace recloop {

struct TranscriptRecord {
  std::string digest;
  TaskKind task = TaskKind::kRec;
  std::string prompt_text;
  std::string reply_text;
  std::string prompt_version{kPromptVersion};
};

// Digest-keyed request/reply log. Appends are serialized; lookups are by
// digest and return the first reply recorded for it.
class Transcript {
 public:
  Transcript() = default;
  Transcript(const Transcript& other);
  Transcript& operator=(const Transcript& other);

  void append(TranscriptRecord record);
  std::optional<std::string> find(const std::string& digest) const;
  std::vector<TranscriptRecord> records() const;
  std::size_t size() const;

  // One JSON object per line: {digest, task, prompt_text, reply_text, prompt_version}.
  void save(const std::filesystem::path& path) const;
  static Transcript load(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::vector<TranscriptRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Forwards to `inner` and appends every exchange to `transcript`.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(Backend& inner, Transcript& transcript)
      : inner_(inner), transcript_(transcript) {}
  ModelReply complete(const ModelRequest& request) override;
  std::string id() const override { return "record(" + inner_.id() + ")"; }

 private:
  Backend& inner_;
  Transcript& transcript_;
};

// Answers only from a transcript. A miss throws ReplayError; it never falls
// through to a live call.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(Transcript transcript) : transcript_(std::move(transcript)) {}
  ModelReply complete(const ModelRequest& request) override;
  std::string id() const override { return "replay"; }

 private:
  Transcript transcript_;
};

}  // namespace recloop
