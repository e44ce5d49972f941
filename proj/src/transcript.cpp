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

#include "recloop/transcript.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "recloop/error.hpp"

namespace recloop {

Transcript::Transcript(const Transcript& other) {
  std::lock_guard lock(other.mu_);
  records_ = other.records_;
  index_ = other.index_;
}

Transcript& Transcript::operator=(const Transcript& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  records_ = other.records_;
  index_ = other.index_;
  return *this;
}

void Transcript::append(TranscriptRecord record) {
  std::lock_guard lock(mu_);
  index_.emplace(record.digest, records_.size());
  records_.push_back(std::move(record));
}

std::optional<std::string> Transcript::find(const std::string& digest) const {
  std::lock_guard lock(mu_);
  const auto it = index_.find(digest);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second].reply_text;
}

std::vector<TranscriptRecord> Transcript::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t Transcript::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void Transcript::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write transcript " + path.string());
  for (const auto& r : records()) {
    const nlohmann::ordered_json j = {{"digest", r.digest},
                                      {"task", to_string(r.task)},
                                      {"prompt_text", r.prompt_text},
                                      {"reply_text", r.reply_text},
                                      {"prompt_version", r.prompt_version}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Transcript Transcript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transcript " + path.string());
  Transcript t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TranscriptRecord r;
      r.digest = j.at("digest").get<std::string>();
      r.task = task_from_string(j.at("task").get<std::string>());
      r.prompt_text = j.at("prompt_text").get<std::string>();
      r.reply_text = j.at("reply_text").get<std::string>();
      r.prompt_version = j.value("prompt_version", std::string(kPromptVersion));
      t.append(std::move(r));
    } catch (const std::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

ModelReply RecordingBackend::complete(const ModelRequest& request) {
  ModelReply reply = inner_.complete(request);
  transcript_.append({request_digest(request), request.task, request.prompt, reply.text,
                      std::string(kPromptVersion)});
  return reply;
}

ModelReply ReplayBackend::complete(const ModelRequest& request) {
  const std::string digest = request_digest(request);
  auto reply = transcript_.find(digest);
  if (!reply) {
    throw ReplayError("replay miss: no transcript record for " +
                          std::string(to_string(request.task)) + " request digest " + digest,
                      digest);
  }
  return {std::move(*reply), 0.0, id()};
}

}  // namespace recloop
