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

#include <map>
#include <string>

#include "recloop/imaging.hpp"
#include "recloop/model.hpp"

namespace recloop {

// Behavior knobs of the synthetic stand-in model.
struct OracleParams {
  // Context-free REC replies shrink the true box about its center by this
  // factor, so their IoU with the truth is shrink^2.
  double shrink = 0.7;
  // VQA answers yes iff iou(crop region, true box) >= this.
  double vqa_threshold = 0.5;
  // GDESC lists the first ceil(fidelity * n) scene objects.
  double fidelity = 1.0;
  // CAPTION appends the true box of the captioned object.
  bool caption_reveals_box = false;
};

void validate(const OracleParams& params);

struct OracleScene {
  SceneSpec scene;
  std::string target;  // name of the referred object
};

struct SyntheticOracleConfig {
  std::map<std::string, OracleScene> samples;  // keyed by sample id
  OracleParams params;
};

// Pure function of (config, request). Throws OracleError for unknown samples.
ModelReply oracle_complete(const SyntheticOracleConfig& cfg, const ModelRequest& request);

class OracleBackend : public Backend {
 public:
  explicit OracleBackend(SyntheticOracleConfig cfg);
  ModelReply complete(const ModelRequest& request) override {
    return oracle_complete(cfg_, request);
  }
  std::string id() const override { return "oracle"; }
  const SyntheticOracleConfig& config() const { return cfg_; }

 private:
  SyntheticOracleConfig cfg_;
};

}  // namespace recloop
