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

#include "recloop/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "recloop/error.hpp"
#include "recloop/grounding.hpp"

namespace recloop {
namespace {

constexpr double kContextMatchTolerance = 0.01;

bool near(const NormBox& a, const NormBox& b) {
  return std::abs(a.x1 - b.x1) <= kContextMatchTolerance &&
         std::abs(a.y1 - b.y1) <= kContextMatchTolerance &&
         std::abs(a.x2 - b.x2) <= kContextMatchTolerance &&
         std::abs(a.y2 - b.y2) <= kContextMatchTolerance;
}

std::string in_frame(const NormBox& frame, const NormBox& box) {
  if (frame == NormBox::unit()) return format_box_exact(box);
  return format_box_exact(clamp_unit(map_to_frame(frame, box)));
}

std::string rec_reply(const NormBox& truth, const OracleParams& p, const ModelRequest& r) {
  for (const auto& raw : find_box_tuples(r.prompt)) {
    NormBox candidate;
    try {
      candidate = sanitize(raw);
    } catch (const ParseError&) {
      continue;
    }
    if (near(candidate, truth)) return in_frame(r.frame, candidate);
  }
  return in_frame(r.frame, expand_and_clamp(truth, p.shrink).box);
}

std::string gdesc_reply(const OracleScene& s, const OracleParams& p, const ModelRequest& r) {
  const auto* params = std::get_if<GdescPrompt>(&r.params);
  const int n = params ? params->n_objects : 0;
  const auto listed = std::min<std::size_t>(
      s.scene.objects.size(), static_cast<std::size_t>(std::ceil(p.fidelity * n - 1e-9)));
  GroundedDescription g;
  for (std::size_t i = 0; i < listed; ++i) {
    const auto& o = s.scene.objects[i];
    g.entries.push_back({static_cast<int>(i) + 1, o.name, o.box});
  }
  return serialize_grounded(g);
}

}  // namespace

void validate(const OracleParams& p) {
  if (!(p.shrink > 0.0 && p.shrink <= 1.0)) throw UsageError("oracle shrink must be in (0, 1]");
  if (!(p.vqa_threshold > 0.0 && p.vqa_threshold < 1.0)) {
    throw UsageError("oracle VQA threshold must be in (0, 1)");
  }
  if (!(p.fidelity >= 0.0 && p.fidelity <= 1.0)) {
    throw UsageError("oracle fidelity must be in [0, 1]");
  }
}

ModelReply oracle_complete(const SyntheticOracleConfig& cfg, const ModelRequest& request) {
  const auto it = cfg.samples.find(request.sample_id);
  if (it == cfg.samples.end()) {
    throw OracleError("oracle has no scene for sample '" + request.sample_id + "'");
  }
  const OracleScene& s = it->second;
  const auto& objects = s.scene.objects;
  const auto target = std::find_if(objects.begin(), objects.end(),
                                   [&](const SceneObject& o) { return o.name == s.target; });
  if (target == objects.end()) {
    throw OracleError("target '" + s.target + "' not in scene of sample '" +
                      request.sample_id + "'");
  }
  std::string text;
  switch (request.task) {
    case TaskKind::kGdesc:
      text = gdesc_reply(s, cfg.params, request);
      break;
    case TaskKind::kRec:
      text = rec_reply(target->box, cfg.params, request);
      break;
    case TaskKind::kVqa:
      text = iou(request.frame, target->box) >= cfg.params.vqa_threshold ? "Yes" : "No";
      break;
    case TaskKind::kCaption: {
      double best = 0.0;
      const SceneObject* hit = nullptr;
      for (const auto& o : objects) {
        const double v = iou(request.frame, o.box);
        if (v > best) {
          best = v;
          hit = &o;
        }
      }
      if (!hit) {
        text = "background";
      } else {
        text = hit->name;
        if (cfg.params.caption_reveals_box) text += " " + format_box(hit->box, 2);
      }
      break;
    }
  }
  return {std::move(text), 0.0, "oracle"};
}

OracleBackend::OracleBackend(SyntheticOracleConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_.params);
  for (const auto& [id, s] : cfg_.samples) validate(s.scene);
}

}  // namespace recloop
