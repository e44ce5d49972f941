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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recloop/geometry.hpp"
#include "recloop/grounding.hpp"
#include "recloop/imaging.hpp"
#include "recloop/model.hpp"

namespace recloop {

// Context strategies, in the order of the results table.
enum class StrategyKind {
  kBaseline,
  kObjectDesc,
  kGroundedDesc,
  kCropRefine,
  kDrawBoxes,
  kChainOfCaption,
};

inline constexpr std::array<StrategyKind, 6> kAllStrategies = {
    StrategyKind::kBaseline,  StrategyKind::kObjectDesc, StrategyKind::kGroundedDesc,
    StrategyKind::kCropRefine, StrategyKind::kDrawBoxes, StrategyKind::kChainOfCaption};

// Machine name: baseline, object_desc, grounded_desc, crop, draw_boxes, coc.
std::string_view to_string(StrategyKind s);
// Row label: "-", "Object description", ..., "Chain-of-caption".
std::string_view display_name(StrategyKind s);
StrategyKind strategy_from_string(std::string_view name);

enum class CropMode { kExact, kExpanded };
std::string_view to_string(CropMode m);
CropMode crop_mode_from_string(std::string_view name);
std::string_view to_string(ParsePolicy p);
ParsePolicy parse_policy_from_string(std::string_view name);

struct RunConfig {
  StrategyKind strategy = StrategyKind::kChainOfCaption;
  int n_objects = 5;
  double crop_scale = 1.5;
  int max_trials = 3;
  CropMode vqa_crop_mode = CropMode::kExact;
  ParsePolicy grounded_parse_policy = ParsePolicy::kLenient;
  // Condition the grounded-description request on the expression.
  bool gdesc_with_expression = false;
};

// Throws UsageError.
void validate(const RunConfig& cfg);

enum class Termination {
  kCompleted,        // single-pass strategy finished
  kVerified,         // VQA accepted the prediction
  kMaxTrials,        // trial budget spent without acceptance
  kParseExhaustion,  // final REC reply unparseable
  kFailed,           // strategy or backend error, no box
  kSkipped,          // never started (batch drained)
};
std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view name);

struct CallRecord {
  TaskKind task = TaskKind::kRec;
  int trial = 0;
  std::string digest;
  bool ok = false;
  // Decoded value ("[x1, y1, x2, y2]", "yes", caption text, item count) or
  // the parse failure message.
  std::string result;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct RunTrace {
  std::string sample_id;
  StrategyKind strategy = StrategyKind::kBaseline;
  std::vector<CallRecord> calls;
  std::vector<NormBox> predictions;  // every successfully parsed REC box
  std::vector<bool> vqa_answers;
  std::vector<RejectedPrediction> appended;
  std::optional<NormBox> final_box;
  int trials_used = 0;  // REC calls
  Termination terminated_by = Termination::kCompleted;
  std::vector<std::string> warnings;
  std::optional<std::string> error;

  int calls_for(TaskKind task) const;
  bool ok() const { return final_box.has_value(); }
};

// Single-line JSON; exact doubles.
std::string trace_to_json(const RunTrace& trace);
RunTrace trace_from_json(std::string_view line);

// Each run is sequential and owns its trace. Errors (unparseable replies,
// backend failures) end up in trace.error with no final box; nothing throws
// except UsageError for invalid inputs.
RunTrace run_baseline(const RasterImage& image, std::string_view expression,
                      Backend& backend, std::string_view sample_id = {});
RunTrace run_object_desc(const RasterImage& image, std::string_view expression,
                         Backend& backend, const RunConfig& cfg,
                         std::string_view sample_id = {});
RunTrace run_grounded(const RasterImage& image, std::string_view expression,
                      Backend& backend, const RunConfig& cfg, std::string_view sample_id = {});
RunTrace run_crop(const RasterImage& image, std::string_view expression, Backend& backend,
                  const RunConfig& cfg, std::string_view sample_id = {});
RunTrace run_draw(const RasterImage& image, std::string_view expression, Backend& backend,
                  const RunConfig& cfg, std::string_view sample_id = {});
RunTrace run_chain_of_caption(const RasterImage& image, std::string_view expression,
                              Backend& backend, const RunConfig& cfg,
                              std::string_view sample_id = {});

// Dispatch on cfg.strategy.
RunTrace run_strategy(const RasterImage& image, std::string_view expression,
                      Backend& backend, const RunConfig& cfg, std::string_view sample_id = {});

// Pixel-snapped region actually cropped for `box`; grown to at least one
// pixel per axis so every prediction can be shown to the model.
NormBox crop_frame(const NormBox& box, ImageSize size);

}  // namespace recloop
