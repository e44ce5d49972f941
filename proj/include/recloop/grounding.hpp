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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recloop/geometry.hpp"

namespace recloop {

// One item of a numbered object list: "<index>. <description> [x1, y1, x2, y2]".
struct GroundedEntry {
  int index = 1;
  std::string description;
  NormBox box;

  friend bool operator==(const GroundedEntry&, const GroundedEntry&) = default;
};

struct GroundedDescription {
  std::vector<GroundedEntry> entries;

  bool empty() const { return entries.empty(); }
  friend bool operator==(const GroundedDescription&, const GroundedDescription&) = default;
};

enum class ParsePolicy { kStrict, kLenient };

struct GroundedParse {
  GroundedDescription grounded;
  std::vector<std::string> warnings;
};

// A previously predicted box together with the caption of its crop.
struct RejectedPrediction {
  NormBox box;
  std::string caption;
};

// Textual input to the REC task: grounded list, rejected predictions, and the
// referring expression, concatenated in that order.
struct RecContext {
  GroundedDescription grounded;
  std::vector<RejectedPrediction> appended;
  std::string expression;
  // false renders the grounded list without coordinates.
  bool include_boxes = true;
};

// Extra entries beyond the requested count that a reply may contribute.
inline constexpr int kRunawayMargin = 5;

// Lenient skips malformed lines (with a warning). Strict throws ParseError
// naming the first malformed line, or when nothing parses.
GroundedParse parse_grounded(std::string_view reply, int expected_count,
                             ParsePolicy policy = ParsePolicy::kLenient,
                             std::optional<ImageSize> image_size = std::nullopt);

std::string serialize_grounded(const GroundedDescription& g);
std::string strip_boxes(const GroundedDescription& g);

std::string assemble_context(const RecContext& ctx);

// Text placed after the context lines; exposed so callers can locate it.
std::string rec_instruction(std::string_view expression, bool has_context,
                            bool has_rejected);

// First "[a, b, c, d]" in the reply, sanitized. Throws ParseError.
NormBox parse_bbox_reply(std::string_view reply,
                         std::optional<ImageSize> image_size = std::nullopt);

// Every "[a, b, c, d]" in the text, raw (unsanitized), in order of appearance.
std::vector<std::array<double, 4>> find_box_tuples(std::string_view text);

// Throws ParseError when the reply contains neither "yes" nor "no".
bool parse_yes_no(std::string_view reply);

}  // namespace recloop
