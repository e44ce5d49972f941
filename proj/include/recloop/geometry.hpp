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

namespace recloop {

// Box in normalized corner coordinates [top-left x, top-left y,
// bottom-right x, bottom-right y], each a fraction of the image extent.
struct NormBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool degenerate() const { return !(x2 > x1) || !(y2 > y1); }
  // Finite, ordered and inside the unit square.
  bool valid() const;

  static NormBox unit() { return {0.0, 0.0, 1.0, 1.0}; }

  friend bool operator==(const NormBox&, const NormBox&) = default;
};

// Integer pixel box, half-open: covers columns [x1, x2) and rows [y1, y2).
struct PixelBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool degenerate() const { return width() <= 0 || height() <= 0; }

  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct ImageSize {
  int width = 1;
  int height = 1;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct ExpandedBox {
  NormBox box;
  // Input had zero area; the box was clamped but not scaled.
  bool degenerate = false;
};

// Throws UsageError unless the box is valid.
void validate(const NormBox& b);
void validate(const PixelBox& b, ImageSize size);
void validate(ImageSize size);

// Intersection over union. Zero when the union is empty. Both boxes must be
// valid; mixing coordinate kinds does not compile.
double iou(const NormBox& a, const NormBox& b);
double iou(const PixelBox& a, const PixelBox& b);

// Clamp each coordinate to [0, 1]. Corner order is preserved.
NormBox clamp_unit(const NormBox& b);

// Scale width and height about the center, then truncate to the unit square.
// Truncation does not translate the box to keep its size.
ExpandedBox expand_and_clamp(const NormBox& b, double scale);

// Round half up, then clamp into the image so x1 <= x2 <= width.
PixelBox to_pixels(const NormBox& b, ImageSize size);
NormBox from_pixels(const PixelBox& b, ImageSize size);

// Normalize four raw reals from model output: optional pixel-scale
// conversion (any coordinate > 1.5 and a size is known), corner swap, clamp.
// Throws ParseError on non-finite input.
NormBox sanitize(const std::array<double, 4>& raw,
                 std::optional<ImageSize> size = std::nullopt);

inline constexpr double kPixelScaleThreshold = 1.5;

// `inner` is expressed relative to `frame`; returns it in frame's parent
// coordinates. map_to_frame is the exact inverse (no clamping).
NormBox map_from_frame(const NormBox& frame, const NormBox& inner);
NormBox map_to_frame(const NormBox& frame, const NormBox& outer);

// "[x1, y1, x2, y2]" with the given number of decimals.
std::string format_box(const NormBox& b, int decimals = 2);
// Shortest text that parses back to the identical doubles.
std::string format_box_exact(const NormBox& b);

}  // namespace recloop
