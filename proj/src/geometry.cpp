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

#include "recloop/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "recloop/error.hpp"

namespace recloop {
namespace {

// Adding 0.0 turns -0.0 into +0.0 so formatting never prints "-0.00".
double clamp01(double v) { return std::clamp(v, 0.0, 1.0) + 0.0; }

bool finite(const NormBox& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2);
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

std::string shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

bool NormBox::valid() const {
  return finite(*this) && 0.0 <= x1 && x1 <= x2 && x2 <= 1.0 && 0.0 <= y1 &&
         y1 <= y2 && y2 <= 1.0;
}

void validate(const NormBox& b) {
  if (!b.valid()) {
    throw UsageError("invalid normalized box " + format_box_exact(b));
  }
}

void validate(ImageSize size) {
  if (size.width < 1 || size.height < 1) {
    throw UsageError("invalid image size " + std::to_string(size.width) + "x" +
                     std::to_string(size.height));
  }
}

void validate(const PixelBox& b, ImageSize size) {
  validate(size);
  if (b.x1 < 0 || b.y1 < 0 || b.x1 > b.x2 || b.y1 > b.y2 || b.x2 > size.width ||
      b.y2 > size.height) {
    throw UsageError("invalid pixel box [" + std::to_string(b.x1) + ", " +
                     std::to_string(b.y1) + ", " + std::to_string(b.x2) + ", " +
                     std::to_string(b.y2) + "]");
  }
}

double iou(const NormBox& a, const NormBox& b) {
  validate(a);
  validate(b);
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const PixelBox& a, const PixelBox& b) {
  if (a.x1 > a.x2 || a.y1 > a.y2 || b.x1 > b.x2 || b.y1 > b.y2) {
    throw UsageError("iou on unordered pixel box");
  }
  const long long iw = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const long long ih = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

NormBox clamp_unit(const NormBox& b) {
  return {clamp01(b.x1), clamp01(b.y1), clamp01(b.x2), clamp01(b.y2)};
}

ExpandedBox expand_and_clamp(const NormBox& b, double scale) {
  validate(b);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw UsageError("expansion scale must be positive");
  }
  if (b.degenerate()) return {clamp_unit(b), true};
  // Grow each edge outward by half the added extent; scale 1 is exact identity.
  const double dx = 0.5 * b.width() * (scale - 1.0);
  const double dy = 0.5 * b.height() * (scale - 1.0);
  return {clamp_unit({b.x1 - dx, b.y1 - dy, b.x2 + dx, b.y2 + dy}), false};
}

PixelBox to_pixels(const NormBox& b, ImageSize size) {
  validate(size);
  PixelBox p{round_half_up(b.x1 * size.width), round_half_up(b.y1 * size.height),
             round_half_up(b.x2 * size.width), round_half_up(b.y2 * size.height)};
  p.x1 = std::clamp(p.x1, 0, size.width);
  p.x2 = std::clamp(p.x2, p.x1, size.width);
  p.y1 = std::clamp(p.y1, 0, size.height);
  p.y2 = std::clamp(p.y2, p.y1, size.height);
  return p;
}

NormBox from_pixels(const PixelBox& b, ImageSize size) {
  validate(b, size);
  const double w = size.width;
  const double h = size.height;
  return {b.x1 / w, b.y1 / h, b.x2 / w, b.y2 / h};
}

NormBox sanitize(const std::array<double, 4>& raw, std::optional<ImageSize> size) {
  for (double v : raw) {
    if (!std::isfinite(v)) throw ParseError("non-finite box coordinate");
  }
  std::array<double, 4> c = raw;
  const bool pixel_scale = std::any_of(c.begin(), c.end(), [](double v) {
    return v > kPixelScaleThreshold;
  });
  if (pixel_scale && size) {
    validate(*size);
    c[0] /= size->width;
    c[2] /= size->width;
    c[1] /= size->height;
    c[3] /= size->height;
  }
  if (c[0] > c[2]) std::swap(c[0], c[2]);
  if (c[1] > c[3]) std::swap(c[1], c[3]);
  return clamp_unit({c[0], c[1], c[2], c[3]});
}

NormBox map_from_frame(const NormBox& frame, const NormBox& inner) {
  const double w = frame.width();
  const double h = frame.height();
  return {frame.x1 + inner.x1 * w, frame.y1 + inner.y1 * h,
          frame.x1 + inner.x2 * w, frame.y1 + inner.y2 * h};
}

NormBox map_to_frame(const NormBox& frame, const NormBox& outer) {
  const double w = frame.width();
  const double h = frame.height();
  if (!(w > 0.0) || !(h > 0.0)) throw UsageError("degenerate reference frame");
  return {(outer.x1 - frame.x1) / w, (outer.y1 - frame.y1) / h,
          (outer.x2 - frame.x1) / w, (outer.y2 - frame.y1) / h};
}

std::string format_box(const NormBox& b, int decimals) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "[%.*f, %.*f, %.*f, %.*f]", decimals, b.x1,
                decimals, b.y1, decimals, b.x2, decimals, b.y2);
  return buf;
}

std::string format_box_exact(const NormBox& b) {
  return "[" + shortest(b.x1) + ", " + shortest(b.y1) + ", " + shortest(b.x2) +
         ", " + shortest(b.y2) + "]";
}

}  // namespace recloop
