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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "recloop/geometry.hpp"

namespace recloop {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit RGB, row-major, three bytes per pixel.
class RasterImage {
 public:
  RasterImage(int width, int height, Rgb fill = {});
  RasterImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  ImageSize size() const { return {width_, height_}; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  void fill_rect(const PixelBox& r, Rgb c);

  std::span<const std::uint8_t> data() const { return data_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t offset(int x, int y) const;

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

struct SceneObject {
  std::string name;
  Rgb color;
  NormBox box;
};

struct SceneSpec {
  ImageSize canvas;
  Rgb background;
  std::vector<SceneObject> objects;
};

// Throws UsageError on an empty object list, invalid boxes or duplicate names.
void validate(const SceneSpec& spec);

struct BoxStroke {
  NormBox box;
  Rgb color;
  int stroke = 1;
};

// The pixels covered by `region` (half-open). Throws UsageError when the
// region rounds to zero width or height.
RasterImage crop(const RasterImage& image, const NormBox& region);

// Copy of `image` with rectangle outlines drawn in list order.
RasterImage draw_boxes(const RasterImage& image, std::span<const BoxStroke> boxes);

// max(1, round(0.004 * min(width, height)))
int default_stroke(ImageSize size);
// Fixed 8-color palette; index wraps.
Rgb palette_color(std::size_t index);

// PNG or JPEG. Alpha is composited over black. Throws IoError.
RasterImage load_image(const std::filesystem::path& path);
RasterImage decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const RasterImage& image);
void write_png(const RasterImage& image, const std::filesystem::path& path);

RasterImage render_scene(const SceneSpec& spec);

// {"canvas": {"width", "height"}, "background": [r, g, b],
//  "objects": [{"name", "color": [r, g, b], "box": [x1, y1, x2, y2]}]}
std::string scene_to_json(const SceneSpec& spec);
// Throws LoadError on schema violations.
SceneSpec scene_from_json(std::string_view text);

}  // namespace recloop
