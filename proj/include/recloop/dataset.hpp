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
#include <optional>
#include <string>
#include <vector>

#include "recloop/geometry.hpp"

namespace recloop {

struct Sample {
  std::string id;
  std::string image;  // path, relative to the images root unless absolute
  std::string expression;
  NormBox ground_truth;
  std::optional<ImageSize> image_size;
};

enum class DatasetFormat { kCanonical, kRefcoco };
DatasetFormat dataset_format_from_string(std::string_view name);

struct Dataset {
  std::string name;
  std::vector<Sample> samples;
  DatasetFormat format = DatasetFormat::kCanonical;
};

// Canonical: one JSON object per line,
//   {"id", "image", "expression", "bbox": [x1, y1, x2, y2],
//    "bbox_space": "normalized" | "pixel", "width", "height"}
// Refcoco-style: a JSON array or one object per line,
//   {"ref_id" | "ann_id" | "image_id", "file_name", "width", "height",
//    "bbox": [x, y, w, h] in pixels, "sentences": [{"sent": ...}] | "expressions": [...]}
// with one sample per expression. Throws LoadError with the line number.
Dataset load_dataset(const std::filesystem::path& path,
                     DatasetFormat format = DatasetFormat::kCanonical);

// Canonical format, normalized boxes.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace recloop
