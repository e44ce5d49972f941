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

#include "recloop/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "recloop/error.hpp"

namespace recloop {
namespace {

using nlohmann::json;

std::string location(const std::filesystem::path& path, int line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::array<double, 4> four_numbers(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array() || j[field].size() != 4) {
    throw LoadError(std::string("'") + field + "' must be an array of 4 numbers");
  }
  std::array<double, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[field][i].is_number()) {
      throw LoadError(std::string("'") + field + "' must be an array of 4 numbers");
    }
    v[i] = j[field][i].get<double>();
  }
  return v;
}

std::string required_string(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw LoadError(std::string("missing string field '") + field + "'");
  }
  return j[field].get<std::string>();
}

ImageSize required_size(const json& j) {
  if (!j.contains("width") || !j.contains("height") || !j["width"].is_number_integer() ||
      !j["height"].is_number_integer()) {
    throw LoadError("missing integer 'width'/'height'");
  }
  const ImageSize s{j["width"].get<int>(), j["height"].get<int>()};
  if (s.width < 1 || s.height < 1) throw LoadError("image size must be positive");
  return s;
}

NormBox checked_box(const NormBox& b, const std::string& id) {
  if (!b.valid() || b.degenerate()) {
    throw LoadError("sample '" + id + "' has an invalid or degenerate ground-truth box " +
                    format_box_exact(b));
  }
  return b;
}

Sample canonical_sample(const json& j) {
  Sample s;
  s.id = required_string(j, "id");
  s.image = required_string(j, "image");
  s.expression = required_string(j, "expression");
  if (s.expression.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw LoadError("sample '" + s.id + "' has an empty expression");
  }
  const auto v = four_numbers(j, "bbox");
  const std::string space = j.value("bbox_space", std::string("normalized"));
  if (j.contains("width") || j.contains("height")) s.image_size = required_size(j);
  if (space == "normalized") {
    s.ground_truth = checked_box({v[0], v[1], v[2], v[3]}, s.id);
  } else if (space == "pixel") {
    if (!s.image_size) throw LoadError("pixel-space bbox needs 'width' and 'height'");
    // Pixel annotations may carry sub-pixel values; divide directly.
    s.ground_truth = checked_box({v[0] / s.image_size->width, v[1] / s.image_size->height,
                                  v[2] / s.image_size->width, v[3] / s.image_size->height},
                                 s.id);
  } else {
    throw LoadError("unknown bbox_space '" + space + "'");
  }
  return s;
}

std::vector<Sample> refcoco_samples(const json& j) {
  std::string base;
  for (const char* key : {"ref_id", "ann_id", "image_id"}) {
    if (j.contains(key)) {
      base = j[key].is_string() ? j[key].get<std::string>() : j[key].dump();
      break;
    }
  }
  if (base.empty()) throw LoadError("record needs 'ref_id', 'ann_id' or 'image_id'");
  std::string image;
  if (j.contains("file_name")) {
    image = required_string(j, "file_name");
  } else if (j.contains("image_id") && j["image_id"].is_number_integer()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "COCO_train2014_%012lld.jpg",
                  static_cast<long long>(j["image_id"].get<long long>()));
    image = buf;
  } else {
    throw LoadError("record needs 'file_name' or a numeric 'image_id'");
  }
  const ImageSize size = required_size(j);
  const auto v = four_numbers(j, "bbox");
  const NormBox gt{v[0] / size.width, v[1] / size.height, (v[0] + v[2]) / size.width,
                   (v[1] + v[3]) / size.height};
  std::vector<std::string> expressions;
  if (j.contains("sentences") && j["sentences"].is_array()) {
    for (const auto& s : j["sentences"]) {
      if (s.is_string()) {
        expressions.push_back(s.get<std::string>());
      } else if (s.is_object()) {
        expressions.push_back(s.value("sent", s.value("raw", std::string())));
      }
    }
  } else if (j.contains("expressions") && j["expressions"].is_array()) {
    expressions = j["expressions"].get<std::vector<std::string>>();
  } else if (j.contains("expression") && j["expression"].is_string()) {
    expressions.push_back(j["expression"].get<std::string>());
  } else {
    throw LoadError("record needs 'sentences' or 'expressions'");
  }
  std::vector<Sample> out;
  for (std::size_t k = 0; k < expressions.size(); ++k) {
    Sample s;
    s.id = base + "_" + std::to_string(k);
    s.image = image;
    s.expression = expressions[k];
    if (s.expression.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw LoadError("sample '" + s.id + "' has an empty expression");
    }
    s.ground_truth = checked_box(gt, s.id);
    s.image_size = size;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

DatasetFormat dataset_format_from_string(std::string_view name) {
  if (name == "canonical") return DatasetFormat::kCanonical;
  if (name == "refcoco" || name == "refcoco-style") return DatasetFormat::kRefcoco;
  throw UsageError("unknown dataset format '" + std::string(name) + "'");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open dataset " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  Dataset d;
  d.name = path.stem().string();
  d.format = format;

  // (line number, record)
  std::vector<std::pair<int, json>> records;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (format == DatasetFormat::kRefcoco && first != std::string::npos && text[first] == '[') {
    try {
      const json doc = json::parse(text);
      for (const auto& r : doc) records.emplace_back(0, r);
    } catch (const json::exception& e) {
      throw LoadError(path.string() + ": " + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        records.emplace_back(line_no, json::parse(line));
      } catch (const json::exception& e) {
        throw LoadError(location(path, line_no) + e.what());
      }
    }
  }

  std::set<std::string> ids;
  for (const auto& [line_no, r] : records) {
    try {
      if (!r.is_object()) throw LoadError("record is not a JSON object");
      std::vector<Sample> batch;
      if (format == DatasetFormat::kCanonical) {
        batch.push_back(canonical_sample(r));
      } else {
        batch = refcoco_samples(r);
      }
      for (auto& s : batch) {
        if (!ids.insert(s.id).second) throw LoadError("duplicate sample id '" + s.id + "'");
        d.samples.push_back(std::move(s));
      }
    } catch (const json::exception& e) {
      throw LoadError(location(path, line_no) + e.what());
    } catch (const LoadError& e) {
      throw LoadError(location(path, line_no) + e.what());
    }
  }
  if (d.samples.empty()) throw LoadError("dataset " + path.string() + " has no samples");
  return d;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  for (const auto& s : dataset.samples) {
    nlohmann::ordered_json j = {
        {"id", s.id},
        {"image", s.image},
        {"expression", s.expression},
        {"bbox", {s.ground_truth.x1, s.ground_truth.y1, s.ground_truth.x2, s.ground_truth.y2}},
        {"bbox_space", "normalized"}};
    if (s.image_size) {
      j["width"] = s.image_size->width;
      j["height"] = s.image_size->height;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace recloop
