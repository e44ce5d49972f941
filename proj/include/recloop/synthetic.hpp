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
#include <map>
#include <string>

#include "recloop/dataset.hpp"
#include "recloop/error.hpp"
#include "recloop/evaluate.hpp"
#include "recloop/oracle.hpp"

namespace recloop {

class GenerationError : public Error {
 public:
  using Error::Error;
};

struct SyntheticParams {
  int count = 50;
  int objects_per_scene = 4;
  ImageSize canvas{200, 200};
  std::uint64_t seed = 7;
};

struct SyntheticBenchmark {
  Dataset dataset;
  std::map<std::string, OracleScene> scenes;  // keyed by sample id
};

// Scenes of non-overlapping solid rectangles with distinct colors. Box
// coordinates lie on a 0.01 grid. Expressions read "the <color> <shape>".
// Deterministic per seed; throws GenerationError when the objects cannot be
// packed or named uniquely.
SyntheticBenchmark generate_synthetic_dataset(const SyntheticParams& params);

// Renders scenes in memory instead of reading image files.
ImageLoader scene_loader(const SyntheticBenchmark& bench);

// <dir>/dataset.jsonl, <dir>/images/<id>.png, <dir>/scenes/<id>.json.
// Returns the dataset path.
std::filesystem::path write_synthetic(const SyntheticBenchmark& bench,
                                      const std::filesystem::path& dir);
// Reads every <dir>/*.json scene fixture.
std::map<std::string, OracleScene> load_scene_fixtures(const std::filesystem::path& dir);

}  // namespace recloop
