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

#include "recloop/metrics.hpp"

#include <algorithm>

#include "recloop/error.hpp"

namespace recloop {

double accuracy_at(std::span<const double> ious, double threshold) {
  if (ious.empty()) throw UsageError("accuracy over an empty IoU list");
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must be in (0, 1)");
  std::size_t hits = 0;
  for (double v : ious) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("IoU outside [0, 1]");
    if (v >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ious.size());
}

}  // namespace recloop
