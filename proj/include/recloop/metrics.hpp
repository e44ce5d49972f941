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
#include <span>

namespace recloop {

inline constexpr std::array<double, 3> kIouThresholds = {0.5, 0.7, 0.9};

// Fraction of IoUs >= threshold (inclusive). Throws UsageError on an empty
// list, IoUs outside [0, 1] or a threshold outside (0, 1).
double accuracy_at(std::span<const double> ious, double threshold);

}  // namespace recloop
