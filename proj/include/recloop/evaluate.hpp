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
#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recloop/dataset.hpp"
#include "recloop/imaging.hpp"
#include "recloop/model.hpp"
#include "recloop/pipeline.hpp"

namespace recloop {

struct SampleRecord {
  std::string id;
  std::optional<NormBox> predicted;
  double iou = 0.0;  // 0 for failures
  int trials_used = 0;
  Termination terminated_by = Termination::kCompleted;
  std::optional<std::string> error;
};

struct EvalReport {
  std::string dataset;
  RunConfig config;
  std::vector<SampleRecord> samples;
  // Indexed like kIouThresholds.
  std::array<double, 3> acc{};
  int failures = 0;

  StrategyKind strategy() const { return config.strategy; }
  double acc_050() const { return acc[0]; }
  double acc_070() const { return acc[1]; }
  double acc_090() const { return acc[2]; }
};

using ImageLoader = std::function<RasterImage(const Sample&)>;

// Resolves Sample::image against `root` (absolute paths pass through).
ImageLoader disk_loader(std::filesystem::path root);

struct EvalOptions {
  int parallelism = 1;
  ImageLoader loader;
  // Set to drain: running samples finish, the rest are marked skipped.
  const std::atomic<bool>* stop = nullptr;
  // Receives traces in dataset order when non-null.
  std::vector<RunTrace>* traces = nullptr;
};

// Runs cfg.strategy on every sample with at most `parallelism` in flight.
// Per-sample failures score IoU 0 and never abort the batch. Throws
// UsageError for an invalid config before any sample runs.
EvalReport evaluate(const Dataset& dataset, const RunConfig& cfg, Backend& backend,
                    const EvalOptions& options);

// Recomputes acc and failures from the per-sample records.
void aggregate(EvalReport& report);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);

// Header plus one row per report, percentages with two decimals, columns
// Acc_0.5, Acc_0.7, Acc_0.9.
std::string format_table(std::span<const EvalReport> reports);

// Writes the JSON document to `path` and the table next to it as .txt.
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

struct ReportComparison {
  std::array<double, 3> a{};
  std::array<double, 3> b{};
  std::array<double, 3> delta_points{};  // (b - a) in percentage points
};

// Throws UsageError listing the symmetric difference when the sample id sets
// differ.
ReportComparison compare_reports(const EvalReport& a, const EvalReport& b);
// "Acc_0.5  66.43  72.11 (+5.68)" rows.
std::string format_comparison(const ReportComparison& c);
// Signed two-decimal percentage points, e.g. "+26.35".
std::string format_delta(double points);

struct SweepPoint {
  int n_objects = 0;
  EvalReport report;
};

// n_objects = 0 runs the baseline; every other count runs the grounded
// description strategy with that many objects.
std::vector<SweepPoint> object_count_sweep(const Dataset& dataset, const RunConfig& base,
                                           Backend& backend, const EvalOptions& options,
                                           int max_objects = 8);

}  // namespace recloop
