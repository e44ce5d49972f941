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

#include <algorithm>
#include <mutex>
#include <thread>

#include "recloop/error.hpp"
#include "recloop/evaluate.hpp"
#include "recloop/metrics.hpp"

namespace recloop {

ImageLoader disk_loader(std::filesystem::path root) {
  return [root = std::move(root)](const Sample& s) {
    const std::filesystem::path p(s.image);
    return load_image(p.is_absolute() || root.empty() ? p : root / p);
  };
}

void aggregate(EvalReport& report) {
  if (report.samples.empty()) throw UsageError("report has no samples");
  std::vector<double> ious;
  ious.reserve(report.samples.size());
  report.failures = 0;
  for (const auto& s : report.samples) {
    ious.push_back(s.predicted ? s.iou : 0.0);
    if (!s.predicted) ++report.failures;
  }
  for (std::size_t i = 0; i < kIouThresholds.size(); ++i) {
    report.acc[i] = accuracy_at(ious, kIouThresholds[i]);
  }
}

namespace {

SampleRecord run_one(const Sample& sample, const RunConfig& cfg, Backend& backend,
                     const ImageLoader& loader, RunTrace& trace) {
  SampleRecord rec;
  rec.id = sample.id;
  try {
    const RasterImage image = loader(sample);
    trace = run_strategy(image, sample.expression, backend, cfg, sample.id);
  } catch (const std::exception& e) {
    trace = RunTrace{};
    trace.sample_id = sample.id;
    trace.strategy = cfg.strategy;
    trace.terminated_by = Termination::kFailed;
    trace.error = e.what();
  }
  rec.trials_used = trace.trials_used;
  rec.terminated_by = trace.terminated_by;
  rec.error = trace.error;
  if (trace.final_box) {
    rec.predicted = trace.final_box;
    rec.iou = iou(*trace.final_box, sample.ground_truth);
  }
  return rec;
}

}  // namespace

EvalReport evaluate(const Dataset& dataset, const RunConfig& cfg, Backend& backend,
                    const EvalOptions& options) {
  validate(cfg);
  if (options.parallelism < 1) throw UsageError("parallelism must be >= 1");
  if (dataset.samples.empty()) throw UsageError("dataset has no samples");
  const ImageLoader loader = options.loader ? options.loader : disk_loader({});

  const std::size_t n = dataset.samples.size();
  std::vector<SampleRecord> records(n);
  std::vector<RunTrace> traces(n);
  std::vector<char> started(n, 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      if (options.stop && options.stop->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      started[i] = 1;
      records[i] = run_one(dataset.samples[i], cfg, backend, loader, traces[i]);
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), n);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (started[i]) continue;
    records[i].id = dataset.samples[i].id;
    records[i].terminated_by = Termination::kSkipped;
    records[i].error = "skipped";
    traces[i].sample_id = dataset.samples[i].id;
    traces[i].strategy = cfg.strategy;
    traces[i].terminated_by = Termination::kSkipped;
    traces[i].error = "skipped";
  }

  EvalReport report;
  report.dataset = dataset.name;
  report.config = cfg;
  report.samples = std::move(records);
  aggregate(report);
  if (options.traces) *options.traces = std::move(traces);
  return report;
}

std::vector<SweepPoint> object_count_sweep(const Dataset& dataset, const RunConfig& base,
                                           Backend& backend, const EvalOptions& options,
                                           int max_objects) {
  if (max_objects < 0) throw UsageError("max_objects must be >= 0");
  std::vector<SweepPoint> out;
  for (int k = 0; k <= max_objects; ++k) {
    RunConfig cfg = base;
    cfg.n_objects = k;
    cfg.strategy = k == 0 ? StrategyKind::kBaseline : StrategyKind::kGroundedDesc;
    EvalOptions opts = options;
    opts.traces = nullptr;
    out.push_back({k, evaluate(dataset, cfg, backend, opts)});
  }
  return out;
}

}  // namespace recloop
