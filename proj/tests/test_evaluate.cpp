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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>

#include "recloop/error.hpp"
#include "recloop/evaluate.hpp"
#include "recloop/synthetic.hpp"
#include "recloop/transcript.hpp"
#include "support.hpp"

namespace recloop {
namespace {

using testing::expect_monotone;
using testing::TempDir;

SyntheticBenchmark bench(int count = 20, int objects = 4, std::uint64_t seed = 7) {
  SyntheticParams p;
  p.count = count;
  p.objects_per_scene = objects;
  p.seed = seed;
  return generate_synthetic_dataset(p);
}

EvalReport run(const SyntheticBenchmark& b, StrategyKind s, int parallelism = 1,
               OracleParams params = {}) {
  OracleBackend oracle({b.scenes, params});
  RunConfig cfg;
  cfg.strategy = s;
  EvalOptions opts;
  opts.parallelism = parallelism;
  opts.loader = scene_loader(b);
  EvalReport r = evaluate(b.dataset, cfg, oracle, opts);
  expect_monotone(r);
  return r;
}

TEST(Evaluate, BaselineAllMissAtHalf) {
  const auto b = bench();
  const EvalReport r = run(b, StrategyKind::kBaseline);
  ASSERT_EQ(r.samples.size(), 20u);
  for (const auto& s : r.samples) EXPECT_NEAR(s.iou, 0.49, 1e-12);
  EXPECT_EQ(r.acc, (std::array<double, 3>{0, 0, 0}));
  EXPECT_EQ(r.failures, 0);
}

TEST(Evaluate, GroundedAndChainOfCaptionPerfect) {
  const auto b = bench();
  for (auto s : {StrategyKind::kGroundedDesc, StrategyKind::kChainOfCaption}) {
    const EvalReport r = run(b, s);
    for (const auto& rec : r.samples) EXPECT_EQ(rec.iou, 1.0);
    EXPECT_EQ(r.acc, (std::array<double, 3>{1, 1, 1}));
  }
}

TEST(Evaluate, ParallelismDoesNotChangeReport) {
  const auto b = bench(30);
  for (auto s : kAllStrategies) {
    EXPECT_EQ(report_to_json(run(b, s, 1)), report_to_json(run(b, s, 8))) << to_string(s);
  }
}

TEST(Evaluate, AggregatesInvariantUnderPermutation) {
  auto b = bench(25);
  const EvalReport ref = run(b, StrategyKind::kCropRefine);
  std::reverse(b.dataset.samples.begin(), b.dataset.samples.end());
  EXPECT_EQ(run(b, StrategyKind::kCropRefine).acc, ref.acc);
}

TEST(Evaluate, FailuresScoreZeroAndDoNotAbort) {
  const auto b = bench(5);
  ScriptedBackend m;
  int n = 0;
  std::mutex mu;
  m.on(TaskKind::kRec, [&](const ModelRequest&) {
    std::lock_guard lock(mu);
    return ++n % 2 ? std::string("[0,0,1,1]") : std::string("garbage");
  });
  EvalOptions opts;
  opts.loader = scene_loader(b);
  RunConfig cfg;
  cfg.strategy = StrategyKind::kBaseline;
  const EvalReport r = evaluate(b.dataset, cfg, m, opts);
  expect_monotone(r);
  EXPECT_EQ(r.samples.size(), 5u);
  EXPECT_EQ(r.failures, 2);
  EXPECT_EQ(r.samples[1].iou, 0.0);
  EXPECT_FALSE(r.samples[1].predicted.has_value());
  EXPECT_TRUE(r.samples[1].error.has_value());
}

TEST(Evaluate, LoaderErrorsAreSampleFailures) {
  const auto b = bench(3);
  OracleBackend oracle({b.scenes, {}});
  EvalOptions opts;
  opts.loader = disk_loader("/nonexistent");
  const EvalReport r = evaluate(b.dataset, RunConfig{}, oracle, opts);
  expect_monotone(r);
  EXPECT_EQ(r.failures, 3);
}

TEST(Evaluate, InvalidConfigAbortsBeforeSamples) {
  const auto b = bench(3);
  ScriptedBackend m;
  RunConfig cfg;
  cfg.max_trials = 0;
  EvalOptions opts;
  opts.loader = scene_loader(b);
  EXPECT_THROW(evaluate(b.dataset, cfg, m, opts), UsageError);
  opts.parallelism = 0;
  EXPECT_THROW(evaluate(b.dataset, RunConfig{}, m, opts), UsageError);
}

TEST(Evaluate, StopFlagSkipsRemainingSamples) {
  const auto b = bench(4);
  OracleBackend oracle({b.scenes, {}});
  std::atomic<bool> stop{true};
  EvalOptions opts;
  opts.loader = scene_loader(b);
  opts.stop = &stop;
  const EvalReport r = evaluate(b.dataset, RunConfig{}, oracle, opts);
  for (const auto& s : r.samples) EXPECT_EQ(s.terminated_by, Termination::kSkipped);
}

TEST(Evaluate, TracesAlignWithSamples) {
  const auto b = bench(6);
  OracleBackend oracle({b.scenes, {}});
  std::vector<RunTrace> traces;
  EvalOptions opts;
  opts.loader = scene_loader(b);
  opts.parallelism = 3;
  opts.traces = &traces;
  evaluate(b.dataset, RunConfig{}, oracle, opts);
  ASSERT_EQ(traces.size(), 6u);
  for (std::size_t i = 0; i < traces.size(); ++i) EXPECT_EQ(traces[i].sample_id, b.dataset.samples[i].id);
}

TEST(Evaluate, RecordThenReplayMatches) {
  const auto b = bench(8);
  OracleBackend oracle({b.scenes, {0.7, 0.5, 0.5, false}});
  Transcript log;
  RecordingBackend rec(oracle, log);
  EvalOptions opts;
  opts.loader = scene_loader(b);
  opts.parallelism = 4;
  for (auto s : kAllStrategies) {
    RunConfig cfg;
    cfg.strategy = s;
    std::vector<RunTrace> live_traces, replay_traces;
    opts.traces = &live_traces;
    const EvalReport live = evaluate(b.dataset, cfg, rec, opts);
    ReplayBackend replay(log);
    opts.traces = &replay_traces;
    const EvalReport again = evaluate(b.dataset, cfg, replay, opts);
    EXPECT_EQ(report_to_json(live), report_to_json(again));
    for (std::size_t i = 0; i < live_traces.size(); ++i)
      EXPECT_EQ(trace_to_json(live_traces[i]), trace_to_json(replay_traces[i]));
  }
}

TEST(Sweep, MonotoneInObjectCount) {
  SyntheticParams p;
  p.count = 40;
  p.objects_per_scene = 8;
  const auto b = generate_synthetic_dataset(p);
  OracleBackend oracle({b.scenes, {}});
  EvalOptions opts;
  opts.loader = scene_loader(b);
  const auto points = object_count_sweep(b.dataset, RunConfig{}, oracle, opts, 8);
  ASSERT_EQ(points.size(), 9u);
  EXPECT_EQ(points.front().report.strategy(), StrategyKind::kBaseline);
  for (std::size_t i = 0; i < points.size(); ++i) {
    EXPECT_EQ(points[i].n_objects, static_cast<int>(i));
    expect_monotone(points[i].report);
    if (i > 0) EXPECT_GE(points[i].report.acc_070(), points[i - 1].report.acc_070());
  }
  EXPECT_EQ(points.back().report.acc_070(), 1.0);
}

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = bench(10, 4, 7), b = bench(10, 4, 7);
  ASSERT_EQ(a.dataset.samples.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& sa = a.dataset.samples[i];
    const auto& sb = b.dataset.samples[i];
    EXPECT_EQ(sa.id, sb.id);
    EXPECT_EQ(sa.expression, sb.expression);
    EXPECT_EQ(sa.ground_truth, sb.ground_truth);
    EXPECT_EQ(encode_png(scene_loader(a)(sa)), encode_png(scene_loader(b)(sb)));
  }
  EXPECT_NE(bench(10, 4, 8).dataset.samples[0].ground_truth, a.dataset.samples[0].ground_truth);
}

TEST(Synthetic, SingleObjectExpressionNamesIt) {
  const auto b = bench(5, 1);
  for (const auto& s : b.dataset.samples) {
    const auto& scene = b.scenes.at(s.id);
    ASSERT_EQ(scene.scene.objects.size(), 1u);
    EXPECT_NE(s.expression.find(scene.scene.objects[0].name), std::string::npos);
    EXPECT_EQ(scene.target, scene.scene.objects[0].name);
  }
}

TEST(SyntheticProperty, BoxesValidDisjointAndNamesUnique) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto b = bench(1, 1 + static_cast<int>(seed % 6), seed);
    for (const auto& s : b.dataset.samples) {
      EXPECT_TRUE(s.ground_truth.valid());
      EXPECT_FALSE(s.ground_truth.degenerate());
      const auto& objs = b.scenes.at(s.id).scene.objects;
      std::set<std::string> names;
      for (std::size_t i = 0; i < objs.size(); ++i) {
        names.insert(objs[i].name);
        for (std::size_t j = i + 1; j < objs.size(); ++j) EXPECT_EQ(iou(objs[i].box, objs[j].box), 0.0);
      }
      EXPECT_EQ(names.size(), objs.size());
    }
  }
}

TEST(Synthetic, InfeasiblePackingIsGenerationError) {
  SyntheticParams p;
  p.count = 1;
  p.objects_per_scene = 11;
  EXPECT_THROW(generate_synthetic_dataset(p), GenerationError);
  p.objects_per_scene = 10;
  p.canvas = {8, 8};
  EXPECT_THROW(generate_synthetic_dataset(p), GenerationError);
}

TEST(Synthetic, WriteThenLoadFixtures) {
  TempDir dir;
  const auto b = bench(3);
  const auto path = write_synthetic(b, dir.path());
  const Dataset d = load_dataset(path);
  ASSERT_EQ(d.samples.size(), 3u);
  const auto scenes = load_scene_fixtures(dir / "scenes");
  ASSERT_EQ(scenes.size(), 3u);
  for (const auto& s : d.samples) {
    EXPECT_EQ(load_image(dir.path() / s.image), scene_loader(b)(s));
    EXPECT_EQ(scenes.at(s.id).target, b.scenes.at(s.id).target);
  }
  OracleBackend oracle({scenes, {}});
  EvalOptions opts;
  opts.loader = disk_loader(dir.path());
  const EvalReport r = evaluate(d, RunConfig{}, oracle, opts);
  expect_monotone(r);
  EXPECT_EQ(r.acc_070(), 1.0);
}

}  // namespace
}  // namespace recloop
