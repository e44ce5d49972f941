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

#include <thread>
#include <vector>

#include "recloop/error.hpp"
#include "recloop/oracle.hpp"
#include "recloop/pipeline.hpp"
#include "support.hpp"

namespace recloop {
namespace {

using testing::expect_box_near;
using testing::Gen;

const NormBox kTarget{0.2, 0.2, 0.6, 0.6};

SyntheticOracleConfig one_scene(OracleParams params = {}) {
  SceneSpec s{{100, 100},
              {0, 0, 0},
              {{"red block", {255, 0, 0}, kTarget}, {"blue block", {0, 0, 255}, {0.7, 0.7, 0.9, 0.9}}}};
  return {{{"s1", {s, "red block"}}}, params};
}

ModelRequest rec_request(std::string prompt, NormBox frame = NormBox::unit()) {
  return make_request(TaskKind::kRec, RecPrompt{std::move(prompt)}, {}, {100, 100}, frame, "s1", 1);
}

TEST(Oracle, ContextFreeRecShrinks) {
  const auto reply = oracle_complete(one_scene(), rec_request("find the red block"));
  const NormBox b = parse_bbox_reply(reply.text);
  expect_box_near(b, {0.26, 0.26, 0.54, 0.54}, 1e-12);
  EXPECT_NEAR(iou(b, kTarget), 0.49, 1e-12);
}

TEST(Oracle, RecCopiesTrueBoxFromContext) {
  const auto reply =
      oracle_complete(one_scene(), rec_request("1. red block [0.20, 0.20, 0.60, 0.60]\n\nfind it"));
  EXPECT_EQ(parse_bbox_reply(reply.text), kTarget);
  // Within the 0.01 tolerance the context box is echoed as written.
  const auto near =
      oracle_complete(one_scene(), rec_request("1. red block [0.205, 0.20, 0.60, 0.595]"));
  expect_box_near(parse_bbox_reply(near.text), {0.205, 0.20, 0.60, 0.595}, 1e-12);
}

TEST(Oracle, RecRepliesInRequestFrame) {
  const NormBox frame{0.1, 0.1, 0.7, 0.7};
  const auto reply = oracle_complete(one_scene(), rec_request("plain", frame));
  const NormBox back = map_from_frame(frame, parse_bbox_reply(reply.text));
  expect_box_near(back, {0.26, 0.26, 0.54, 0.54}, 1e-12);
}

TEST(Oracle, VqaThreshold) {
  auto vqa = [](NormBox frame) {
    return make_request(TaskKind::kVqa, VqaPrompt{"the red block"}, {}, {100, 100}, frame, "s1", 1);
  };
  EXPECT_EQ(oracle_complete(one_scene(), vqa(kTarget)).text, "Yes");
  EXPECT_EQ(oracle_complete(one_scene(), vqa({0.26, 0.26, 0.54, 0.54})).text, "No");
}

TEST(Oracle, CaptionNamesBestOverlap) {
  auto cap = [](NormBox frame) {
    return make_request(TaskKind::kCaption, CaptionPrompt{}, {}, {100, 100}, frame, "s1", 1);
  };
  EXPECT_EQ(oracle_complete(one_scene(), cap({0.6, 0.6, 1, 1})).text, "blue block");
  EXPECT_EQ(oracle_complete(one_scene(), cap({0.0, 0.8, 0.1, 0.9})).text, "background");
  OracleParams p;
  p.caption_reveals_box = true;
  EXPECT_EQ(oracle_complete(one_scene(p), cap({0.3, 0.3, 0.5, 0.5})).text,
            "red block [0.20, 0.20, 0.60, 0.60]");
}

TEST(Oracle, GdescListsByFidelity) {
  auto gdesc = [](int n) {
    return make_request(TaskKind::kGdesc, GdescPrompt{n, std::nullopt}, {}, {100, 100},
                        NormBox::unit(), "s1", 0);
  };
  EXPECT_EQ(oracle_complete(one_scene(), gdesc(5)).text,
            "1. red block [0.20, 0.20, 0.60, 0.60]\n2. blue block [0.70, 0.70, 0.90, 0.90]");
  EXPECT_EQ(parse_grounded(oracle_complete(one_scene(), gdesc(1)).text, 1).grounded.entries.size(), 1u);
  OracleParams p;
  p.fidelity = 0.0;
  EXPECT_EQ(oracle_complete(one_scene(p), gdesc(5)).text, "");
}

TEST(Oracle, UnknownSampleIsOracleError) {
  auto req = rec_request("x");
  req.sample_id = "nope";
  EXPECT_THROW(oracle_complete(one_scene(), req), OracleError);
}

TEST(Oracle, InvalidParamsRejected) {
  OracleParams p;
  p.shrink = 0.0;
  EXPECT_THROW(OracleBackend{one_scene(p)}, UsageError);
  p = {};
  p.vqa_threshold = 1.0;
  EXPECT_THROW(OracleBackend{one_scene(p)}, UsageError);
}

TEST(OracleProperty, ShrunkIouIsShrinkSquared) {
  Gen g(31);
  for (int i = 0; i < 2000; ++i) {
    const NormBox truth = g.box(0.01);
    const double s = g.uniform(0.05, 1.0);
    SceneSpec scene{{100, 100}, {0, 0, 0}, {{"t", {1, 1, 1}, truth}}};
    SyntheticOracleConfig cfg{{{"s1", {scene, "t"}}}, {s, 0.5, 1.0, false}};
    const NormBox b = parse_bbox_reply(oracle_complete(cfg, rec_request("x")).text);
    EXPECT_NEAR(iou(b, truth), s * s, 1e-9);
  }
}

TEST(OracleProperty, PureAcrossThreads) {
  const auto cfg = one_scene();
  const auto req = rec_request("1. blue block [0.70, 0.70, 0.90, 0.90]");
  const std::string want = oracle_complete(cfg, req).text;
  std::vector<std::string> got(8);
  {
    std::vector<std::jthread> threads;
    for (int k = 0; k < 8; ++k)
      threads.emplace_back([&, k] { got[k] = oracle_complete(cfg, req).text; });
  }
  for (const auto& s : got) EXPECT_EQ(s, want);
}

}  // namespace
}  // namespace recloop
