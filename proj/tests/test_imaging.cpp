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

#include <fstream>
#include <vector>

#include "recloop/error.hpp"
#include "recloop/imaging.hpp"
#include "support.hpp"

namespace recloop {
namespace {

using testing::Gen;
using testing::TempDir;

RasterImage noise_image(Gen& g, int w, int h) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : data) v = static_cast<std::uint8_t>(g.integer(0, 255));
  return RasterImage(w, h, std::move(data));
}

TEST(RasterImage, RejectsBadShapes) {
  EXPECT_THROW(RasterImage(0, 3), UsageError);
  EXPECT_THROW(RasterImage(2, 2, std::vector<std::uint8_t>(11)), UsageError);
}

TEST(Crop, FullRegionIsIdentity) {
  Gen g(1);
  const RasterImage img = noise_image(g, 17, 9);
  EXPECT_EQ(crop(img, NormBox::unit()), img);
}

TEST(Crop, QuadrantOfTwoByTwo) {
  RasterImage img(2, 2);
  img.set(0, 0, {255, 0, 0});
  img.set(1, 0, {0, 255, 0});
  img.set(0, 1, {0, 0, 255});
  img.set(1, 1, {9, 9, 9});
  const RasterImage c = crop(img, {0.5, 0.5, 1, 1});
  ASSERT_EQ(c.size(), (ImageSize{1, 1}));
  EXPECT_EQ(c.at(0, 0), (Rgb{9, 9, 9}));
}

TEST(Crop, DegenerateRegionNamesBox) {
  RasterImage img(10, 10);
  try {
    crop(img, {0.2, 0.2, 0.2, 0.8});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("0.2"), std::string::npos) << e.what();
  }
}

TEST(CropProperty, CompositionWithinOnePixel) {
  Gen g(2);
  for (int i = 0; i < 300; ++i) {
    const int w = g.integer(50, 300), h = g.integer(50, 300);
    const RasterImage img = noise_image(g, w, h);
    const NormBox outer = g.box(0.3), rel = g.box(0.3);
    const RasterImage outer_img = crop(img, outer);
    if (to_pixels(rel, outer_img.size()).degenerate()) continue;
    const RasterImage twice = crop(outer_img, rel);
    const PixelBox po = to_pixels(outer, img.size());
    const PixelBox pr = to_pixels(rel, outer_img.size());
    const PixelBox once = to_pixels(map_from_frame(outer, rel), img.size());
    EXPECT_LE(std::abs(po.x1 + pr.x1 - once.x1), 1);
    EXPECT_LE(std::abs(po.y1 + pr.y1 - once.y1), 1);
    EXPECT_LE(std::abs(po.x1 + pr.x2 - once.x2), 1);
    EXPECT_LE(std::abs(po.y1 + pr.y2 - once.y2), 1);
    // The twice-cropped pixels are the original pixels at the composed offset.
    EXPECT_EQ(twice.at(0, 0), img.at(po.x1 + pr.x1, po.y1 + pr.y1));
  }
}

TEST(DrawBoxes, EmptyListIsIdentity) {
  RasterImage img(8, 8, Rgb{10, 20, 30});
  EXPECT_EQ(draw_boxes(img, {}), img);
}

TEST(DrawBoxes, OutlineOfPixelRect) {
  const Rgb bg{10, 20, 30}, red{255, 0, 0};
  const RasterImage img(8, 8, bg);
  const std::vector<BoxStroke> strokes = {{{0.25, 0.25, 0.75, 0.75}, red, 1}};
  const RasterImage out = draw_boxes(img, strokes);
  // Perimeter of half-open rect [2,6): columns/rows 2 and 5.
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool inside = x >= 2 && x < 6 && y >= 2 && y < 6;
      const bool edge = inside && (x == 2 || x == 5 || y == 2 || y == 5);
      EXPECT_EQ(out.at(x, y), edge ? red : bg) << x << "," << y;
    }
  }
  EXPECT_EQ(img.at(2, 2), bg);
}

TEST(DrawBoxes, LaterBoxesOverdraw) {
  const RasterImage img(8, 8);
  const std::vector<BoxStroke> strokes = {{{0.25, 0.25, 0.75, 0.75}, {255, 0, 0}, 1},
                                          {{0.25, 0.25, 0.5, 0.5}, {0, 255, 0}, 1}};
  EXPECT_EQ(draw_boxes(img, strokes).at(2, 2), (Rgb{0, 255, 0}));
}

TEST(DrawBoxesProperty, OnlyPerimeterPixelsChange) {
  Gen g(3);
  for (int i = 0; i < 200; ++i) {
    const RasterImage img(g.integer(5, 60), g.integer(5, 60), Rgb{1, 2, 3});
    const NormBox b = g.box();
    const int stroke = g.integer(1, 3);
    const std::vector<BoxStroke> strokes = {{b, {200, 100, 50}, stroke}};
    const RasterImage out = draw_boxes(img, strokes);
    ASSERT_EQ(out.size(), img.size());
    const PixelBox p = to_pixels(b, img.size());
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        const bool inside = x >= p.x1 && x < p.x2 && y >= p.y1 && y < p.y2;
        const bool band = inside && (x < p.x1 + stroke || x >= p.x2 - stroke ||
                                     y < p.y1 + stroke || y >= p.y2 - stroke);
        if (!band) EXPECT_EQ(out.at(x, y), img.at(x, y));
      }
    }
  }
}

TEST(DefaultStroke, ScalesWithImage) {
  EXPECT_EQ(default_stroke({100, 100}), 1);
  EXPECT_EQ(default_stroke({640, 480}), 2);
  EXPECT_EQ(default_stroke({1000, 2000}), 4);
}

TEST(Png, RoundTripIsLossless) {
  Gen g(4);
  const RasterImage img = noise_image(g, 23, 11);
  EXPECT_EQ(decode_image(encode_png(img)), img);
}

TEST(Png, OneRedPixel) {
  const RasterImage img(1, 1, Rgb{255, 0, 0});
  const RasterImage back = decode_image(encode_png(img));
  ASSERT_EQ(back.data().size(), 3u);
  EXPECT_EQ(back.data()[0], 255);
  EXPECT_EQ(back.data()[1], 0);
  EXPECT_EQ(back.data()[2], 0);
}

TEST(Png, EncodingIsDeterministic) {
  Gen g(5);
  const RasterImage img = noise_image(g, 12, 12);
  EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(LoadImage, TruncatedFileIsIoError) {
  TempDir dir;
  auto bytes = encode_png(RasterImage(16, 16, Rgb{1, 2, 3}));
  bytes.resize(bytes.size() / 2);
  std::ofstream(dir / "t.png", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  EXPECT_THROW(load_image(dir / "t.png"), IoError);
  try {
    load_image(dir / "missing.png");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.png"), std::string::npos);
  }
}

TEST(LoadImage, WriteThenLoad) {
  TempDir dir;
  Gen g(6);
  const RasterImage img = noise_image(g, 5, 7);
  write_png(img, dir / "a.png");
  EXPECT_EQ(load_image(dir / "a.png"), img);
}

SceneSpec two_objects() {
  return {{40, 20},
          {0, 0, 0},
          {{"red block", {255, 0, 0}, {0.0, 0.0, 0.25, 0.5}},
           {"blue block", {0, 0, 255}, {0.5, 0.5, 1.0, 1.0}}}};
}

TEST(RenderScene, FullObjectIsUniform) {
  const SceneSpec s{{6, 4}, {1, 1, 1}, {{"x", {7, 8, 9}, NormBox::unit()}}};
  EXPECT_EQ(render_scene(s), RasterImage(6, 4, Rgb{7, 8, 9}));
}

TEST(RenderScene, ObjectCentersAndBackground) {
  const SceneSpec s = two_objects();
  const RasterImage img = render_scene(s);
  EXPECT_EQ(img.at(5, 5), (Rgb{255, 0, 0}));
  EXPECT_EQ(img.at(30, 15), (Rgb{0, 0, 255}));
  EXPECT_EQ(img.at(30, 2), (Rgb{0, 0, 0}));
  EXPECT_EQ(render_scene(s), img);
}

TEST(SceneSpec, ValidationAndJsonRoundTrip) {
  SceneSpec s = two_objects();
  const SceneSpec back = scene_from_json(scene_to_json(s));
  EXPECT_EQ(render_scene(back), render_scene(s));
  ASSERT_EQ(back.objects.size(), 2u);
  EXPECT_EQ(back.objects[1].name, "blue block");
  s.objects[1].name = "red block";
  EXPECT_THROW(validate(s), UsageError);
  s.objects.clear();
  EXPECT_THROW(validate(s), UsageError);
}

}  // namespace
}  // namespace recloop
