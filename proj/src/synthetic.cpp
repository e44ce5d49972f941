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

#include "recloop/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "recloop/error.hpp"

namespace recloop {
namespace {

struct NamedColor {
  const char* name;
  Rgb rgb;
};

constexpr NamedColor kColors[] = {
    {"red", {220, 30, 30}},     {"green", {30, 170, 60}},  {"blue", {30, 60, 220}},
    {"yellow", {240, 220, 30}}, {"orange", {245, 130, 30}}, {"purple", {130, 40, 170}},
    {"cyan", {40, 220, 220}},   {"magenta", {230, 40, 200}}, {"brown", {130, 80, 30}},
    {"black", {10, 10, 10}},
};
constexpr int kColorCount = static_cast<int>(std::size(kColors));
constexpr Rgb kBackground{235, 235, 235};

// Portable across standard libraries, unlike std::uniform_int_distribution.
int uniform(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return lo + static_cast<int>(v % span);
}

// Integer rectangle in hundredths of the image extent, half-open.
struct Cell {
  int x1, y1, x2, y2;
};

bool separated(const Cell& a, const Cell& b, int gap) {
  return a.x2 + gap <= b.x1 || b.x2 + gap <= a.x1 || a.y2 + gap <= b.y1 ||
         b.y2 + gap <= a.y1;
}

const char* shape_word(const Cell& c) {
  const double w = c.x2 - c.x1;
  const double h = c.y2 - c.y1;
  if (w >= 1.5 * h) return "horizontal bar";
  if (h >= 1.5 * w) return "vertical bar";
  return "block";
}

std::vector<Cell> pack(std::mt19937_64& rng, int n, int min_side, int max_side) {
  constexpr int kGap = 2;
  constexpr int kRestarts = 64;
  constexpr int kAttempts = 2000;
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<Cell> cells;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      ok = false;
      for (int a = 0; a < kAttempts; ++a) {
        const int w = uniform(rng, min_side, max_side);
        const int h = uniform(rng, min_side, max_side);
        const int x = uniform(rng, 0, 100 - w);
        const int y = uniform(rng, 0, 100 - h);
        const Cell c{x, y, x + w, y + h};
        if (std::all_of(cells.begin(), cells.end(),
                        [&](const Cell& o) { return separated(c, o, kGap); })) {
          cells.push_back(c);
          ok = true;
          break;
        }
      }
    }
    if (ok) return cells;
  }
  throw GenerationError("cannot pack " + std::to_string(n) +
                        " non-overlapping objects of side >= " + std::to_string(min_side) +
                        "/100 into the canvas");
}

std::string sample_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn_%05d", i);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SyntheticBenchmark generate_synthetic_dataset(const SyntheticParams& params) {
  if (params.count < 1) throw UsageError("synthetic count must be >= 1");
  if (params.objects_per_scene < 1) throw UsageError("objects per scene must be >= 1");
  validate(params.canvas);
  if (params.objects_per_scene > kColorCount) {
    throw GenerationError("at most " + std::to_string(kColorCount) +
                          " uniquely named objects per scene");
  }
  // Every object must cover at least 2 pixels per side once rendered.
  const int min_extent = std::min(params.canvas.width, params.canvas.height);
  const int min_side = std::max(6, static_cast<int>(std::ceil(200.0 / min_extent)));
  const int grid = static_cast<int>(std::ceil(std::sqrt(params.objects_per_scene)));
  const int max_side = std::max(min_side, std::min(40, 90 / grid));

  std::mt19937_64 rng(params.seed);
  SyntheticBenchmark out;
  out.dataset.name = "synthetic_s" + std::to_string(params.seed);
  out.dataset.format = DatasetFormat::kCanonical;
  for (int i = 0; i < params.count; ++i) {
    const auto cells = pack(rng, params.objects_per_scene, min_side, max_side);
    std::vector<int> colors(kColorCount);
    for (int c = 0; c < kColorCount; ++c) colors[c] = c;
    for (int c = kColorCount - 1; c > 0; --c) std::swap(colors[c], colors[uniform(rng, 0, c)]);

    OracleScene scene;
    scene.scene.canvas = params.canvas;
    scene.scene.background = kBackground;
    for (int k = 0; k < params.objects_per_scene; ++k) {
      const Cell& c = cells[static_cast<std::size_t>(k)];
      const NamedColor& col = kColors[colors[static_cast<std::size_t>(k)]];
      scene.scene.objects.push_back(
          {std::string(col.name) + " " + shape_word(c), col.rgb,
           {c.x1 / 100.0, c.y1 / 100.0, c.x2 / 100.0, c.y2 / 100.0}});
    }
    const int target = uniform(rng, 0, params.objects_per_scene - 1);
    const SceneObject& t = scene.scene.objects[static_cast<std::size_t>(target)];
    scene.target = t.name;

    Sample s;
    s.id = sample_id(i);
    s.image = "images/" + s.id + ".png";
    s.expression = "the " + t.name;
    s.ground_truth = t.box;
    s.image_size = params.canvas;
    out.dataset.samples.push_back(s);
    out.scenes.emplace(s.id, std::move(scene));
  }
  return out;
}

ImageLoader scene_loader(const SyntheticBenchmark& bench) {
  auto scenes = std::make_shared<const std::map<std::string, OracleScene>>(bench.scenes);
  return [scenes](const Sample& s) {
    const auto it = scenes->find(s.id);
    if (it == scenes->end()) throw IoError("no synthetic scene for sample '" + s.id + "'");
    return render_scene(it->second.scene);
  };
}

std::filesystem::path write_synthetic(const SyntheticBenchmark& bench,
                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "scenes");
  for (const auto& s : bench.dataset.samples) {
    const OracleScene& scene = bench.scenes.at(s.id);
    write_png(render_scene(scene.scene), dir / s.image);
    const nlohmann::ordered_json doc = {{"sample_id", s.id},
                                        {"target", scene.target},
                                        {"scene", nlohmann::json::parse(scene_to_json(scene.scene))}};
    std::ofstream out(dir / "scenes" / (s.id + ".json"), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write scene fixture for " + s.id);
    out << doc.dump() << '\n';
  }
  const auto path = dir / "dataset.jsonl";
  save_dataset(bench.dataset, path);
  return path;
}

std::map<std::string, OracleScene> load_scene_fixtures(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("scene fixture directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, OracleScene> out;
  for (const auto& f : files) {
    try {
      const auto j = nlohmann::json::parse(read_file(f));
      OracleScene s{scene_from_json(j.at("scene").dump()), j.at("target").get<std::string>()};
      out.emplace(j.at("sample_id").get<std::string>(), std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(f.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace recloop
