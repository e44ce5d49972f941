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

#include "recloop/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <nlohmann/json.hpp>

#include "recloop/error.hpp"

namespace recloop {

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  validate(ImageSize{width, height});
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  validate(ImageSize{width, height});
  if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw UsageError("pixel buffer size does not match " + std::to_string(width) +
                     "x" + std::to_string(height) + " RGB");
  }
}

std::size_t RasterImage::offset(int x, int y) const {
  return (static_cast<std::size_t>(y) * width_ + x) * 3;
}

Rgb RasterImage::at(int x, int y) const {
  const auto o = offset(x, y);
  return {data_[o], data_[o + 1], data_[o + 2]};
}

void RasterImage::set(int x, int y, Rgb c) {
  const auto o = offset(x, y);
  data_[o] = c.r;
  data_[o + 1] = c.g;
  data_[o + 2] = c.b;
}

void RasterImage::fill_rect(const PixelBox& r, Rgb c) {
  const int x1 = std::max(r.x1, 0), x2 = std::min(r.x2, width_);
  const int y1 = std::max(r.y1, 0), y2 = std::min(r.y2, height_);
  for (int y = y1; y < y2; ++y) {
    for (int x = x1; x < x2; ++x) set(x, y, c);
  }
}

void validate(const SceneSpec& spec) {
  validate(spec.canvas);
  if (spec.objects.empty()) throw UsageError("scene has no objects");
  std::set<std::string> names;
  for (const auto& o : spec.objects) {
    validate(o.box);
    if (!names.insert(o.name).second) {
      throw UsageError("duplicate scene object name '" + o.name + "'");
    }
  }
}

RasterImage crop(const RasterImage& image, const NormBox& region) {
  validate(region);
  const PixelBox p = to_pixels(region, image.size());
  if (p.degenerate()) {
    throw UsageError("crop region " + format_box_exact(region) +
                     " is empty at " + std::to_string(image.width()) + "x" +
                     std::to_string(image.height()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(p.width()) * p.height() * 3);
  const auto src = image.data();
  for (int y = p.y1; y < p.y2; ++y) {
    const auto row = src.subspan((static_cast<std::size_t>(y) * image.width() + p.x1) * 3,
                                 static_cast<std::size_t>(p.width()) * 3);
    out.insert(out.end(), row.begin(), row.end());
  }
  return RasterImage(p.width(), p.height(), std::move(out));
}

RasterImage draw_boxes(const RasterImage& image, std::span<const BoxStroke> boxes) {
  RasterImage out = image;
  for (const auto& s : boxes) {
    validate(s.box);
    const PixelBox p = to_pixels(s.box, image.size());
    if (p.degenerate()) continue;
    const int t = std::max(1, s.stroke);
    // Outline bands inside the half-open rect; they overlap on thin boxes.
    out.fill_rect({p.x1, p.y1, p.x2, std::min(p.y1 + t, p.y2)}, s.color);
    out.fill_rect({p.x1, std::max(p.y2 - t, p.y1), p.x2, p.y2}, s.color);
    out.fill_rect({p.x1, p.y1, std::min(p.x1 + t, p.x2), p.y2}, s.color);
    out.fill_rect({std::max(p.x2 - t, p.x1), p.y1, p.x2, p.y2}, s.color);
  }
  return out;
}

int default_stroke(ImageSize size) {
  const double s = 0.004 * std::min(size.width, size.height);
  return std::max(1, static_cast<int>(std::floor(s + 0.5)));
}

Rgb palette_color(std::size_t index) {
  static constexpr Rgb kPalette[8] = {
      {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
  };
  return kPalette[index % 8];
}

namespace {

RasterImage from_mat(const cv::Mat& raw) {
  cv::Mat m = raw;
  if (m.depth() == CV_16U) m.convertTo(m, CV_8U, 1.0 / 257.0);
  if (m.depth() != CV_8U) throw IoError("unsupported pixel depth");
  const int ch = m.channels();
  RasterImage out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      const std::uint8_t* px = row + static_cast<std::size_t>(x) * ch;
      Rgb c;
      if (ch == 1 || ch == 2) {
        c = {px[0], px[0], px[0]};
      } else {
        c = {px[2], px[1], px[0]};  // BGR(A)
      }
      const int alpha = ch == 2 ? px[1] : ch == 4 ? px[3] : 255;
      if (alpha != 255) {
        auto over_black = [alpha](std::uint8_t v) {
          return static_cast<std::uint8_t>((v * alpha + 127) / 255);
        };
        c = {over_black(c.r), over_black(c.g), over_black(c.b)};
      }
      out.set(x, y, c);
    }
  }
  return out;
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw IoError("empty image buffer");
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U,
                    const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat m;
  try {
    m = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw IoError(std::string("image decode failed: ") + e.what());
  }
  if (m.empty()) throw IoError("image decode failed");
  return from_mat(m);
}

RasterImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + ": " + path.string());
  }
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  cv::Mat m(image.height(), image.width(), CV_8UC3);
  const auto src = image.data();
  for (int y = 0; y < image.height(); ++y) {
    std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      const std::size_t o = (static_cast<std::size_t>(y) * image.width() + x) * 3;
      row[x * 3] = src[o + 2];
      row[x * 3 + 1] = src[o + 1];
      row[x * 3 + 2] = src[o];
    }
  }
  std::vector<std::uint8_t> out;
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 3};
  if (!cv::imencode(".png", m, out, params)) throw IoError("PNG encode failed");
  return out;
}

void write_png(const RasterImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

RasterImage render_scene(const SceneSpec& spec) {
  validate(spec);
  RasterImage out(spec.canvas.width, spec.canvas.height, spec.background);
  for (const auto& o : spec.objects) out.fill_rect(to_pixels(o.box, spec.canvas), o.color);
  return out;
}

namespace {

nlohmann::ordered_json rgb_json(Rgb c) { return {c.r, c.g, c.b}; }

Rgb rgb_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw LoadError("color must be [r, g, b]");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

}  // namespace

std::string scene_to_json(const SceneSpec& spec) {
  nlohmann::ordered_json objects = nlohmann::ordered_json::array();
  for (const auto& o : spec.objects) {
    objects.push_back({{"name", o.name},
                       {"color", rgb_json(o.color)},
                       {"box", {o.box.x1, o.box.y1, o.box.x2, o.box.y2}}});
  }
  const nlohmann::ordered_json j = {
      {"canvas", {{"width", spec.canvas.width}, {"height", spec.canvas.height}}},
      {"background", rgb_json(spec.background)},
      {"objects", objects}};
  return j.dump();
}

SceneSpec scene_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SceneSpec s;
    s.canvas = {j.at("canvas").at("width").get<int>(), j.at("canvas").at("height").get<int>()};
    s.background = rgb_from(j.at("background"));
    for (const auto& o : j.at("objects")) {
      const auto& b = o.at("box");
      s.objects.push_back({o.at("name").get<std::string>(), rgb_from(o.at("color")),
                           {b.at(0).get<double>(), b.at(1).get<double>(),
                            b.at(2).get<double>(), b.at(3).get<double>()}});
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed scene: ") + e.what());
  } catch (const UsageError& e) {
    throw LoadError(std::string("invalid scene: ") + e.what());
  }
}

}  // namespace recloop
