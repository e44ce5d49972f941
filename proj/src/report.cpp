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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "recloop/error.hpp"
#include "recloop/evaluate.hpp"

namespace recloop {
namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kThresholdKeys[3] = {"0.5", "0.7", "0.9"};

ojson config_json(const RunConfig& c) {
  return {{"strategy", to_string(c.strategy)},
          {"n_objects", c.n_objects},
          {"crop_scale", c.crop_scale},
          {"max_trials", c.max_trials},
          {"vqa_crop_mode", to_string(c.vqa_crop_mode)},
          {"grounded_parse_policy", to_string(c.grounded_parse_policy)},
          {"gdesc_with_expression", c.gdesc_with_expression},
          {"threshold_rule", "iou >= threshold"},
          {"prompt_version", kPromptVersion}};
}

RunConfig config_from(const nlohmann::json& j) {
  RunConfig c;
  c.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  c.n_objects = j.at("n_objects").get<int>();
  c.crop_scale = j.at("crop_scale").get<double>();
  c.max_trials = j.at("max_trials").get<int>();
  c.vqa_crop_mode = crop_mode_from_string(j.at("vqa_crop_mode").get<std::string>());
  c.grounded_parse_policy =
      parse_policy_from_string(j.at("grounded_parse_policy").get<std::string>());
  c.gdesc_with_expression = j.value("gdesc_with_expression", false);
  return c;
}

std::string percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", ratio * 100.0);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::filesystem::path table_path(const std::filesystem::path& json_path) {
  std::filesystem::path p = json_path;
  p.replace_extension(".txt");
  return p;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  ojson samples = ojson::array();
  for (const auto& s : r.samples) {
    samples.push_back(
        {{"id", s.id},
         {"predicted", s.predicted ? ojson{s.predicted->x1, s.predicted->y1, s.predicted->x2,
                                           s.predicted->y2}
                                   : ojson()},
         {"iou", s.iou},
         {"trials_used", s.trials_used},
         {"terminated_by", to_string(s.terminated_by)},
         {"error", s.error ? ojson(*s.error) : ojson()}});
  }
  ojson acc;
  for (std::size_t i = 0; i < 3; ++i) acc[kThresholdKeys[i]] = r.acc[i];
  const ojson j = {{"dataset", r.dataset},
                   {"strategy", to_string(r.config.strategy)},
                   {"config", config_json(r.config)},
                   {"samples", samples},
                   {"acc", acc},
                   {"failures", r.failures}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.config = config_from(j.at("config"));
    for (const auto& s : j.at("samples")) {
      SampleRecord rec;
      rec.id = s.at("id").get<std::string>();
      if (!s.at("predicted").is_null()) {
        const auto& p = s.at("predicted");
        rec.predicted = NormBox{p.at(0).get<double>(), p.at(1).get<double>(),
                                p.at(2).get<double>(), p.at(3).get<double>()};
      }
      rec.iou = s.at("iou").get<double>();
      rec.trials_used = s.at("trials_used").get<int>();
      rec.terminated_by = termination_from_string(s.at("terminated_by").get<std::string>());
      if (!s.at("error").is_null()) rec.error = s.at("error").get<std::string>();
      r.samples.push_back(std::move(rec));
    }
    for (std::size_t i = 0; i < 3; ++i) r.acc[i] = j.at("acc").at(kThresholdKeys[i]).get<double>();
    r.failures = j.at("failures").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed report: ") + e.what());
  }
}

std::string format_table(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << pad("Dataset", 16) << pad("Context", 22) << pad("Acc_0.5", 9, true)
     << pad("Acc_0.7", 9, true) << pad("Acc_0.9", 9, true) << pad("Failures", 10, true) << '\n';
  for (const auto& r : reports) {
    os << pad(r.dataset, 16) << pad(std::string(display_name(r.strategy())), 22)
       << pad(percent(r.acc[0]), 9, true) << pad(percent(r.acc[1]), 9, true)
       << pad(percent(r.acc[2]), 9, true) << pad(std::to_string(r.failures), 10, true) << '\n';
  }
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report " + path.string());
    out << report_to_json(report);
    if (!out) throw IoError("write failed: " + path.string());
  }
  const auto txt = table_path(path);
  std::ofstream out(txt, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + txt.string());
  out << format_table(std::span<const EvalReport>(&report, 1));
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

ReportComparison compare_reports(const EvalReport& a, const EvalReport& b) {
  std::set<std::string> ia, ib;
  for (const auto& s : a.samples) ia.insert(s.id);
  for (const auto& s : b.samples) ib.insert(s.id);
  if (ia != ib) {
    std::string diff;
    std::size_t shown = 0;
    auto add = [&](const std::string& id, const char* side) {
      if (shown++ < 20) diff += (diff.empty() ? "" : ", ") + id + " (" + side + ")";
    };
    for (const auto& id : ia) {
      if (!ib.count(id)) add(id, "only in A");
    }
    for (const auto& id : ib) {
      if (!ia.count(id)) add(id, "only in B");
    }
    if (shown > 20) diff += ", ... " + std::to_string(shown - 20) + " more";
    throw UsageError("reports cover different samples: " + diff);
  }
  ReportComparison c;
  for (std::size_t i = 0; i < 3; ++i) {
    c.a[i] = a.acc[i];
    c.b[i] = b.acc[i];
    c.delta_points[i] = (b.acc[i] - a.acc[i]) * 100.0;
  }
  return c;
}

std::string format_delta(double points) {
  char buf[32];
  // Keeps tiny negative rounding noise from printing as "-0.00".
  const double v = std::abs(points) < 0.005 ? 0.0 : points;
  std::snprintf(buf, sizeof(buf), "%+.2f", v);
  return buf;
}

std::string format_comparison(const ReportComparison& c) {
  std::ostringstream os;
  os << pad("Metric", 10) << pad("A", 9, true) << pad("B", 9, true) << "  Delta\n";
  for (std::size_t i = 0; i < 3; ++i) {
    os << pad(std::string("Acc_") + kThresholdKeys[i], 10) << pad(percent(c.a[i]), 9, true)
       << pad(percent(c.b[i]), 9, true) << "  (" << format_delta(c.delta_points[i]) << ")\n";
  }
  return os.str();
}

}  // namespace recloop
