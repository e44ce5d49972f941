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

#include "recloop/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "recloop/error.hpp"

namespace recloop {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::kBaseline: return "baseline";
    case StrategyKind::kObjectDesc: return "object_desc";
    case StrategyKind::kGroundedDesc: return "grounded_desc";
    case StrategyKind::kCropRefine: return "crop";
    case StrategyKind::kDrawBoxes: return "draw_boxes";
    case StrategyKind::kChainOfCaption: return "coc";
  }
  return "?";
}

std::string_view display_name(StrategyKind s) {
  switch (s) {
    case StrategyKind::kBaseline: return "-";
    case StrategyKind::kObjectDesc: return "Object description";
    case StrategyKind::kGroundedDesc: return "Grounded description";
    case StrategyKind::kCropRefine: return "Cropping";
    case StrategyKind::kDrawBoxes: return "Draw bounding box";
    case StrategyKind::kChainOfCaption: return "Chain-of-caption";
  }
  return "?";
}

StrategyKind strategy_from_string(std::string_view name) {
  const std::string n = lower(name);
  for (StrategyKind s : kAllStrategies) {
    if (n == to_string(s)) return s;
  }
  if (n == "object-desc" || n == "objectdesc") return StrategyKind::kObjectDesc;
  if (n == "grounded" || n == "grounded-desc" || n == "gdesc") return StrategyKind::kGroundedDesc;
  if (n == "cropping" || n == "crop_refine" || n == "crop-refine") return StrategyKind::kCropRefine;
  if (n == "draw" || n == "draw-boxes") return StrategyKind::kDrawBoxes;
  if (n == "chain_of_caption" || n == "chain-of-caption") return StrategyKind::kChainOfCaption;
  throw UsageError("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(CropMode m) {
  return m == CropMode::kExact ? "exact" : "expanded";
}

CropMode crop_mode_from_string(std::string_view name) {
  const std::string n = lower(name);
  if (n == "exact") return CropMode::kExact;
  if (n == "expanded") return CropMode::kExpanded;
  throw UsageError("unknown crop mode '" + std::string(name) + "'");
}

std::string_view to_string(ParsePolicy p) {
  return p == ParsePolicy::kStrict ? "strict" : "lenient";
}

ParsePolicy parse_policy_from_string(std::string_view name) {
  const std::string n = lower(name);
  if (n == "strict") return ParsePolicy::kStrict;
  if (n == "lenient") return ParsePolicy::kLenient;
  throw UsageError("unknown parse policy '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kCompleted: return "completed";
    case Termination::kVerified: return "verified";
    case Termination::kMaxTrials: return "max_trials";
    case Termination::kParseExhaustion: return "parse_exhaustion";
    case Termination::kFailed: return "failed";
    case Termination::kSkipped: return "skipped";
  }
  return "?";
}

Termination termination_from_string(std::string_view name) {
  for (Termination t : {Termination::kCompleted, Termination::kVerified, Termination::kMaxTrials,
                        Termination::kParseExhaustion, Termination::kFailed,
                        Termination::kSkipped}) {
    if (name == to_string(t)) return t;
  }
  throw UsageError("unknown termination '" + std::string(name) + "'");
}

void validate(const RunConfig& cfg) {
  if (cfg.n_objects < 0) throw UsageError("n_objects must be >= 0");
  if (!(cfg.crop_scale > 0.0)) throw UsageError("crop_scale must be > 0");
  if (cfg.max_trials < 1) throw UsageError("max_trials must be >= 1");
  const bool needs_objects = cfg.strategy == StrategyKind::kObjectDesc ||
                             cfg.strategy == StrategyKind::kGroundedDesc ||
                             cfg.strategy == StrategyKind::kDrawBoxes ||
                             cfg.strategy == StrategyKind::kChainOfCaption;
  if (needs_objects && cfg.n_objects < 1) {
    throw UsageError("strategy " + std::string(to_string(cfg.strategy)) +
                     " needs n_objects >= 1");
  }
}

int RunTrace::calls_for(TaskKind task) const {
  return static_cast<int>(
      std::count_if(calls.begin(), calls.end(), [task](const CallRecord& c) { return c.task == task; }));
}

NormBox crop_frame(const NormBox& box, ImageSize size) {
  PixelBox p = to_pixels(box, size);
  if (p.width() < 1) {
    if (p.x2 < size.width) ++p.x2; else --p.x1;
  }
  if (p.height() < 1) {
    if (p.y2 < size.height) ++p.y2; else --p.y1;
  }
  return from_pixels(p, size);
}

namespace {

// State shared by the steps of one run.
class Session {
 public:
  Session(const RasterImage& image, std::string_view expression, Backend& backend,
          std::string_view sample_id, StrategyKind strategy)
      : image_(image), expression_(expression), backend_(backend),
        full_png_(encode_png(image)) {
    if (expression_.empty()) throw UsageError("referring expression is empty");
    trace_.sample_id = std::string(sample_id);
    trace_.strategy = strategy;
  }

  RunTrace& trace() { return trace_; }
  const std::string& expression() const { return expression_; }
  const RasterImage& image() const { return image_; }

  // Sends one request; the returned index addresses its CallRecord.
  std::pair<std::string, std::size_t> call(TaskKind task, PromptParams params,
                                           const RasterImage* view, NormBox frame,
                                           int trial) {
    std::vector<std::uint8_t> png = view ? encode_png(*view) : full_png_;
    const ImageSize size = view ? view->size() : image_.size();
    ModelRequest req = make_request(task, std::move(params), std::move(png), size, frame,
                                    trace_.sample_id, trial);
    trace_.calls.push_back({task, trial, request_digest(req), false, {}});
    const std::size_t idx = trace_.calls.size() - 1;
    auto reply = complete(backend_, req);
    return {std::move(reply.text), idx};
  }

  void mark(std::size_t idx, bool ok, std::string result) {
    trace_.calls[idx].ok = ok;
    trace_.calls[idx].result = std::move(result);
  }

  void warn(std::string msg) { trace_.warnings.push_back(std::move(msg)); }

  GroundedDescription grounded(const RunConfig& cfg) {
    GdescPrompt p{cfg.n_objects, std::nullopt};
    if (cfg.gdesc_with_expression) p.expression = expression_;
    auto [text, idx] = call(TaskKind::kGdesc, p, nullptr, NormBox::unit(), 0);
    try {
      auto parsed = parse_grounded(text, cfg.n_objects, cfg.grounded_parse_policy, image_.size());
      for (auto& w : parsed.warnings) warn("GDESC: " + w);
      mark(idx, true, std::to_string(parsed.grounded.entries.size()) + " entries");
      return std::move(parsed.grounded);
    } catch (const ParseError& e) {
      mark(idx, false, e.what());
      throw;
    }
  }

  // Parsed box, or nullopt after recording the failure.
  std::optional<NormBox> rec(const std::string& context, const RasterImage* view,
                             NormBox frame, int trial) {
    auto [text, idx] = call(TaskKind::kRec, RecPrompt{context}, view, frame, trial);
    ++trace_.trials_used;
    try {
      const NormBox b = parse_bbox_reply(text, view ? view->size() : image_.size());
      mark(idx, true, format_box_exact(b));
      return b;
    } catch (const ParseError& e) {
      mark(idx, false, e.what());
      return std::nullopt;
    }
  }

  bool vqa(const RasterImage& view, NormBox frame, int trial) {
    auto [text, idx] = call(TaskKind::kVqa, VqaPrompt{expression_}, &view, frame, trial);
    bool yes = false;
    try {
      yes = parse_yes_no(text);
      mark(idx, true, yes ? "yes" : "no");
    } catch (const ParseError& e) {
      mark(idx, false, e.what());
      warn("VQA reply unparseable at trial " + std::to_string(trial) + ", treated as no");
    }
    trace_.vqa_answers.push_back(yes);
    return yes;
  }

  std::string caption(const RasterImage& view, NormBox frame, int trial) {
    auto [text, idx] = call(TaskKind::kCaption, CaptionPrompt{}, &view, frame, trial);
    std::string c = text;
    const auto first = c.find_first_not_of(" \t\r\n");
    const auto last = c.find_last_not_of(" \t\r\n");
    c = first == std::string::npos ? std::string() : c.substr(first, last - first + 1);
    if (c.empty()) {
      mark(idx, false, "empty caption");
      warn("empty caption at trial " + std::to_string(trial));
      c = "unknown object";
    } else {
      mark(idx, true, c);
    }
    return c;
  }

  std::string plain_context() const { return assemble_context({{}, {}, expression_, true}); }

  void finish(NormBox b, Termination t) {
    trace_.final_box = b;
    trace_.terminated_by = t;
  }

  void fail(std::string msg, Termination t = Termination::kFailed) {
    trace_.final_box.reset();
    trace_.error = std::move(msg);
    trace_.terminated_by = t;
  }

 private:
  const RasterImage& image_;
  std::string expression_;
  Backend& backend_;
  std::vector<std::uint8_t> full_png_;
  RunTrace trace_;
};

template <class Body>
RunTrace guarded(Session& s, Body body) {
  try {
    body();
  } catch (const BackendError& e) {
    s.fail(e.what());
  } catch (const ParseError& e) {
    s.fail(e.what());
  } catch (const IoError& e) {
    s.fail(e.what());
  }
  return std::move(s.trace());
}

RunTrace run_with_grounded_context(const RasterImage& image, std::string_view expression,
                                   Backend& backend, const RunConfig& cfg,
                                   std::string_view sample_id, StrategyKind kind,
                                   bool include_boxes) {
  RunConfig c = cfg;
  c.strategy = kind;
  validate(c);
  Session s(image, expression, backend, sample_id, kind);
  return guarded(s, [&] {
    const GroundedDescription g = s.grounded(c);
    const RecContext ctx{g, {}, s.expression(), include_boxes};
    const auto b = s.rec(assemble_context(ctx), nullptr, NormBox::unit(), 1);
    if (!b) return s.fail("REC reply unparseable");
    s.trace().predictions.push_back(*b);
    s.finish(*b, Termination::kCompleted);
  });
}

}  // namespace

RunTrace run_baseline(const RasterImage& image, std::string_view expression,
                      Backend& backend, std::string_view sample_id) {
  Session s(image, expression, backend, sample_id, StrategyKind::kBaseline);
  return guarded(s, [&] {
    const auto b = s.rec(s.plain_context(), nullptr, NormBox::unit(), 1);
    if (!b) return s.fail("REC reply unparseable");
    s.trace().predictions.push_back(*b);
    s.finish(*b, Termination::kCompleted);
  });
}

RunTrace run_grounded(const RasterImage& image, std::string_view expression,
                      Backend& backend, const RunConfig& cfg, std::string_view sample_id) {
  return run_with_grounded_context(image, expression, backend, cfg, sample_id,
                                   StrategyKind::kGroundedDesc, true);
}

RunTrace run_object_desc(const RasterImage& image, std::string_view expression,
                         Backend& backend, const RunConfig& cfg,
                         std::string_view sample_id) {
  return run_with_grounded_context(image, expression, backend, cfg, sample_id,
                                   StrategyKind::kObjectDesc, false);
}

RunTrace run_crop(const RasterImage& image, std::string_view expression, Backend& backend,
                  const RunConfig& cfg, std::string_view sample_id) {
  RunConfig c = cfg;
  c.strategy = StrategyKind::kCropRefine;
  validate(c);
  Session s(image, expression, backend, sample_id, StrategyKind::kCropRefine);
  return guarded(s, [&] {
    const auto first = s.rec(s.plain_context(), nullptr, NormBox::unit(), 1);
    if (!first) return s.fail("first REC reply unparseable");
    s.trace().predictions.push_back(*first);
    const NormBox frame =
        crop_frame(expand_and_clamp(*first, c.crop_scale).box, image.size());
    const RasterImage view = crop(image, frame);
    const auto inner = s.rec(s.plain_context(), &view, frame, 2);
    if (!inner) {
      s.warn("second REC reply unparseable, keeping the first prediction");
      return s.finish(*first, Termination::kCompleted);
    }
    const NormBox mapped = clamp_unit(map_from_frame(frame, *inner));
    s.trace().predictions.push_back(mapped);
    s.finish(mapped, Termination::kCompleted);
  });
}

RunTrace run_draw(const RasterImage& image, std::string_view expression, Backend& backend,
                  const RunConfig& cfg, std::string_view sample_id) {
  RunConfig c = cfg;
  c.strategy = StrategyKind::kDrawBoxes;
  validate(c);
  Session s(image, expression, backend, sample_id, StrategyKind::kDrawBoxes);
  return guarded(s, [&] {
    const GroundedDescription g = s.grounded(c);
    std::vector<BoxStroke> strokes;
    const int stroke = default_stroke(image.size());
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
      strokes.push_back({g.entries[i].box, palette_color(i), stroke});
    }
    const RasterImage annotated = draw_boxes(image, strokes);
    const auto b = s.rec(s.plain_context(), &annotated, NormBox::unit(), 1);
    if (!b) return s.fail("REC reply unparseable");
    s.trace().predictions.push_back(*b);
    s.finish(*b, Termination::kCompleted);
  });
}

RunTrace run_chain_of_caption(const RasterImage& image, std::string_view expression,
                              Backend& backend, const RunConfig& cfg,
                              std::string_view sample_id) {
  RunConfig c = cfg;
  c.strategy = StrategyKind::kChainOfCaption;
  validate(c);
  Session s(image, expression, backend, sample_id, StrategyKind::kChainOfCaption);
  return guarded(s, [&] {
    RecContext ctx{s.grounded(c), {}, s.expression(), true};
    std::optional<NormBox> current;
    bool last_parsed = false;
    for (int trial = 1; trial <= c.max_trials; ++trial) {
      const auto b = s.rec(assemble_context(ctx), nullptr, NormBox::unit(), trial);
      last_parsed = b.has_value();
      if (!b) {
        s.warn("REC reply unparseable at trial " + std::to_string(trial));
        continue;
      }
      current = b;
      s.trace().predictions.push_back(*b);
      const NormBox region =
          c.vqa_crop_mode == CropMode::kExpanded ? expand_and_clamp(*b, c.crop_scale).box : *b;
      const NormBox frame = crop_frame(region, image.size());
      const RasterImage view = crop(image, frame);
      if (s.vqa(view, frame, trial)) return s.finish(*b, Termination::kVerified);
      RejectedPrediction rejected{*b, s.caption(view, frame, trial)};
      ctx.appended.push_back(rejected);
      s.trace().appended.push_back(std::move(rejected));
    }
    if (!current) {
      return s.fail("no parseable REC reply in " + std::to_string(c.max_trials) + " trials",
                    Termination::kParseExhaustion);
    }
    s.finish(*current, last_parsed ? Termination::kMaxTrials : Termination::kParseExhaustion);
  });
}

RunTrace run_strategy(const RasterImage& image, std::string_view expression,
                      Backend& backend, const RunConfig& cfg, std::string_view sample_id) {
  switch (cfg.strategy) {
    case StrategyKind::kBaseline: return run_baseline(image, expression, backend, sample_id);
    case StrategyKind::kObjectDesc:
      return run_object_desc(image, expression, backend, cfg, sample_id);
    case StrategyKind::kGroundedDesc:
      return run_grounded(image, expression, backend, cfg, sample_id);
    case StrategyKind::kCropRefine: return run_crop(image, expression, backend, cfg, sample_id);
    case StrategyKind::kDrawBoxes: return run_draw(image, expression, backend, cfg, sample_id);
    case StrategyKind::kChainOfCaption:
      return run_chain_of_caption(image, expression, backend, cfg, sample_id);
  }
  throw UsageError("unknown strategy");
}

namespace {

nlohmann::ordered_json box_json(const NormBox& b) { return {b.x1, b.y1, b.x2, b.y2}; }

NormBox box_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw LoadError("box must be a 4-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string trace_to_json(const RunTrace& t) {
  nlohmann::ordered_json calls = nlohmann::ordered_json::array();
  for (const auto& c : t.calls) {
    calls.push_back({{"task", to_string(c.task)},
                     {"trial", c.trial},
                     {"digest", c.digest},
                     {"ok", c.ok},
                     {"result", c.result}});
  }
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (const auto& b : t.predictions) preds.push_back(box_json(b));
  nlohmann::ordered_json appended = nlohmann::ordered_json::array();
  for (const auto& a : t.appended) {
    appended.push_back({{"box", box_json(a.box)}, {"caption", a.caption}});
  }
  nlohmann::ordered_json j = {
      {"sample_id", t.sample_id},
      {"strategy", to_string(t.strategy)},
      {"calls", calls},
      {"predictions", preds},
      {"vqa_answers", t.vqa_answers},
      {"appended", appended},
      {"final_box", t.final_box ? box_json(*t.final_box) : nlohmann::ordered_json()},
      {"trials_used", t.trials_used},
      {"terminated_by", to_string(t.terminated_by)},
      {"warnings", t.warnings},
      {"error", t.error ? nlohmann::ordered_json(*t.error) : nlohmann::ordered_json()},
  };
  return j.dump();
}

RunTrace trace_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    RunTrace t;
    t.sample_id = j.at("sample_id").get<std::string>();
    t.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    for (const auto& c : j.at("calls")) {
      t.calls.push_back({task_from_string(c.at("task").get<std::string>()),
                         c.at("trial").get<int>(), c.at("digest").get<std::string>(),
                         c.at("ok").get<bool>(), c.at("result").get<std::string>()});
    }
    for (const auto& b : j.at("predictions")) t.predictions.push_back(box_from(b));
    t.vqa_answers = j.at("vqa_answers").get<std::vector<bool>>();
    for (const auto& a : j.at("appended")) {
      t.appended.push_back({box_from(a.at("box")), a.at("caption").get<std::string>()});
    }
    if (!j.at("final_box").is_null()) t.final_box = box_from(j.at("final_box"));
    t.trials_used = j.at("trials_used").get<int>();
    t.terminated_by = termination_from_string(j.at("terminated_by").get<std::string>());
    t.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("error").is_null()) t.error = j.at("error").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed trace record: ") + e.what());
  }
}

}  // namespace recloop
