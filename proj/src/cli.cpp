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

#include "recloop/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "recloop/dataset.hpp"
#include "recloop/error.hpp"
#include "recloop/evaluate.hpp"
#include "recloop/http_backend.hpp"
#include "recloop/oracle.hpp"
#include "recloop/pipeline.hpp"
#include "recloop/synthetic.hpp"
#include "recloop/transcript.hpp"

namespace recloop {
namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

constexpr const char* kEnvEndpoint = "RECLOOP_ENDPOINT";
constexpr const char* kEnvModel = "RECLOOP_MODEL";
constexpr const char* kEnvBackend = "RECLOOP_BACKEND";
constexpr const char* kEnvApiKeyEnv = "RECLOOP_API_KEY_ENV";

// Raw command-line values; unset means "not given on the command line".
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> backend, endpoint, model, api_key_env;
  std::optional<std::string> strategy, dataset, dataset_format, images_root, out;
  std::optional<int> n_objects, max_trials, parallelism, seed, retries;
  std::optional<double> crop_scale;
  std::optional<std::string> vqa_crop_mode, parse_policy, transcript, scenes, mock_replies;
  std::optional<double> oracle_shrink, oracle_vqa_threshold, oracle_fidelity;
  bool gdesc_with_expression = false;
  bool oracle_caption_box = false;
  bool record = false;
  bool replay = false;
  std::optional<std::string> sample;
  int max_objects = 8;
};

struct CliConfig {
  std::string backend = "live";
  std::string endpoint;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  RunConfig run;
  std::string strategy_name = "coc";
  int parallelism = 1;
  std::string dataset;
  DatasetFormat dataset_format = DatasetFormat::kCanonical;
  std::string images_root;
  std::string out = "out";
  std::string transcript;
  bool record = false;
  int seed = 0;
  int retries = 3;
  std::string scenes;
  OracleParams oracle;
  std::string mock_replies;
};

nlohmann::json read_config_file(const std::optional<std::string>& path) {
  if (!path) return nlohmann::json::object();
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open --config file " + *path);
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw UsageError("--config file must hold a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed --config file: " + std::string(e.what()));
  }
}

template <class T>
T pick(const std::optional<T>& flag, const nlohmann::json& file, const char* key, T fallback) {
  if (flag) return *flag;
  if (file.contains(key)) {
    try {
      return file.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
  }
  return fallback;
}

std::string pick_env(const std::optional<std::string>& flag, const nlohmann::json& file,
                     const char* key, const char* env, std::string fallback) {
  if (flag) return *flag;
  if (file.contains(key)) return pick<std::string>(std::nullopt, file, key, fallback);
  if (env) {
    if (const char* v = std::getenv(env); v && *v) return v;
  }
  return fallback;
}

bool pick_flag(bool flag, const nlohmann::json& file, const char* key) {
  return flag || pick<bool>(std::nullopt, file, key, false);
}

CliConfig resolve(const Flags& f) {
  const nlohmann::json file = read_config_file(f.config);
  CliConfig c;
  c.backend = pick_env(f.backend, file, "backend", kEnvBackend, c.backend);
  c.endpoint = pick_env(f.endpoint, file, "endpoint", kEnvEndpoint, "");
  c.model = pick_env(f.model, file, "model", kEnvModel, "");
  c.api_key_env = pick_env(f.api_key_env, file, "api_key_env", kEnvApiKeyEnv, c.api_key_env);
  c.strategy_name = pick(f.strategy, file, "strategy", c.strategy_name);
  c.dataset = pick(f.dataset, file, "dataset", std::string());
  c.dataset_format = dataset_format_from_string(
      pick(f.dataset_format, file, "dataset_format", std::string("canonical")));
  c.images_root = pick(f.images_root, file, "images_root", std::string());
  c.out = pick(f.out, file, "out", c.out);
  c.run.n_objects = pick(f.n_objects, file, "n_objects", c.run.n_objects);
  c.run.crop_scale = pick(f.crop_scale, file, "crop_scale", c.run.crop_scale);
  c.run.max_trials = pick(f.max_trials, file, "max_trials", c.run.max_trials);
  c.run.vqa_crop_mode =
      crop_mode_from_string(pick(f.vqa_crop_mode, file, "vqa_crop_mode", std::string("exact")));
  c.run.grounded_parse_policy =
      parse_policy_from_string(pick(f.parse_policy, file, "parse_policy", std::string("lenient")));
  c.run.gdesc_with_expression = pick_flag(f.gdesc_with_expression, file, "gdesc_with_expression");
  c.parallelism = pick(f.parallelism, file, "parallelism", c.parallelism);
  c.transcript = pick(f.transcript, file, "transcript", std::string());
  c.record = pick_flag(f.record, file, "record");
  if (pick_flag(f.replay, file, "replay")) c.backend = "replay";
  c.seed = pick(f.seed, file, "seed", c.seed);
  c.retries = pick(f.retries, file, "retries", c.retries);
  c.scenes = pick(f.scenes, file, "scenes", std::string());
  c.oracle.shrink = pick(f.oracle_shrink, file, "oracle_shrink", c.oracle.shrink);
  c.oracle.vqa_threshold =
      pick(f.oracle_vqa_threshold, file, "oracle_vqa_threshold", c.oracle.vqa_threshold);
  c.oracle.fidelity = pick(f.oracle_fidelity, file, "oracle_fidelity", c.oracle.fidelity);
  c.oracle.caption_reveals_box = pick_flag(f.oracle_caption_box, file, "oracle_caption_box");
  c.mock_replies = pick(f.mock_replies, file, "mock_replies", std::string());

  if (c.parallelism < 1) throw UsageError("--parallelism must be >= 1");
  if (c.retries < 1) throw UsageError("--retries must be >= 1");
  if (c.backend == "live") {
    if (c.endpoint.empty()) throw UsageError("live backend requires --endpoint");
    if (c.model.empty()) throw UsageError("live backend requires --model");
  } else if (c.backend == "replay") {
    if (c.transcript.empty()) throw UsageError("replay backend requires --transcript");
  } else if (c.backend != "mock" && c.backend != "oracle") {
    throw UsageError("--backend must be live, mock, oracle or replay");
  }
  if (c.record && c.transcript.empty()) throw UsageError("--record requires --transcript");
  if (c.record && c.backend == "replay") throw UsageError("--record and --replay are exclusive");
  return c;
}

void add_backend_options(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--backend", f.backend, "live | mock | oracle | replay (env RECLOOP_BACKEND)");
  app->add_option("--endpoint", f.endpoint,
                  "chat-completions URL for the live backend (env RECLOOP_ENDPOINT)");
  app->add_option("--model", f.model, "model name for the live backend (env RECLOOP_MODEL)");
  app->add_option("--api-key-env", f.api_key_env,
                  "name of the environment variable holding the API key "
                  "(default OPENAI_API_KEY, env RECLOOP_API_KEY_ENV)");
  app->add_option("--retries", f.retries, "live backend attempts per request (default 3)");
  app->add_option("--seed", f.seed, "sampling seed sent to the live backend (default 0)");
  app->add_option("--transcript", f.transcript, "transcript file to record to or replay from");
  app->add_flag("--record", f.record, "record every exchange into --transcript");
  app->add_flag("--replay", f.replay, "answer only from --transcript");
  app->add_option("--scenes", f.scenes, "oracle scene fixture directory (default <dataset dir>/scenes)");
  app->add_option("--oracle-shrink", f.oracle_shrink, "oracle box shrink factor (default 0.7)");
  app->add_option("--oracle-vqa-threshold", f.oracle_vqa_threshold,
                  "oracle VQA IoU threshold (default 0.5)");
  app->add_option("--oracle-fidelity", f.oracle_fidelity,
                  "fraction of requested objects the oracle lists (default 1)");
  app->add_flag("--oracle-caption-box", f.oracle_caption_box,
                "oracle captions carry the captioned object's box");
  app->add_option("--mock-replies", f.mock_replies,
                  "JSON object of task -> reply for the mock backend");
}

void add_run_options(CLI::App* app, Flags& f) {
  app->add_option("--strategy", f.strategy,
                  "baseline | object_desc | grounded_desc | crop | draw_boxes | coc");
  app->add_option("--dataset", f.dataset, "dataset file");
  app->add_option("--dataset-format", f.dataset_format, "canonical | refcoco");
  app->add_option("--images-root", f.images_root,
                  "directory image paths are relative to (default: the dataset's directory)");
  app->add_option("--out", f.out, "output directory (default ./out)");
  app->add_option("--n-objects", f.n_objects, "objects in the grounded description (default 5)");
  app->add_option("--crop-scale", f.crop_scale, "crop expansion factor (default 1.5)");
  app->add_option("--max-trials", f.max_trials, "chain-of-caption REC trials (default 3)");
  app->add_option("--vqa-crop-mode", f.vqa_crop_mode, "exact | expanded (default exact)");
  app->add_option("--parse-policy", f.parse_policy, "lenient | strict (default lenient)");
  app->add_flag("--gdesc-with-expression", f.gdesc_with_expression,
                "condition the object listing on the expression");
  app->add_option("--parallelism", f.parallelism, "samples in flight (default 1)");
}

// Owns whichever backend objects the configuration needs.
struct BackendStack {
  std::unique_ptr<Backend> base;
  std::unique_ptr<Transcript> transcript;
  std::unique_ptr<RecordingBackend> recorder;
  std::string transcript_path;

  Backend& top() { return recorder ? static_cast<Backend&>(*recorder) : *base; }

  void save() const {
    if (recorder) transcript->save(transcript_path);
  }
};

std::unique_ptr<Backend> make_mock(const std::string& path) {
  if (path.empty()) throw UsageError("mock backend requires --mock-replies");
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open --mock-replies file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed --mock-replies file: " + std::string(e.what()));
  }
  auto mock = std::make_unique<ScriptedBackend>();
  for (const auto& [key, value] : j.items()) mock->on(task_from_string(key), value.get<std::string>());
  return mock;
}

BackendStack make_backends(const CliConfig& c) {
  BackendStack s;
  if (c.backend == "live") {
    HttpBackendConfig h;
    h.endpoint = c.endpoint;
    h.model = c.model;
    h.api_key_env = c.api_key_env;
    h.max_attempts = c.retries;
    h.seed = c.seed;
    h.max_in_flight = c.parallelism;
    auto live = std::make_unique<HttpBackend>(h);
    if (auto why = live->probe()) throw UsageError("live endpoint unreachable: " + *why);
    s.base = std::move(live);
  } else if (c.backend == "mock") {
    s.base = make_mock(c.mock_replies);
  } else if (c.backend == "oracle") {
    std::filesystem::path dir = c.scenes;
    if (dir.empty()) {
      if (c.dataset.empty()) throw UsageError("oracle backend requires --scenes or --dataset");
      dir = std::filesystem::path(c.dataset).parent_path() / "scenes";
    }
    SyntheticOracleConfig cfg{load_scene_fixtures(dir), c.oracle};
    s.base = std::make_unique<OracleBackend>(std::move(cfg));
  } else {
    s.base = std::make_unique<ReplayBackend>(Transcript::load(c.transcript));
  }
  if (c.record) {
    s.transcript = std::make_unique<Transcript>();
    s.recorder = std::make_unique<RecordingBackend>(*s.base, *s.transcript);
    s.transcript_path = c.transcript;
  }
  return s;
}

Dataset require_dataset(const CliConfig& c) {
  if (c.dataset.empty()) throw UsageError("--dataset is required");
  try {
    return load_dataset(c.dataset, c.dataset_format);
  } catch (const LoadError& e) {
    throw UsageError(e.what());
  }
}

std::filesystem::path images_root(const CliConfig& c) {
  if (!c.images_root.empty()) return c.images_root;
  return std::filesystem::path(c.dataset).parent_path();
}

void write_traces(const std::vector<RunTrace>& traces, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : traces) out << trace_to_json(t) << '\n';
}

std::vector<StrategyKind> strategies_for(const std::string& name) {
  if (name == "all") return {kAllStrategies.begin(), kAllStrategies.end()};
  return {strategy_from_string(name)};
}

int cmd_run(const Flags& f, std::ostream& out, std::ostream& err) {
  const CliConfig c = resolve(f);
  RunConfig cfg = c.run;
  cfg.strategy = strategy_from_string(c.strategy_name);
  validate(cfg);
  const Dataset d = require_dataset(c);
  const Sample* sample = &d.samples.front();
  if (f.sample) {
    const auto it = std::find_if(d.samples.begin(), d.samples.end(),
                                 [&](const Sample& s) { return s.id == *f.sample; });
    if (it == d.samples.end()) throw UsageError("--sample '" + *f.sample + "' not in dataset");
    sample = &*it;
  }
  BackendStack backends = make_backends(c);
  const RasterImage image = disk_loader(images_root(c))(*sample);
  const RunTrace trace = run_strategy(image, sample->expression, backends.top(), cfg, sample->id);
  backends.save();

  std::filesystem::create_directories(c.out);
  const std::string stem = sample->id + "." + std::string(to_string(cfg.strategy));
  write_traces({trace}, std::filesystem::path(c.out) / (stem + ".trace.jsonl"));
  std::vector<BoxStroke> strokes;
  const int stroke = default_stroke(image.size());
  strokes.push_back({sample->ground_truth, Rgb{0, 0, 255}, stroke});
  if (trace.final_box) strokes.push_back({*trace.final_box, Rgb{0, 200, 0}, stroke});
  write_png(draw_boxes(image, strokes), std::filesystem::path(c.out) / (stem + ".png"));

  if (!trace.final_box) {
    err << "strategy failed for " << sample->id << ": " << trace.error.value_or("unknown error")
        << '\n';
    return kExitRuntime;
  }
  char line[64];
  std::snprintf(line, sizeof(line), "%.6f", iou(*trace.final_box, sample->ground_truth));
  out << "sample: " << sample->id << '\n'
      << "final_box: " << format_box(*trace.final_box, 4) << '\n'
      << "iou: " << line << '\n'
      << "trials: " << trace.trials_used << '\n'
      << "terminated_by: " << to_string(trace.terminated_by) << '\n';
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const CliConfig c = resolve(f);
  const auto kinds = strategies_for(c.strategy_name);
  for (auto k : kinds) {
    RunConfig cfg = c.run;
    cfg.strategy = k;
    validate(cfg);
  }
  const Dataset d = require_dataset(c);
  BackendStack backends = make_backends(c);
  std::filesystem::create_directories(c.out);

  EvalOptions opts;
  opts.parallelism = c.parallelism;
  opts.loader = disk_loader(images_root(c));
  opts.stop = &g_stop;
  std::vector<EvalReport> reports;
  for (auto k : kinds) {
    RunConfig cfg = c.run;
    cfg.strategy = k;
    std::vector<RunTrace> traces;
    opts.traces = &traces;
    EvalReport r = evaluate(d, cfg, backends.top(), opts);
    const std::string stem(to_string(k));
    write_report(r, std::filesystem::path(c.out) / (stem + ".json"));
    write_traces(traces, std::filesystem::path(c.out) / (stem + ".traces.jsonl"));
    reports.push_back(std::move(r));
  }
  backends.save();
  const std::string table = format_table(reports);
  std::ofstream(std::filesystem::path(c.out) / "summary.txt", std::ios::trunc) << table;
  out << table;
  return g_stop.load() ? kExitRuntime : kExitOk;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
  const CliConfig c = resolve(f);
  validate(c.run);
  const Dataset d = require_dataset(c);
  BackendStack backends = make_backends(c);
  std::filesystem::create_directories(c.out);
  EvalOptions opts;
  opts.parallelism = c.parallelism;
  opts.loader = disk_loader(images_root(c));
  opts.stop = &g_stop;
  const auto points = object_count_sweep(d, c.run, backends.top(), opts, f.max_objects);
  backends.save();
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  std::ostringstream table;
  table << "n_objects  Acc_0.5  Acc_0.7  Acc_0.9\n";
  for (const auto& p : points) {
    char row[96];
    std::snprintf(row, sizeof(row), "%9d  %7.2f  %7.2f  %7.2f\n", p.n_objects,
                  p.report.acc[0] * 100, p.report.acc[1] * 100, p.report.acc[2] * 100);
    table << row;
    doc.push_back({{"n_objects", p.n_objects},
                   {"acc", {{"0.5", p.report.acc[0]}, {"0.7", p.report.acc[1]}, {"0.9", p.report.acc[2]}}}});
  }
  std::ofstream(std::filesystem::path(c.out) / "sweep.json", std::ios::trunc) << doc.dump(2) << '\n';
  out << table.str();
  return kExitOk;
}

int cmd_compare(const std::string& a, const std::string& b, std::ostream& out) {
  EvalReport ra, rb;
  try {
    ra = load_report(a);
    rb = load_report(b);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  out << "A: " << a << " (" << display_name(ra.strategy()) << ")\n"
      << "B: " << b << " (" << display_name(rb.strategy()) << ")\n"
      << format_comparison(compare_reports(ra, rb));
  return kExitOk;
}

int cmd_gen(const std::string& dir, const SyntheticParams& p, std::ostream& out) {
  const auto bench = generate_synthetic_dataset(p);
  out << write_synthetic(bench, dir).string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Referring expression comprehension with context strategies and a "
               "verify-caption-repredict loop.\nConfig precedence: flags > --config file > "
               "environment > defaults. API keys are read only from the environment.",
               "recloop"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "run one strategy on one sample");
  add_run_options(run, f);
  add_backend_options(run, f);
  run->add_option("--sample", f.sample, "sample id (default: first sample)");

  auto* eval = app.add_subcommand("eval", "evaluate strategies over a dataset");
  add_run_options(eval, f);
  add_backend_options(eval, f);

  auto* sweep = app.add_subcommand("sweep", "accuracy versus number of listed objects");
  add_run_options(sweep, f);
  add_backend_options(sweep, f);
  sweep->add_option("--max-objects", f.max_objects, "largest object count (default 8)");

  auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic benchmark");
  std::string gen_out = "synthetic";
  SyntheticParams gp;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--count", gp.count, "number of samples (default 50)");
  gen->add_option("--objects", gp.objects_per_scene, "objects per scene (default 4)");
  gen->add_option("--width", gp.canvas.width, "canvas width (default 200)");
  gen->add_option("--height", gp.canvas.height, "canvas height (default 200)");
  gen->add_option("--seed", gp.seed, "generator seed (default 7)");

  auto* cmp = app.add_subcommand("compare", "per-threshold deltas between two reports");
  std::string report_a, report_b;
  cmp->add_option("report_a", report_a, "baseline report")->required();
  cmp->add_option("report_b", report_b, "compared report")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  g_stop.store(false);
  auto prev_int = std::signal(SIGINT, on_signal);
  auto prev_term = std::signal(SIGTERM, on_signal);
  struct Restore {
    decltype(prev_int) i, t;
    ~Restore() {
      std::signal(SIGINT, i);
      std::signal(SIGTERM, t);
    }
  } restore{prev_int, prev_term};

  try {
    if (run->parsed()) return cmd_run(f, out, err);
    if (eval->parsed()) return cmd_eval(f, out);
    if (sweep->parsed()) return cmd_sweep(f, out);
    if (gen->parsed()) return cmd_gen(gen_out, gp, out);
    if (cmp->parsed()) return cmd_compare(report_a, report_b, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace recloop
