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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "recloop/cli.hpp"
#include "recloop/evaluate.hpp"
#include "support.hpp"

namespace recloop {
namespace {

using testing::TempDir;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(cli({"gen-synthetic", "--out", (dir / "syn").string(), "--count", "6"}).code, 0);
  }
  std::string dataset() const { return (dir / "syn" / "dataset.jsonl").string(); }
  TempDir dir;
};

TEST(Cli, HelpExitsZero) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("flags > --config file > environment > defaults"), std::string::npos);
  EXPECT_EQ(cli({"eval", "--help"}).code, kExitOk);
}

TEST(Cli, UnknownFlagOrNoCommandIsUsage) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"eval", "--bogus"}).code, kExitUsage);
}

TEST(Cli, MissingDatasetNamesFlag) {
  const auto r = cli({"eval", "--backend", "oracle", "--scenes", "/tmp"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--dataset"), std::string::npos) << r.err;
}

TEST(Cli, LiveRequiresEndpointAndModel) {
  ::unsetenv("RECLOOP_ENDPOINT");
  ::unsetenv("RECLOOP_BACKEND");
  const auto r = cli({"eval", "--dataset", "x.jsonl"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--endpoint"), std::string::npos) << r.err;
}

TEST_F(CliTest, GenSyntheticPrintsPath) {
  const auto r = cli({"gen-synthetic", "--out", (dir / "g").string(), "--count", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("dataset.jsonl"), std::string::npos);
  EXPECT_EQ(slurp(dir / "g" / "dataset.jsonl"),
            (cli({"gen-synthetic", "--out", (dir / "h").string(), "--count", "2"}), slurp(dir / "h" / "dataset.jsonl")));
}

TEST_F(CliTest, RunOracleChainOfCaption) {
  const auto r = cli({"run", "--backend", "oracle", "--dataset", dataset(), "--strategy", "coc",
                      "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("iou: 1.000000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("terminated_by: verified"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "syn_00000.coc.trace.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "syn_00000.coc.png"));
}

TEST_F(CliTest, RunUnknownSampleIsUsage) {
  EXPECT_EQ(cli({"run", "--backend", "oracle", "--dataset", dataset(), "--sample", "zzz"}).code,
            kExitUsage);
}

TEST_F(CliTest, EvalAllWritesSixReports) {
  const auto out = dir / "eval";
  const auto r = cli({"eval", "--backend", "oracle", "--dataset", dataset(), "--strategy", "all",
                      "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* s : {"baseline", "object_desc", "grounded_desc", "crop", "draw_boxes", "coc"}) {
    const auto report = load_report(out / (std::string(s) + ".json"));
    testing::expect_monotone(report);
    EXPECT_TRUE(std::filesystem::exists(out / (std::string(s) + ".traces.jsonl")));
  }
  EXPECT_EQ(load_report(out / "coc.json").acc_070(), 1.0);
  EXPECT_EQ(load_report(out / "baseline.json").acc_070(), 0.0);
  EXPECT_LT(r.out.find("Acc_0.5"), r.out.find("Acc_0.9"));
}

TEST_F(CliTest, EvalParallelismIdenticalBytes) {
  for (const char* par : {"1", "8"}) {
    ASSERT_EQ(cli({"eval", "--backend", "oracle", "--dataset", dataset(), "--strategy", "coc",
                   "--parallelism", par, "--out", (dir / (std::string("p") + par)).string()})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(dir / "p1" / "coc.json"), slurp(dir / "p8" / "coc.json"));
  EXPECT_EQ(slurp(dir / "p1" / "coc.traces.jsonl"), slurp(dir / "p8" / "coc.traces.jsonl"));
}

TEST_F(CliTest, RerunIsIdempotent) {
  const std::vector<std::string> args = {"eval", "--backend", "oracle", "--dataset", dataset(),
                                         "--strategy", "crop", "--out", (dir / "o").string()};
  ASSERT_EQ(cli(args).code, 0);
  const std::string first = slurp(dir / "o" / "crop.json");
  ASSERT_EQ(cli(args).code, 0);
  EXPECT_EQ(slurp(dir / "o" / "crop.json"), first);
}

TEST_F(CliTest, RecordThenReplayAndStaleMiss) {
  const auto t = (dir / "t.jsonl").string();
  ASSERT_EQ(cli({"eval", "--backend", "oracle", "--dataset", dataset(), "--strategy", "coc",
                 "--record", "--transcript", t, "--out", (dir / "live").string()})
                .code,
            0);
  const auto replay = cli({"eval", "--replay", "--transcript", t, "--dataset", dataset(),
                           "--strategy", "coc", "--out", (dir / "replay").string()});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(slurp(dir / "live" / "coc.json"), slurp(dir / "replay" / "coc.json"));

  const auto stale = cli({"run", "--backend", "replay", "--transcript", t, "--dataset", dataset(),
                          "--strategy", "coc", "--n-objects", "3", "--out", (dir / "s").string()});
  EXPECT_EQ(stale.code, kExitRuntime);
  EXPECT_NE(stale.err.find("replay miss"), std::string::npos) << stale.err;
  EXPECT_NE(stale.err.find("digest"), std::string::npos) << stale.err;
}

TEST_F(CliTest, UnreachableLiveEndpointExitsBeforeSamples) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  const auto r = cli({"eval", "--backend", "live", "--endpoint",
                      "http://127.0.0.1:" + std::to_string(port) + "/v1", "--model", "m",
                      "--dataset", dataset(), "--out", (dir / "live").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("unreachable"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "live" / "coc.json"));
}

TEST_F(CliTest, MockBackendFromRepliesFile) {
  std::ofstream(dir / "mock.json") << R"({"REC":"[0,0,1,1]"})";
  const auto r = cli({"run", "--backend", "mock", "--mock-replies", (dir / "mock.json").string(),
                      "--dataset", dataset(), "--strategy", "baseline", "--out", (dir / "m").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("final_box: [0.0000, 0.0000, 1.0000, 1.0000]"), std::string::npos) << r.out;
}

TEST_F(CliTest, StrategyFailureExitsOne) {
  std::ofstream(dir / "mock.json") << R"({"REC":"no idea"})";
  const auto r = cli({"run", "--backend", "mock", "--mock-replies", (dir / "mock.json").string(),
                      "--dataset", dataset(), "--strategy", "baseline", "--out", (dir / "m").string()});
  EXPECT_EQ(r.code, kExitRuntime);
}

TEST_F(CliTest, ConfigPrecedence) {
  std::ofstream(dir / "cfg.json") << R"({"backend":"oracle","strategy":"baseline","max_trials":2})";
  ::setenv("RECLOOP_BACKEND", "live", 1);
  // Config beats environment.
  auto r = cli({"run", "--config", (dir / "cfg.json").string(), "--dataset", dataset(), "--out",
                (dir / "c1").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("iou: 0.490000"), std::string::npos) << r.out;
  // Flags beat config.
  r = cli({"run", "--config", (dir / "cfg.json").string(), "--strategy", "grounded_desc",
           "--dataset", dataset(), "--out", (dir / "c2").string()});
  EXPECT_NE(r.out.find("iou: 1.000000"), std::string::npos) << r.out;
  // Environment beats defaults.
  ::setenv("RECLOOP_BACKEND", "oracle", 1);
  r = cli({"run", "--dataset", dataset(), "--out", (dir / "c3").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  ::unsetenv("RECLOOP_BACKEND");
  std::ofstream(dir / "bad.json") << R"({"max_trials":"three"})";
  EXPECT_EQ(cli({"run", "--config", (dir / "bad.json").string(), "--backend", "oracle", "--dataset",
                 dataset()})
                .code,
            kExitUsage);
}

TEST_F(CliTest, CompareTwoReports) {
  ASSERT_EQ(cli({"eval", "--backend", "oracle", "--dataset", dataset(), "--strategy", "all", "--out",
                 (dir / "e").string()})
                .code,
            0);
  const auto r = cli({"compare", (dir / "e" / "baseline.json").string(), (dir / "e" / "coc.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("(+100.00)"), std::string::npos) << r.out;
  EXPECT_EQ(cli({"compare", (dir / "e" / "coc.json").string(), "/nope.json"}).code, kExitUsage);
}

TEST_F(CliTest, SweepWritesCurve) {
  const auto r = cli({"sweep", "--backend", "oracle", "--dataset", dataset(), "--max-objects", "4",
                      "--out", (dir / "sw").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "sw" / "sweep.json"));
  ASSERT_EQ(j.size(), 5u);
  for (std::size_t i = 1; i < j.size(); ++i)
    EXPECT_GE(j[i]["acc"]["0.7"].get<double>(), j[i - 1]["acc"]["0.7"].get<double>());
}

}  // namespace
}  // namespace recloop
