// Copyright 2026 The bwv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bwv/cli.hpp"
#include "bwv/dataset.hpp"
#include "bwv/network.hpp"
#include "support/tempdir.hpp"

using namespace bwv;
using bwv::testing::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json first_json_line(const std::string& text) {
  return json::parse(text.substr(0, text.find('\n')));
}

}  // namespace

TEST_CASE("help and usage errors") {
  auto r = run_cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("annotate") != std::string::npos);
  CHECK(r.out.find("explain") != std::string::npos);

  CHECK(run_cli({"train", "--help"}).code == 0);

  r = run_cli({});
  CHECK(r.code == 1);

  r = run_cli({"frobnicate"});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());

  r = run_cli({"annotate", "--out", "x.jsonl"});  // missing --input-dir
  CHECK(r.code == 1);

  r = run_cli({"train", "--manifest", "m.jsonl", "--lr", "fast"});
  CHECK(r.code == 1);
}

TEST_CASE("annotate on an empty directory") {
  TempDir dir("cli_empty");
  fs::create_directories(dir / "none");
  const auto r = run_cli({"annotate", "--input-dir", (dir / "none").string(), "--out", (dir / "a.jsonl").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("no images found") != std::string::npos);
}

TEST_CASE("resolved configuration is echoed before running") {
  TempDir dir("cli_cfg");
  REQUIRE(run_cli({"--seed", "4", "synth", "--out-dir", (dir / "s").string(), "--count", "4", "--size", "16"}).code == 0);
  const auto r = run_cli({"--seed", "4", "synth", "--out-dir", (dir / "s").string(), "--count", "4", "--size", "16"});
  REQUIRE(r.code == 0);
  const json j = first_json_line(r.err);
  CHECK(j["command"] == "synth");
  CHECK(j["seed"] == 4);
  CHECK(j["count"] == "4");
  CHECK(j["bwv-fraction"] == "0.5");
}

TEST_CASE("config file: flags beat file, file beats defaults") {
  TempDir dir("cli_cfgfile");
  REQUIRE(run_cli({"synth", "--out-dir", (dir / "s").string(), "--count", "6", "--size", "16"}).code == 0);
  REQUIRE(run_cli({"annotate", "--input-dir", (dir / "s").string(), "--out", (dir / "a.jsonl").string()}).code == 0);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"train": 0.5, "val": 0.5, "seed": 9, "stratified": false})";
  }
  const auto r = run_cli({"--config", (dir / "cfg.json").string(), "split", "--manifest",
                          (dir / "a.jsonl").string(), "--out", (dir / "s.jsonl").string(),
                          "--train", "0.67", "--val", "0.33"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const json j = first_json_line(r.err);
  CHECK(j["train"] == "0.67");
  CHECK(j["val"] == "0.33");
  CHECK(j["seed"] == 9);
  CHECK(j["stratified"] == false);
  CHECK(j["test"] == "0");

  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"tarin": 0.5})";
  }
  const auto bad = run_cli({"--config", (dir / "bad.json").string(), "split", "--manifest",
                            (dir / "a.jsonl").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("tarin") != std::string::npos);
}

TEST_CASE("report from a confusion matrix") {
  auto r = run_cli({"report", "--confusion", "4", "0", "1", "15"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("95.00") != std::string::npos);   // accuracy 19/20
  CHECK(r.out.find("100.00") != std::string::npos);  // precision 4/4
  CHECK(r.out.find("AUC undefined") != std::string::npos);

  r = run_cli({"report", "--confusion", "0", "0", "0", "5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("PR undefined") != std::string::npos);

  CHECK(run_cli({"report"}).code == 2);
}

TEST_CASE("numeric failures exit with code 3, bad model files with 2") {
  TempDir dir("cli_numeric");
  REQUIRE(run_cli({"synth", "--out-dir", (dir / "s").string(), "--count", "2", "--size", "32"}).code == 0);
  REQUIRE(run_cli({"annotate", "--input-dir", (dir / "s").string(), "--out", (dir / "a.jsonl").string()}).code == 0);
  auto net = Network::build(nn::ActivationKind::PReLU, 0);
  for (auto& t : net.learnable()) t.tensor->fill(std::numeric_limits<float>::quiet_NaN());
  net.save(dir / "nan.bwvnet");
  auto r = run_cli({"eval", "--model", (dir / "nan.bwvnet").string(), "--manifest", (dir / "a.jsonl").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("numeric error") != std::string::npos);

  {
    std::ofstream junk(dir / "junk.bwvnet");
    junk << "garbage";
  }
  r = run_cli({"eval", "--model", (dir / "junk.bwvnet").string(), "--manifest", (dir / "a.jsonl").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("magic") != std::string::npos);
}

TEST_CASE("end-to-end smoke pipeline on a 12-image synthetic fixture") {
  TempDir dir("cli_smoke");
  const auto p = [&](const std::string& leaf) { return (dir / leaf).string(); };
  const std::vector<std::string> common{"--seed", "7", "--quiet"};
  auto run_step = [&](std::vector<std::string> args) {
    args.insert(args.begin(), common.begin(), common.end());
    const auto r = run_cli(args);
    INFO(args[3] << ": " << r.err);
    REQUIRE(r.code == 0);
    return r;
  };

  run_step({"synth", "--out-dir", p("raw"), "--count", "12", "--size", "64"});
  CHECK(fs::exists(dir / "raw" / "labels.csv"));

  auto r = run_step({"annotate", "--input-dir", p("raw"), "--out", p("annotations.jsonl"), "--labels",
                     p("raw/labels.csv"), "--overlay-dir", p("overlays")});
  CHECK(r.out.find("annotated 12 images") != std::string::npos);
  CHECK(r.out.find("agreement") != std::string::npos);
  {
    std::ifstream in(dir / "annotations.jsonl");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      const json j = json::parse(line);
      CHECK(j.contains("path"));
      CHECK(j.contains("flagged_patches"));
      CHECK((j["label"] == "bwv" || j["label"] == "nonbwv"));
      ++n;
    }
    CHECK(n == 12);
  }

  run_step({"ingest", "--input-dir", p("raw"), "--labels", p("raw/labels.csv"), "--out", p("manifest.jsonl")});
  run_step({"augment", "--manifest", p("manifest.jsonl"), "--out-dir", p("aug"), "--out-manifest", p("aug.jsonl")});
  CHECK(read_manifest(dir / "aug.jsonl").size() == 78);

  run_step({"split", "--manifest", p("aug.jsonl"), "--out", p("split.jsonl"), "--train", "0.5", "--val",
            "0.25", "--test", "0.25"});
  const auto split_manifest = read_manifest(dir / "split.jsonl");
  std::set<std::string> test_groups;
  for (const auto& e : split_manifest.entries)
    if (e.split == Split::Test) test_groups.insert(e.group_key());
  CHECK(test_groups.size() == 3);

  r = run_step({"train", "--manifest", p("split.jsonl"), "--folds", "1", "--max-iters", "2", "--batch", "8",
                "--val-every", "1", "--out", p("model.bwvnet"), "--history", p("history.csv")});
  CHECK(r.out.find("trained 2 iterations") != std::string::npos);
  CHECK(fs::exists(dir / "model.bwvnet"));
  CHECK(slurp(dir / "history.csv").rfind("iteration,epoch,train_loss,val_loss,val_accuracy,elapsed_ms\n", 0) == 0);

  r = run_step({"eval", "--model", p("model.bwvnet"), "--manifest", p("split.jsonl"), "--split", "test",
                "--out", p("eval.csv"), "--predictions", p("pred.csv"), "--dataset", "synthetic"});
  const std::string csv = slurp(dir / "eval.csv");
  CHECK(csv.rfind("dataset,approach,AC,PR,SE,F1,SP,AUC\nsynthetic,prelu,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  const std::string pred = slurp(dir / "pred.csv");
  CHECK(std::count(pred.begin(), pred.end(), '\n') == 1 + 19);

  const std::string image = split_manifest.entries.front().path.string();
  r = run_step({"explain", "--model", p("model.bwvnet"), "--image", image, "--class", "bwv", "--features",
                "16", "--samples", "40", "--top-k", "4", "--out-heatmap", p("heat.png"), "--out-mask",
                p("mask.png")});
  const json ex = json::parse(r.out);
  CHECK(ex["class"] == "bwv");
  CHECK(ex["grid"] == json::array({4, 4}));
  CHECK(ex["importance"].size() == 16);
  CHECK(ex["top_features"].size() == 4);
  CHECK(ex["probability"].get<double>() >= 0.0);
  CHECK(ex["probability"].get<double>() <= 1.0);
  const auto heat = read_image(dir / "heat.png");
  CHECK(heat.height() == 64);
  CHECK(heat.width() == 64);
  CHECK(fs::exists(dir / "mask.png"));

  r = run_step({"report", "--inputs", p("eval.csv"), "--out", p("table.txt")});
  CHECK(slurp(dir / "table.txt").find("synthetic") != std::string::npos);
}
