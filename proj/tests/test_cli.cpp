/* Copyright 2026 The kpn-translate Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "kpn/checkpoint.hpp"
#include "kpn/image_io.hpp"
#include "kpn/model.hpp"
#include "kpn/toy_data.hpp"
#include "test_util.hpp"

namespace kpn {
namespace {

using testing::random_tensor;
using testing::read_bytes;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Desk-geometry toy dataset shared by the CLI tests.
class CliToy : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli_toy");
    const Result r = run({"make-toy-data", "--out", (*dir_ / "toy").string(),
                          "--count", "3", "--heldout", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string path(const std::string& rel) { return (*dir_ / rel).string(); }

  static TempDir* dir_;
};
TempDir* CliToy::dir_ = nullptr;

std::string write_checkpoint(const std::string& path, bool random_kpn) {
  Model m = Model::create(Encoder::oracle(4), Geometry::desk(), {}, 2, 3, false);
  if (random_kpn) {
    Tensor& w = m.kpn.params()[0].value;
    w = random_tensor(w.shape(), 5, -0.4, 0.4);
  }
  save_checkpoint(path, m);
  return path;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"grad-check", "--no-such-flag"}).code, cli::kUsage);
  EXPECT_EQ(run({"eval-seg", "--pred", "x"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, GradCheckPassesAndDetectsCorruption) {
  const Result ok = run({"grad-check", "--cases", "2", "--component", "translate",
                         "--component", "kpn", "--component", "gen_loss",
                         "--component", "gaussian_sigma"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("translate"), std::string::npos);
  const Result bad = run({"grad-check", "--cases", "2", "--component", "kpn",
                          "--corrupt", "kpn"});
  EXPECT_EQ(bad.code, cli::kCheckFailed) << bad.out;
  EXPECT_NE(bad.out.find("failed: kpn"), std::string::npos);
  EXPECT_EQ(run({"grad-check", "--component", "nope"}).code, cli::kUsage);
}

TEST_F(CliToy, DatasetLayout) {
  for (const char* f : {"toy/src/img_00002.png", "toy/src/lbl_00002.png",
                        "toy/tgt/img_00000.png", "toy/eval/ref_00001.png", "toy/toy.txt"})
    EXPECT_TRUE(std::filesystem::exists(path(f))) << f;
}

TEST_F(CliToy, TrainMissingSourceIsUsageError) {
  const Result r = run({"train", "--source", path("nowhere"), "--target", path("toy/tgt"),
                        "--out", path("run_missing")});
  EXPECT_EQ(r.code, cli::kUsage);
}

TEST_F(CliToy, TrainBadKeyNamesIt) {
  const Result r = run({"train", "--source", path("toy/src"), "--target", path("toy/tgt"),
                        "--out", path("run_bad"), "--set", "warp_factor=9"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("warp_factor"), std::string::npos) << r.err;
}

TEST_F(CliToy, TrainIsDeterministic) {
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    const std::string out = path("run_" + std::to_string(k));
    const Result r = run({"train", "--source", path("toy/src"), "--target", path("toy/tgt"),
                          "--out", out, "--set", "iterations=2", "--set", "batch=2",
                          "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    csv[k] = read_bytes(out + "/loss.csv");
    EXPECT_TRUE(std::filesystem::exists(out + "/final.kpnc"));
    EXPECT_TRUE(std::filesystem::exists(out + "/config.txt"));
  }
  EXPECT_GT(csv[0].size(), 40u);
  EXPECT_EQ(csv[0], csv[1]);
}

TEST_F(CliToy, TranslateIdentityWithinOneLevel) {
  const std::string ckpt = write_checkpoint(path("id.kpnc"), false);
  const Result r = run({"translate", "--ckpt", ckpt, "--in", path("toy/src"), "--out",
                        path("tl_id"), "--labels", path("toy/src")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean"), std::string::npos);
  for (int i = 0; i < 3; ++i) {
    const std::string name = numbered_name("img", i);
    const Image8 in = load_image8(path("toy/src/" + name));
    const Image8 out = load_image8(path("tl_id/" + name));
    ASSERT_EQ(in.data.size(), out.data.size());
    int worst = 0;
    for (std::size_t k = 0; k < in.data.size(); ++k)
      worst = std::max(worst, std::abs(int(in.data[k]) - int(out.data[k])));
    EXPECT_LE(worst, 1);
  }
  EXPECT_FALSE(std::filesystem::exists(path("tl_id/lbl_00000.png")));
}

TEST_F(CliToy, TranslateWithEverythingDisabledIsIdentity) {
  const std::string ckpt = write_checkpoint(path("rand.kpnc"), true);
  const Result moved = run({"translate", "--ckpt", ckpt, "--in", path("toy/src"), "--out",
                            path("tl_rand"), "--labels", path("toy/src")});
  ASSERT_EQ(moved.code, 0) << moved.err;
  const Result r = run({"translate", "--ckpt", ckpt, "--in", path("toy/src"), "--out",
                        path("tl_off"), "--labels", path("toy/src"), "--disable", "affine",
                        "--disable", "blur", "--disable", "noise"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string name = numbered_name("img", 1);
  EXPECT_EQ(load_image8(path("tl_off/" + name)).data, load_image8(path("toy/src/" + name)).data);
  EXPECT_NE(load_image8(path("tl_rand/" + name)).data, load_image8(path("toy/src/" + name)).data);
  EXPECT_EQ(run({"translate", "--ckpt", ckpt, "--in", path("toy/src"), "--out", path("x"),
                 "--labels", path("toy/src"), "--disable", "color"}).code,
            cli::kUsage);
}

TEST_F(CliToy, TranslateNeedsLabelsAndMatchingGeometry) {
  const std::string ckpt = write_checkpoint(path("id2.kpnc"), false);
  EXPECT_EQ(run({"translate", "--ckpt", ckpt, "--in", path("toy/src"), "--out",
                 path("nolabels")}).code,
            cli::kUsage);
  std::filesystem::create_directories(path("small"));
  save_image(path("small/img_00000.png"), Tensor({3, 100, 120}, 0.5));
  save_labels(path("small/lbl_00000.png"), LabelMap{100, 120, std::vector<std::uint8_t>(12000)});
  const Result r = run({"translate", "--ckpt", ckpt, "--in", path("small"), "--out",
                        path("small_out"), "--labels", path("small")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("240x416"), std::string::npos) << r.err;
}

TEST_F(CliToy, VisParamsIdentity) {
  const std::string ckpt = write_checkpoint(path("id3.kpnc"), false);
  const Result r = run({"vis-params", "--ckpt", ckpt, "--in", path("toy/src/img_00000.png"),
                        "--labels", path("toy/src/lbl_00000.png"), "--out", path("vis")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t maps = 0;
  for (const auto& e : std::filesystem::directory_iterator(path("vis")))
    maps += e.path().filename().string().rfind("param_", 0) == 0;
  EXPECT_EQ(maps, 12u);
  EXPECT_TRUE(std::filesystem::exists(path("vis/classes.png")));
  for (const char* f : {"vis/param_00_weight_h.png", "vis/param_02_weight_v.png",
                        "vis/param_05_bias_v.png", "vis/param_08_sigma_b.png"}) {
    const Image8 im = load_image8(path(f));
    EXPECT_EQ(im.height, 32u);
    EXPECT_EQ(im.width, 56u);
    for (auto v : im.data) ASSERT_EQ(v, 128) << f;
  }
}

class CliEval : public ::testing::Test {
 protected:
  TempDir dir{"cli_eval"};
  void write(const std::string& sub, const std::string& name, std::vector<std::uint8_t> v,
             std::size_t w) {
    std::filesystem::create_directories(dir / sub);
    save_labels(dir / sub / name, LabelMap{v.size() / w, w, std::move(v)});
  }
  std::string p(const std::string& s) { return (dir / s).string(); }
};

TEST_F(CliEval, PerfectPrediction) {
  write("gt", "a.png", {0, 1, 2, 2}, 2);
  write("pred", "a.png", {0, 1, 2, 2}, 2);
  const Result r = run({"eval-seg", "--pred", p("pred"), "--gt", p("gt"), "--classes", "3",
                        "--csv", p("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("miou        1.000000"), std::string::npos) << r.out;
  EXPECT_NE(read_bytes(p("s.csv")).find("pixel_acc,1\n"), std::string::npos);
}

TEST_F(CliEval, DisjointPredictionHasZeroMiou) {
  write("gt", "a.png", {0, 0, 1, 1}, 2);
  write("pred", "a.png", {1, 1, 0, 0}, 2);
  const Result r = run({"eval-seg", "--pred", p("pred"), "--gt", p("gt"), "--classes", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("miou        0.000000"), std::string::npos) << r.out;
}

TEST_F(CliEval, TwoImageHandCount) {
  // Combined matrix [[3, 1], [2, 4]].
  write("gt", "a.png", {0, 0, 0, 1, 1}, 5);
  write("pred", "a.png", {0, 0, 1, 0, 1}, 5);
  write("gt", "b.png", {0, 1, 1, 1, 1}, 5);
  write("pred", "b.png", {0, 0, 1, 1, 1}, 5);
  const Result r = run({"eval-seg", "--pred", p("pred"), "--gt", p("gt"), "--classes", "2",
                        "--csv", p("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_bytes(p("s.csv"));
  EXPECT_NE(csv.find("pixel_acc,0.69999999999999996"), std::string::npos) << csv;
  EXPECT_NE(r.out.find("class_acc   0.708333"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("miou        0.535714"), std::string::npos) << r.out;
}

TEST_F(CliEval, DataErrors) {
  write("gt", "a.png", {0, 5}, 2);
  write("pred", "a.png", {0, 1}, 2);
  EXPECT_EQ(run({"eval-seg", "--pred", p("pred"), "--gt", p("gt"), "--classes", "2"}).code,
            cli::kData);
  write("gt", "b.png", {0, 1}, 2);
  EXPECT_EQ(run({"eval-seg", "--pred", p("pred"), "--gt", p("gt"), "--classes", "2"}).code,
            cli::kData);
}

}  // namespace
}  // namespace kpn
