#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dsviz/cli.hpp"
#include "dsviz/outputs.hpp"
#include "support.hpp"

using namespace dsviz;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

// 30 RGB images with labels, splits, bboxes and per-sample masks.
class Toy {
 public:
  Toy() {
    std::string text;
    for (int i = 0; i < 30; ++i) {
      const std::string id = "s" + std::to_string(i);
      write_png(dir_ / (id + ".png"), testing_support::random_image(12, 10, 3, 100 + static_cast<std::uint64_t>(i)));
      ImageBuffer mask(12, 10, 1);
      for (int y = 2 + i % 3; y < 7; ++y)
        for (int x = 1 + i % 4; x < 8; ++x) mask.at(y, x, 0) = 1.0;
      write_png(dir_ / (id + "_m.png"), mask);
      nlohmann::json rec = {{"id", id},
                            {"image", id + ".png"},
                            {"split", i % 2 ? "val" : "train"},
                            {"label", std::string(1, static_cast<char>('a' + i % 3))},
                            {"bbox", {1, 1, 8, 6}},
                            {"mask", id + "_m.png"},
                            {"metadata", {{"category", "cat"}, {"categories", i % 2 ? "cat,dog" : "cat"}}}};
      text += testing_support::manifest_line(rec);
      preds_ += id + "," + (i < 24 ? std::string(1, static_cast<char>('a' + i % 3)) : std::string("z")) + "\n";
    }
    testing_support::write_text(dir_ / "m.jsonl", text);
    testing_support::write_text(dir_ / "pred.csv", "sample_id,prediction\n" + preds_);
  }

  fs::path manifest() const { return dir_ / "m.jsonl"; }
  fs::path predictions() const { return dir_ / "pred.csv"; }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  TempDir dir_;
  std::string preds_;
};

int dsviz_run(std::vector<std::string> args) {
  args.insert(args.begin(), "dsviz");
  return cli::run(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every analysis command on the toy dataset into `out`.
void run_all(const Toy& toy, const fs::path& out) {
  const std::string m = toy.manifest().string(), o = out.string();
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "--seed", "5", "pca", "--size", "6x5", "--top-k", "4", "--crop-bbox"}), 0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "--seed", "5", "patch-pca", "--patch", "3x3", "--count", "500", "--top-k", "5"}),
            0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "--seed", "5", "ica", "--k", "2", "--pre-pca-k", "3", "--size", "4x4",
                       "--max-iter", "50"}),
            0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "spatial", "--category", "cat", "--size", "6x5", "--compare", "train", "val",
                       "--cooccurrence", "--category-key", "categories"}),
            0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "average", "--size", "4x4"}), 0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "score", "--predictions", toy.predictions().string(), "--variant",
                       "red/gray=" + toy.predictions().string()}),
            0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", o, "report", "--top-k", "3"}), 0);
}

std::map<std::string, std::string> output_files(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file() || e.path().filename() == "run.json") continue;
    files[fs::relative(e.path(), out).string()] = slurp(e.path());
  }
  return files;
}

}  // namespace

TEST(Cli, AllCommandsWriteExpectedOutputs) {
  Toy toy;
  TempDir out;
  run_all(toy, out.path());
  for (const char* f : {"pca/basis.json", "pca/components.png", "pca/summary.json", "patch_pca/basis.json",
                        "ica/basis.json", "spatial/heatmap_cat_train.png", "spatial/heatmap_cat_val.json",
                        "spatial/compare_cat_train_vs_val.json", "spatial/cooccurrence.json", "average/index.json",
                        "average/sheet.png", "score/ablation.json", "report.html", "report.json", "run.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  const auto pca = read_json(out / "pca/basis.json");
  EXPECT_EQ(pca["k"], 4);
  EXPECT_EQ(pca["seed"], 5);
  const auto ab = read_json(out / "score/ablation.json");
  EXPECT_EQ(ab["baseline"], 0.8);
  EXPECT_EQ(ab["rows"][0]["accuracy"], 0.8);
  const auto report = read_json(out / "report.json");
  for (const char* key : {"pca", "patch_pca", "ica", "heatmaps", "comparisons", "ablation", "averages", "metadata"})
    EXPECT_TRUE(report.contains(key)) << key;

  const auto run = read_json(out / "run.json");
  EXPECT_EQ(run["command"], "report");
  EXPECT_EQ(run["exit_code"], 0);
  EXPECT_TRUE(run.contains("versions"));
  EXPECT_TRUE(run["timing"].contains("elapsed_seconds"));
}

TEST(Cli, OutputsAreDeterministic) {
  Toy toy;
  TempDir a, b;
  run_all(toy, a.path());
  run_all(toy, b.path());
  const auto fa = output_files(a.path()), fb = output_files(b.path());
  ASSERT_EQ(fa.size(), fb.size());
  for (const auto& [name, bytes] : fa) {
    ASSERT_TRUE(fb.count(name)) << name;
    EXPECT_TRUE(bytes == fb.at(name)) << name;
  }
}

TEST(Cli, JobsDoNotChangeOutputs) {
  Toy toy;
  TempDir a, b;
  const std::string m = toy.manifest().string();
  ASSERT_EQ(dsviz_run({"-m", m, "-o", a.path().string(), "-j", "1", "pca", "--size", "6x5", "--top-k", "4"}), 0);
  ASSERT_EQ(dsviz_run({"-m", m, "-o", b.path().string(), "-j", "3", "pca", "--size", "6x5", "--top-k", "4"}), 0);
  EXPECT_EQ(slurp(a / "pca/basis.bin"), slurp(b / "pca/basis.bin"));
  EXPECT_EQ(slurp(a / "pca/components.png"), slurp(b / "pca/components.png"));
}

TEST(Cli, AblateWritesVariantDataset) {
  Toy toy;
  TempDir out;
  ASSERT_EQ(dsviz_run({"-m", toy.manifest().string(), "-o", out.path().string(), "ablate", "--channel", "red",
                       "--strategy", "mean_of_others"}),
            0);
  const auto variant = load_manifest(out / "ablate/red_mean_of_others/manifest.jsonl");
  EXPECT_EQ(variant.samples.size(), 30u);
  EXPECT_EQ(dsviz_run({"-m", toy.manifest().string(), "-o", out.path().string(), "ablate", "--channel", "alpha",
                       "--strategy", "gray"}),
            cli::kExitValidation);
}

TEST(Cli, ExitCodes) {
  Toy toy;
  TempDir out;
  const std::string m = toy.manifest().string(), o = out.path().string();
  EXPECT_EQ(dsviz_run({"-m", m, "-o", o, "ica", "--k", "2"}), cli::kExitValidation);
  EXPECT_EQ(dsviz_run({"-m", m, "-o", o, "pca", "--bogus"}), cli::kExitValidation);
  EXPECT_EQ(dsviz_run({"-m", m, "-o", o}), cli::kExitValidation);
  EXPECT_EQ(dsviz_run({"-m", m, "-o", o, "pca", "--size", "0x5"}), cli::kExitValidation);
  EXPECT_EQ(dsviz_run({"-m", m, "-o", o, "pca", "--top-k", "400"}), cli::kExitValidation);
  EXPECT_EQ(dsviz_run({"-m", (out / "missing.jsonl").string(), "-o", o, "pca"}), cli::kExitIo);
  EXPECT_EQ(dsviz_run({"-m", m, "-o", o, "score", "--predictions", (out / "nope.csv").string()}), cli::kExitIo);
  EXPECT_EQ(dsviz_run({"-o", o, "pca"}), cli::kExitValidation);
  EXPECT_EQ(dsviz_run({"--help"}), cli::kExitOk);
}

TEST(Cli, RunJsonRecordsFailures) {
  Toy toy;
  TempDir out;
  EXPECT_EQ(dsviz_run({"-m", toy.manifest().string(), "-o", out.path().string(), "--seed", "9", "ica", "--k", "2"}),
            cli::kExitValidation);
  const auto run = read_json(out / "run.json");
  EXPECT_EQ(run["exit_code"], 1);
  EXPECT_NE(run["error"].get<std::string>().find("--pre-pca-k"), std::string::npos);
  EXPECT_EQ(run["seed"], 9);
  EXPECT_EQ(run["argv"].size(), 10u);
  EXPECT_EQ(run["argv"][0], "dsviz");
}

TEST(Cli, ConfigFileSuppliesOptions) {
  Toy toy;
  TempDir out;
  testing_support::write_text(out / "cfg.ini", "seed = 3\n[pca]\nsize = 4x4\ntop-k = 2\n");
  ASSERT_EQ(dsviz_run({"-m", toy.manifest().string(), "-o", out.path().string(), "--config",
                       (out / "cfg.ini").string(), "pca"}),
            0);
  const auto basis = read_json(out / "pca/basis.json");
  EXPECT_EQ(basis["k"], 2);
  EXPECT_EQ(basis["seed"], 3);
  EXPECT_EQ(basis["shape"]["width"], 4);
}

TEST(Cli, ScoreWithoutVariants) {
  Toy toy;
  TempDir out;
  ASSERT_EQ(dsviz_run({"-m", toy.manifest().string(), "-o", out.path().string(), "score", "--predictions",
                       toy.predictions().string()}),
            0);
  EXPECT_EQ(read_json(out / "score/score.json")["accuracy"], 0.8);
}
