#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gappy/report.hpp"
#include "gappy/runner.hpp"

using namespace gappy;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "gappy_test_runner";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

// Small end-to-end config; the threshold is configurable per test.
std::string tiny_config(double max_rel_rmse) {
  std::ostringstream out;
  out << "[experiment]\nname = \"tiny\"\nseed = 3\n"
      << "[scenario]\nid = \"same_domain\"\nburst_size = 6\n"
      << "modality1_rects = [[0.0, 3.14159265, 0.0, 3.14159265]]\n"
      << "modality1_counts = [10]\n"
      << "modality2_rects = [[0.0, 3.14159265, 0.0, 3.14159265]]\n"
      << "modality2_counts = [10]\n"
      << "calib_rects = [[0.0, 3.14159265, 0.0, 3.14159265]]\n"
      << "calib_counts = [3]\ncalib_pairs = [[1, 2]]\n"
      << "[training]\nepochs = 10\nbatch_bursts = 8\nhidden = [8]\n"
      << "[evaluation]\nmax_rel_rmse = " << max_rel_rmse << "\n";
  return out.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path path = scratch_root() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

RunOptions options(const fs::path& config, const fs::path& out) {
  RunOptions opts;
  opts.config_path = config.string();
  opts.out_override = out.string();
  return opts;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("run writes the full artifact set and reports thresholds") {
  const fs::path config = write_config("tiny.toml", tiny_config(10.0));
  const RunOutcome outcome =
      run_stage(Stage::kRun, options(config, scratch_root() / "full"));
  CHECK(outcome.exit_code == 0);
  CHECK(outcome.summary.find("thresholds met") != std::string::npos);

  const fs::path dir(outcome.run_dir);
  for (const char* name :
       {"dataset.json", "ground_truth.json", "rigidity.json",
        "checkpoint.json", "history.csv", "embedding.csv", "metrics.csv",
        "scatter_gappy.csv", "scatter_baseline.csv", "scatter.svg"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }

  const auto rows = read_metrics_csv((dir / "metrics.csv").string());
  REQUIRE(rows.size() == 2u);  // gappy + baseline, completion off by default
  CHECK(rows[0].method == "gappy");
  CHECK(rows[1].method == "baseline");
  CHECK(rows[0].seed == 3u);

  // evaluate on the same directory reuses dataset and checkpoint; a stricter
  // threshold config flips only the verdict.
  const fs::path strict = write_config("tiny_strict.toml", tiny_config(1e-6));
  const std::string checkpoint_before = slurp(dir / "checkpoint.json");
  const RunOutcome reeval = run_stage(Stage::kEvaluate, options(strict, dir));
  CHECK(reeval.exit_code == 2);
  CHECK(reeval.run_dir == dir.string());
  CHECK(reeval.summary.find("thresholds FAILED") != std::string::npos);
  CHECK(slurp(dir / "checkpoint.json") == checkpoint_before);
}

TEST_CASE("dry run stops after the rigidity check") {
  const fs::path config = write_config("tiny_dry.toml", tiny_config(10.0));
  RunOptions opts = options(config, scratch_root() / "dry");
  opts.dry_run = true;
  const RunOutcome outcome = run_stage(Stage::kRun, opts);
  CHECK(outcome.exit_code == 0);
  CHECK(outcome.summary.find("rigidity: pass") != std::string::npos);

  const fs::path dir(outcome.run_dir);
  CHECK(fs::exists(dir / "dataset.json"));
  CHECK(fs::exists(dir / "ground_truth.json"));
  CHECK(fs::exists(dir / "rigidity.json"));
  CHECK(!fs::exists(dir / "checkpoint.json"));
  CHECK(!fs::exists(dir / "metrics.csv"));
}

TEST_CASE("generate stage writes only the dataset artifacts") {
  const fs::path config = write_config("tiny_gen.toml", tiny_config(10.0));
  const RunOutcome outcome =
      run_stage(Stage::kGenerate, options(config, scratch_root() / "gen"));
  const fs::path dir(outcome.run_dir);
  CHECK(fs::exists(dir / "dataset.json"));
  CHECK(fs::exists(dir / "ground_truth.json"));
  CHECK(!fs::exists(dir / "rigidity.json"));
  CHECK(!fs::exists(dir / "checkpoint.json"));
}

TEST_CASE("identical config and seed reproduce the metrics byte for byte") {
  const fs::path config = write_config("tiny_det.toml", tiny_config(10.0));
  const RunOutcome a =
      run_stage(Stage::kRun, options(config, scratch_root() / "det"));
  const RunOutcome b =
      run_stage(Stage::kRun, options(config, scratch_root() / "det"));
  CHECK(a.run_dir != b.run_dir);
  CHECK(slurp(fs::path(a.run_dir) / "metrics.csv") ==
        slurp(fs::path(b.run_dir) / "metrics.csv"));
  CHECK(slurp(fs::path(a.run_dir) / "dataset.json") ==
        slurp(fs::path(b.run_dir) / "dataset.json"));
}

TEST_CASE("seed override reroutes the whole pipeline") {
  const fs::path config = write_config("tiny_seed.toml", tiny_config(10.0));
  RunOptions opts = options(config, scratch_root() / "seeded");
  opts.has_seed_override = true;
  opts.seed_override = 99;
  const RunOutcome outcome = run_stage(Stage::kRun, opts);
  const auto rows =
      read_metrics_csv((fs::path(outcome.run_dir) / "metrics.csv").string());
  REQUIRE(!rows.empty());
  CHECK(rows[0].seed == 99u);

  const RunOutcome base =
      run_stage(Stage::kRun, options(config, scratch_root() / "seeded"));
  const auto base_rows =
      read_metrics_csv((fs::path(base.run_dir) / "metrics.csv").string());
  CHECK(base_rows[0].rmse != rows[0].rmse);
}

TEST_CASE("config errors carry the offending field path") {
  const fs::path config = write_config(
      "bad.toml", "[scenario]\nid = \"same_domain\"\nsigma = 0.0\n");
  bool threw = false;
  try {
    run_stage(Stage::kRun, options(config, scratch_root() / "bad"));
  } catch (const std::invalid_argument& e) {
    threw = true;
    CHECK(std::string(e.what()).find("scenario.sigma") != std::string::npos);
  }
  CHECK(threw);
  CHECK_THROWS_AS(
      run_stage(Stage::kRun, options(scratch_root() / "absent.toml",
                                     scratch_root() / "bad")),
      std::invalid_argument);
}

TEST_CASE("report summarizes an existing run and names missing artifacts") {
  const fs::path config = write_config("tiny_rep.toml", tiny_config(10.0));
  const RunOutcome run =
      run_stage(Stage::kRun, options(config, scratch_root() / "rep"));

  fs::remove(fs::path(run.run_dir) / "scatter.svg");
  const RunOutcome report =
      run_stage(Stage::kReport, options(config, fs::path(run.run_dir)));
  CHECK(report.exit_code == 0);
  CHECK(report.summary.find("method=gappy") != std::string::npos);
  CHECK(report.summary.find("method=baseline") != std::string::npos);
  CHECK(fs::exists(fs::path(run.run_dir) / "scatter.svg"));

  const fs::path empty = scratch_root() / "empty_run";
  fs::create_directories(empty);
  bool threw = false;
  try {
    run_stage(Stage::kReport, options(config, empty));
  } catch (const std::runtime_error& e) {
    threw = true;
    const std::string msg = e.what();
    CHECK(msg.find("missing artifacts") != std::string::npos);
    CHECK(msg.find("metrics.csv") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("stage names map to stages") {
  CHECK(stage_from_name("generate") == Stage::kGenerate);
  CHECK(stage_from_name("report") == Stage::kReport);
  CHECK_THROWS_AS(stage_from_name("explode"), std::invalid_argument);
}
