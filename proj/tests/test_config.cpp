#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "gappy/config.hpp"
#include "gappy/rng.hpp"

using namespace gappy;

namespace {

// Expects parsing to fail and the message to carry the field path.
void expect_fail(const std::string& text, const std::string& path_fragment) {
  bool threw = false;
  try {
    parse_experiment_config(text, "test");
  } catch (const std::invalid_argument& e) {
    threw = true;
    CAPTURE(e.what());
    CAPTURE(path_fragment);
    CHECK(std::string(e.what()).find(path_fragment) != std::string::npos);
  }
  CHECK(threw);
}

}  // namespace

TEST_CASE("empty document yields the documented defaults") {
  const ExperimentConfig cfg = parse_experiment_config("", "test");
  CHECK(cfg.name == "experiment");
  CHECK(cfg.seed == 1u);
  CHECK(cfg.out_dir == "runs");
  CHECK(cfg.kind == ScenarioKind::kSynthetic);
  CHECK(cfg.synthetic.scenario_id == "same_domain");
  CHECK(cfg.synthetic.burst_size == 100);
  CHECK(cfg.synthetic.sigma == 0.1);
  REQUIRE(cfg.synthetic.modalities.size() == 2u);
  CHECK(cfg.synthetic.modalities[0][0].count == 500);
  CHECK(cfg.training.epochs == 500);
  CHECK(cfg.training.batch_bursts == 32);
  CHECK(cfg.training.adam.learning_rate == 2e-3);
  CHECK(cfg.training.lr_decay == 1.0);
  CHECK(cfg.training.grad_clip == 10.0);
  CHECK(cfg.training.standardize_inputs);
  CHECK(!cfg.training.recon_per_sample);
  CHECK(cfg.evaluation.pair_sample == 200000u);
  CHECK(cfg.evaluation.run_baseline);
  CHECK(cfg.evaluation.max_rel_rmse == 0.075);
  CHECK(!cfg.evaluation.completion);
}

TEST_CASE("full override document") {
  const std::string text = R"(
# experiment header comment
[experiment]
name = "trial-7"   # trailing comment
seed = 42
out_dir = "out/here"

[scenario]
id = "overlap"
burst_size = 12
sigma = 0.25
burst_distribution = "uniform_ball"
modality1_rects = [[0.0, 1.0, 0.0, 1.0]]
modality1_counts = [17]
modality2_rects = [[0.5, 1.5, 0.0, 1.0]]
modality2_counts = [19]
calib_rects = [[0.5, 1.0, 0.0, 1.0]]
calib_counts = [4]
calib_pairs = [[1, 2]]

[training]
epochs = 33
batch_bursts = 9
hidden = [10, 11]
activation = "softplus"
learning_rate = 0.004
lr_decay = 0.5
w_white = 2.0
w_recon = 0.5
w_calib = 3.0
grad_clip = 7.5
embedding_dim = 2
relax_reflections = false
standardize_inputs = false
estimate_sigma = true
recon_per_sample = true

[evaluation]
pair_sample = 1234
run_baseline = false
max_rel_rmse = 0.2
completion = true
max_completion_rel_rmse = 0.3
)";
  const ExperimentConfig cfg = parse_experiment_config(text, "test");
  CHECK(cfg.name == "trial-7");
  CHECK(cfg.seed == 42u);
  CHECK(cfg.out_dir == "out/here");
  CHECK(cfg.synthetic.scenario_id == "overlap");
  CHECK(cfg.synthetic.burst_size == 12);
  CHECK(cfg.synthetic.sigma == 0.25);
  CHECK(cfg.synthetic.burst_distribution == BurstDistribution::kUniformBall);
  REQUIRE(cfg.synthetic.modalities.size() == 2u);
  CHECK(cfg.synthetic.modalities[0][0].count == 17);
  CHECK(cfg.synthetic.modalities[1][0].count == 19);
  CHECK(cfg.synthetic.modalities[1][0].rect.x0 == 0.5);
  REQUIRE(cfg.synthetic.calib_regions.size() == 1u);
  CHECK(cfg.synthetic.calib_regions[0].count == 4);
  CHECK(cfg.synthetic.calib_regions[0].modality_a == 0);
  CHECK(cfg.synthetic.calib_regions[0].modality_b == 1);
  CHECK(cfg.training.epochs == 33);
  CHECK(cfg.training.batch_bursts == 9);
  CHECK(cfg.training.hidden == std::vector<int>{10, 11});
  CHECK(cfg.training.activation == Activation::kSoftplus);
  CHECK(cfg.training.adam.learning_rate == 0.004);
  CHECK(cfg.training.lr_decay == 0.5);
  CHECK(cfg.training.w_white == 2.0);
  CHECK(cfg.training.w_recon == 0.5);
  CHECK(cfg.training.w_calib == 3.0);
  CHECK(cfg.training.grad_clip == 7.5);
  CHECK(cfg.training.embedding_dim == 2);
  CHECK(!cfg.training.standardize_inputs);
  CHECK(cfg.training.estimate_sigma);
  CHECK(cfg.training.recon_per_sample);
  CHECK(cfg.evaluation.pair_sample == 1234u);
  CHECK(!cfg.evaluation.run_baseline);
  CHECK(cfg.evaluation.max_rel_rmse == 0.2);
  CHECK(cfg.evaluation.completion);
  CHECK(cfg.evaluation.max_completion_rel_rmse == 0.3);
}

TEST_CASE("seeds derive distinct per-stage streams") {
  ExperimentConfig cfg = parse_experiment_config(
      "[experiment]\nseed = 7\n", "test");
  CHECK(cfg.seed == 7u);
  CHECK(cfg.synthetic.seed == derive_seed(7, 11));
  CHECK(cfg.training.seed == derive_seed(7, 22));
  CHECK(cfg.synthetic.seed != cfg.training.seed);

  apply_seed(cfg, 9);
  CHECK(cfg.seed == 9u);
  CHECK(cfg.synthetic.seed == derive_seed(9, 11));
  CHECK(cfg.wifi.seed == derive_seed(9, 11));
  CHECK(cfg.wave.seed == derive_seed(9, 11));
  CHECK(cfg.training.seed == derive_seed(9, 22));
}

TEST_CASE("syntax errors name the offending location") {
  expect_fail("[experiment\nname = \"x\"\n", "malformed section header");
  expect_fail("name = \"x\"\n", "before any [section]");
  expect_fail("[experiment]\nname\n", "expected key = value");
  expect_fail("[experiment]\nname = \n", "missing value");
  expect_fail("[experiment]\nname = \"a\"\nname = \"b\"\n", "duplicate key");
  expect_fail("[experiment]\nna me = \"x\"\n", "malformed key");
  expect_fail("[experiment]\nname = \"unterminated\n", "unterminated");
  expect_fail("[training]\nhidden = [1, 2\n", "unterminated array");
  expect_fail("[training]\nepochs = 1e\n", "cannot parse value");
}

TEST_CASE("unknown sections and keys are rejected with their path") {
  expect_fail("[mystery]\nx = 1\n", "mystery");
  expect_fail("[experiment]\nnom = \"x\"\n", "experiment.nom");
  expect_fail("[training]\nlearning = 0.1\n", "training.learning");
  expect_fail("[evaluation]\nbatch_bursts = 4\n", "evaluation.batch_bursts");
}

TEST_CASE("type mismatches are rejected with their path") {
  expect_fail("[experiment]\nname = 5\n", "experiment.name");
  expect_fail("[experiment]\nseed = -3\n", "experiment.seed");
  expect_fail("[experiment]\nseed = 1.5\n", "experiment.seed");
  expect_fail("[training]\nepochs = \"ten\"\n", "training.epochs");
  expect_fail("[training]\nepochs = 2.5\n", "training.epochs");
  expect_fail("[training]\nhidden = 4\n", "training.hidden");
  expect_fail("[training]\nhidden = [4, \"five\"]\n", "training.hidden[1]");
  expect_fail("[training]\nactivation = \"relu\"\n", "training.activation");
  expect_fail("[scenario]\nburst_distribution = \"cauchy\"\n",
              "scenario.burst_distribution");
  expect_fail("[evaluation]\nrun_baseline = 1\n", "evaluation.run_baseline");
}

TEST_CASE("value range checks name the field") {
  expect_fail("[experiment]\nname = \"\"\n", "experiment.name");
  expect_fail("[scenario]\nburst_size = 1\n", "scenario.burst_size");
  expect_fail("[scenario]\nsigma = -0.1\n", "scenario.sigma");
  expect_fail("[scenario]\nid = \"mystery\"\n", "scenario.id");
  expect_fail("[training]\nepochs = 0\n", "training.epochs");
  expect_fail("[training]\nbatch_bursts = 0\n", "training.batch_bursts");
  expect_fail("[training]\nhidden = [8, 0]\n", "training.hidden");
  expect_fail("[training]\nlearning_rate = 0.0\n", "training.learning_rate");
  expect_fail("[training]\nlr_decay = 0.0\n", "training.lr_decay");
  expect_fail("[training]\nlr_decay = 1.5\n", "training.lr_decay");
  expect_fail("[training]\nw_calib = -1.0\n", "training.w_calib");
  expect_fail("[training]\nembedding_dim = -2\n", "training.embedding_dim");
  expect_fail("[evaluation]\nmax_rel_rmse = 0.0\n", "evaluation.max_rel_rmse");
}

TEST_CASE("scenario override structure errors") {
  expect_fail(
      "[scenario]\nmodality1_rects = [[0.0, 1.0, 0.0, 1.0]]\n",
      "modality overrides need both");
  expect_fail(
      "[scenario]\nmodality1_rects = [[0.0, 1.0, 0.0, 1.0]]\n"
      "modality1_counts = [5, 6]\n",
      "lengths differ");
  expect_fail(
      "[scenario]\nmodality1_rects = [[1.0, 0.0, 0.0, 1.0]]\n"
      "modality1_counts = [5]\n",
      "rectangle is empty");
  expect_fail(
      "[scenario]\nmodality1_rects = [[0.0, 1.0, 0.0]]\n"
      "modality1_counts = [5]\n",
      "expected [x0, x1, y0, y1]");
  expect_fail("[scenario]\ncalib_rects = [[0.0, 1.0, 0.0, 1.0]]\n",
              "calib_rects, calib_counts, and calib_pairs together");
  expect_fail(
      "[scenario]\ncalib_rects = [[0.0, 1.0, 0.0, 1.0]]\n"
      "calib_counts = [3]\ncalib_pairs = [[1, 1]]\n",
      "two distinct 1-based modality ids");
  expect_fail(
      "[scenario]\ncalib_rects = [[0.0, 1.0, 0.0, 1.0]]\n"
      "calib_counts = [3]\ncalib_pairs = [[0, 1]]\n",
      "two distinct 1-based modality ids");
  expect_fail(
      "[scenario]\ncalib_rects = [[0.0, 1.0, 0.0, 1.0]]\n"
      "calib_counts = [0]\ncalib_pairs = [[1, 2]]\n",
      "calib_counts[0]");
}

TEST_CASE("scenario kind gates the wifi and wave sections") {
  expect_fail("[wifi]\nthreshold = 0.1\n", "wifi");
  expect_fail("[wave]\nburst_size = 10\n", "wave");

  const ExperimentConfig wifi = parse_experiment_config(
      "[scenario]\nid = \"wifi\"\n[wifi]\nthreshold = 0.07\n"
      "points_per_modality = 25\n",
      "test");
  CHECK(wifi.kind == ScenarioKind::kWifi);
  CHECK(wifi.wifi.threshold == 0.07);
  CHECK(wifi.wifi.points_per_modality == 25);
  CHECK(wifi.wifi.transmitters.size() == 12u);  // defaults retained

  expect_fail("[scenario]\nid = \"wifi\"\n[wifi]\nthreshold = 1.5\n",
              "wifi.threshold");
  expect_fail(
      "[scenario]\nid = \"wifi\"\n[wifi]\n"
      "transmitters = [[0.0, 0.0], [1.0, 1.0]]\n",
      "expected exactly 12 positions");

  const ExperimentConfig wave = parse_experiment_config(
      "[scenario]\nid = \"wave\"\n[wave]\nsamples_per_trajectory = 9\n",
      "test");
  CHECK(wave.kind == ScenarioKind::kWave);
  CHECK(wave.wave.samples_per_trajectory == 9);
  REQUIRE(wave.wave.observers.size() == 3u);

  expect_fail(
      "[scenario]\nid = \"wave\"\n[wave]\nsamples_per_trajectory = 4\n",
      "wave.samples_per_trajectory");
  expect_fail(
      "[scenario]\nid = \"wave\"\n[wave]\n"
      "observers = [[0.0, 0.0, 0.3], [1.0, 0.0, 0.3], [0.0, 1.0, 0.3]]\n",
      "wave.observers[0]");
}

TEST_CASE("string escapes and comments inside strings") {
  const ExperimentConfig cfg = parse_experiment_config(
      "[experiment]\nname = \"with \\\"quotes\\\" and # not a comment\"\n",
      "test");
  CHECK(cfg.name == "with \"quotes\" and # not a comment");
}

TEST_CASE("trailing commas in arrays are tolerated") {
  const ExperimentConfig cfg = parse_experiment_config(
      "[training]\nhidden = [5, 6,]\n", "test");
  CHECK(cfg.training.hidden == std::vector<int>{5, 6});
}

TEST_CASE("config file loading") {
  const std::string path = "test_config_tmp.toml";
  {
    std::ofstream out(path);
    out << "[experiment]\nname = \"fromfile\"\nseed = 3\n";
  }
  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.name == "fromfile");
  CHECK(cfg.seed == 3u);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_experiment_config(path), std::invalid_argument);
}

TEST_CASE("generate_scenario dispatches on the configured kind") {
  const ExperimentConfig cfg = parse_experiment_config(R"(
[scenario]
id = "same_domain"
burst_size = 4
modality1_rects = [[0.0, 1.0, 0.0, 1.0]]
modality1_counts = [6]
modality2_rects = [[0.0, 1.0, 0.0, 1.0]]
modality2_counts = [6]
calib_rects = [[0.0, 1.0, 0.0, 1.0]]
calib_counts = [3]
calib_pairs = [[1, 2]]
)",
                                                       "test");
  const auto [data, gt] = generate_scenario(cfg);
  REQUIRE(data.modalities.size() == 2u);
  CHECK(data.modalities[0].bursts.size() == 9u);  // 6 + 3 calibration
  CHECK(data.calibration.size() == 3u);
  for (std::size_t i = 0; i < gt.centers[0].rows(); ++i) {
    CHECK(gt.centers[0](i, 0) >= 0.0);
    CHECK(gt.centers[0](i, 0) <= 1.0);
  }
}
