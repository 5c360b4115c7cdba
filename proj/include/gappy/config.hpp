/// Declarative experiment configs. One TOML-style file defines the scenario,
/// the training setup, and the evaluation thresholds; every built-in default
/// can be overridden. Parse errors carry the offending field path.

#pragma once

#include <cstdint>
#include <string>

#include "gappy/scenarios.hpp"
#include "gappy/trainer.hpp"

namespace gappy {

enum class ScenarioKind { kSynthetic, kWifi, kWave };

struct EvalConfig {
  std::size_t pair_sample = 200000;
  bool run_baseline = true;
  double max_rel_rmse = 0.075;  // gate on the fused model's relative RMSE
  bool completion = false;
  double max_completion_rel_rmse = 0.10;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::string out_dir = "runs";
  ScenarioKind kind = ScenarioKind::kSynthetic;
  ScenarioConfig synthetic;
  WifiConfig wifi;
  WaveConfig wave;
  TrainConfig training;
  EvalConfig evaluation;
};

/// Parses a config document. `origin` names the source in error messages.
/// Throws std::invalid_argument with a section.key field path on any unknown
/// section, unknown key, type mismatch, or invalid value.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin);

ExperimentConfig load_experiment_config(const std::string& path);

/// Installs a new global seed and re-derives the per-stage seeds (scenario
/// generation and training draw from distinct streams). The CLI --seed
/// override goes through here too.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

/// Builds the configured dataset (seeds already resolved by the caller).
std::pair<FusionDataset, GroundTruth> generate_scenario(
    const ExperimentConfig& cfg);

}  // namespace gappy
