/// Pipeline orchestration behind the CLI: resolve a run directory, execute
/// generate -> rigidity -> train -> evaluate, and write every artifact.
/// Stages are independently invocable; a stage reuses artifacts already in
/// the output directory and regenerates the rest deterministically.

#pragma once

#include <cstdint>
#include <string>

namespace gappy {

enum class Stage { kGenerate, kRigidity, kTrain, kEvaluate, kRun, kReport };

Stage stage_from_name(const std::string& name);

struct RunOptions {
  std::string config_path;
  std::string out_override;  // --out; empty keeps the config's out_dir
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  bool dry_run = false;
};

struct RunOutcome {
  int exit_code = 0;  // 0 thresholds met, 2 thresholds failed
  std::string run_dir;
  std::string summary;  // printed to stdout by the CLI
};

/// Runs the pipeline prefix implied by `stage`. Throws on configuration or
/// pipeline errors (the CLI maps exceptions to exit 1).
RunOutcome run_stage(Stage stage, const RunOptions& opts);

}  // namespace gappy
