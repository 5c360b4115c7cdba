// Command line entry point. Each pipeline stage is its own subcommand so a
// failing step can be rerun in isolation; `run` executes all of them.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gappy/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "gappy-fuse: burst-sampled multi-modality fusion. Generates scenario "
      "data, checks rigidity feasibility, trains the coupled auto-encoders, "
      "and evaluates embedding isometry."};
  app.require_subcommand(1);

  gappy::RunOptions opts;
  const char* const stage_names[] = {"generate", "rigidity", "train",
                                     "evaluate", "run",      "report"};
  const char* const stage_help[] = {
      "Generate the configured dataset and ground truth",
      "Generate if needed, then check patch-graph rigidity",
      "Run the pipeline through training",
      "Run the full pipeline, reusing artifacts in --out when present",
      "Run the full pipeline in a fresh timestamped directory",
      "Summarize an existing run directory and refresh its scatter plot"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(stage_names[i], stage_help[i]);
    sub->add_option("--config", opts.config_path, "Experiment config file")
        ->required();
    sub->add_option("--out", opts.out_override,
                    "Output directory (defaults to the config's out_dir)");
    sub->add_option("--seed", opts.seed_override,
                    "Override the experiment seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--dry-run", opts.dry_run,
                  "Stop after the rigidity check, before training");
  }

  CLI11_PARSE(app, argc, argv);

  const CLI::App* active = app.get_subcommands().front();
  opts.has_seed_override = active->count("--seed") > 0;

  try {
    const gappy::RunOutcome outcome =
        gappy::run_stage(gappy::stage_from_name(active->get_name()), opts);
    std::cout << outcome.summary;
    if (!outcome.summary.empty() && outcome.summary.back() != '\n')
      std::cout << '\n';
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
