#include "gappy/runner.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gappy/config.hpp"
#include "gappy/evaluation.hpp"
#include "gappy/report.hpp"
#include "gappy/rigidity.hpp"
#include "gappy/rng.hpp"
#include "gappy/trainer.hpp"

namespace gappy {

namespace fs = std::filesystem;

namespace {

std::string scenario_name(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::kWifi:
      return "wifi";
    case ScenarioKind::kWave:
      return "wave";
    default:
      return cfg.synthetic.scenario_id;
  }
}

std::string timestamp_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

/// The --out directory is itself a run directory when it already holds a
/// dataset; otherwise a fresh timestamped subdirectory is created.
fs::path resolve_run_dir(const ExperimentConfig& cfg, const RunOptions& opts,
                         bool fresh) {
  const fs::path base =
      opts.out_override.empty() ? fs::path(cfg.out_dir) : fs::path(opts.out_override);
  if (!fresh && fs::exists(base / "dataset.json")) return base;
  const std::string stamp = cfg.name + "_" + timestamp_now();
  fs::path dir = base / stamp;
  for (int n = 1; fs::exists(dir); ++n)
    dir = base / (stamp + "-" + std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct PipelineState {
  ExperimentConfig cfg;
  fs::path dir;
  FusionDataset data;
  GroundTruth gt;
  RigidityReport rigidity;
  GappyLocaModel model;
  TrainHistory history;
  bool trained_now = false;
};

void ensure_dataset(PipelineState& st) {
  const fs::path dpath = st.dir / "dataset.json";
  const fs::path gpath = st.dir / "ground_truth.json";
  if (fs::exists(dpath) && fs::exists(gpath)) {
    st.data = load_dataset(dpath.string());
    st.gt = load_ground_truth(gpath.string());
    return;
  }
  auto [data, gt] = generate_scenario(st.cfg);
  st.data = std::move(data);
  st.gt = std::move(gt);
  save_dataset(dpath.string(), st.data);
  save_ground_truth(gpath.string(), st.gt);
}

void ensure_rigidity(PipelineState& st) {
  st.rigidity = check_patch_rigidity(st.data, &st.gt);
  write_text(st.dir / "rigidity.json", rigidity_report_to_json(st.rigidity));
}

void ensure_model(PipelineState& st, bool allow_reuse) {
  const fs::path cpath = st.dir / "checkpoint.json";
  if (allow_reuse && fs::exists(cpath)) {
    st.model = load_checkpoint(cpath.string());
    return;
  }
  TrainResult result = train(st.data, st.cfg.training);
  st.model = std::move(result.model);
  st.history = std::move(result.history);
  st.trained_now = true;
  CheckpointMeta meta;
  meta.seed = st.cfg.training.seed;
  meta.epochs = st.cfg.training.epochs;
  meta.w_white = st.cfg.training.w_white;
  meta.w_recon = st.cfg.training.w_recon;
  meta.w_calib = st.cfg.training.w_calib;
  save_checkpoint(cpath.string(), st.model, meta);
  write_history_csv((st.dir / "history.csv").string(), st.history,
                    st.model.modality_ids);
}

Matrix means_matrix(const DatasetEmbedding& embedding, int p) {
  std::size_t rows = 0;
  for (const auto& bursts : embedding) rows += bursts.size();
  Matrix out(rows, static_cast<std::size_t>(p));
  std::size_t at = 0;
  for (const auto& bursts : embedding)
    for (const BurstEmbedding& b : bursts) {
      for (int c = 0; c < p; ++c) out(at, c) = b.mean[c];
      ++at;
    }
  return out;
}

int evaluate(PipelineState& st) {
  const DatasetEmbedding embedding = embed_dataset(st.model, st.data);
  write_embedding_csv((st.dir / "embedding.csv").string(), st.data, embedding);

  const int d = st.data.intrinsic_dim;
  const int p = st.model.embedding_dim;
  Matrix latent = stack_rows(st.gt.centers);
  Matrix gappy_means = means_matrix(embedding, p);
  if (p > d) gappy_means = pca_project(gappy_means, d);

  const EvalConfig& ev = st.cfg.evaluation;
  const std::string scen = scenario_name(st.cfg);

  std::vector<MetricsRow> rows;
  const IsometrySummary gappy = isometry_error(
      gappy_means, latent, ev.pair_sample, derive_seed(st.cfg.seed, 33));
  write_scatter_csv((st.dir / "scatter_gappy.csv").string(), gappy.scatter);
  rows.push_back({scen, "gappy", gappy.rmse, gappy.relative_rmse,
                  gappy.max_error, gappy.n_pairs, st.cfg.seed});

  if (ev.run_baseline) {
    const BaselineResult baseline = baseline_register(st.data, st.cfg.training);
    Matrix base_means = baseline.means;
    if (p > d) base_means = pca_project(base_means, d);
    const IsometrySummary base = isometry_error(
        base_means, latent, ev.pair_sample, derive_seed(st.cfg.seed, 34));
    write_scatter_csv((st.dir / "scatter_baseline.csv").string(), base.scatter);
    rows.push_back({scen, "baseline", base.rmse, base.relative_rmse,
                    base.max_error, base.n_pairs, st.cfg.seed});
  }

  bool completion_ok = true;
  if (ev.completion) {
    const PartialDistanceMatrix partial =
        make_partial_from_ground_truth(st.data, st.gt);
    const Matrix completed =
        complete_distance_matrix(st.model, st.data, partial);
    const MergedPoints merged = build_merged_points(st.data);
    const CompletionScore score =
        score_completion(completed, partial, merged_centers(st.gt, merged));
    rows.push_back({scen, "completion", score.rmse, score.relative_rmse,
                    score.max_error, score.n_filled, st.cfg.seed});
    completion_ok = score.relative_rmse <= ev.max_completion_rel_rmse;
  }

  write_metrics_csv((st.dir / "metrics.csv").string(), rows);
  const bool ok =
      gappy.relative_rmse <= ev.max_rel_rmse && completion_ok;
  return ok ? 0 : 2;
}

}  // namespace

Stage stage_from_name(const std::string& name) {
  if (name == "generate") return Stage::kGenerate;
  if (name == "rigidity") return Stage::kRigidity;
  if (name == "train") return Stage::kTrain;
  if (name == "evaluate") return Stage::kEvaluate;
  if (name == "run") return Stage::kRun;
  if (name == "report") return Stage::kReport;
  throw std::invalid_argument("unknown subcommand: " + name);
}

RunOutcome run_stage(Stage stage, const RunOptions& opts) {
  ExperimentConfig cfg = load_experiment_config(opts.config_path);
  if (opts.has_seed_override) apply_seed(cfg, opts.seed_override);

  RunOutcome out;

  if (stage == Stage::kReport) {
    const fs::path base = opts.out_override.empty() ? fs::path(cfg.out_dir)
                                                    : fs::path(opts.out_override);
    out.run_dir = base.string();
    out.summary = emit_report(base.string());
    return out;
  }

  PipelineState st;
  st.cfg = std::move(cfg);
  st.dir = resolve_run_dir(st.cfg, opts, stage == Stage::kRun);
  out.run_dir = st.dir.string();

  ensure_dataset(st);
  std::ostringstream summary;
  summary << "run directory: " << st.dir.string() << '\n';
  summary << "scenario " << scenario_name(st.cfg) << ": "
          << st.data.modalities.size() << " modalities, "
          << st.data.total_bursts() << " bursts, " << st.data.calibration.size()
          << " calibration links\n";

  if (stage == Stage::kGenerate) {
    out.summary = summary.str();
    return out;
  }

  ensure_rigidity(st);
  summary << "rigidity: " << (st.rigidity.verdict ? "pass" : "FAIL");
  if (!st.rigidity.connected)
    summary << " (patch graph disconnected, " << st.rigidity.components.size()
            << " components)";
  summary << '\n';
  for (const std::string& w : st.rigidity.warnings)
    summary << "  warning: " << w << '\n';

  if (stage == Stage::kRigidity || opts.dry_run) {
    out.summary = summary.str();
    return out;
  }

  ensure_model(st, /*allow_reuse=*/stage == Stage::kEvaluate);
  if (st.trained_now && !st.history.epochs.empty()) {
    const EpochStats& last = st.history.epochs.back();
    summary << "training: " << st.history.epochs.size()
            << " epochs, final total loss " << format_double(last.total)
            << '\n';
    for (const std::string& w : st.history.warnings)
      summary << "  warning: " << w << '\n';
  }

  if (stage == Stage::kTrain) {
    out.summary = summary.str();
    return out;
  }

  out.exit_code = evaluate(st);
  summary << emit_report(st.dir.string());
  summary << (out.exit_code == 0 ? "thresholds met\n" : "thresholds FAILED\n");
  out.summary = summary.str();
  return out;
}

}  // namespace gappy
