/// Run artifacts: CSV writers for metrics, history, embeddings, and scatter
/// pairs; a dependency-free SVG scatter plot; the human-readable report.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gappy/model.hpp"
#include "gappy/trainer.hpp"

namespace gappy {

struct MetricsRow {
  std::string scenario;
  std::string method;  // "gappy", "baseline", "completion"
  double rmse = 0.0;
  double relative_rmse = 0.0;
  double max_error = 0.0;
  std::size_t n_pairs = 0;
  std::uint64_t seed = 0;
};

/// Shortest round-trip decimal form of a double (printf %.17g trimmed).
std::string format_double(double v);

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

void write_history_csv(const std::string& path, const TrainHistory& history,
                       const std::vector<int>& modality_ids);

/// One row per burst: modality_id, burst_id, mean embedding components.
void write_embedding_csv(const std::string& path, const FusionDataset& data,
                         const DatasetEmbedding& embedding);

/// Two columns: latent_dist, embedded_dist.
void write_scatter_csv(const std::string& path,
                       const std::vector<std::array<double, 2>>& pairs);
std::vector<std::array<double, 2>> read_scatter_csv(const std::string& path);

struct ScatterSeries {
  std::string label;
  std::vector<std::array<double, 2>> points;
};

/// Square scatter plot of latent (x) vs embedded (y) pairwise distance with
/// the identity line; at most 5000 points drawn per series.
void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterSeries>& series);

/// Reads metrics.csv and the per-method scatter CSVs from a run directory,
/// refreshes scatter.svg, and returns a text summary. Throws listing every
/// absent artifact.
std::string emit_report(const std::string& run_dir);

}  // namespace gappy
