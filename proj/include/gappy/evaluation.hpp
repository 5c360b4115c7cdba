/// Embedding quality tools: rigid Procrustes registration, the pairwise
/// distance isometry metric, distance matrix completion through a trained
/// model, and the independent-models-plus-registration baseline.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gappy/matrix.hpp"
#include "gappy/model.hpp"
#include "gappy/trainer.hpp"

namespace gappy {

/// Rigid motion y = Q x + t with Q orthogonal (QtQ = I within 1e-10).
struct RigidTransform {
  Matrix rotation;  // p x p
  std::vector<double> translation;
  bool reflected = false;  // det(Q) < 0
};

/// Applies the transform to each row of `points`.
Matrix apply_transform(const RigidTransform& transform, const Matrix& points);

/// Least-squares rigid registration of `source` rows onto `target` rows.
/// With allow_reflection false the rotation is proper (det +1) via the usual
/// sign correction on the smallest singular direction. Requires n >= p and a
/// centered cross-covariance of rank >= p-1; lower rank throws a
/// degenerate-configuration error.
RigidTransform procrustes_fit(const Matrix& source, const Matrix& target,
                              bool allow_reflection);

struct IsometrySummary {
  double rmse = 0.0;
  double relative_rmse = 0.0;  // rmse / mean latent pairwise distance
  double max_error = 0.0;
  std::size_t n_pairs = 0;
  std::vector<std::array<double, 2>> scatter;  // (latent dist, embedded dist)
};

/// Compares Euclidean pairwise distances in the embedding against the latent
/// ground truth, with no rescaling. All pairs when there are at most 2000
/// points; otherwise a seeded sample of min(pair_sample, 200000) pairs
/// (pair_sample 0 means the cap). Scatter keeps at most 5000 pairs by a
/// deterministic stride.
IsometrySummary isometry_error(const Matrix& embedded, const Matrix& latent,
                               std::size_t pair_sample, std::uint64_t seed);

/// Centers the points and projects onto the top `target_dim` principal
/// directions. Used to report d-dimensional metrics when the embedding space
/// was widened to let reflections relax.
Matrix pca_project(const Matrix& points, int target_dim);

/// Stacks per-modality row blocks into one matrix (modality-major order).
Matrix stack_rows(const std::vector<Matrix>& blocks);

/// Bursts identified across modalities by calibration links. Point ids follow
/// first appearance in (modality, burst) scan order.
struct MergedPoints {
  std::vector<std::vector<std::pair<int, int>>> members;  // per point
  std::vector<std::vector<int>> point_of;  // [modality][burst] -> point id
  std::size_t size() const { return members.size(); }
};

MergedPoints build_merged_points(const FusionDataset& data);

/// Symmetric distance matrix with a mask of known entries. Diagonal is known
/// and zero; the mask and the known values are symmetric.
struct PartialDistanceMatrix {
  Matrix values;
  std::vector<std::vector<bool>> known;

  PartialDistanceMatrix() = default;
  explicit PartialDistanceMatrix(std::size_t n)
      : values(n, n), known(n, std::vector<bool>(n, false)) {
    for (std::size_t i = 0; i < n; ++i) known[i][i] = true;
  }
  std::size_t size() const { return values.rows(); }
};

/// Fills the unknown entries with Euclidean distances between mean burst
/// embeddings (averaged over modalities for shared points). Known entries are
/// preserved as given. Row indices are merged point ids for `data`.
Matrix complete_distance_matrix(const GappyLocaModel& model,
                                const FusionDataset& data,
                                const PartialDistanceMatrix& partial);

/// Ground-truth latent position per merged point (first member's center).
Matrix merged_centers(const GroundTruth& gt, const MergedPoints& merged);

/// Partial matrix whose known entries are ground-truth distances between
/// points sharing at least one observing modality. The cross-modality block
/// is left unknown; completion has to fill it through the trained model.
PartialDistanceMatrix make_partial_from_ground_truth(const FusionDataset& data,
                                                     const GroundTruth& gt);

struct CompletionScore {
  double rmse = 0.0;
  double relative_rmse = 0.0;
  double max_error = 0.0;
  std::size_t n_filled = 0;
};

/// Error of the filled (previously unknown) entries against distances between
/// the true latent points. Relative to the mean true distance over the same
/// entries.
CompletionScore score_completion(const Matrix& completed,
                                 const PartialDistanceMatrix& partial,
                                 const Matrix& true_points);

struct BaselineResult {
  Matrix means;  // one row per burst, modality-major, in modality 1's frame
  std::vector<TrainHistory> histories;  // per modality
  std::vector<std::string> warnings;
};

/// Trains one independent model per modality (calibration weight forced to
/// zero, per-modality seeds derived from cfg.seed) and chains Procrustes
/// registration over calibration burst means along a spanning tree of the
/// modality graph, rooted at modality 1 with edges in ascending id order.
/// Throws when the modality graph is disconnected, listing the components;
/// warns when a registered pair shares fewer than d(d+1)/2 links.
BaselineResult baseline_register(const FusionDataset& data,
                                 const TrainConfig& cfg);

}  // namespace gappy
