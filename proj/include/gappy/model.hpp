/// Core dataset types: bursts, modalities, calibration links, ground truth.
///
/// A burst is M noisy observations of one hidden latent point pushed through
/// a modality's measurement function. Calibration links pair bursts across
/// modalities that share the same latent center. Everything round-trips
/// through JSON at full double precision so that a written dataset reloads
/// bit-identically.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gappy/matrix.hpp"

namespace gappy {

struct Burst {
  int burst_id = 0;
  Matrix samples;  // M x ambient_dim, rows are observations
};

struct ModalityData {
  int modality_id = 0;
  int ambient_dim = 0;
  double sigma = 0.0;  // burst sampling scale in latent space
  std::vector<Burst> bursts;
  // Optional patch decomposition: patch_labels[i] is the path-connected
  // component of burst i's latent center. Empty means single patch.
  std::vector<int> patch_labels;
};

/// (i, j, k, s): burst i of modality k shares its latent center with
/// burst j of modality s. Indices are positions in the bursts vectors,
/// modalities are positions in the modalities vector.
struct CalibrationLink {
  int burst_i = 0;
  int burst_j = 0;
  int modality_k = 0;
  int modality_s = 0;
};

struct FusionDataset {
  int intrinsic_dim = 0;
  std::vector<ModalityData> modalities;
  std::vector<CalibrationLink> calibration;

  std::size_t total_bursts() const {
    std::size_t n = 0;
    for (const auto& m : modalities) n += m.bursts.size();
    return n;
  }
};

/// Latent centers per burst, kept alongside a generated dataset for
/// evaluation. centers[k] has one row per burst of modality k.
struct GroundTruth {
  int intrinsic_dim = 0;
  std::string scenario;
  std::vector<int> modality_ids;
  std::vector<Matrix> centers;
};

struct Violation {
  std::string code;    // stable identifier, e.g. "burst_too_small"
  std::string where;   // location, e.g. "modalities[1].bursts[3]"
  std::string detail;  // human-readable explanation
};

/// Structural checks: every burst M >= 2 with consistent ambient dimension,
/// sigma > 0, ambient_dim >= intrinsic_dim >= 1, all values finite,
/// calibration indices in range with distinct modalities, and patch labels
/// (when present) matching the burst count. Returns all violations found.
std::vector<Violation> validate_dataset(const FusionDataset& data);

/// Throws std::runtime_error listing every violation, if any.
void require_valid(const FusionDataset& data);

std::string to_string(const Violation& v);

// JSON round-trip. save_* write full-precision doubles; load_* throw
// std::runtime_error naming the offending field on malformed input.
void save_dataset(const std::string& path, const FusionDataset& data);
FusionDataset load_dataset(const std::string& path);
std::string dataset_to_json(const FusionDataset& data);
FusionDataset dataset_from_json(const std::string& text);

void save_ground_truth(const std::string& path, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::string& path);
std::string ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const std::string& text);

}  // namespace gappy
