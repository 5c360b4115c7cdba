/// Feasibility checks for unique rigid assembly of the shared latent space.
///
/// Patch case: each path-connected patch of a modality domain is a rigid
/// body; calibration links are the connection points gluing bodies together.
/// Assembly is uniquely determined (up to one global rigid motion) only when
/// the body graph is connected and every body carries enough connection
/// points to pin its degrees of freedom, d(d+1)/2 of them in dimension d.
///
/// Point case: latent points seen by overlapping sensor subsets. Two points
/// can be placed relative to each other when they share at least 2d+1
/// sensors, and each point needs d(d+1)/2 such neighbors.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gappy/model.hpp"

namespace gappy {

struct Graph {
  int vertices = 0;
  // Undirected edges keyed with first < second; value counts connection
  // points (patch case) or common sensors (point case).
  std::map<std::pair<int, int>, int> edge_multiplicity;

  void add_edge(int a, int b, int count = 1);
  std::vector<std::vector<int>> adjacency() const;  // sorted neighbor lists
};

struct RigidityReport {
  bool connected = false;
  std::vector<std::vector<int>> components;  // sorted, ordered by least id
  std::vector<int> deficits;                 // per vertex, 0 when satisfied
  std::vector<std::string> vertex_names;
  std::vector<std::string> warnings;
  bool verdict = false;  // connected AND all deficits zero
};

/// Connected components by iterative depth-first search (explicit stack, no
/// recursion). Components are ordered by their smallest vertex id and each
/// component lists vertices in ascending order.
std::vector<std::vector<int>> disconnected_subgraphs(const Graph& g);

/// Patch-case check. Bodies come from patch_labels when a modality carries
/// them, otherwise one body per modality. A lone body has nothing to fix
/// relative to, so the requirement drops to zero and the verdict is true.
/// When ground truth is supplied, calibration centers that are affinely
/// degenerate for some body (rank < d after centering) produce a warning:
/// the counting condition holds but the geometry cannot pin the body.
RigidityReport check_patch_rigidity(const FusionDataset& data,
                                    const GroundTruth* gt = nullptr);

struct PointWithSensors {
  int point_id = 0;
  std::vector<int> sensor_ids;
};

/// Point-case check: edge iff the two points share >= 2d+1 sensors, and each
/// point needs >= d(d+1)/2 distinct neighbors. Neighbor multiplicity does
/// not substitute for neighbor count.
RigidityReport check_point_rigidity(const std::vector<PointWithSensors>& points,
                                    int d);

struct PointModality {
  std::vector<int> sensor_ids;  // the shared subset defining this modality
  std::vector<int> point_ids;   // members, ascending
};

struct PointModalitySelection {
  std::vector<PointModality> modalities;
  RigidityReport induced_patch_report;
};

class CoverError : public std::runtime_error {
 public:
  CoverError(std::string msg, std::vector<int> points)
      : std::runtime_error(std::move(msg)), uncoverable(std::move(points)) {}
  std::vector<int> uncoverable;
};

/// Appendix-style preprocessing of the point case: greedily pick the sensor
/// subset of size >= 2d+1 shared by the largest group of still-uncovered
/// points, form a modality from every point carrying that subset, and repeat
/// until all points are covered and the induced patch graph (points in two
/// or more modalities act as connection points) passes check_patch_rigidity.
/// Candidates are the distinct full sensor sets plus pairwise intersections;
/// exhaustive subset enumeration would be factorial in the sensor count.
/// Throws CoverError naming the uncoverable points when no cover exists, and
/// std::invalid_argument when check_point_rigidity fails beforehand.
PointModalitySelection select_point_modalities(
    const std::vector<PointWithSensors>& points, int d);

std::string rigidity_report_to_json(const RigidityReport& report);

// Points-with-sensors file: JSON array of {point_id, sensor_ids}.
std::vector<PointWithSensors> load_points_file(const std::string& path);

}  // namespace gappy
