#include "gappy/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gappy/linalg.hpp"

namespace gappy {

void Graph::add_edge(int a, int b, int count) {
  if (a == b) throw std::invalid_argument("Graph: self-loops are not allowed");
  if (a < 0 || b < 0 || a >= vertices || b >= vertices)
    throw std::invalid_argument("Graph: vertex id out of range");
  if (a > b) std::swap(a, b);
  edge_multiplicity[{a, b}] += count;
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(vertices);
  for (const auto& [edge, count] : edge_multiplicity) {
    (void)count;
    adj[edge.first].push_back(edge.second);
    adj[edge.second].push_back(edge.first);
  }
  for (auto& neighbors : adj) std::sort(neighbors.begin(), neighbors.end());
  return adj;
}

std::vector<std::vector<int>> disconnected_subgraphs(const Graph& g) {
  const auto adj = g.adjacency();
  std::vector<char> seen(g.vertices, 0);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int start = 0; start < g.vertices; ++start) {
    if (seen[start]) continue;
    std::vector<int> component;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (const int w : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  // Iterating starts in ascending order already yields components ordered by
  // their smallest vertex id.
  return components;
}

namespace {

RigidityReport report_from_graph(const Graph& g, int required,
                                 std::vector<std::string> names) {
  RigidityReport report;
  report.vertex_names = std::move(names);
  report.components = disconnected_subgraphs(g);
  report.connected = report.components.size() <= 1;
  report.deficits.assign(g.vertices, 0);
  if (g.vertices > 1) {
    std::vector<int> available(g.vertices, 0);
    for (const auto& [edge, count] : g.edge_multiplicity) {
      available[edge.first] += count;
      available[edge.second] += count;
    }
    for (int v = 0; v < g.vertices; ++v)
      report.deficits[v] = std::max(0, required - available[v]);
  }
  report.verdict = report.connected &&
                   std::all_of(report.deficits.begin(), report.deficits.end(),
                               [](int d) { return d == 0; });
  return report;
}

// Neighbor-count variant: available = number of distinct neighbors.
RigidityReport report_from_graph_neighbors(const Graph& g, int required,
                                           std::vector<std::string> names) {
  RigidityReport report;
  report.vertex_names = std::move(names);
  report.components = disconnected_subgraphs(g);
  report.connected = report.components.size() <= 1;
  report.deficits.assign(g.vertices, 0);
  if (g.vertices > 1) {
    const auto adj = g.adjacency();
    for (int v = 0; v < g.vertices; ++v)
      report.deficits[v] =
          std::max(0, required - static_cast<int>(adj[v].size()));
  }
  report.verdict = report.connected &&
                   std::all_of(report.deficits.begin(), report.deficits.end(),
                               [](int d) { return d == 0; });
  return report;
}

int affine_rank(const Matrix& points, double rel_tol = 1e-9) {
  const std::size_t m = points.rows(), d = points.cols();
  if (m < 2) return 0;
  const auto mean = column_mean(points);
  Matrix gram(d, d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        gram(a, b) += (points(i, a) - mean[a]) * (points(i, b) - mean[b]);
  const auto eig = sym_eig_small(gram);
  const double top = std::max(eig.values.front(), 0.0);
  int rank = 0;
  for (const double v : eig.values)
    if (v > rel_tol * std::max(top, 1e-30)) ++rank;
  return rank;
}

}  // namespace

RigidityReport check_patch_rigidity(const FusionDataset& data,
                                    const GroundTruth* gt) {
  const int d = data.intrinsic_dim;
  const int required = d * (d + 1) / 2;

  // Map (modality index, patch label) to a vertex id. Modalities without
  // patch labels are a single body with label 0.
  std::vector<std::map<int, int>> label_to_vertex(data.modalities.size());
  std::vector<std::string> names;
  int vertex_count = 0;
  for (std::size_t k = 0; k < data.modalities.size(); ++k) {
    const ModalityData& m = data.modalities[k];
    std::set<int> labels;
    if (m.patch_labels.empty()) {
      labels.insert(0);
    } else {
      labels.insert(m.patch_labels.begin(), m.patch_labels.end());
    }
    for (const int label : labels) {
      label_to_vertex[k][label] = vertex_count++;
      std::string name = "modality " + std::to_string(m.modality_id);
      if (labels.size() > 1 || !m.patch_labels.empty())
        name += " patch " + std::to_string(label);
      names.push_back(std::move(name));
    }
  }

  Graph g;
  g.vertices = vertex_count;
  std::vector<std::string> warnings;
  const auto vertex_of = [&](int mod, int burst) -> int {
    const ModalityData& m = data.modalities[mod];
    const int label = m.patch_labels.empty() ? 0 : m.patch_labels[burst];
    return label_to_vertex[mod].at(label);
  };

  std::vector<std::vector<std::pair<int, int>>> incident(vertex_count);
  for (const CalibrationLink& link : data.calibration) {
    if (link.modality_k == link.modality_s) {
      warnings.push_back("ignoring self-modality calibration link");
      continue;
    }
    const int va = vertex_of(link.modality_k, link.burst_i);
    const int vb = vertex_of(link.modality_s, link.burst_j);
    g.add_edge(va, vb);
    incident[va].push_back({link.modality_k, link.burst_i});
    incident[vb].push_back({link.modality_s, link.burst_j});
  }

  RigidityReport report = report_from_graph(g, required, std::move(names));

  if (gt != nullptr && vertex_count > 1) {
    for (int v = 0; v < vertex_count; ++v) {
      const auto& pts = incident[v];
      if (static_cast<int>(pts.size()) < required || report.deficits[v] > 0)
        continue;
      Matrix centers(pts.size(), d);
      for (std::size_t r = 0; r < pts.size(); ++r) {
        const auto [mod, burst] = pts[r];
        for (int c = 0; c < d; ++c)
          centers(r, c) = gt->centers[mod](burst, c);
      }
      if (affine_rank(centers) < d)
        report.warnings.push_back(
            "calibration centers for " + report.vertex_names[v] +
            " are affinely degenerate; counting condition holds but the "
            "geometry cannot pin the body");
    }
  }
  report.warnings.insert(report.warnings.end(), warnings.begin(),
                         warnings.end());
  return report;
}

RigidityReport check_point_rigidity(const std::vector<PointWithSensors>& points,
                                    int d) {
  const int n = static_cast<int>(points.size());
  const int min_shared = 2 * d + 1;
  const int required = d * (d + 1) / 2;

  std::vector<std::vector<int>> sorted_sensors(n);
  std::vector<std::string> names(n);
  for (int i = 0; i < n; ++i) {
    sorted_sensors[i] = points[i].sensor_ids;
    std::sort(sorted_sensors[i].begin(), sorted_sensors[i].end());
    sorted_sensors[i].erase(
        std::unique(sorted_sensors[i].begin(), sorted_sensors[i].end()),
        sorted_sensors[i].end());
    names[i] = "point " + std::to_string(points[i].point_id);
  }

  Graph g;
  g.vertices = n;
  std::vector<int> shared;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      shared.clear();
      std::set_intersection(sorted_sensors[a].begin(), sorted_sensors[a].end(),
                            sorted_sensors[b].begin(), sorted_sensors[b].end(),
                            std::back_inserter(shared));
      if (static_cast<int>(shared.size()) >= min_shared)
        g.add_edge(a, b, static_cast<int>(shared.size()));
    }
  }
  return report_from_graph_neighbors(g, required, std::move(names));
}

PointModalitySelection select_point_modalities(
    const std::vector<PointWithSensors>& points, int d) {
  const RigidityReport point_report = check_point_rigidity(points, d);
  if (!point_report.verdict)
    throw std::invalid_argument(
        "select_point_modalities: point-case rigidity check fails; "
        "preprocessing requires a feasible point graph");

  const int n = static_cast<int>(points.size());
  const std::size_t min_size = static_cast<std::size_t>(2 * d + 1);

  std::vector<std::vector<int>> sensors(n);
  for (int i = 0; i < n; ++i) {
    sensors[i] = points[i].sensor_ids;
    std::sort(sensors[i].begin(), sensors[i].end());
    sensors[i].erase(std::unique(sensors[i].begin(), sensors[i].end()),
                     sensors[i].end());
  }

  // Candidate subsets: each point's full sensor set plus all pairwise
  // intersections that are large enough.
  std::set<std::vector<int>> candidate_set;
  for (int i = 0; i < n; ++i) {
    if (sensors[i].size() >= min_size) candidate_set.insert(sensors[i]);
    for (int j = i + 1; j < n; ++j) {
      std::vector<int> shared;
      std::set_intersection(sensors[i].begin(), sensors[i].end(),
                            sensors[j].begin(), sensors[j].end(),
                            std::back_inserter(shared));
      if (shared.size() >= min_size) candidate_set.insert(std::move(shared));
    }
  }
  std::vector<std::vector<int>> candidates(candidate_set.begin(),
                                           candidate_set.end());

  const auto carriers = [&](const std::vector<int>& subset) {
    std::vector<int> result;
    for (int i = 0; i < n; ++i)
      if (std::includes(sensors[i].begin(), sensors[i].end(), subset.begin(),
                        subset.end()))
        result.push_back(i);
    return result;
  };

  std::vector<char> covered(n, 0);
  std::vector<char> used(candidates.size(), 0);
  PointModalitySelection selection;

  const auto build_induced = [&]() -> RigidityReport {
    FusionDataset induced;
    induced.intrinsic_dim = d;
    // One synthetic modality per selected subset; the bursts are dummies and
    // only the calibration multiset matters. Shared points become one link
    // per modality pair they join.
    for (std::size_t m = 0; m < selection.modalities.size(); ++m) {
      ModalityData md;
      md.modality_id = static_cast<int>(m) + 1;
      md.ambient_dim = std::max(1, d);
      md.sigma = 1.0;
      md.bursts.resize(std::max<std::size_t>(
          selection.modalities[m].point_ids.size(), 1));
      for (auto& b : md.bursts) b.samples = Matrix(2, md.ambient_dim);
      induced.modalities.push_back(std::move(md));
    }
    for (int p = 0; p < n; ++p) {
      std::vector<std::pair<int, int>> memberships;  // (modality, local index)
      for (std::size_t m = 0; m < selection.modalities.size(); ++m) {
        const auto& ids = selection.modalities[m].point_ids;
        const auto it = std::lower_bound(ids.begin(), ids.end(), p);
        if (it != ids.end() && *it == p)
          memberships.push_back(
              {static_cast<int>(m), static_cast<int>(it - ids.begin())});
      }
      for (std::size_t a = 0; a < memberships.size(); ++a)
        for (std::size_t b = a + 1; b < memberships.size(); ++b)
          induced.calibration.push_back({memberships[a].second,
                                         memberships[b].second,
                                         memberships[a].first,
                                         memberships[b].first});
    }
    return check_patch_rigidity(induced);
  };

  while (true) {
    // Pick the unused candidate covering the most uncovered points;
    // ties break toward the lexicographically smallest subset since the
    // candidate list is sorted.
    std::size_t best = candidates.size();
    int best_gain = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      int gain = 0;
      for (const int p : carriers(candidates[c]))
        if (!covered[p]) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }

    const bool all_covered =
        std::all_of(covered.begin(), covered.end(), [](char c) { return c; });
    if (all_covered) {
      selection.induced_patch_report = build_induced();
      if (selection.induced_patch_report.verdict) return selection;
      // Covered but not rigid: admit further subsets to add connection
      // points. Any unused candidate can help, preferring large carrier
      // groups.
      best = candidates.size();
      int best_carriers = 0;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (used[c]) continue;
        const int nc = static_cast<int>(carriers(candidates[c]).size());
        if (nc > best_carriers) {
          best_carriers = nc;
          best = c;
        }
      }
      if (best == candidates.size()) {
        std::vector<int> deficient;
        for (int v = 0; v < static_cast<int>(
                                selection.induced_patch_report.deficits.size());
             ++v)
          if (selection.induced_patch_report.deficits[v] > 0)
            deficient.push_back(v);
        throw CoverError(
            "select_point_modalities: candidate subsets exhausted before the "
            "induced patch graph became rigid",
            deficient);
      }
    } else if (best == candidates.size()) {
      std::vector<int> uncoverable;
      std::string names;
      for (int p = 0; p < n; ++p) {
        if (!covered[p]) {
          uncoverable.push_back(points[p].point_id);
          if (!names.empty()) names += ", ";
          names += std::to_string(points[p].point_id);
        }
      }
      throw CoverError(
          "select_point_modalities: no sensor subset of size >= " +
              std::to_string(min_size) + " covers points " + names,
          uncoverable);
    }

    used[best] = 1;
    PointModality modality;
    modality.sensor_ids = candidates[best];
    modality.point_ids = carriers(candidates[best]);
    for (const int p : modality.point_ids) covered[p] = 1;
    selection.modalities.push_back(std::move(modality));
  }
}

std::string rigidity_report_to_json(const RigidityReport& report) {
  nlohmann::json j;
  j["connected"] = report.connected;
  j["components"] = report.components;
  j["deficits"] = report.deficits;
  j["vertex_names"] = report.vertex_names;
  j["warnings"] = report.warnings;
  j["verdict"] = report.verdict;
  return j.dump(1);
}

std::vector<PointWithSensors> load_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("points file parse error: ") +
                             e.what());
  }
  if (!j.is_array())
    throw std::runtime_error("points file: expected a JSON array");
  std::vector<PointWithSensors> points;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "points[" + std::to_string(i) + "]";
    const auto& jp = j[i];
    if (!jp.contains("point_id") || !jp["point_id"].is_number_integer())
      throw std::runtime_error("expected integer point_id at " + where);
    if (!jp.contains("sensor_ids") || !jp["sensor_ids"].is_array())
      throw std::runtime_error("expected sensor_ids array at " + where);
    PointWithSensors p;
    p.point_id = jp["point_id"].get<int>();
    for (const auto& s : jp["sensor_ids"]) {
      if (!s.is_number_integer())
        throw std::runtime_error("expected integer sensor id at " + where);
      p.sensor_ids.push_back(s.get<int>());
    }
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace gappy
