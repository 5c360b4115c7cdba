#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gappy/rigidity.hpp"
#include "gappy/rng.hpp"

using namespace gappy;

namespace {

// Minimal dataset skeleton for patch-graph checks: bursts carry no samples
// worth reading, only the link structure and patch labels matter.
FusionDataset patch_skeleton(int d, const std::vector<int>& bursts_per_modality,
                             const std::vector<CalibrationLink>& links) {
  FusionDataset data;
  data.intrinsic_dim = d;
  for (std::size_t k = 0; k < bursts_per_modality.size(); ++k) {
    ModalityData m;
    m.modality_id = static_cast<int>(k) + 1;
    m.ambient_dim = d;
    m.sigma = 0.1;
    for (int i = 0; i < bursts_per_modality[k]; ++i) {
      Burst b;
      b.burst_id = i;
      b.samples = Matrix(2, d);
      m.bursts.push_back(std::move(b));
    }
    data.modalities.push_back(std::move(m));
  }
  data.calibration = links;
  return data;
}

// Reachability closure by repeated squaring of the adjacency relation. Slow
// and obviously correct, the point of an oracle.
std::vector<std::vector<int>> closure_components(const Graph& g) {
  const int n = g.vertices;
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) reach[i][i] = 1;
  for (const auto& [edge, count] : g.edge_multiplicity) {
    (void)count;
    reach[edge.first][edge.second] = 1;
    reach[edge.second][edge.first] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (int j = 0; j < n; ++j)
        if (reach[k][j]) reach[i][j] = 1;
    }
  std::vector<std::vector<int>> components;
  std::vector<char> assigned(n, 0);
  for (int i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    std::vector<int> comp;
    for (int j = 0; j < n; ++j)
      if (reach[i][j]) {
        comp.push_back(j);
        assigned[j] = 1;
      }
    components.push_back(std::move(comp));
  }
  return components;
}

std::vector<int> sensors(int lo, int hi) {  // inclusive range
  std::vector<int> out;
  for (int s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

}  // namespace

TEST_CASE("graph edge bookkeeping") {
  Graph g;
  g.vertices = 3;
  g.add_edge(2, 0);
  g.add_edge(0, 2, 2);
  CHECK(g.edge_multiplicity.at({0, 2}) == 3);  // normalized key, counts add
  const auto adj = g.adjacency();
  CHECK(adj[0] == std::vector<int>{2});
  CHECK(adj[1].empty());
  CHECK(adj[2] == std::vector<int>{0});
  CHECK_THROWS_AS(g.add_edge(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(g.add_edge(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(g.add_edge(-1, 0), std::invalid_argument);
}

TEST_CASE("component detection on small graphs") {
  SUBCASE("path graph is one component") {
    Graph g;
    g.vertices = 3;
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    const auto comps = disconnected_subgraphs(g);
    REQUIRE(comps.size() == 1u);
    CHECK(comps[0] == std::vector<int>{0, 1, 2});
  }
  SUBCASE("two disjoint edges") {
    Graph g;
    g.vertices = 4;
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    const auto comps = disconnected_subgraphs(g);
    REQUIRE(comps.size() == 2u);
    CHECK(comps[0] == std::vector<int>{0, 1});
    CHECK(comps[1] == std::vector<int>{2, 3});
  }
  SUBCASE("empty graph") {
    const Graph g;
    CHECK(disconnected_subgraphs(g).empty());
  }
  SUBCASE("isolated vertices become singleton components") {
    Graph g;
    g.vertices = 3;
    g.add_edge(0, 2);
    const auto comps = disconnected_subgraphs(g);
    REQUIRE(comps.size() == 2u);
    CHECK(comps[0] == std::vector<int>{0, 2});
    CHECK(comps[1] == std::vector<int>{1});
  }
}

TEST_CASE("components agree with a reachability-closure oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    Graph g;
    g.vertices = 1 + static_cast<int>(rng.uniform_index(50));
    // Mix sparse and dense graphs; expected edge count from 0 to ~2n.
    const double density = rng.uniform() * 4.0 / std::max(1, g.vertices);
    for (int a = 0; a < g.vertices; ++a)
      for (int b = a + 1; b < g.vertices; ++b)
        if (rng.uniform() < density) g.add_edge(a, b);

    const auto fast = disconnected_subgraphs(g);
    const auto oracle = closure_components(g);
    CAPTURE(trial);
    REQUIRE(fast.size() == oracle.size());
    for (std::size_t c = 0; c < fast.size(); ++c) CHECK(fast[c] == oracle[c]);

    // Partition property: disjoint, ascending within, union = all vertices.
    std::vector<char> seen(g.vertices, 0);
    int prev_min = -1;
    for (const auto& comp : fast) {
      REQUIRE(!comp.empty());
      CHECK(comp.front() > prev_min);
      prev_min = comp.front();
      CHECK(std::is_sorted(comp.begin(), comp.end()));
      for (const int v : comp) {
        CHECK(!seen[v]);
        seen[v] = 1;
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](char c) { return c == 1; }));
  }
}

TEST_CASE("patch rigidity counting at d=2") {
  SUBCASE("two bodies with three shared calibration points pass") {
    const FusionDataset data = patch_skeleton(
        2, {3, 3}, {{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 2, 0, 1}});
    const RigidityReport r = check_patch_rigidity(data);
    CHECK(r.connected);
    CHECK(r.deficits == std::vector<int>{0, 0});
    CHECK(r.verdict);
  }
  SUBCASE("two bodies with two shared points fail with deficit one each") {
    const FusionDataset data =
        patch_skeleton(2, {2, 2}, {{0, 0, 0, 1}, {1, 1, 0, 1}});
    const RigidityReport r = check_patch_rigidity(data);
    CHECK(r.connected);
    CHECK(r.deficits == std::vector<int>{1, 1});
    CHECK(!r.verdict);
  }
  SUBCASE("three bodies with links only between the first two") {
    const FusionDataset data = patch_skeleton(
        2, {3, 3, 1}, {{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 2, 0, 1}});
    const RigidityReport r = check_patch_rigidity(data);
    CHECK(!r.connected);
    REQUIRE(r.components.size() == 2u);
    CHECK(r.components[0] == std::vector<int>{0, 1});
    CHECK(r.components[1] == std::vector<int>{2});
    CHECK(!r.verdict);
  }
  SUBCASE("a lone body has nothing to fix against and passes") {
    const FusionDataset data = patch_skeleton(2, {4}, {});
    const RigidityReport r = check_patch_rigidity(data);
    CHECK(r.verdict);
    CHECK(r.deficits == std::vector<int>{0});
  }
}

TEST_CASE("patch labels split a modality into bodies") {
  FusionDataset data = patch_skeleton(
      2, {4, 3},
      {{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 2, 0, 1},  // patch 0 of m1 to m2
       {3, 0, 0, 1}});                            // patch 1 of m1 to m2
  data.modalities[0].patch_labels = {0, 0, 0, 1};
  const RigidityReport r = check_patch_rigidity(data);
  REQUIRE(r.deficits.size() == 3u);  // two bodies for m1 plus one for m2
  CHECK(r.vertex_names[0] == "modality 1 patch 0");
  CHECK(r.vertex_names[1] == "modality 1 patch 1");
  CHECK(r.vertex_names[2] == "modality 2");
  CHECK(r.connected);
  CHECK(r.deficits[0] == 0);  // three links
  CHECK(r.deficits[1] == 2);  // one link
  CHECK(r.deficits[2] == 0);  // four links total
  CHECK(!r.verdict);
}

TEST_CASE("patch rigidity is monotone in added links") {
  std::vector<CalibrationLink> links;
  bool was_true = false;
  for (int l = 0; l < 6; ++l) {
    links.push_back({l, l, 0, 1});
    const FusionDataset data = patch_skeleton(2, {6, 6}, links);
    const bool verdict = check_patch_rigidity(data).verdict;
    if (was_true) CHECK(verdict);  // never flips back to false
    was_true = verdict;
  }
  CHECK(was_true);  // six links comfortably exceed the requirement of three
}

TEST_CASE("self-modality links are ignored with a warning") {
  FusionDataset data = patch_skeleton(
      2, {3, 3}, {{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 2, 0, 1}});
  data.calibration.push_back({0, 1, 1, 1});
  const RigidityReport r = check_patch_rigidity(data);
  CHECK(r.verdict);  // unchanged by the ignored link
  REQUIRE(!r.warnings.empty());
  CHECK(r.warnings.back().find("self-modality") != std::string::npos);
}

TEST_CASE("degenerate calibration geometry warns when ground truth is known") {
  const FusionDataset data = patch_skeleton(
      2, {3, 3}, {{0, 0, 0, 1}, {1, 1, 0, 1}, {2, 2, 0, 1}});
  GroundTruth gt;
  gt.intrinsic_dim = 2;
  gt.modality_ids = {1, 2};

  SUBCASE("collinear centers satisfy the count but cannot pin the body") {
    Matrix line(3, 2);
    line(0, 0) = 0.0; line(1, 0) = 1.0; line(2, 0) = 2.0;  // all on y = 0
    gt.centers = {line, line};
    const RigidityReport r = check_patch_rigidity(data, &gt);
    CHECK(r.verdict);  // counting condition unaffected
    REQUIRE(!r.warnings.empty());
    CHECK(r.warnings[0].find("degenerate") != std::string::npos);
  }
  SUBCASE("centers in general position produce no warning") {
    Matrix tri(3, 2);
    tri(0, 0) = 0.0; tri(0, 1) = 0.0;
    tri(1, 0) = 1.0; tri(1, 1) = 0.0;
    tri(2, 0) = 0.0; tri(2, 1) = 1.0;
    gt.centers = {tri, tri};
    const RigidityReport r = check_patch_rigidity(data, &gt);
    CHECK(r.verdict);
    CHECK(r.warnings.empty());
  }
}

TEST_CASE("point rigidity thresholds at d=2") {
  SUBCASE("five shared sensors create an edge, four do not") {
    std::vector<PointWithSensors> pair5 = {{0, sensors(1, 8)},
                                           {1, sensors(4, 11)}};
    // intersection {4..8} has size 5
    const RigidityReport with_edge = check_point_rigidity(pair5, 2);
    CHECK(with_edge.connected);
    CHECK(with_edge.components.size() == 1u);

    std::vector<PointWithSensors> pair4 = {{0, sensors(1, 8)},
                                           {1, sensors(5, 12)}};
    // intersection {5..8} has size 4
    const RigidityReport no_edge = check_point_rigidity(pair4, 2);
    CHECK(!no_edge.connected);
    CHECK(no_edge.components.size() == 2u);
  }
  SUBCASE("star of four leaves: hub satisfied, leaves deficient") {
    // Hub carries four disjoint 5-sensor groups; each leaf carries one group.
    std::vector<PointWithSensors> points;
    PointWithSensors hub{0, sensors(1, 20)};
    points.push_back(hub);
    for (int leaf = 0; leaf < 4; ++leaf)
      points.push_back({leaf + 1, sensors(5 * leaf + 1, 5 * leaf + 5)});
    const RigidityReport r = check_point_rigidity(points, 2);
    CHECK(r.connected);
    CHECK(r.deficits[0] == 0);  // four neighbors, needs three
    for (int leaf = 1; leaf <= 4; ++leaf) CHECK(r.deficits[leaf] == 2);
    CHECK(!r.verdict);
    CHECK(r.vertex_names[0] == "point 0");
  }
  SUBCASE("neighbor multiplicity does not substitute for neighbor count") {
    // Two points sharing many sensors still have one neighbor each.
    std::vector<PointWithSensors> points = {{0, sensors(1, 30)},
                                            {1, sensors(1, 30)}};
    const RigidityReport r = check_point_rigidity(points, 2);
    CHECK(r.connected);
    CHECK(r.deficits == std::vector<int>{2, 2});
    CHECK(!r.verdict);
  }
  SUBCASE("clique of four mutually overlapping points passes") {
    std::vector<PointWithSensors> points;
    for (int i = 0; i < 4; ++i) points.push_back({i, sensors(1, 5)});
    const RigidityReport r = check_point_rigidity(points, 2);
    CHECK(r.verdict);
  }
}

TEST_CASE("point modality selection") {
  SUBCASE("one shared subset covers everything as a single modality") {
    std::vector<PointWithSensors> points;
    for (int i = 0; i < 4; ++i) points.push_back({i, sensors(1, 5)});
    const PointModalitySelection sel = select_point_modalities(points, 2);
    REQUIRE(sel.modalities.size() == 1u);
    CHECK(sel.modalities[0].sensor_ids == sensors(1, 5));
    CHECK(sel.modalities[0].point_ids == std::vector<int>{0, 1, 2, 3});
    CHECK(sel.induced_patch_report.verdict);
  }
  SUBCASE("two subset types with shared carrier points") {
    // Type 1 carries both sensor groups, types 2 and 3 carry one each.
    std::vector<PointWithSensors> points;
    for (int i = 0; i < 3; ++i) points.push_back({i, sensors(1, 10)});
    for (int i = 3; i < 6; ++i) points.push_back({i, sensors(1, 5)});
    for (int i = 6; i < 9; ++i) points.push_back({i, sensors(6, 10)});
    const PointModalitySelection sel = select_point_modalities(points, 2);
    REQUIRE(sel.modalities.size() == 2u);
    CHECK(sel.modalities[0].sensor_ids == sensors(1, 5));
    CHECK(sel.modalities[1].sensor_ids == sensors(6, 10));
    // The type-1 points 0,1,2 belong to both modalities.
    for (int i = 0; i < 3; ++i) {
      for (const auto& m : sel.modalities) {
        CHECK(std::find(m.point_ids.begin(), m.point_ids.end(), i) !=
              m.point_ids.end());
      }
    }
    CHECK(sel.induced_patch_report.verdict);
    // Every point covered.
    std::vector<char> covered(9, 0);
    for (const auto& m : sel.modalities)
      for (const int p : m.point_ids) covered[p] = 1;
    CHECK(std::all_of(covered.begin(), covered.end(),
                      [](char c) { return c == 1; }));
  }
  SUBCASE("failing point rigidity precondition is rejected") {
    std::vector<PointWithSensors> points = {{0, sensors(1, 8)},
                                            {1, sensors(5, 12)}};
    CHECK_THROWS_AS(select_point_modalities(points, 2), std::invalid_argument);
  }
  SUBCASE("cover exists but cannot be made rigid") {
    // Two 4-cliques joined through a single bridge point. The induced patch
    // graph has one shared point per modality pair, far below the required
    // three connection points, and no further candidate subset helps.
    std::vector<PointWithSensors> points;
    for (int i = 0; i < 4; ++i) points.push_back({i, sensors(1, 5)});
    for (int i = 4; i < 8; ++i) points.push_back({i, sensors(6, 10)});
    points.push_back({8, sensors(1, 10)});
    try {
      select_point_modalities(points, 2);
      FAIL("expected CoverError");
    } catch (const CoverError& e) {
      CHECK(!e.uncoverable.empty());
      CHECK(std::string(e.what()).find("rigid") != std::string::npos);
    }
  }
}

TEST_CASE("rigidity report serialization carries every field") {
  const FusionDataset data =
      patch_skeleton(2, {2, 2}, {{0, 0, 0, 1}, {1, 1, 0, 1}});
  const std::string j = rigidity_report_to_json(check_patch_rigidity(data));
  for (const char* key : {"\"connected\"", "\"components\"", "\"deficits\"",
                          "\"vertex_names\"", "\"warnings\"", "\"verdict\""})
    CHECK(j.find(key) != std::string::npos);
  CHECK(j.find("\"verdict\": false") != std::string::npos);
}

TEST_CASE("points file loading") {
  const std::string path = "test_rigidity_points_tmp.json";
  {
    std::ofstream out(path);
    out << R"([{"point_id": 3, "sensor_ids": [1, 2, 5]},
               {"point_id": 7, "sensor_ids": []}])";
  }
  const auto points = load_points_file(path);
  REQUIRE(points.size() == 2u);
  CHECK(points[0].point_id == 3);
  CHECK(points[0].sensor_ids == std::vector<int>{1, 2, 5});
  CHECK(points[1].point_id == 7);
  CHECK(points[1].sensor_ids.empty());
  {
    std::ofstream out(path);
    out << R"({"not": "an array"})";
  }
  CHECK_THROWS_AS(load_points_file(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << R"([{"point_id": "three", "sensor_ids": []}])";
  }
  CHECK_THROWS_AS(load_points_file(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_points_file(path), std::runtime_error);
}
