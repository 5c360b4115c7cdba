#include "gappy/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gappy {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("scenario configuration: " + msg);
}

}  // namespace

BurstDistribution burst_distribution_from_name(const std::string& name) {
  if (name == "gaussian") return BurstDistribution::kGaussian;
  if (name == "uniform_ball") return BurstDistribution::kUniformBall;
  throw std::invalid_argument("unknown burst distribution: " + name);
}

Matrix sample_burst(const std::vector<double>& center, double sigma, int m,
                    Rng& rng, BurstDistribution dist) {
  if (m < 2) throw std::invalid_argument("sample_burst: M must be >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("sample_burst: sigma must be > 0");
  const std::size_t d = center.size();
  Matrix out(static_cast<std::size_t>(m), d);
  if (dist == BurstDistribution::kGaussian) {
    for (int s = 0; s < m; ++s)
      for (std::size_t j = 0; j < d; ++j)
        out(s, j) = center[j] + sigma * rng.normal();
    return out;
  }
  // Uniform ball with per-coordinate variance sigma^2: E[x_j^2] = R^2/(d+2)
  // for radius R, so R = sigma * sqrt(d+2).
  const double radius = sigma * std::sqrt(static_cast<double>(d) + 2.0);
  std::vector<double> dir(d);
  for (int s = 0; s < m; ++s) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        dir[j] = rng.normal();
        norm2 += dir[j] * dir[j];
      }
    } while (norm2 == 0.0);
    const double r =
        radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double scale = r / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j)
      out(s, j) = center[j] + scale * dir[j];
  }
  return out;
}

std::array<double, 2> cosine_modality_eval(const std::array<double, 2>& x,
                                           int which) {
  const double phase = which == 1 ? 0.0 : kPi / 2.0;
  return {x[0], std::cos(phase + 2.0 * kPi * 0.3 * x[0]) + x[1]};
}

ScenarioConfig default_scenario(const std::string& scenario_id) {
  ScenarioConfig cfg;
  cfg.scenario_id = scenario_id;
  const Rect unit{0.0, kPi, 0.0, kPi};
  if (scenario_id == "same_domain") {
    cfg.modalities = {{{unit, 500}}, {{unit, 500}}};
    cfg.calib_regions = {{unit, 3, 0, 1}};
  } else if (scenario_id == "overlap") {
    const Rect right{kPi / 2.0, 3.0 * kPi / 2.0, 0.0, kPi};
    cfg.modalities = {{{unit, 500}}, {{right, 500}}};
    cfg.calib_regions = {{{kPi / 2.0, kPi, 0.0, kPi}, 3, 0, 1}};
  } else if (scenario_id == "patchy") {
    const Rect island{2.0 * kPi, 3.0 * kPi, 0.0, kPi};
    const Rect bridge{kPi / 2.0, 5.0 * kPi / 2.0, 0.0, kPi};
    cfg.modalities = {{{unit, 500}, {island, 500}}, {{bridge, 500}}};
    cfg.calib_regions = {
        {{kPi / 2.0, kPi, 0.0, kPi}, 3, 0, 1},
        {{2.0 * kPi, 5.0 * kPi / 2.0, 0.0, kPi}, 3, 0, 1},
    };
  } else if (scenario_id == "french_flag") {
    const Rect island{2.0 * kPi, 3.0 * kPi, 0.0, kPi};
    const Rect middle{3.0 * kPi / 4.0, 9.0 * kPi / 4.0, 0.0, kPi};
    cfg.modalities = {{{unit, 500}, {island, 500}}, {{middle, 500}}};
    cfg.calib_regions = {
        {{3.0 * kPi / 4.0, kPi, 0.0, kPi}, 3, 0, 1},
        {{2.0 * kPi, 9.0 * kPi / 4.0, 0.0, kPi}, 3, 0, 1},
    };
  } else {
    config_error("unknown synthetic scenario id: " + scenario_id);
  }
  return cfg;
}

namespace {

void validate_rect(const Rect& r, const std::string& where) {
  if (!(r.x1 > r.x0) || !(r.y1 > r.y0))
    config_error(where + ": rectangle is empty (need x1 > x0 and y1 > y0)");
}

bool rects_touch(const Rect& a, const Rect& b) {
  return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

bool union_contains(const std::vector<RegionSpec>& regions, double x, double y) {
  for (const RegionSpec& r : regions)
    if (r.rect.contains(x, y)) return true;
  return false;
}

/// Path-connected component label per rect, by ascending component discovery.
std::vector<int> rect_components(const std::vector<RegionSpec>& regions) {
  const std::size_t n = regions.size();
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    // Flood from rect i over the touching relation.
    std::vector<std::size_t> stack{i};
    label[i] = next;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < n; ++w)
        if (label[w] < 0 && rects_touch(regions[v].rect, regions[w].rect)) {
          label[w] = next;
          stack.push_back(w);
        }
    }
    ++next;
  }
  return label;
}

void check_region_inside(const Rect& region,
                         const std::vector<RegionSpec>& domain,
                         const std::string& where) {
  // Probe corners, edge midpoints, and center. Exact containment in a rect
  // union is overkill for axis-aligned configs; nine probes catch every
  // realistic misconfiguration and generation re-checks each sampled center.
  const double xs[3] = {region.x0, 0.5 * (region.x0 + region.x1), region.x1};
  const double ys[3] = {region.y0, 0.5 * (region.y0 + region.y1), region.y1};
  for (const double x : xs)
    for (const double y : ys)
      if (!union_contains(domain, x, y))
        config_error(where + ": region is not inside the modality domain");
}

std::vector<double> uniform_in_rect(const Rect& r, Rng& rng) {
  return {rng.uniform(r.x0, r.x1), rng.uniform(r.y0, r.y1)};
}

}  // namespace

std::pair<FusionDataset, GroundTruth> make_synthetic_scenario(
    const ScenarioConfig& cfg) {
  if (cfg.intrinsic_dim != 2)
    config_error("synthetic scenarios are defined for intrinsic_dim = 2");
  if (cfg.burst_size < 2) config_error("burst_size must be >= 2");
  if (!(cfg.sigma > 0.0)) config_error("sigma must be > 0");
  if (cfg.modalities.empty()) config_error("no modalities configured");

  const std::size_t K = cfg.modalities.size();
  for (std::size_t k = 0; k < K; ++k) {
    if (cfg.modalities[k].empty())
      config_error("modality " + std::to_string(k + 1) + " has no regions");
    for (std::size_t r = 0; r < cfg.modalities[k].size(); ++r) {
      const std::string where = "modality " + std::to_string(k + 1) +
                                " region " + std::to_string(r + 1);
      validate_rect(cfg.modalities[k][r].rect, where);
      if (cfg.modalities[k][r].count < 1)
        config_error(where + ": count must be >= 1");
    }
  }
  for (std::size_t c = 0; c < cfg.calib_regions.size(); ++c) {
    const CalibRegionSpec& spec = cfg.calib_regions[c];
    const std::string where = "calibration region " + std::to_string(c + 1);
    validate_rect(spec.rect, where);
    if (spec.count < 1) config_error(where + ": count must be >= 1");
    if (spec.modality_a < 0 || spec.modality_b < 0 ||
        spec.modality_a >= static_cast<int>(K) ||
        spec.modality_b >= static_cast<int>(K) ||
        spec.modality_a == spec.modality_b)
      config_error(where + ": invalid modality pair");
    check_region_inside(spec.rect, cfg.modalities[spec.modality_a], where);
    check_region_inside(spec.rect, cfg.modalities[spec.modality_b], where);
  }

  FusionDataset data;
  data.intrinsic_dim = 2;
  GroundTruth gt;
  gt.intrinsic_dim = 2;
  gt.scenario = cfg.scenario_id;

  std::vector<std::vector<int>> comp_labels(K);
  std::vector<std::vector<std::vector<double>>> centers(K);
  for (std::size_t k = 0; k < K; ++k) {
    ModalityData m;
    m.modality_id = static_cast<int>(k) + 1;
    m.ambient_dim = 2;
    m.sigma = cfg.sigma;
    data.modalities.push_back(std::move(m));
    gt.modality_ids.push_back(static_cast<int>(k) + 1);
    comp_labels[k] = rect_components(cfg.modalities[k]);
  }

  Rng rng(derive_seed(cfg.seed, 0xd47a5e7ull));
  const auto observe = [&](std::size_t k, const Matrix& latent) {
    Matrix obs(latent.rows(), 2);
    const int which = 1 + static_cast<int>(k % 2);
    for (std::size_t s = 0; s < latent.rows(); ++s) {
      const auto y =
          cosine_modality_eval({latent(s, 0), latent(s, 1)}, which);
      obs(s, 0) = y[0];
      obs(s, 1) = y[1];
    }
    return obs;
  };
  const auto add_burst = [&](std::size_t k, const std::vector<double>& center,
                             int patch_label) {
    ModalityData& m = data.modalities[k];
    Burst b;
    b.burst_id = static_cast<int>(m.bursts.size());
    const Matrix latent =
        sample_burst(center, cfg.sigma, cfg.burst_size, rng,
                     cfg.burst_distribution);
    b.samples = observe(k, latent);
    m.bursts.push_back(std::move(b));
    m.patch_labels.push_back(patch_label);
    centers[k].push_back(center);
    return static_cast<int>(m.bursts.size()) - 1;
  };
  const auto label_of = [&](std::size_t k, const std::vector<double>& c) {
    for (std::size_t r = 0; r < cfg.modalities[k].size(); ++r)
      if (cfg.modalities[k][r].rect.contains(c[0], c[1]))
        return comp_labels[k][r];
    return -1;
  };

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t r = 0; r < cfg.modalities[k].size(); ++r)
      for (int i = 0; i < cfg.modalities[k][r].count; ++i)
        add_burst(k, uniform_in_rect(cfg.modalities[k][r].rect, rng),
                  comp_labels[k][r]);

  for (std::size_t c = 0; c < cfg.calib_regions.size(); ++c) {
    const CalibRegionSpec& spec = cfg.calib_regions[c];
    for (int i = 0; i < spec.count; ++i) {
      const std::vector<double> center = uniform_in_rect(spec.rect, rng);
      const int la = label_of(spec.modality_a, center);
      const int lb = label_of(spec.modality_b, center);
      if (la < 0 || lb < 0)
        config_error("calibration region " + std::to_string(c + 1) +
                     ": sampled center escapes a modality domain");
      const int bi = add_burst(spec.modality_a, center, la);
      const int bj = add_burst(spec.modality_b, center, lb);
      data.calibration.push_back({bi, bj, spec.modality_a, spec.modality_b});
    }
  }

  // Single-patch modalities do not need labels.
  for (std::size_t k = 0; k < K; ++k) {
    const auto& labels = data.modalities[k].patch_labels;
    if (std::all_of(labels.begin(), labels.end(),
                    [](int l) { return l == 0; }))
      data.modalities[k].patch_labels.clear();
  }

  for (std::size_t k = 0; k < K; ++k) {
    Matrix m(centers[k].size(), 2);
    for (std::size_t i = 0; i < centers[k].size(); ++i) {
      m(i, 0) = centers[k][i][0];
      m(i, 1) = centers[k][i][1];
    }
    gt.centers.push_back(std::move(m));
  }
  return {std::move(data), std::move(gt)};
}

WifiConfig default_wifi() {
  WifiConfig cfg;
  cfg.transmitters = {
      {20.0, 40.0},   {20.0, 200.0},  {360.0, 40.0},  {370.0, 220.0},
      {395.0, 60.0},  {110.0, 150.0}, {200.0, 160.0}, {290.0, 120.0},
      {380.0, 160.0}, {320.0, 40.0},  {150.0, 40.0},  {260.0, 280.0},
  };
  cfg.triplets = {{1, 2, 6}, {5, 9, 10}, {6, 7, 11}, {3, 4, 8}, {7, 8, 12}};
  return cfg;
}

std::vector<double> wifi_signal_eval(const std::array<double, 2>& x,
                                     const WifiConfig& cfg) {
  std::vector<double> g(cfg.transmitters.size(), 0.0);
  const double inv_l2 = 1.0 / (cfg.decay_length * cfg.decay_length);
  for (std::size_t i = 0; i < cfg.transmitters.size(); ++i) {
    const double dx = x[0] - cfg.transmitters[i][0];
    const double dy = x[1] - cfg.transmitters[i][1];
    const double s = std::exp(-(dx * dx + dy * dy) * inv_l2);
    g[i] = s >= cfg.threshold ? s : 0.0;
  }
  return g;
}

namespace {

std::string triplet_name(const std::array<int, 3>& t) {
  return "(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
         std::to_string(t[2]) + ")";
}

}  // namespace

std::pair<FusionDataset, GroundTruth> make_wifi_scenario(const WifiConfig& cfg) {
  if (cfg.transmitters.size() != 12)
    config_error("wifi: expected 12 transmitters, got " +
                 std::to_string(cfg.transmitters.size()));
  if (cfg.triplets.empty()) config_error("wifi: no triplets configured");
  for (const auto& t : cfg.triplets) {
    if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2])
      config_error("wifi: triplet " + triplet_name(t) +
                   " must name 3 distinct transmitters");
    for (const int id : t)
      if (id < 1 || id > 12)
        config_error("wifi: triplet " + triplet_name(t) +
                     " has transmitter index out of [1,12]");
  }
  if (cfg.burst_size < 2) config_error("wifi: burst_size must be >= 2");
  if (!(cfg.sigma > 0.0)) config_error("wifi: sigma must be > 0");
  if (cfg.points_per_modality < 1)
    config_error("wifi: points_per_modality must be >= 1");

  const std::size_t K = cfg.triplets.size();
  // Domain membership works on raw (unthresholded) signal strength so the
  // boundary is exactly s_i = threshold.
  const auto in_domain = [&](std::size_t k, double x, double y) {
    const double inv_l2 = 1.0 / (cfg.decay_length * cfg.decay_length);
    for (const int id : cfg.triplets[k]) {
      const auto& mu = cfg.transmitters[id - 1];
      const double dx = x - mu[0], dy = y - mu[1];
      if (std::exp(-(dx * dx + dy * dy) * inv_l2) < cfg.threshold)
        return false;
    }
    return true;
  };

  Rng rng(derive_seed(cfg.seed, 0x31f1ull));
  const auto draw_in_domain = [&](std::size_t k, int attempts,
                                  std::vector<double>& out) {
    for (int a = 0; a < attempts; ++a) {
      const double x = rng.uniform(0.0, cfg.floor_width);
      const double y = rng.uniform(0.0, cfg.floor_height);
      if (in_domain(k, x, y)) {
        out = {x, y};
        return true;
      }
    }
    return false;
  };
  const auto draw_in_pair = [&](std::size_t a, std::size_t b, int attempts,
                                std::vector<double>& out) {
    for (int t = 0; t < attempts; ++t) {
      const double x = rng.uniform(0.0, cfg.floor_width);
      const double y = rng.uniform(0.0, cfg.floor_height);
      if (in_domain(a, x, y) && in_domain(b, x, y)) {
        out = {x, y};
        return true;
      }
    }
    return false;
  };

  FusionDataset data;
  data.intrinsic_dim = 2;
  GroundTruth gt;
  gt.intrinsic_dim = 2;
  gt.scenario = "wifi";
  std::vector<std::vector<std::vector<double>>> centers(K);
  for (std::size_t k = 0; k < K; ++k) {
    ModalityData m;
    m.modality_id = static_cast<int>(k) + 1;
    m.ambient_dim = 3;
    m.sigma = cfg.sigma;
    data.modalities.push_back(std::move(m));
    gt.modality_ids.push_back(static_cast<int>(k) + 1);
  }

  const auto add_burst = [&](std::size_t k, const std::vector<double>& center) {
    ModalityData& m = data.modalities[k];
    Burst b;
    b.burst_id = static_cast<int>(m.bursts.size());
    const Matrix latent = sample_burst(center, cfg.sigma, cfg.burst_size, rng,
                                       cfg.burst_distribution);
    b.samples = Matrix(latent.rows(), 3);
    for (std::size_t s = 0; s < latent.rows(); ++s) {
      const std::vector<double> g =
          wifi_signal_eval({latent(s, 0), latent(s, 1)}, cfg);
      for (int c = 0; c < 3; ++c)
        b.samples(s, c) = g[cfg.triplets[k][c] - 1];
    }
    m.bursts.push_back(std::move(b));
    centers[k].push_back(center);
    return static_cast<int>(m.bursts.size()) - 1;
  };

  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> center;
    for (int i = 0; i < cfg.points_per_modality; ++i) {
      if (!draw_in_domain(k, 20000, center))
        config_error("wifi: triplet " + triplet_name(cfg.triplets[k]) +
                     " domain appears empty (rejection budget exhausted)");
      add_burst(k, center);
    }
  }

  // Calibration: every pair of triplets with a discoverable domain overlap
  // contributes calib_per_pair linked burst pairs.
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = a + 1; b < K; ++b) {
      std::vector<double> probe;
      if (!draw_in_pair(a, b, 4000, probe)) continue;
      for (int i = 0; i < cfg.calib_per_pair; ++i) {
        std::vector<double> center;
        if (!draw_in_pair(a, b, 20000, center))
          config_error("wifi: intersection of triplets " +
                       triplet_name(cfg.triplets[a]) + " and " +
                       triplet_name(cfg.triplets[b]) +
                       " vanished during calibration sampling");
        const int bi = add_burst(a, center);
        const int bj = add_burst(b, center);
        data.calibration.push_back(
            {bi, bj, static_cast<int>(a), static_cast<int>(b)});
      }
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    Matrix m(centers[k].size(), 2);
    for (std::size_t i = 0; i < centers[k].size(); ++i) {
      m(i, 0) = centers[k][i][0];
      m(i, 1) = centers[k][i][1];
    }
    gt.centers.push_back(std::move(m));
  }

  const RigidityReport report = check_patch_rigidity(data, &gt);
  if (!report.verdict) {
    std::ostringstream msg;
    msg << "wifi configuration: patch graph fails rigidity;";
    if (!report.connected) {
      msg << " components:";
      for (const auto& comp : report.components) {
        msg << " {";
        for (std::size_t i = 0; i < comp.size(); ++i)
          msg << (i ? "," : "") << "triplet "
              << triplet_name(cfg.triplets[comp[i]]);
        msg << "}";
      }
    }
    for (std::size_t v = 0; v < report.deficits.size(); ++v)
      if (report.deficits[v] > 0)
        msg << " triplet " << triplet_name(cfg.triplets[v])
            << " lacks " << report.deficits[v] << " connection point(s);";
    config_error(msg.str());
  }
  return {std::move(data), std::move(gt)};
}

WaveConfig default_wave() {
  WaveConfig cfg;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  cfg.observers = {
      {1.0, 0.0, 0.3}, {0.0, 1.0, 0.3}, {inv_sqrt2, inv_sqrt2, 0.3}};
  cfg.domains = {
      {{{0.0, 2.6, 1.0, 1.4}, 250}, {{4.6, 6.28, 1.0, 1.4}, 250}},
      {{{2.2, 4.2, 1.0, 1.25}, 400}},
      {{{3.6, 5.0, 1.15, 1.4}, 400}},
  };
  cfg.calib_regions = {
      {{2.2, 2.6, 1.0, 1.25}, 3, 0, 1},
      {{3.6, 4.2, 1.15, 1.25}, 3, 1, 2},
      {{4.6, 5.0, 1.15, 1.4}, 3, 2, 0},
  };
  return cfg;
}

double wave_eval(double x, double t) {
  return std::cos(2.0 * kPi * x / 140.0) * std::cos(2.0 * kPi * t / 440.0);
}

std::vector<double> wave_observe(double x, double t, const WaveObserver& obs,
                                 int n) {
  if (n < 1) throw std::invalid_argument("wave_observe: n must be >= 1");
  const double norm = std::sqrt(obs.dir_x * obs.dir_x + obs.dir_y * obs.dir_y);
  if (!(norm > 0.0))
    throw std::invalid_argument("wave_observe: zero direction vector");
  const double vx = obs.dir_x / norm, vy = obs.dir_y / norm;
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) {
    const double delta =
        n == 1 ? 0.0
               : -obs.half_length + 2.0 * obs.half_length * i /
                     static_cast<double>(n - 1);
    values[i] = wave_eval(x + delta * vx, t + delta * vy);
  }
  return values;
}

std::pair<FusionDataset, GroundTruth> make_wave_scenario(const WaveConfig& cfg) {
  const int d = 2;
  if (cfg.samples_per_trajectory < 2 * d + 1)
    config_error("wave: samples_per_trajectory must be >= " +
                 std::to_string(2 * d + 1) +
                 " (ambient dimension must reach 2d+1)");
  if (cfg.observers.size() != cfg.domains.size() || cfg.observers.empty())
    config_error("wave: need one observer per domain");
  if (cfg.burst_size < 2) config_error("wave: burst_size must be >= 2");
  if (!(cfg.sigma > 0.0)) config_error("wave: sigma must be > 0");

  const std::size_t K = cfg.domains.size();
  const int n = cfg.samples_per_trajectory;
  for (std::size_t k = 0; k < K; ++k) {
    if (cfg.domains[k].empty())
      config_error("wave: modality " + std::to_string(k + 1) + " has no regions");
    for (std::size_t r = 0; r < cfg.domains[k].size(); ++r)
      validate_rect(cfg.domains[k][r].rect, "wave modality " +
                                                std::to_string(k + 1) +
                                                " region " +
                                                std::to_string(r + 1));
  }
  for (std::size_t c = 0; c < cfg.calib_regions.size(); ++c) {
    const CalibRegionSpec& spec = cfg.calib_regions[c];
    const std::string where = "wave calibration region " + std::to_string(c + 1);
    validate_rect(spec.rect, where);
    if (spec.modality_a < 0 || spec.modality_b < 0 ||
        spec.modality_a >= static_cast<int>(K) ||
        spec.modality_b >= static_cast<int>(K) ||
        spec.modality_a == spec.modality_b)
      config_error(where + ": invalid modality pair");
    check_region_inside(spec.rect, cfg.domains[spec.modality_a], where);
    check_region_inside(spec.rect, cfg.domains[spec.modality_b], where);
  }

  FusionDataset data;
  data.intrinsic_dim = d;
  GroundTruth gt;
  gt.intrinsic_dim = d;
  gt.scenario = "wave";
  std::vector<std::vector<int>> comp_labels(K);
  std::vector<std::vector<std::vector<double>>> centers(K);
  for (std::size_t k = 0; k < K; ++k) {
    ModalityData m;
    m.modality_id = static_cast<int>(k) + 1;
    m.ambient_dim = n;
    m.sigma = cfg.sigma;
    data.modalities.push_back(std::move(m));
    gt.modality_ids.push_back(static_cast<int>(k) + 1);
    comp_labels[k] = rect_components(cfg.domains[k]);
  }

  Rng rng(derive_seed(cfg.seed, 0x7a3eull));
  const auto add_burst = [&](std::size_t k, const std::vector<double>& center,
                             int patch_label) {
    ModalityData& m = data.modalities[k];
    Burst b;
    b.burst_id = static_cast<int>(m.bursts.size());
    const Matrix latent = sample_burst(center, cfg.sigma, cfg.burst_size, rng,
                                       cfg.burst_distribution);
    b.samples = Matrix(latent.rows(), static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < latent.rows(); ++s) {
      const std::vector<double> v =
          wave_observe(latent(s, 0), latent(s, 1), cfg.observers[k], n);
      for (int c = 0; c < n; ++c) b.samples(s, c) = v[c];
    }
    m.bursts.push_back(std::move(b));
    m.patch_labels.push_back(patch_label);
    centers[k].push_back(center);
    return static_cast<int>(m.bursts.size()) - 1;
  };
  const auto label_of = [&](std::size_t k, const std::vector<double>& c) {
    for (std::size_t r = 0; r < cfg.domains[k].size(); ++r)
      if (cfg.domains[k][r].rect.contains(c[0], c[1]))
        return comp_labels[k][r];
    return -1;
  };

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t r = 0; r < cfg.domains[k].size(); ++r)
      for (int i = 0; i < cfg.domains[k][r].count; ++i)
        add_burst(k, uniform_in_rect(cfg.domains[k][r].rect, rng),
                  comp_labels[k][r]);

  for (std::size_t c = 0; c < cfg.calib_regions.size(); ++c) {
    const CalibRegionSpec& spec = cfg.calib_regions[c];
    for (int i = 0; i < spec.count; ++i) {
      const std::vector<double> center = uniform_in_rect(spec.rect, rng);
      const int la = label_of(spec.modality_a, center);
      const int lb = label_of(spec.modality_b, center);
      if (la < 0 || lb < 0)
        config_error("wave calibration region " + std::to_string(c + 1) +
                     ": sampled center escapes a modality domain");
      const int bi = add_burst(spec.modality_a, center, la);
      const int bj = add_burst(spec.modality_b, center, lb);
      data.calibration.push_back({bi, bj, spec.modality_a, spec.modality_b});
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    const auto& labels = data.modalities[k].patch_labels;
    if (std::all_of(labels.begin(), labels.end(),
                    [](int l) { return l == 0; }))
      data.modalities[k].patch_labels.clear();
  }
  for (std::size_t k = 0; k < K; ++k) {
    Matrix m(centers[k].size(), 2);
    for (std::size_t i = 0; i < centers[k].size(); ++i) {
      m(i, 0) = centers[k][i][0];
      m(i, 1) = centers[k][i][1];
    }
    gt.centers.push_back(std::move(m));
  }
  return {std::move(data), std::move(gt)};
}

std::vector<PointWithSensors> make_point_case(const PointCaseConfig& cfg) {
  if (cfg.sensors_per_subset < 1)
    config_error("point case: sensors_per_subset must be >= 1");
  if (cfg.type1_count < 1 || cfg.type2_count < 0 || cfg.type3_count < 0)
    config_error("point case: need at least one type-1 point");
  const int s = cfg.sensors_per_subset;
  std::vector<int> subset_a(s), subset_b(s);
  std::iota(subset_a.begin(), subset_a.end(), 1);
  std::iota(subset_b.begin(), subset_b.end(), s + 1);
  std::vector<int> both = subset_a;
  both.insert(both.end(), subset_b.begin(), subset_b.end());

  std::vector<PointWithSensors> points;
  int next_id = 1;
  for (int i = 0; i < cfg.type1_count; ++i)
    points.push_back({next_id++, both});
  for (int i = 0; i < cfg.type2_count; ++i)
    points.push_back({next_id++, subset_a});
  for (int i = 0; i < cfg.type3_count; ++i)
    points.push_back({next_id++, subset_b});
  return points;
}

void save_points_file(const std::string& path,
                      const std::vector<PointWithSensors>& points) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : points)
    j.push_back({{"point_id", p.point_id}, {"sensor_ids", p.sensor_ids}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(1);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gappy
