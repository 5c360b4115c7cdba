/// Seeded generators for every experiment: latent domains, modality
/// functions, burst sampling, calibration links. Pure functions of
/// (config, seed); identical inputs give bit-identical datasets.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gappy/model.hpp"
#include "gappy/rigidity.hpp"
#include "gappy/rng.hpp"

namespace gappy {

enum class BurstDistribution { kGaussian, kUniformBall };

BurstDistribution burst_distribution_from_name(const std::string& name);

/// M latent draws around `center`: isotropic Gaussian with per-coordinate
/// variance sigma^2, or a uniform ball with the radius chosen to match that
/// variance. Throws for M < 2 or sigma <= 0.
Matrix sample_burst(const std::vector<double>& center, double sigma, int m,
                    Rng& rng,
                    BurstDistribution dist = BurstDistribution::kGaussian);

/// Axis-aligned latent rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

struct RegionSpec {
  Rect rect;
  int count = 0;  // burst centers drawn uniformly from this rect
};

struct CalibRegionSpec {
  Rect rect;
  int count = 0;      // calibration pairs placed in this region
  int modality_a = 0; // indices into the modality list
  int modality_b = 1;
};

struct ScenarioConfig {
  std::string scenario_id = "same_domain";
  int intrinsic_dim = 2;
  int burst_size = 100;  // M
  double sigma = 0.1;
  BurstDistribution burst_distribution = BurstDistribution::kGaussian;
  std::vector<std::vector<RegionSpec>> modalities;  // rect unions per modality
  std::vector<CalibRegionSpec> calib_regions;
  std::uint64_t seed = 1;
};

/// Paper defaults for same_domain, overlap, patchy, french_flag.
ScenarioConfig default_scenario(const std::string& scenario_id);

/// f^1(x) = (x1, cos(2pi 0.3 x1) + x2); f^2 shifts the cosine phase by pi/2.
std::array<double, 2> cosine_modality_eval(const std::array<double, 2>& x,
                                           int which);

/// Two cosine modalities over configured rect-union domains; calibration
/// centers drawn from the configured intersection regions and observed by
/// both named modalities with independent burst noise. Patch labels record
/// each modality's path-connected rect components.
std::pair<FusionDataset, GroundTruth> make_synthetic_scenario(
    const ScenarioConfig& cfg);

struct WifiConfig {
  double floor_width = 400.0;
  double floor_height = 300.0;
  std::vector<std::array<double, 2>> transmitters;  // 12 positions
  double decay_length = 100.0;
  double threshold = 0.05;
  std::vector<std::array<int, 3>> triplets;  // 1-based transmitter indices
  int points_per_modality = 400;
  int burst_size = 100;
  double sigma = 5.0;  // floor-plan units
  int calib_per_pair = 3;
  BurstDistribution burst_distribution = BurstDistribution::kGaussian;
  std::uint64_t seed = 1;
};

/// 12-transmitter layout on a 400x300 floor whose five triplet domains are
/// non-empty and chain into a rigid patch graph.
WifiConfig default_wifi();

/// g_i(x) for all 12 transmitters: s_i = exp(-||x-mu_i||^2 / L^2) thresholded
/// to zero below cfg.threshold.
std::vector<double> wifi_signal_eval(const std::array<double, 2>& x,
                                     const WifiConfig& cfg);

/// Five 3-dimensional modalities, one per triplet; domain of a triplet is
/// where all three signals clear the threshold. Throws a configuration error
/// naming the triplet (empty domain) or the pair structure (rigidity fails).
std::pair<FusionDataset, GroundTruth> make_wifi_scenario(const WifiConfig& cfg);

struct WaveObserver {
  double dir_x = 1.0;
  double dir_y = 0.0;
  double half_length = 0.3;  // trajectory half-length in latent units
};

struct WaveConfig {
  std::vector<WaveObserver> observers;  // one per modality
  int samples_per_trajectory = 7;
  std::vector<std::vector<RegionSpec>> domains;  // latent (x, t) rect unions
  std::vector<CalibRegionSpec> calib_regions;
  int burst_size = 100;
  double sigma = 0.1;
  BurstDistribution burst_distribution = BurstDistribution::kGaussian;
  std::uint64_t seed = 1;
};

WaveConfig default_wave();

/// u(x,t) = cos(2 pi x / 140) * cos(2 pi t / 440).
double wave_eval(double x, double t);

/// n solution values along the straight space-time segment through (x, t)
/// with the observer's direction, equispaced offsets in [-L, L].
std::vector<double> wave_observe(double x, double t, const WaveObserver& obs,
                                 int n);

/// Three trajectory-observer modalities over irregular (x, t) domains.
std::pair<FusionDataset, GroundTruth> make_wave_scenario(const WaveConfig& cfg);

/// Appendix-style point case: two sensor subsets A and B; type-1 points see
/// both, types 2 and 3 see one each.
struct PointCaseConfig {
  int sensors_per_subset = 5;
  int type1_count = 6;
  int type2_count = 10;
  int type3_count = 10;
  std::uint64_t seed = 1;
};

std::vector<PointWithSensors> make_point_case(const PointCaseConfig& cfg);

void save_points_file(const std::string& path,
                      const std::vector<PointWithSensors>& points);

}  // namespace gappy
