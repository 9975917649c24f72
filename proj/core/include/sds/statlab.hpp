#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sds/config.hpp"
#include "sds/features.hpp"
#include "sds/measures.hpp"

namespace sds::statlab {

struct GaussianSpec {
  int dim = 1;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sigma = 1.0;   // 1D
  double sigma1 = 1.0;  // 2D, x axis before rotation
  double sigma2 = 1.0;  // 2D, y axis before rotation
  double theta = 0.0;   // 2D rotation in radians

  void validate() const;
};

/// 1D draws carry x only; 2D draws are axis-aligned N(mean, diag(s1^2, s2^2))
/// rotated by theta about the mean.
std::vector<Point2> sample_point_set(const GaussianSpec& spec, int count, std::uint64_t seed);
std::vector<Point2> sample_point_set(const GaussianSpec& spec, int count, std::mt19937_64& rng);

/// Deterministic per-stream generator: the same (seed, stream) pair always
/// yields the same sequence, independent of how cells are scheduled.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

/// Index-neighborhood rank: |{j : |i-j| <= r, v_i >= v_j}| / r^2.
std::vector<double> index_rank(const std::vector<double>& values, int r);

/// 1D points as single-value patches on an index line: appearance = value,
/// position = (i, 0), location = ((i+0.5)/n, 0.5).
PatchSet points_1d(const std::vector<double>& values, int rank_radius,
                   const std::vector<std::int32_t>& global_index = {});

/// 2D points: position = coordinates, appearance = radius about the set
/// centroid divided by `frame`, location = coordinates mapped into the unit
/// square by x / (2 frame) + 1/2. `frame` bounds every point norm and must be
/// shared by every set that is compared.
PatchSet points_2d(const std::vector<Point2>& coords, double frame, int rank_radius,
                   const std::vector<std::int32_t>& global_index = {});

/// Monte-Carlo tuning shared by all experiments.
struct StatConfig {
  MatchConfig match;  // lambda, rank radius, k, guard; measure set per run
  int trials = 200;
  std::uint64_t seed = 1;
  int jobs = 1;

  StatConfig();
};

/// Score of (T, Q) with host set `host` (Q's global indices point into it).
double point_measure(Measure m, const PatchSet& templ, const PatchSet& window, const PatchSet& host,
                     const StatConfig& cfg);

struct ExpectationMap {
  std::string measure;
  std::string axis1_name;
  std::string axis2_name;
  std::vector<double> axis1;  // rows
  std::vector<double> axis2;  // columns
  std::vector<double> mean;   // row-major
  std::vector<double> stderr_;
  int trials = 0;

  std::size_t index(std::size_t row, std::size_t col) const noexcept { return row * axis2.size() + col; }
  double at(std::size_t row, std::size_t col) const noexcept { return mean[index(row, col)]; }
  double se(std::size_t row, std::size_t col) const noexcept { return stderr_[index(row, col)]; }
  std::pair<std::size_t, std::size_t> argmax() const;
  std::pair<std::size_t, std::size_t> argmin_in_row(std::size_t row) const;
};

/// E[measure(T, Q)] with T ~ N(0,1), |T| = template_size, Q ~ N(mu, sigma),
/// |Q| = window_size, and the host set equal to Q.
ExpectationMap expectation_map_1d(Measure m, int template_size, int window_size,
                                  const std::vector<double>& mu_grid,
                                  const std::vector<double>& sigma_grid, const StatConfig& cfg);

struct ScaleEstimation {
  std::string measure;
  std::vector<double> gt_scales;
  std::vector<double> s_grid;
  std::vector<std::vector<double>> histogram;        // [gt][s], normalized frequencies
  std::vector<std::vector<double>> mean_score;       // [gt][s]
  std::vector<std::vector<double>> stderr_score;     // [gt][s]
  int trials = 0;

  double mode(std::size_t gt) const;
};

struct ScaleTrialOptions {
  int template_size = 100;
  int host_size = 200;
  double background_mu_max = 10.0;
  double background_sigma_max = 10.0;
  // Degenerate case: the background is a copy of T instead of a draw.
  bool background_from_template = false;
};

/// Scale estimation by similarity maximization. Per trial: T ~ N(0,1); the
/// object is T resampled (nearest neighbor) to gt*|T| points; the host is the
/// object followed by background points from N(mu_b, sigma_b), mu_b and
/// sigma_b uniform per trial; the window of scale s is the first s*|T| host
/// points, so object points are taken first. s_hat = argmax_s measure.
ScaleEstimation scale_estimation_trials(Measure m, const std::vector<double>& gt_scales,
                                        const std::vector<double>& s_grid, const StatConfig& cfg,
                                        const ScaleTrialOptions& options = {});

/// E[measure(T, rotate(Q, theta))] with T, Q ~ N(0, diag(1, sigma2^2)), host = Q.
ExpectationMap rotation_map_2d(Measure m, int set_size, const std::vector<double>& sigma2_grid,
                               const std::vector<double>& theta_grid, const StatConfig& cfg);

struct CellStats {
  double mean = 0.0;
  double stderr_ = 0.0;
};
CellStats mean_and_stderr(const std::vector<double>& samples);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// (max - min) / mean over one row.
double relative_variation(const ExpectationMap& map, std::size_t row);

void write_csv(const std::filesystem::path& path, const ExpectationMap& map);
void write_csv(const std::filesystem::path& path, const ScaleEstimation& est);
/// Min-max normalized grayscale rendering, one pixel per cell scaled by `zoom`.
void write_pgm(const std::filesystem::path& path, const ExpectationMap& map, int zoom = 8);

}  // namespace sds::statlab
