#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sds {

enum class Measure { sds, nsds, ddis, sddis, bbs, dis, ssd, sad };

/// Feature distance used for nearest-neighbor search.
///   appearance_rank      ||dA||^2 + lambda ||dR||^2
///   appearance_location  ||dA||^2 + lambda ||dL||^2
///   appearance_only      ||dA||^2
enum class DistanceMode { appearance_rank, appearance_location, appearance_only };

/// How the template-side polar radius is scaled in the SDS denominator.
/// `area` multiplies by s = m/n; `linear` multiplies by sqrt(s).
enum class RadiusScaling { area, linear };

std::string_view to_string(Measure m);
std::string_view to_string(DistanceMode d);
std::string_view to_string(RadiusScaling r);
Measure parse_measure(std::string_view name);
DistanceMode parse_distance_mode(std::string_view name);
RadiusScaling parse_radius_scaling(std::string_view name);

/// True for the measures that sweep the whole scale grid (SDS, SDDIS).
bool is_multiscale(Measure m);

/// The per-measure default when MatchConfig::distance_mode is unset:
/// rank-augmented for the diversity family built on it, location-augmented
/// for BBS, appearance-only for DDIS.
DistanceMode default_distance_mode(Measure m);

struct MatchConfig {
  int patch_size = 2;
  double lambda = 1.0;
  int rank_radius = 3;
  int ann_k = 5;
  Measure measure = Measure::sds;
  std::optional<DistanceMode> distance_mode;
  double denom_guard = 1.0;
  RadiusScaling radius_scaling = RadiusScaling::area;
  // Worker threads for the matcher; never affects results.
  int jobs = 1;

  DistanceMode effective_distance_mode() const {
    return distance_mode.value_or(default_distance_mode(measure));
  }
  // Throws ParameterError on any violated invariant.
  void validate() const;
};

/// Candidate scale factors per axis plus the spatial stride in pixels.
struct ScaleGrid {
  std::vector<double> sx_values{1.0};
  std::vector<double> sy_values{1.0};
  int spatial_stride = 2;
  bool tied_axes = false;

  /// Inclusive arithmetic range; values are rounded to 1e-9 so 0.5 + k*0.1
  /// lands on the decimal grid.
  static ScaleGrid range(double min, double max, double step, int stride, bool tied = false);
  static ScaleGrid fixed(int stride);

  void validate() const;
};

std::vector<double> arange_inclusive(double min, double max, double step);

}  // namespace sds
