#include "sds/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sds/error.hpp"

namespace sds {

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::sds: return "sds";
    case Measure::nsds: return "nsds";
    case Measure::ddis: return "ddis";
    case Measure::sddis: return "sddis";
    case Measure::bbs: return "bbs";
    case Measure::dis: return "dis";
    case Measure::ssd: return "ssd";
    case Measure::sad: return "sad";
  }
  return "?";
}

std::string_view to_string(DistanceMode d) {
  switch (d) {
    case DistanceMode::appearance_rank: return "appearance_rank";
    case DistanceMode::appearance_location: return "appearance_location";
    case DistanceMode::appearance_only: return "appearance_only";
  }
  return "?";
}

std::string_view to_string(RadiusScaling r) {
  return r == RadiusScaling::area ? "area" : "linear";
}

Measure parse_measure(std::string_view name) {
  for (auto m : {Measure::sds, Measure::nsds, Measure::ddis, Measure::sddis, Measure::bbs,
                 Measure::dis, Measure::ssd, Measure::sad})
    if (to_string(m) == name) return m;
  throw ParameterError("unknown measure '" + std::string(name) + "'");
}

DistanceMode parse_distance_mode(std::string_view name) {
  for (auto d : {DistanceMode::appearance_rank, DistanceMode::appearance_location,
                 DistanceMode::appearance_only})
    if (to_string(d) == name) return d;
  throw ParameterError("unknown distance mode '" + std::string(name) + "'");
}

RadiusScaling parse_radius_scaling(std::string_view name) {
  if (name == "area") return RadiusScaling::area;
  if (name == "linear") return RadiusScaling::linear;
  throw ParameterError("unknown radius scaling '" + std::string(name) + "'");
}

bool is_multiscale(Measure m) { return m == Measure::sds || m == Measure::sddis; }

DistanceMode default_distance_mode(Measure m) {
  switch (m) {
    case Measure::bbs: return DistanceMode::appearance_location;
    case Measure::ddis:
    case Measure::sddis: return DistanceMode::appearance_only;
    default: return DistanceMode::appearance_rank;
  }
}

void MatchConfig::validate() const {
  if (patch_size < 1) throw ParameterError("patch_size must be >= 1");
  if (rank_radius < 1) throw ParameterError("rank_radius must be >= 1");
  if (ann_k < 1) throw ParameterError("ann_k must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
  if (!(denom_guard > 0.0) || !std::isfinite(denom_guard))
    throw ParameterError("denom_guard must be > 0");
  if (jobs < 1) throw ParameterError("jobs must be >= 1");
}

std::vector<double> arange_inclusive(double min, double max, double step) {
  if (!(step > 0.0)) throw ParameterError("step must be > 0");
  if (max < min) throw ParameterError("range must satisfy min <= max");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((max - min) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    const double v = min + static_cast<double>(i) * step;
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

ScaleGrid ScaleGrid::range(double min, double max, double step, int stride, bool tied) {
  if (!(min > 0.0)) throw ParameterError("scale range must satisfy 0 < min <= max");
  ScaleGrid g;
  g.sx_values = arange_inclusive(min, max, step);
  g.sy_values = g.sx_values;
  g.spatial_stride = stride;
  g.tied_axes = tied;
  g.validate();
  return g;
}

ScaleGrid ScaleGrid::fixed(int stride) {
  ScaleGrid g;
  g.spatial_stride = stride;
  return g;
}

void ScaleGrid::validate() const {
  auto check = [](const std::vector<double>& v, const char* axis) {
    if (v.empty()) throw ParameterError(std::string(axis) + " scale list is empty");
    for (double s : v)
      if (!(s > 0.0) || !std::isfinite(s))
        throw ParameterError(std::string(axis) + " scale factors must be > 0");
    if (!std::is_sorted(v.begin(), v.end()))
      throw ParameterError(std::string(axis) + " scale list must be ascending");
  };
  check(sx_values, "x");
  check(sy_values, "y");
  if (spatial_stride < 1) throw ParameterError("spatial stride must be >= 1");
  if (tied_axes && sx_values != sy_values)
    throw ParameterError("tied axes require identical x and y scale lists");
}

}  // namespace sds
