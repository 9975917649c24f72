#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sds/config.hpp"
#include "sds/image.hpp"
#include "sds/window.hpp"

namespace sds {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Dense per-pixel scalar field. Unlike Image it is not confined to [0,1]:
/// rank values reach |circle| / r^2.
struct RankMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const noexcept {
    return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  friend bool operator==(const RankMap&, const RankMap&) = default;
};

/// Per-pixel appearance rank over a discrete circle of radius r:
///   R(p) = |{q in circle(p, r) : I(p) >= I(q)}| / r^2
/// The circle is clipped to the image and includes p itself, and the divisor
/// stays r^2 at the borders.
RankMap rank_map(const Image& intensity, int r);

RankMap rotate90(const RankMap& map);

/// Offsets (dx, dy) with dx^2 + dy^2 <= r^2, row-major.
std::vector<std::pair<int, int>> circle_offsets(int r);

/// Non-owning view of one patch's features.
struct PatchRef {
  std::span<const double> appearance;
  std::span<const double> rank;
  Point2 location;
};

/// Raw columns for a patch set; PatchSet validates them on construction.
struct PatchSetData {
  int grid_w = 0;
  int grid_h = 0;
  int patch_size = 1;
  int channels = 1;
  int appearance_dim = 0;
  int rank_dim = 0;
  std::vector<double> appearance;           // size() * appearance_dim
  std::vector<double> rank;                 // size() * rank_dim
  std::vector<Point2> location;             // normalized to [0,1]
  std::vector<Point2> position;             // geometric position for polar radius
  std::vector<std::int32_t> global_index;   // index into the host (target) set
  std::vector<std::int32_t> grid_x;
  std::vector<std::int32_t> grid_y;
  Point2 extent{0.0, 0.0};                  // frame size in position units
};

/// Features of a set of non-overlapping patches (T, a candidate window Q, or
/// the full target image). Patches are stored in row-major grid order.
class PatchSet {
 public:
  PatchSet() = default;
  explicit PatchSet(PatchSetData data);

  std::size_t size() const noexcept { return d_.location.size(); }
  bool empty() const noexcept { return size() == 0; }
  int grid_w() const noexcept { return d_.grid_w; }
  int grid_h() const noexcept { return d_.grid_h; }
  int patch_size() const noexcept { return d_.patch_size; }
  int channels() const noexcept { return d_.channels; }
  int appearance_dim() const noexcept { return d_.appearance_dim; }
  int rank_dim() const noexcept { return d_.rank_dim; }
  Point2 extent() const noexcept { return d_.extent; }

  std::span<const double> appearance(std::size_t i) const noexcept {
    return {d_.appearance.data() + i * static_cast<std::size_t>(d_.appearance_dim),
            static_cast<std::size_t>(d_.appearance_dim)};
  }
  std::span<const double> rank(std::size_t i) const noexcept {
    return {d_.rank.data() + i * static_cast<std::size_t>(d_.rank_dim),
            static_cast<std::size_t>(d_.rank_dim)};
  }
  Point2 location(std::size_t i) const noexcept { return d_.location[i]; }
  Point2 position(std::size_t i) const noexcept { return d_.position[i]; }
  std::int32_t global_index(std::size_t i) const noexcept { return d_.global_index[i]; }
  std::int32_t grid_x(std::size_t i) const noexcept { return d_.grid_x[i]; }
  std::int32_t grid_y(std::size_t i) const noexcept { return d_.grid_y[i]; }
  PatchRef patch(std::size_t i) const noexcept { return {appearance(i), rank(i), location(i)}; }

  /// Centroid of the patch positions; the pole for polar radii.
  Point2 centroid() const noexcept { return centroid_; }

  const PatchSetData& data() const noexcept { return d_; }

 private:
  PatchSetData d_;
  Point2 centroid_;
};

/// Splits `img` into a floor(W/p) x floor(H/p) grid of non-overlapping
/// patches. Appearance is the patch's pixels (row-major, channels
/// interleaved); rank is the p^2 rank-map values of the same pixels.
PatchSet patchify(const Image& img, int p, int r);

/// Patches of `host` covered by `win`, re-expressed in window coordinates:
/// locations are renormalized to the window and positions become local grid
/// coordinates. Global indices are preserved.
PatchSet subgrid(const PatchSet& host, const GridWindow& win);

/// Converts a pixel window onto the patch grid; AlignmentError unless every
/// edge sits on a patch boundary.
GridWindow to_grid(const Window& win, int p);
Window to_pixels(const GridWindow& win, int p);

// Canonical weighted squared distance ||pa-pb||^2 + lambda ||aa-ab||^2. Every
// search path in the library evaluates distances through this function so
// that indexed and exhaustive searches agree bit for bit.
inline double weighted_sq_distance(std::span<const double> pa, std::span<const double> pb,
                                   std::span<const double> aa, std::span<const double> ab,
                                   double lambda) noexcept {
  double primary = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    primary += d * d;
  }
  double aux = 0.0;
  for (std::size_t i = 0; i < aa.size(); ++i) {
    const double d = aa[i] - ab[i];
    aux += d * d;
  }
  return primary + lambda * aux;
}

double distance_al(const PatchRef& a, const PatchRef& b, double lambda);
double distance_ar(const PatchRef& a, const PatchRef& b, double lambda);
double distance_a(const PatchRef& a, const PatchRef& b);
double distance(DistanceMode mode, const PatchRef& a, const PatchRef& b, double lambda);

}  // namespace sds
