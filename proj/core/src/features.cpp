#include "sds/features.hpp"

#include <cmath>
#include <sstream>

#include "sds/error.hpp"

namespace sds {

std::vector<std::pair<int, int>> circle_offsets(int r) {
  std::vector<std::pair<int, int>> out;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) out.emplace_back(dx, dy);
  return out;
}

RankMap rank_map(const Image& intensity, int r) {
  if (intensity.channels() != 1) throw TypeError("rank_map expects a 1-channel image");
  if (r < 1) throw ParameterError("rank radius must be >= 1");
  const auto offsets = circle_offsets(r);
  const double norm = static_cast<double>(r) * static_cast<double>(r);
  const int w = intensity.width();
  const int h = intensity.height();
  RankMap out{w, h, std::vector<double>(intensity.pixel_count())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double center = intensity.at(x, y);
      int count = 0;
      for (const auto& [dx, dy] : offsets) {
        const int qx = x + dx;
        const int qy = y + dy;
        if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
        if (center >= intensity.at(qx, qy)) ++count;
      }
      out.values[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(x)] = count / norm;
    }
  }
  return out;
}

RankMap rotate90(const RankMap& map) {
  RankMap out{map.height, map.width, std::vector<double>(map.values.size())};
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.values[static_cast<std::size_t>(y) * static_cast<std::size_t>(out.width) +
                 static_cast<std::size_t>(x)] = map.at(y, map.height - 1 - x);
  return out;
}

PatchSet::PatchSet(PatchSetData data) : d_(std::move(data)) {
  const std::size_t n = d_.location.size();
  if (d_.appearance_dim < 1) throw TypeError("patch appearance dimension must be >= 1");
  if (d_.rank_dim < 0) throw TypeError("patch rank dimension must be >= 0");
  if (d_.appearance.size() != n * static_cast<std::size_t>(d_.appearance_dim) ||
      d_.rank.size() != n * static_cast<std::size_t>(d_.rank_dim) || d_.position.size() != n ||
      d_.global_index.size() != n || d_.grid_x.size() != n || d_.grid_y.size() != n)
    throw SizeError("patch set columns have inconsistent lengths");
  if (static_cast<std::size_t>(d_.grid_w) * static_cast<std::size_t>(d_.grid_h) != n)
    throw SizeError("patch count must equal grid_w * grid_h");
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : d_.position) {
    cx += p.x;
    cy += p.y;
  }
  if (n > 0) centroid_ = {cx / static_cast<double>(n), cy / static_cast<double>(n)};
}

PatchSet patchify(const Image& img, int p, int r) {
  if (p < 1) throw ParameterError("patch size must be >= 1");
  if (img.width() < p || img.height() < p) {
    std::ostringstream msg;
    msg << "image " << img.width() << "x" << img.height() << " smaller than one " << p << "x"
        << p << " patch";
    throw SizeError(msg.str());
  }
  const RankMap ranks = rank_map(to_intensity(img), r);
  const int gw = img.width() / p;
  const int gh = img.height() / p;
  const int c = img.channels();

  PatchSetData d;
  d.grid_w = gw;
  d.grid_h = gh;
  d.patch_size = p;
  d.channels = c;
  d.appearance_dim = p * p * c;
  d.rank_dim = p * p;
  d.extent = {static_cast<double>(gw), static_cast<double>(gh)};
  const auto n = static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh);
  d.appearance.reserve(n * static_cast<std::size_t>(d.appearance_dim));
  d.rank.reserve(n * static_cast<std::size_t>(d.rank_dim));
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      for (int yy = 0; yy < p; ++yy) {
        for (int xx = 0; xx < p; ++xx) {
          const int x = gx * p + xx;
          const int y = gy * p + yy;
          for (int ch = 0; ch < c; ++ch) d.appearance.push_back(img.at(x, y, ch));
          d.rank.push_back(ranks.at(x, y));
        }
      }
      d.location.push_back({(gx + 0.5) / gw, (gy + 0.5) / gh});
      d.position.push_back({static_cast<double>(gx), static_cast<double>(gy)});
      d.global_index.push_back(static_cast<std::int32_t>(d.location.size() - 1));
      d.grid_x.push_back(gx);
      d.grid_y.push_back(gy);
    }
  }
  return PatchSet(std::move(d));
}

PatchSet subgrid(const PatchSet& host, const GridWindow& win) {
  if (win.gw <= 0 || win.gh <= 0) throw SizeError("empty grid window");
  if (win.gx < 0 || win.gy < 0 || win.gx + win.gw > host.grid_w() ||
      win.gy + win.gh > host.grid_h()) {
    std::ostringstream msg;
    msg << win << " outside " << host.grid_w() << "x" << host.grid_h() << " patch grid";
    throw BoundsError(msg.str());
  }
  PatchSetData d;
  d.grid_w = win.gw;
  d.grid_h = win.gh;
  d.patch_size = host.patch_size();
  d.channels = host.channels();
  d.appearance_dim = host.appearance_dim();
  d.rank_dim = host.rank_dim();
  d.extent = {static_cast<double>(win.gw), static_cast<double>(win.gh)};
  for (int ly = 0; ly < win.gh; ++ly) {
    for (int lx = 0; lx < win.gw; ++lx) {
      const auto hi = static_cast<std::size_t>(win.gy + ly) * static_cast<std::size_t>(host.grid_w()) +
                      static_cast<std::size_t>(win.gx + lx);
      const auto a = host.appearance(hi);
      const auto rk = host.rank(hi);
      d.appearance.insert(d.appearance.end(), a.begin(), a.end());
      d.rank.insert(d.rank.end(), rk.begin(), rk.end());
      d.location.push_back({(lx + 0.5) / win.gw, (ly + 0.5) / win.gh});
      d.position.push_back({static_cast<double>(lx), static_cast<double>(ly)});
      d.global_index.push_back(host.global_index(hi));
      d.grid_x.push_back(lx);
      d.grid_y.push_back(ly);
    }
  }
  return PatchSet(std::move(d));
}

GridWindow to_grid(const Window& win, int p) {
  if (win.x % p != 0 || win.y % p != 0 || win.w % p != 0 || win.h % p != 0) {
    std::ostringstream msg;
    msg << win << " is not aligned to the " << p << "-pixel patch grid";
    throw AlignmentError(msg.str());
  }
  return {win.x / p, win.y / p, win.w / p, win.h / p};
}

Window to_pixels(const GridWindow& win, int p) {
  return {win.gx * p, win.gy * p, win.gw * p, win.gh * p};
}

namespace {

void check_lengths(const PatchRef& a, const PatchRef& b, bool need_rank) {
  if (a.appearance.size() != b.appearance.size())
    throw TypeError("appearance vector length mismatch");
  if (need_rank && a.rank.size() != b.rank.size()) throw TypeError("rank vector length mismatch");
}

}  // namespace

double distance_al(const PatchRef& a, const PatchRef& b, double lambda) {
  check_lengths(a, b, false);
  const double la[2] = {a.location.x, a.location.y};
  const double lb[2] = {b.location.x, b.location.y};
  return weighted_sq_distance(a.appearance, b.appearance, la, lb, lambda);
}

double distance_ar(const PatchRef& a, const PatchRef& b, double lambda) {
  check_lengths(a, b, true);
  return weighted_sq_distance(a.appearance, b.appearance, a.rank, b.rank, lambda);
}

double distance_a(const PatchRef& a, const PatchRef& b) {
  check_lengths(a, b, false);
  return weighted_sq_distance(a.appearance, b.appearance, {}, {}, 0.0);
}

double distance(DistanceMode mode, const PatchRef& a, const PatchRef& b, double lambda) {
  switch (mode) {
    case DistanceMode::appearance_rank: return distance_ar(a, b, lambda);
    case DistanceMode::appearance_location: return distance_al(a, b, lambda);
    case DistanceMode::appearance_only: return distance_a(a, b);
  }
  return 0.0;
}

}  // namespace sds
