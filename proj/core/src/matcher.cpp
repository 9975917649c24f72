#include "sds/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "sds/error.hpp"
#include "sds/parallel.hpp"

namespace sds {

namespace {

// Upper bound on cached template-by-target distance entries (doubles).
constexpr std::size_t kDistanceCacheLimit = std::size_t{1} << 25;

bool needs_nn(Measure m) { return m != Measure::ssd && m != Measure::sad; }

}  // namespace

int round_to_patch(double extent, int p) {
  const long cells = std::lround(extent / static_cast<double>(p));
  return p * static_cast<int>(std::max(1L, cells));
}

std::vector<CandidateScale> candidate_scales(int target_w, int target_h, int templ_w, int templ_h,
                                             const ScaleGrid& grid, int p) {
  grid.validate();
  if (templ_w < p || templ_h < p) throw SizeError("template smaller than one patch");
  if (grid.spatial_stride % p != 0) {
    std::ostringstream msg;
    msg << "spatial stride " << grid.spatial_stride << " is not a multiple of the patch size " << p;
    throw AlignmentError(msg.str());
  }
  std::vector<std::pair<double, double>> pairs;
  if (grid.tied_axes) {
    for (std::size_t i = 0; i < grid.sx_values.size(); ++i)
      pairs.emplace_back(grid.sx_values[i], grid.sy_values[i]);
  } else {
    for (double sx : grid.sx_values)
      for (double sy : grid.sy_values) pairs.emplace_back(sx, sy);
  }
  std::vector<CandidateScale> out;
  std::set<std::pair<int, int>> seen;
  for (const auto& [sx, sy] : pairs) {
    const int w = round_to_patch(sx * templ_w, p);
    const int h = round_to_patch(sy * templ_h, p);
    if (w > target_w || h > target_h) continue;
    if (!seen.insert({w, h}).second) continue;
    CandidateScale cs;
    cs.sx = sx;
    cs.sy = sy;
    cs.w = w;
    cs.h = h;
    cs.nx = (target_w - w) / grid.spatial_stride + 1;
    cs.ny = (target_h - h) / grid.spatial_stride + 1;
    out.push_back(cs);
  }
  return out;
}

std::vector<Candidate> generate_candidates(int target_w, int target_h, int templ_w, int templ_h,
                                           const ScaleGrid& grid, int p) {
  const auto scales = candidate_scales(target_w, target_h, templ_w, templ_h, grid, p);
  if (scales.empty()) throw EmptyResultError("no candidate window fits inside the target");
  std::vector<Candidate> out;
  for (const auto& cs : scales)
    for (int iy = 0; iy < cs.ny; ++iy)
      for (int ix = 0; ix < cs.nx; ++ix)
        out.push_back({{ix * grid.spatial_stride, iy * grid.spatial_stride, cs.w, cs.h}, cs.sx, cs.sy});
  return out;
}

ScaleGrid effective_grid(Measure m, const ScaleGrid& grid) {
  if (is_multiscale(m)) return grid;
  return ScaleGrid::fixed(grid.spatial_stride);
}

struct WindowScorer::Scratch {
  std::vector<std::int32_t> nn_q;  // per window patch
  std::vector<std::int32_t> nn_t;  // per template patch (BBS)
  std::vector<double> best_t;
  std::vector<int> eps;            // per template patch, all zero between calls
};

WindowScorer::WindowScorer(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg,
                           const AnnTable* table)
    : templ_(templ),
      target_(target),
      cfg_(cfg),
      mode_(cfg.effective_distance_mode()),
      table_(table),
      window_dependent_nn_(mode_ == DistanceMode::appearance_location) {
  if (templ.empty() || target.empty()) throw SizeError("scorer needs non-empty patch sets");
  if ((cfg.measure == Measure::sds || cfg.measure == Measure::nsds) && table == nullptr)
    throw ParameterError("SDS scoring needs an ANN table");
  if (!needs_nn(cfg.measure)) return;

  const std::size_t n = templ.size();
  const std::size_t m = target.size();
  const bool want_cache = cfg.measure == Measure::bbs || window_dependent_nn_;
  if (want_cache && n * m <= kDistanceCacheLimit) {
    const bool with_rank = mode_ == DistanceMode::appearance_rank;
    distance_cache_.resize(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t g = 0; g < m; ++g) {
        distance_cache_[i * m + g] =
            with_rank ? weighted_sq_distance(target.appearance(g), templ.appearance(i),
                                             target.rank(g), templ.rank(i), cfg.lambda)
                      : weighted_sq_distance(target.appearance(g), templ.appearance(i), {}, {}, 0.0);
      }
    }
  }
  if (!window_dependent_nn_) {
    const NNIndex index(templ, mode_, cfg.lambda);
    global_nn_.resize(m);
    for (std::size_t g = 0; g < m; ++g) global_nn_[g] = index.nearest(target.patch(g)).index;
  }
  template_radius_.resize(n);
  for (std::size_t i = 0; i < n; ++i) template_radius_[i] = polar_radius(templ, i);
  if (table != nullptr) {
    if (table->template_size != n || table->target_size != m)
      throw SizeError("ANN table does not match the template/target pair");
    tau_.resize(m);
    for (std::size_t g = 0; g < m; ++g) tau_[g] = table->tau(g);
  }
}

WindowScorer::~WindowScorer() = default;

std::unique_ptr<WindowScorer::Scratch> WindowScorer::make_scratch() const {
  auto s = std::make_unique<Scratch>();
  s->eps.assign(templ_.size(), 0);
  return s;
}

double WindowScorer::pair_distance(std::size_t ti, std::size_t g, const GridWindow& win, int lx,
                                   int ly) const {
  const double primary = distance_cache_[ti * target_.size() + g];
  if (mode_ != DistanceMode::appearance_location) return primary;
  const Point2 lt = templ_.location(ti);
  const double dx = (lx + 0.5) / win.gw - lt.x;
  const double dy = (ly + 0.5) / win.gh - lt.y;
  double aux = 0.0;
  aux += dx * dx;
  aux += dy * dy;
  return primary + cfg_.lambda * aux;
}

void WindowScorer::window_nn(const GridWindow& win, Scratch& s) const {
  const auto m = static_cast<std::size_t>(win.count());
  s.nn_q.resize(m);
  const auto host_w = static_cast<std::size_t>(target_.grid_w());
  std::size_t j = 0;
  for (int ly = 0; ly < win.gh; ++ly) {
    for (int lx = 0; lx < win.gw; ++lx, ++j) {
      const std::size_t g = static_cast<std::size_t>(win.gy + ly) * host_w +
                            static_cast<std::size_t>(win.gx + lx);
      if (!window_dependent_nn_) {
        s.nn_q[j] = global_nn_[g];
        continue;
      }
      std::int32_t best = 0;
      double best_d = pair_distance(0, g, win, lx, ly);
      for (std::size_t i = 1; i < templ_.size(); ++i) {
        const double d = pair_distance(i, g, win, lx, ly);
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::int32_t>(i);
        }
      }
      s.nn_q[j] = best;
    }
  }
}

double WindowScorer::score_sds(const GridWindow& win, Scratch& s) const {
  window_nn(win, s);
  const auto host_w = static_cast<std::size_t>(target_.grid_w());
  const std::size_t m = s.nn_q.size();
  const double sratio = static_cast<double>(m) / static_cast<double>(templ_.size());
  const double scale = radius_scale(sratio, cfg_.radius_scaling);
  const double cx = (win.gw - 1) / 2.0;
  const double cy = (win.gh - 1) / 2.0;
  int tau_support = 0;
  double mismatch = 0.0;
  std::size_t j = 0;
  for (int ly = 0; ly < win.gh; ++ly) {
    for (int lx = 0; lx < win.gw; ++lx, ++j) {
      const std::size_t g = static_cast<std::size_t>(win.gy + ly) * host_w +
                            static_cast<std::size_t>(win.gx + lx);
      if (tau_[g] != 0) ++tau_support;
      const auto i = static_cast<std::size_t>(s.nn_q[j]);
      ++s.eps[i];
      const double dx = lx - cx;
      const double dy = ly - cy;
      mismatch += std::abs(std::sqrt(dx * dx + dy * dy) - scale * template_radius_[i]);
    }
  }
  const double score = assemble_sds(templ_.size(), m, s.eps, tau_support, mismatch, cfg_).score;
  for (auto i : s.nn_q) s.eps[static_cast<std::size_t>(i)] = 0;
  return score;
}

double WindowScorer::score_diversity(const GridWindow& win, Scratch& s) const {
  window_nn(win, s);
  const std::size_t m = s.nn_q.size();
  const double c = 1.0 / static_cast<double>(std::min(templ_.size(), m));
  for (auto i : s.nn_q) ++s.eps[static_cast<std::size_t>(i)];
  double score = 0.0;
  if (cfg_.measure == Measure::dis) {
    const auto attractors = std::count_if(s.eps.begin(), s.eps.end(), [](int e) { return e > 0; });
    score = c * static_cast<double>(attractors);
  } else {
    double sum = 0.0;
    std::size_t j = 0;
    for (int ly = 0; ly < win.gh; ++ly) {
      for (int lx = 0; lx < win.gw; ++lx, ++j) {
        const auto i = static_cast<std::size_t>(s.nn_q[j]);
        const Point2 lt = templ_.location(i);
        const double dx = ((lx + 0.5) / win.gw - lt.x) * static_cast<double>(win.gw);
        const double dy = ((ly + 0.5) / win.gh - lt.y) * static_cast<double>(win.gh);
        const double r = std::sqrt(dx * dx + dy * dy);
        sum += std::exp(1.0 - static_cast<double>(s.eps[i])) / (1.0 + r);
      }
    }
    score = c * sum;
  }
  for (auto i : s.nn_q) s.eps[static_cast<std::size_t>(i)] = 0;
  return score;
}

double WindowScorer::score_bbs(const GridWindow& win, Scratch& s) const {
  window_nn(win, s);
  const std::size_t n = templ_.size();
  const auto host_w = static_cast<std::size_t>(target_.grid_w());
  s.nn_t.assign(n, -1);
  s.best_t.assign(n, 0.0);
  std::int32_t j = 0;
  for (int ly = 0; ly < win.gh; ++ly) {
    for (int lx = 0; lx < win.gw; ++lx, ++j) {
      const std::size_t g = static_cast<std::size_t>(win.gy + ly) * host_w +
                            static_cast<std::size_t>(win.gx + lx);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = pair_distance(i, g, win, lx, ly);
        if (s.nn_t[i] < 0 || d < s.best_t[i]) {
          s.best_t[i] = d;
          s.nn_t[i] = j;
        }
      }
    }
  }
  std::size_t mutual = 0;
  for (std::size_t q = 0; q < s.nn_q.size(); ++q)
    if (s.nn_t[static_cast<std::size_t>(s.nn_q[q])] == static_cast<std::int32_t>(q)) ++mutual;
  return 1.0 / static_cast<double>(std::min(n, s.nn_q.size())) * static_cast<double>(mutual);
}

double WindowScorer::score_pixels(const GridWindow& win) const {
  if (win.gw != templ_.grid_w() || win.gh != templ_.grid_h())
    throw SizeError("pixel baselines need a window of the template's size");
  const auto host_w = static_cast<std::size_t>(target_.grid_w());
  const bool squared = cfg_.measure == Measure::ssd;
  double sum = 0.0;
  std::size_t i = 0;
  for (int ly = 0; ly < win.gh; ++ly) {
    for (int lx = 0; lx < win.gw; ++lx, ++i) {
      const std::size_t g = static_cast<std::size_t>(win.gy + ly) * host_w +
                            static_cast<std::size_t>(win.gx + lx);
      const auto a = templ_.appearance(i);
      const auto b = target_.appearance(g);
      for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        sum += squared ? diff * diff : std::abs(diff);
      }
    }
  }
  return -sum;
}

double WindowScorer::score(const GridWindow& win, Scratch& scratch) const {
  const bool cache_missing =
      (cfg_.measure == Measure::bbs || window_dependent_nn_) && distance_cache_.empty();
  if (cache_missing && needs_nn(cfg_.measure))
    return score_measure(templ_, subgrid(target_, win), table_, cfg_);
  switch (cfg_.measure) {
    case Measure::sds:
    case Measure::nsds: return score_sds(win, scratch);
    case Measure::dis:
    case Measure::ddis:
    case Measure::sddis: return score_diversity(win, scratch);
    case Measure::bbs: return score_bbs(win, scratch);
    case Measure::ssd:
    case Measure::sad: return score_pixels(win);
  }
  return 0.0;
}

double WindowScorer::score(const GridWindow& win) const {
  auto scratch = make_scratch();
  return score(win, *scratch);
}

namespace {

struct ScaleOutcome {
  double best = -std::numeric_limits<double>::infinity();
  GridWindow best_window{};
  std::vector<double> map;
};

}  // namespace

MatchResult match(const Image& templ, const Image& target, const MatchConfig& cfg,
                  const ScaleGrid& grid, const MatchOptions& options) {
  cfg.validate();
  const int p = cfg.patch_size;
  const ScaleGrid eff = effective_grid(cfg.measure, grid);
  const PatchSet tset = patchify(templ, p, cfg.rank_radius);
  const PatchSet qset = patchify(target, p, cfg.rank_radius);

  const auto scales = candidate_scales(qset.grid_w() * p, qset.grid_h() * p, tset.grid_w() * p,
                                       tset.grid_h() * p, eff, p);
  if (scales.empty()) throw EmptyResultError("no candidate window fits inside the target");

  std::optional<AnnTable> table;
  if (cfg.measure == Measure::sds || cfg.measure == Measure::nsds)
    table = cached_ann_table(tset, qset, cfg, options.ann_cache_dir);
  const WindowScorer scorer(tset, qset, cfg, table ? &*table : nullptr);

  const int gstride = eff.spatial_stride / p;
  const auto cells = static_cast<std::size_t>(qset.grid_w()) * static_cast<std::size_t>(qset.grid_h());
  std::vector<ScaleOutcome> outcomes(scales.size());

  std::vector<std::unique_ptr<WindowScorer::Scratch>> scratch;
  for (int w = 0; w < cfg.jobs; ++w) scratch.push_back(scorer.make_scratch());

  parallel_for(scales.size(), cfg.jobs, [&](std::size_t si, std::size_t worker) {
    const auto& cs = scales[si];
    ScaleOutcome& out = outcomes[si];
    out.map.assign(cells, -std::numeric_limits<double>::infinity());
    GridWindow win{0, 0, cs.w / p, cs.h / p};
    for (int iy = 0; iy < cs.ny; ++iy) {
      for (int ix = 0; ix < cs.nx; ++ix) {
        win.gx = ix * gstride;
        win.gy = iy * gstride;
        const double v = scorer.score(win, *scratch[worker]);
        out.map[static_cast<std::size_t>(win.gy) * static_cast<std::size_t>(qset.grid_w()) +
                static_cast<std::size_t>(win.gx)] = v;
        if (v > out.best) {
          out.best = v;
          out.best_window = win;
        }
      }
    }
  });

  MatchResult result;
  result.score_map.grid_w = qset.grid_w();
  result.score_map.grid_h = qset.grid_h();
  result.score_map.values.assign(cells, -std::numeric_limits<double>::infinity());
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const auto& o = outcomes[si];
    result.evaluated += scales[si].count();
    if (o.best > result.best_score) {
      result.best_score = o.best;
      result.best = to_pixels(o.best_window, p);
      result.best_sx = scales[si].sx;
      result.best_sy = scales[si].sy;
    }
    for (std::size_t c = 0; c < cells; ++c)
      result.score_map.values[c] = std::max(result.score_map.values[c], o.map[c]);
    if (options.keep_per_scale_maps)
      result.per_scale_maps.push_back({qset.grid_w(), qset.grid_h(), scales[si].sx, scales[si].sy, o.map});
  }
  return result;
}

}  // namespace sds
