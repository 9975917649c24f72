#include "sds/statlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>

#include "sds/error.hpp"
#include "sds/image.hpp"
#include "sds/image_io.hpp"
#include "sds/parallel.hpp"

namespace sds::statlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::int32_t> identity_index(std::size_t n) {
  std::vector<std::int32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

std::vector<double> xs(const std::vector<Point2>& pts) {
  std::vector<double> out(pts.size());
  std::transform(pts.begin(), pts.end(), out.begin(), [](const Point2& p) { return p.x; });
  return out;
}

}  // namespace

void GaussianSpec::validate() const {
  if (dim != 1 && dim != 2) throw ParameterError("Gaussian dimension must be 1 or 2");
  if (dim == 1 && !(sigma > 0.0)) throw ParameterError("sigma must be > 0");
  if (dim == 2 && !(sigma1 > 0.0 && sigma2 > 0.0)) throw ParameterError("sigma1, sigma2 must be > 0");
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::vector<Point2> sample_point_set(const GaussianSpec& spec, int count, std::mt19937_64& rng) {
  spec.validate();
  if (count < 1) throw ParameterError("point count must be >= 1");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Point2> out(static_cast<std::size_t>(count));
  if (spec.dim == 1) {
    for (auto& p : out) p = {spec.mean_x + spec.sigma * unit(rng), 0.0};
    return out;
  }
  const double c = std::cos(spec.theta);
  const double s = std::sin(spec.theta);
  for (auto& p : out) {
    const double x = spec.sigma1 * unit(rng);
    const double y = spec.sigma2 * unit(rng);
    p = {spec.mean_x + c * x - s * y, spec.mean_y + s * x + c * y};
  }
  return out;
}

std::vector<Point2> sample_point_set(const GaussianSpec& spec, int count, std::uint64_t seed) {
  auto rng = stream_rng(seed, 0);
  return sample_point_set(spec, count, rng);
}

std::vector<double> index_rank(const std::vector<double>& values, int r) {
  if (r < 1) throw ParameterError("rank radius must be >= 1");
  const auto n = static_cast<int>(values.size());
  const double norm = static_cast<double>(r) * static_cast<double>(r);
  std::vector<double> out(values.size());
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (int j = std::max(0, i - r); j <= std::min(n - 1, i + r); ++j)
      if (values[static_cast<std::size_t>(i)] >= values[static_cast<std::size_t>(j)]) ++count;
    out[static_cast<std::size_t>(i)] = count / norm;
  }
  return out;
}

PatchSet points_1d(const std::vector<double>& values, int rank_radius,
                   const std::vector<std::int32_t>& global_index) {
  const std::size_t n = values.size();
  if (n == 0) throw SizeError("empty point set");
  PatchSetData d;
  d.grid_w = static_cast<int>(n);
  d.grid_h = 1;
  d.appearance_dim = 1;
  d.rank_dim = 1;
  d.appearance = values;
  d.rank = index_rank(values, rank_radius);
  d.extent = {static_cast<double>(n), 1.0};
  d.global_index = global_index.empty() ? identity_index(n) : global_index;
  for (std::size_t i = 0; i < n; ++i) {
    d.location.push_back({(static_cast<double>(i) + 0.5) / static_cast<double>(n), 0.5});
    d.position.push_back({static_cast<double>(i), 0.0});
    d.grid_x.push_back(static_cast<std::int32_t>(i));
    d.grid_y.push_back(0);
  }
  return PatchSet(std::move(d));
}

PatchSet points_2d(const std::vector<Point2>& coords, double frame, int rank_radius,
                   const std::vector<std::int32_t>& global_index) {
  const std::size_t n = coords.size();
  if (n == 0) throw SizeError("empty point set");
  if (!(frame > 0.0)) throw ParameterError("2D frame must be > 0");
  Point2 c{0.0, 0.0};
  for (const auto& p : coords) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(n);
  c.y /= static_cast<double>(n);
  PatchSetData d;
  d.grid_w = static_cast<int>(n);
  d.grid_h = 1;
  d.appearance_dim = 1;
  d.rank_dim = 1;
  d.extent = {1.0, 1.0};
  for (const auto& p : coords) {
    const double dx = p.x - c.x;
    const double dy = p.y - c.y;
    d.appearance.push_back(std::sqrt(dx * dx + dy * dy) / frame);
    d.location.push_back({p.x / (2.0 * frame) + 0.5, p.y / (2.0 * frame) + 0.5});
    d.position.push_back(p);
  }
  d.rank = index_rank(d.appearance, rank_radius);
  d.global_index = global_index.empty() ? identity_index(n) : global_index;
  for (std::size_t i = 0; i < n; ++i) {
    d.grid_x.push_back(static_cast<std::int32_t>(i));
    d.grid_y.push_back(0);
  }
  return PatchSet(std::move(d));
}

StatConfig::StatConfig() = default;

double point_measure(Measure m, const PatchSet& templ, const PatchSet& window, const PatchSet& host,
                     const StatConfig& cfg) {
  MatchConfig mc = cfg.match;
  mc.measure = m;
  if (m == Measure::sds || m == Measure::nsds) {
    const AnnTable table = build_ann_table(templ, host, mc);
    return sds_score(templ, window, table, mc);
  }
  return score_measure(templ, window, nullptr, mc);
}

CellStats mean_and_stderr(const std::vector<double>& samples) {
  CellStats st;
  if (samples.empty()) return st;
  const double n = static_cast<double>(samples.size());
  st.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - st.mean) * (v - st.mean);
    st.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return st;
}

std::pair<std::size_t, std::size_t> ExpectationMap::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < mean.size(); ++i)
    if (mean[i] > mean[best]) best = i;
  return {best / axis2.size(), best % axis2.size()};
}

std::pair<std::size_t, std::size_t> ExpectationMap::argmin_in_row(std::size_t row) const {
  std::size_t best = 0;
  for (std::size_t c = 1; c < axis2.size(); ++c)
    if (at(row, c) < at(row, best)) best = c;
  return {row, best};
}

namespace {

ExpectationMap make_map(Measure m, std::string a1, std::string a2, const std::vector<double>& g1,
                        const std::vector<double>& g2, int trials) {
  if (g1.empty() || g2.empty()) throw ParameterError("expectation grids must be non-empty");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  ExpectationMap map;
  map.measure = std::string(to_string(m));
  map.axis1_name = std::move(a1);
  map.axis2_name = std::move(a2);
  map.axis1 = g1;
  map.axis2 = g2;
  map.mean.assign(g1.size() * g2.size(), 0.0);
  map.stderr_.assign(map.mean.size(), 0.0);
  map.trials = trials;
  return map;
}

}  // namespace

ExpectationMap expectation_map_1d(Measure m, int template_size, int window_size,
                                  const std::vector<double>& mu_grid,
                                  const std::vector<double>& sigma_grid, const StatConfig& cfg) {
  if (template_size < 1 || window_size < 1) throw ParameterError("set sizes must be >= 1");
  if ((m == Measure::ssd || m == Measure::sad) && template_size != window_size)
    throw ParameterError("pixel baselines need equal set sizes");
  ExpectationMap map = make_map(m, "mu", "sigma", mu_grid, sigma_grid, cfg.trials);
  const int r = cfg.match.rank_radius;
  parallel_for(map.mean.size(), cfg.jobs, [&](std::size_t cell, std::size_t) {
    const double mu = mu_grid[cell / sigma_grid.size()];
    const double sigma = sigma_grid[cell % sigma_grid.size()];
    auto rng = stream_rng(cfg.seed, cell);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(cfg.trials));
    for (int t = 0; t < cfg.trials; ++t) {
      const auto tv = xs(sample_point_set(GaussianSpec{1, 0.0, 0.0, 1.0}, template_size, rng));
      GaussianSpec qs;
      qs.mean_x = mu;
      qs.sigma = sigma;
      const auto qv = xs(sample_point_set(qs, window_size, rng));
      const PatchSet tset = points_1d(tv, r);
      const PatchSet qset = points_1d(qv, r);
      samples.push_back(point_measure(m, tset, qset, qset, cfg));
    }
    const auto st = mean_and_stderr(samples);
    map.mean[cell] = st.mean;
    map.stderr_[cell] = st.stderr_;
  });
  return map;
}

double ScaleEstimation::mode(std::size_t gt) const {
  const auto& h = histogram[gt];
  return s_grid[static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin())];
}

ScaleEstimation scale_estimation_trials(Measure m, const std::vector<double>& gt_scales,
                                        const std::vector<double>& s_grid, const StatConfig& cfg,
                                        const ScaleTrialOptions& options) {
  if (gt_scales.empty() || s_grid.empty()) throw ParameterError("scale lists must be non-empty");
  if (cfg.trials < 1) throw ParameterError("trials must be >= 1");
  const int n = options.template_size;
  const int host_n = options.host_size;
  for (double gt : gt_scales)
    if (!(gt > 0.0) || std::lround(gt * n) > host_n)
      throw ParameterError("ground-truth scale does not fit: gt * |T| must be <= |host|");
  for (double s : s_grid)
    if (!(s > 0.0) || std::lround(s * n) > host_n || std::lround(s * n) < 1)
      throw ParameterError("window scale does not fit inside the host set");

  ScaleEstimation est;
  est.measure = std::string(to_string(m));
  est.gt_scales = gt_scales;
  est.s_grid = s_grid;
  est.trials = cfg.trials;
  const std::size_t ns = s_grid.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  // scores[gt][trial][s]
  std::vector<std::vector<double>> scores(gt_scales.size() * trials, std::vector<double>(ns));
  const int r = cfg.match.rank_radius;
  MatchConfig mc = cfg.match;
  mc.measure = m;

  parallel_for(scores.size(), cfg.jobs, [&](std::size_t slot, std::size_t) {
    const std::size_t gi = slot / trials;
    const std::size_t trial = slot % trials;
    auto rng = stream_rng(cfg.seed, gi * 1000003ULL + trial);
    const auto tv = xs(sample_point_set(GaussianSpec{1, 0.0, 0.0, 1.0}, n, rng));
    std::uniform_real_distribution<double> mu_dist(0.0, options.background_mu_max);
    std::uniform_real_distribution<double> sigma_dist(1e-3, options.background_sigma_max);
    const double mu_b = mu_dist(rng);
    const double sigma_b = sigma_dist(rng);

    const auto obj_n = static_cast<int>(std::lround(gt_scales[gi] * n));
    std::vector<double> host;
    host.reserve(static_cast<std::size_t>(host_n));
    for (int j = 0; j < obj_n; ++j) {
      const auto src = std::min<long>(n - 1, (static_cast<long>(j) * n) / obj_n);
      host.push_back(tv[static_cast<std::size_t>(src)]);
    }
    const int bg_n = host_n - obj_n;
    if (options.background_from_template) {
      for (int j = 0; j < bg_n; ++j) host.push_back(tv[static_cast<std::size_t>(j % n)]);
    } else {
      GaussianSpec bs;
      bs.mean_x = mu_b;
      bs.sigma = sigma_b;
      if (bg_n > 0) {
        const auto bv = xs(sample_point_set(bs, bg_n, rng));
        host.insert(host.end(), bv.begin(), bv.end());
      }
    }
    const PatchSet tset = points_1d(tv, r);
    const PatchSet hset = points_1d(host, r);
    std::optional<AnnTable> table;
    if (m == Measure::sds || m == Measure::nsds) table = build_ann_table(tset, hset, mc);
    for (std::size_t si = 0; si < ns; ++si) {
      const auto win_n = static_cast<int>(std::lround(s_grid[si] * n));
      const PatchSet qset = subgrid(hset, GridWindow{0, 0, win_n, 1});
      scores[slot][si] = table ? sds_score(tset, qset, *table, mc) : score_measure(tset, qset, nullptr, mc);
    }
  });

  est.histogram.assign(gt_scales.size(), std::vector<double>(ns, 0.0));
  est.mean_score.assign(gt_scales.size(), std::vector<double>(ns, 0.0));
  est.stderr_score.assign(gt_scales.size(), std::vector<double>(ns, 0.0));
  for (std::size_t gi = 0; gi < gt_scales.size(); ++gi) {
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& row = scores[gi * trials + t];
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      est.histogram[gi][best] += 1.0 / static_cast<double>(trials);
    }
    for (std::size_t si = 0; si < ns; ++si) {
      std::vector<double> col(trials);
      for (std::size_t t = 0; t < trials; ++t) col[t] = scores[gi * trials + t][si];
      const auto st = mean_and_stderr(col);
      est.mean_score[gi][si] = st.mean;
      est.stderr_score[gi][si] = st.stderr_;
    }
  }
  return est;
}

ExpectationMap rotation_map_2d(Measure m, int set_size, const std::vector<double>& sigma2_grid,
                               const std::vector<double>& theta_grid, const StatConfig& cfg) {
  if (set_size < 1) throw ParameterError("set size must be >= 1");
  for (double s2 : sigma2_grid)
    if (!(s2 > 0.0)) throw ParameterError("sigma2 must be > 0");
  ExpectationMap map = make_map(m, "sigma2", "theta", sigma2_grid, theta_grid, cfg.trials);
  const int r = cfg.match.rank_radius;
  parallel_for(map.mean.size(), cfg.jobs, [&](std::size_t cell, std::size_t) {
    const double sigma2 = sigma2_grid[cell / theta_grid.size()];
    const double theta = theta_grid[cell % theta_grid.size()];
    auto rng = stream_rng(cfg.seed, cell);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(cfg.trials));
    for (int t = 0; t < cfg.trials; ++t) {
      GaussianSpec spec;
      spec.dim = 2;
      spec.sigma1 = 1.0;
      spec.sigma2 = sigma2;
      const auto tp = sample_point_set(spec, set_size, rng);
      spec.theta = theta;
      const auto qp = sample_point_set(spec, set_size, rng);
      double frame = 0.0;
      for (const auto* set : {&tp, &qp})
        for (const auto& p : *set) frame = std::max(frame, std::hypot(p.x, p.y));
      const PatchSet tset = points_2d(tp, frame, r);
      const PatchSet qset = points_2d(qp, frame, r);
      samples.push_back(point_measure(m, tset, qset, qset, cfg));
    }
    const auto st = mean_and_stderr(samples);
    map.mean[cell] = st.mean;
    map.stderr_[cell] = st.stderr_;
  });
  return map;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw SizeError("pearson needs equal-length samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double relative_variation(const ExpectationMap& map, std::size_t row) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (std::size_t c = 0; c < map.axis2.size(); ++c) {
    lo = std::min(lo, map.at(row, c));
    hi = std::max(hi, map.at(row, c));
    sum += map.at(row, c);
  }
  const double mean = sum / static_cast<double>(map.axis2.size());
  return mean == 0.0 ? 0.0 : (hi - lo) / std::abs(mean);
}

void write_csv(const std::filesystem::path& path, const ExpectationMap& map) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << map.axis1_name << "," << map.axis2_name << ",mean,stderr,trials\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < map.axis1.size(); ++i)
    for (std::size_t j = 0; j < map.axis2.size(); ++j)
      out << map.axis1[i] << "," << map.axis2[j] << "," << map.at(i, j) << "," << map.se(i, j) << ","
          << map.trials << "\n";
}

void write_csv(const std::filesystem::path& path, const ScaleEstimation& est) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "gt_s,s,frequency,mean_score,stderr,trials\n";
  out << std::setprecision(17);
  for (std::size_t g = 0; g < est.gt_scales.size(); ++g)
    for (std::size_t s = 0; s < est.s_grid.size(); ++s)
      out << est.gt_scales[g] << "," << est.s_grid[s] << "," << est.histogram[g][s] << ","
          << est.mean_score[g][s] << "," << est.stderr_score[g][s] << "," << est.trials << "\n";
}

void write_pgm(const std::filesystem::path& path, const ExpectationMap& map, int zoom) {
  zoom = std::max(1, zoom);
  const auto [lo_it, hi_it] = std::minmax_element(map.mean.begin(), map.mean.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  const int w = static_cast<int>(map.axis2.size()) * zoom;
  const int h = static_cast<int>(map.axis1.size()) * zoom;
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = map.at(static_cast<std::size_t>(y / zoom), static_cast<std::size_t>(x / zoom));
      img.set(x, y, 0, span > 0.0 ? (v - lo) / span : 0.0);
    }
  io::write_pnm(path, img);
}

}  // namespace sds::statlab
