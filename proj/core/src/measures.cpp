#include "sds/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sds/error.hpp"

namespace sds {

namespace {

void require_nonempty(const PatchSet& a, const PatchSet& b) {
  if (a.empty() || b.empty()) throw SizeError("similarity measures need non-empty patch sets");
}

double min_count_norm(const PatchSet& a, const PatchSet& b) {
  return 1.0 / static_cast<double>(std::min(a.size(), b.size()));
}

}  // namespace

std::vector<std::int32_t> nearest_in(const PatchSet& reference, const PatchSet& queries,
                                     DistanceMode mode, double lambda) {
  const NNIndex index(reference, mode, lambda);
  std::vector<std::int32_t> out(queries.size());
  for (std::size_t j = 0; j < queries.size(); ++j) out[j] = index.nearest(queries.patch(j)).index;
  return out;
}

std::vector<int> epsilon_from_nn(std::span<const std::int32_t> nn_of_q, std::size_t template_size) {
  std::vector<int> eps(template_size, 0);
  for (auto i : nn_of_q) ++eps[static_cast<std::size_t>(i)];
  return eps;
}

DiversityStats epsilon_counts(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg) {
  require_nonempty(templ, window);
  DiversityStats st;
  st.nn_of_q = nearest_in(templ, window, cfg.effective_distance_mode(), cfg.lambda);
  st.epsilon = epsilon_from_nn(st.nn_of_q, templ.size());
  st.s = static_cast<double>(window.size()) / static_cast<double>(templ.size());
  return st;
}

std::vector<int> tau_counts(const PatchSet& window, const AnnTable& table) {
  std::vector<int> tau(window.size());
  for (std::size_t j = 0; j < window.size(); ++j) {
    const auto g = window.global_index(j);
    if (g < 0 || static_cast<std::size_t>(g) >= table.target_size)
      throw BoundsError("window patch is not part of the ANN table's target set");
    tau[j] = table.tau(static_cast<std::size_t>(g));
  }
  return tau;
}

std::vector<int> tau_counts(const PatchSet& target, const Window& window, const AnnTable& table) {
  const GridWindow gw = to_grid(window, target.patch_size());
  return tau_counts(subgrid(target, gw), table);
}

double polar_radius(const PatchSet& ps, std::size_t i) {
  const Point2 c = ps.centroid();
  const Point2 p = ps.position(i);
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return std::sqrt(dx * dx + dy * dy);
}

double u_term(std::span<const int> epsilon, double s) {
  if (!(s > 0.0)) throw ParameterError("u_term needs s > 0");
  double u = 0.0;
  for (int e : epsilon) {
    if (e <= 0) continue;
    const double ratio = s / static_cast<double>(e);
    const double ge = ratio >= 1.0 ? 1.0 : 0.0;
    const double lt = ratio < 1.0 ? 1.0 : 0.0;
    u += std::exp(ge + lt * ratio - 1.0);
  }
  return u;
}

double radius_scale(double s, RadiusScaling scaling) {
  return scaling == RadiusScaling::area ? s : std::sqrt(s);
}

SdsTerms assemble_sds(std::size_t template_size, std::size_t window_size,
                      std::span<const int> epsilon, int tau_support, double radius_mismatch,
                      const MatchConfig& cfg) {
  SdsTerms t;
  t.s = static_cast<double>(window_size) / static_cast<double>(template_size);
  t.lambda1 = 1.0 / t.s;
  t.tau_support = tau_support;
  t.epsilon_support =
      static_cast<int>(std::count_if(epsilon.begin(), epsilon.end(), [](int e) { return e != 0; }));
  t.u = u_term(epsilon, t.s);
  t.radius_mismatch = radius_mismatch;
  t.score = t.lambda1 * (static_cast<double>(t.tau_support) * static_cast<double>(t.epsilon_support)) *
            t.u / (cfg.denom_guard + t.radius_mismatch);
  return t;
}

SdsTerms sds_terms(const PatchSet& templ, const PatchSet& window, const AnnTable& table,
                   const MatchConfig& cfg) {
  if (window.empty()) throw SizeError("SDS needs a non-empty window");
  require_nonempty(templ, window);
  if (table.template_size != templ.size())
    throw SizeError("ANN table was built for a different template");
  const DiversityStats st = epsilon_counts(templ, window, cfg);
  const auto tau = tau_counts(window, table);
  const int tau_support =
      static_cast<int>(std::count_if(tau.begin(), tau.end(), [](int v) { return v != 0; }));
  const double scale = radius_scale(st.s, cfg.radius_scaling);
  double mismatch = 0.0;
  for (std::size_t j = 0; j < window.size(); ++j) {
    const double rq = polar_radius(window, j);
    const double rt = polar_radius(templ, static_cast<std::size_t>(st.nn_of_q[j]));
    mismatch += std::abs(rq - scale * rt);
  }
  return assemble_sds(templ.size(), window.size(), st.epsilon, tau_support, mismatch, cfg);
}

double sds_score(const PatchSet& templ, const PatchSet& window, const AnnTable& table,
                 const MatchConfig& cfg) {
  return sds_terms(templ, window, table, cfg).score;
}

double bbs_score(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg) {
  require_nonempty(templ, window);
  const auto mode = cfg.effective_distance_mode();
  const auto q_to_t = nearest_in(templ, window, mode, cfg.lambda);
  const auto t_to_q = nearest_in(window, templ, mode, cfg.lambda);
  std::size_t mutual = 0;
  for (std::size_t j = 0; j < window.size(); ++j)
    if (t_to_q[static_cast<std::size_t>(q_to_t[j])] == static_cast<std::int32_t>(j)) ++mutual;
  return min_count_norm(templ, window) * static_cast<double>(mutual);
}

double dis_score(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg) {
  require_nonempty(templ, window);
  const DiversityStats st = epsilon_counts(templ, window, cfg);
  const auto attractors = std::count_if(st.epsilon.begin(), st.epsilon.end(), [](int e) { return e > 0; });
  return min_count_norm(templ, window) * static_cast<double>(attractors);
}

double ddis_from_nn(const PatchSet& templ, const PatchSet& window,
                    std::span<const std::int32_t> nn_of_q, std::span<const int> epsilon) {
  const Point2 ext = window.extent();
  double sum = 0.0;
  for (std::size_t j = 0; j < window.size(); ++j) {
    const auto i = static_cast<std::size_t>(nn_of_q[j]);
    const Point2 lq = window.location(j);
    const Point2 lt = templ.location(i);
    const double dx = (lq.x - lt.x) * ext.x;
    const double dy = (lq.y - lt.y) * ext.y;
    const double r = std::sqrt(dx * dx + dy * dy);
    sum += std::exp(1.0 - static_cast<double>(epsilon[i])) / (1.0 + r);
  }
  return min_count_norm(templ, window) * sum;
}

double ddis_score(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg,
                  bool deformation_weighting) {
  if (!deformation_weighting) return dis_score(templ, window, cfg);
  require_nonempty(templ, window);
  const DiversityStats st = epsilon_counts(templ, window, cfg);
  return ddis_from_nn(templ, window, st.nn_of_q, st.epsilon);
}

namespace {

template <typename Op>
double pixel_diff(const PatchSet& a, const PatchSet& b, Op op) {
  if (a.grid_w() != b.grid_w() || a.grid_h() != b.grid_h() ||
      a.appearance_dim() != b.appearance_dim()) {
    std::ostringstream msg;
    msg << "pixel baselines need equal sizes; got " << a.grid_w() << "x" << a.grid_h() << " vs "
        << b.grid_w() << "x" << b.grid_h();
    throw SizeError(msg.str());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto pa = a.appearance(i);
    const auto pb = b.appearance(i);
    for (std::size_t d = 0; d < pa.size(); ++d) sum += op(pa[d] - pb[d]);
  }
  return -sum;
}

template <typename Op>
double image_diff(const Image& a, const Image& b, Op op) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw SizeError("pixel baselines need images of equal size");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) sum += op(a.data()[i] - b.data()[i]);
  return -sum;
}

constexpr auto square = [](double d) { return d * d; };
constexpr auto absolute = [](double d) { return std::abs(d); };

}  // namespace

double ssd_score(const PatchSet& a, const PatchSet& b) { return pixel_diff(a, b, square); }
double sad_score(const PatchSet& a, const PatchSet& b) { return pixel_diff(a, b, absolute); }
double ssd_score(const Image& a, const Image& b) { return image_diff(a, b, square); }
double sad_score(const Image& a, const Image& b) { return image_diff(a, b, absolute); }

double score_measure(const PatchSet& templ, const PatchSet& window, const AnnTable* table,
                     const MatchConfig& cfg) {
  switch (cfg.measure) {
    case Measure::sds:
    case Measure::nsds:
      if (table == nullptr) throw ParameterError("SDS scoring needs an ANN table");
      return sds_score(templ, window, *table, cfg);
    case Measure::ddis:
    case Measure::sddis: return ddis_score(templ, window, cfg);
    case Measure::bbs: return bbs_score(templ, window, cfg);
    case Measure::dis: return dis_score(templ, window, cfg);
    case Measure::ssd: return ssd_score(templ, window);
    case Measure::sad: return sad_score(templ, window);
  }
  return 0.0;
}

}  // namespace sds
