#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sds/config.hpp"
#include "sds/features.hpp"
#include "sds/image.hpp"
#include "sds/nn.hpp"

namespace sds {

/// Bidirectional diversity statistics of a (template, window) pair.
struct DiversityStats {
  std::vector<int> epsilon;           // per template patch: #window patches whose NN it is
  std::vector<int> tau;               // per window patch: #template patches listing it in ANN^k
  std::vector<std::int32_t> nn_of_q;  // per window patch: its nearest template patch
  double s = 0.0;                     // m / n
};

/// NN in T of every patch of Q under `mode`.
std::vector<std::int32_t> nearest_in(const PatchSet& reference, const PatchSet& queries,
                                     DistanceMode mode, double lambda);

/// Counts how many window patches pick each template patch as their NN.
/// Fills epsilon, nn_of_q and s.
DiversityStats epsilon_counts(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg);
std::vector<int> epsilon_from_nn(std::span<const std::int32_t> nn_of_q, std::size_t template_size);

/// tau(q_j) = size of the inverted ANN list at q_j's global target index.
std::vector<int> tau_counts(const PatchSet& window, const AnnTable& table);
/// Pixel-window variant over the full target set; AlignmentError when the
/// window does not sit on the patch grid.
std::vector<int> tau_counts(const PatchSet& target, const Window& window, const AnnTable& table);

/// Distance from patch `i` to the centroid of the set's patch positions.
double polar_radius(const PatchSet& ps, std::size_t i);

/// Scale-aware normalization over the non-zero epsilon entries:
///   U = sum_{eps_i > 0} exp( I(s/eps_i >= 1) + I(s/eps_i < 1) * s/eps_i - 1 )
double u_term(std::span<const int> epsilon, double s);

/// Each factor of the SDS score, for diagnostics and tests.
struct SdsTerms {
  double s = 0.0;
  double lambda1 = 0.0;
  int tau_support = 0;      // sum_j I(tau(q_j) != 0)
  int epsilon_support = 0;  // sum_i I(eps(t_i) != 0)
  double u = 0.0;
  double radius_mismatch = 0.0;  // sum_j |rho(q_j) - s' rho(NN(q_j, T))|
  double score = 0.0;
};

SdsTerms sds_terms(const PatchSet& templ, const PatchSet& window, const AnnTable& table,
                   const MatchConfig& cfg);

/// Scalable diversity similarity of window Q against template T. `table` is
/// the ANN^k table of T over the host set Q was cut from; Q's global indices
/// address that host.
///   SDS = (1/s) * [sum_j I(tau_j != 0)] * [sum_i I(eps_i != 0)] * U
///         / (denom_guard + sum_j |rho(q_j) - s rho(NN(q_j, T))|)
double sds_score(const PatchSet& templ, const PatchSet& window, const AnnTable& table,
                 const MatchConfig& cfg);

/// Assembles the SDS terms from precomputed pieces; shared by sds_terms and
/// the matcher's fast path.
SdsTerms assemble_sds(std::size_t template_size, std::size_t window_size,
                      std::span<const int> epsilon, int tau_support, double radius_mismatch,
                      const MatchConfig& cfg);

double radius_scale(double s, RadiusScaling scaling);

/// Fraction of mutual nearest-neighbor pairs, c = 1/min(n, m).
double bbs_score(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg);

/// c * |{t_i : some q_j has NN(q_j, T) = t_i}|, c = 1/min(n, m).
double dis_score(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg);

/// Deformable diversity:
///   c * sum_j exp(1 - eps(NN(q_j, T))) / (1 + r_j)
/// with r_j the distance between q_j's location and its NN's location,
/// measured in window patch-grid units. With the weighting disabled the
/// score reduces to dis_score.
double ddis_score(const PatchSet& templ, const PatchSet& window, const MatchConfig& cfg,
                  bool deformation_weighting = true);
double ddis_from_nn(const PatchSet& templ, const PatchSet& window,
                    std::span<const std::int32_t> nn_of_q, std::span<const int> epsilon);

/// Negated pixel SSD / SAD (larger is more similar); SizeError unless both
/// sets have the same grid and appearance dimensions.
double ssd_score(const PatchSet& a, const PatchSet& b);
double sad_score(const PatchSet& a, const PatchSet& b);
double ssd_score(const Image& a, const Image& b);
double sad_score(const Image& a, const Image& b);

/// Dispatch on cfg.measure. `table` is required for SDS/NSDS only.
double score_measure(const PatchSet& templ, const PatchSet& window, const AnnTable* table,
                     const MatchConfig& cfg);

}  // namespace sds
