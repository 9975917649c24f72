#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "sds/config.hpp"
#include "sds/features.hpp"
#include "sds/image.hpp"
#include "sds/measures.hpp"
#include "sds/nn.hpp"

namespace sds {

/// One candidate window size and the number of positions it slides over.
struct CandidateScale {
  double sx = 1.0;
  double sy = 1.0;
  int w = 0;  // pixels, multiple of the patch size
  int h = 0;
  int nx = 0;  // positions along x
  int ny = 0;  // positions along y

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
};

struct Candidate {
  Window window;
  double sx = 1.0;
  double sy = 1.0;
};

/// Nearest multiple of p to `extent` (never below p).
int round_to_patch(double extent, int p);

/// Distinct window sizes over the scale grid, in grid order (sx outer, sy
/// inner), dropping sizes that do not fit in the target. Scale pairs that
/// round to an already listed size are skipped. Dimensions are in pixels and
/// refer to the patch-aligned regions of both images.
std::vector<CandidateScale> candidate_scales(int target_w, int target_h, int templ_w, int templ_h,
                                             const ScaleGrid& grid, int p);

/// Every candidate window, scale by scale, positions row-major.
/// EmptyResultError when nothing fits.
std::vector<Candidate> generate_candidates(int target_w, int target_h, int templ_w, int templ_h,
                                           const ScaleGrid& grid, int p);

struct ScoreMap {
  int grid_w = 0;
  int grid_h = 0;
  double sx = 1.0;
  double sy = 1.0;
  std::vector<double> values;  // -inf where no window is anchored

  double at(int gx, int gy) const noexcept {
    return values[static_cast<std::size_t>(gy) * static_cast<std::size_t>(grid_w) +
                  static_cast<std::size_t>(gx)];
  }
};

struct MatchResult {
  Window best;
  double best_sx = 1.0;
  double best_sy = 1.0;
  double best_score = -std::numeric_limits<double>::infinity();
  ScoreMap score_map;                  // max over scales, anchored at window top-left
  std::vector<ScoreMap> per_scale_maps;
  std::size_t evaluated = 0;
};

struct MatchOptions {
  bool keep_per_scale_maps = false;
  std::optional<std::filesystem::path> ann_cache_dir;
};

/// Scores windows of a target patch set against a template without
/// re-patchifying: nearest neighbors that do not depend on the window are
/// computed once, window-dependent ones are read off a cached distance table.
/// Every score equals score_measure(templ, subgrid(target, w), table, cfg).
class WindowScorer {
 public:
  WindowScorer(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg,
               const AnnTable* table);
  ~WindowScorer();
  WindowScorer(const WindowScorer&) = delete;
  WindowScorer& operator=(const WindowScorer&) = delete;

  struct Scratch;
  std::unique_ptr<Scratch> make_scratch() const;

  double score(const GridWindow& win, Scratch& scratch) const;
  double score(const GridWindow& win) const;

  bool uses_distance_cache() const noexcept { return !distance_cache_.empty(); }

 private:
  double score_sds(const GridWindow& win, Scratch& s) const;
  double score_diversity(const GridWindow& win, Scratch& s) const;
  double score_bbs(const GridWindow& win, Scratch& s) const;
  double score_pixels(const GridWindow& win) const;
  void window_nn(const GridWindow& win, Scratch& s) const;
  double pair_distance(std::size_t ti, std::size_t g, const GridWindow& win, int lx, int ly) const;

  const PatchSet& templ_;
  const PatchSet& target_;
  MatchConfig cfg_;
  DistanceMode mode_;
  const AnnTable* table_;
  bool window_dependent_nn_;
  std::vector<std::int32_t> global_nn_;   // location-free NN of each target patch in T
  std::vector<double> distance_cache_;    // n x M location-free distance part
  std::vector<double> template_radius_;
  std::vector<int> tau_;
};

MatchResult match(const Image& templ, const Image& target, const MatchConfig& cfg,
                  const ScaleGrid& grid, const MatchOptions& options = {});

/// The scale grid a measure actually runs on: fixed-scale measures collapse
/// to {1.0} (keeping the stride).
ScaleGrid effective_grid(Measure m, const ScaleGrid& grid);

}  // namespace sds
