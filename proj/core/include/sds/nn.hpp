#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "sds/config.hpp"
#include "sds/features.hpp"
#include "sds/kdtree.hpp"

namespace sds {

/// Feature matrix of a patch set laid out for `mode`: the primary block is
/// the appearance vector, the auxiliary block is rank, location or empty.
FeatureMatrix feature_matrix(const PatchSet& ps, DistanceMode mode, double lambda);
std::vector<double> feature_row(const PatchRef& patch, DistanceMode mode);

/// Exact nearest-neighbor index over the patches of one set. A k-d tree
/// backs feature dimensions up to 20, a linear scan anything wider.
class NNIndex {
 public:
  NNIndex(const PatchSet& ps, DistanceMode mode, double lambda);

  DistanceMode mode() const noexcept { return mode_; }
  double lambda() const noexcept { return matrix_.aux_weight; }
  std::size_t size() const noexcept { return matrix_.rows(); }
  bool uses_tree() const noexcept { return tree_ != nullptr; }
  const FeatureMatrix& matrix() const noexcept { return matrix_; }

  /// argmin over rows; ties go to the lowest row index.
  Neighbor nearest(const PatchRef& query) const;
  std::vector<Neighbor> knn(const PatchRef& query, int k) const;

 private:
  void check_query(const PatchRef& query) const;

  DistanceMode mode_;
  int appearance_dim_;
  int rank_dim_;
  FeatureMatrix matrix_;
  std::unique_ptr<KdTree> tree_;
};

constexpr int kMaxTreeDim = 20;

/// SizeError on an empty set. The distance mode is cfg.effective_distance_mode().
NNIndex build_index(const PatchSet& ps, const MatchConfig& cfg);
Neighbor nn_query(const NNIndex& idx, const PatchRef& q);

/// k nearest target patches of every template patch, plus the transpose:
/// for each target patch, the template patches that list it.
struct AnnTable {
  int k = 0;                       // effective k = min(requested, M)
  bool clamped = false;            // requested k exceeded M
  std::size_t template_size = 0;
  std::size_t target_size = 0;
  std::vector<std::int32_t> forward;                 // template_size * k
  std::vector<std::vector<std::int32_t>> inverted;   // target_size lists, ascending

  std::span<const std::int32_t> neighbors(std::size_t template_index) const noexcept {
    return {forward.data() + template_index * static_cast<std::size_t>(k),
            static_cast<std::size_t>(k)};
  }
  int tau(std::size_t target_index) const noexcept {
    return static_cast<int>(inverted[target_index].size());
  }
  friend bool operator==(const AnnTable&, const AnnTable&) = default;
};

AnnTable build_ann_table(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg);

/// Rebuilds `inverted` from `forward`.
void rebuild_inverted(AnnTable& table);

/// Content hash of everything an AnnTable depends on.
std::uint64_t ann_cache_key(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg);

void save_ann_table(const std::filesystem::path& path, std::uint64_t key, const AnnTable& table);
std::optional<AnnTable> load_ann_table(const std::filesystem::path& path, std::uint64_t key);

/// Builds the table, consulting `cache_dir` (e.g. from SDS_CACHE_DIR) when set.
AnnTable cached_ann_table(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg,
                          const std::optional<std::filesystem::path>& cache_dir);

}  // namespace sds
