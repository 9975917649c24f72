#include "sds/nn.hpp"

#include <iostream>

#include "sds/error.hpp"

namespace sds {

namespace {

int aux_dim_for(DistanceMode mode, int rank_dim) {
  switch (mode) {
    case DistanceMode::appearance_rank: return rank_dim;
    case DistanceMode::appearance_location: return 2;
    case DistanceMode::appearance_only: return 0;
  }
  return 0;
}

void append_row(std::vector<double>& out, const PatchRef& patch, DistanceMode mode) {
  out.insert(out.end(), patch.appearance.begin(), patch.appearance.end());
  switch (mode) {
    case DistanceMode::appearance_rank:
      out.insert(out.end(), patch.rank.begin(), patch.rank.end());
      break;
    case DistanceMode::appearance_location:
      out.push_back(patch.location.x);
      out.push_back(patch.location.y);
      break;
    case DistanceMode::appearance_only: break;
  }
}

}  // namespace

FeatureMatrix feature_matrix(const PatchSet& ps, DistanceMode mode, double lambda) {
  FeatureMatrix m;
  m.primary_dim = ps.appearance_dim();
  m.aux_dim = aux_dim_for(mode, ps.rank_dim());
  m.aux_weight = mode == DistanceMode::appearance_only ? 0.0 : lambda;
  m.values.reserve(ps.size() * static_cast<std::size_t>(m.dim()));
  for (std::size_t i = 0; i < ps.size(); ++i) append_row(m.values, ps.patch(i), mode);
  return m;
}

std::vector<double> feature_row(const PatchRef& patch, DistanceMode mode) {
  std::vector<double> out;
  append_row(out, patch, mode);
  return out;
}

NNIndex::NNIndex(const PatchSet& ps, DistanceMode mode, double lambda)
    : mode_(mode),
      appearance_dim_(ps.appearance_dim()),
      rank_dim_(ps.rank_dim()),
      matrix_(feature_matrix(ps, mode, lambda)) {
  if (ps.empty()) throw SizeError("cannot build a nearest-neighbor index over an empty set");
  if (matrix_.dim() <= kMaxTreeDim) tree_ = std::make_unique<KdTree>(matrix_);
}

void NNIndex::check_query(const PatchRef& query) const {
  if (static_cast<int>(query.appearance.size()) != appearance_dim_)
    throw TypeError("query appearance dimension does not match the index");
  if (mode_ == DistanceMode::appearance_rank && static_cast<int>(query.rank.size()) != rank_dim_)
    throw TypeError("query rank dimension does not match the index");
}

Neighbor NNIndex::nearest(const PatchRef& query) const {
  check_query(query);
  const auto row = feature_row(query, mode_);
  if (tree_) return tree_->nearest(row);
  return exhaustive_knn(matrix_, row, 1).front();
}

std::vector<Neighbor> NNIndex::knn(const PatchRef& query, int k) const {
  check_query(query);
  const auto row = feature_row(query, mode_);
  if (tree_) return tree_->knn(row, k);
  return exhaustive_knn(matrix_, row, k);
}

NNIndex build_index(const PatchSet& ps, const MatchConfig& cfg) {
  return NNIndex(ps, cfg.effective_distance_mode(), cfg.lambda);
}

Neighbor nn_query(const NNIndex& idx, const PatchRef& q) { return idx.nearest(q); }

void rebuild_inverted(AnnTable& table) {
  table.inverted.assign(table.target_size, {});
  for (std::size_t i = 0; i < table.template_size; ++i)
    for (auto j : table.neighbors(i))
      table.inverted[static_cast<std::size_t>(j)].push_back(static_cast<std::int32_t>(i));
}

AnnTable build_ann_table(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg) {
  if (templ.empty() || target.empty()) throw SizeError("ANN table needs non-empty sets");
  if (cfg.ann_k < 1) throw ParameterError("ann_k must be >= 1");
  const NNIndex index = build_index(target, cfg);

  AnnTable table;
  table.template_size = templ.size();
  table.target_size = target.size();
  table.clamped = static_cast<std::size_t>(cfg.ann_k) > target.size();
  table.k = table.clamped ? static_cast<int>(target.size()) : cfg.ann_k;
  if (table.clamped)
    std::clog << "warning: ann_k=" << cfg.ann_k << " exceeds target patch count "
              << target.size() << "; clamped\n";

  table.forward.reserve(templ.size() * static_cast<std::size_t>(table.k));
  for (std::size_t i = 0; i < templ.size(); ++i)
    for (const auto& hit : index.knn(templ.patch(i), table.k)) table.forward.push_back(hit.index);
  rebuild_inverted(table);
  return table;
}

}  // namespace sds
