#include "sds/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "sds/features.hpp"

namespace sds {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) noexcept {
  return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

void offer(std::vector<Neighbor>& heap, std::size_t k, Neighbor cand) {
  // `heap` is a max-heap under `closer`: front() is the current worst.
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end(), closer);
  } else if (closer(cand, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), closer);
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end(), closer);
  }
}

}  // namespace

double FeatureMatrix::distance(std::span<const double> a, std::span<const double> b) const noexcept {
  const auto p = static_cast<std::size_t>(primary_dim);
  const auto q = static_cast<std::size_t>(aux_dim);
  return weighted_sq_distance(a.subspan(0, p), b.subspan(0, p), a.subspan(p, q), b.subspan(p, q),
                              aux_weight);
}

KdTree::KdTree(const FeatureMatrix& points, int leaf_size)
    : points_(&points), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(points.rows());
  std::iota(order_.begin(), order_.end(), 0);
  if (!order_.empty()) build(0, static_cast<int>(order_.size()));
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0, -1, -1});
  if (end - begin <= leaf_size_) return id;

  const int dims = points_->dim();
  int best_dim = -1;
  double best_spread = 0.0;
  for (int d = 0; d < dims; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = begin; i < end; ++i) {
      const double v = points_->row(static_cast<std::size_t>(order_[static_cast<std::size_t>(i)]))[static_cast<std::size_t>(d)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double spread = hi - lo;
    if (d >= points_->primary_dim) spread *= points_->aux_weight;
    if (spread > best_spread) {
      best_spread = spread;
      best_dim = d;
    }
  }
  if (best_dim < 0) return id;  // all points coincide

  const int mid = begin + (end - begin) / 2;
  auto value = [&](std::int32_t row) {
    return points_->row(static_cast<std::size_t>(row))[static_cast<std::size_t>(best_dim)];
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::int32_t a, std::int32_t b) { return value(a) < value(b); });
  const double split = value(order_[static_cast<std::size_t>(mid)]);

  nodes_[static_cast<std::size_t>(id)].split_dim = best_dim;
  nodes_[static_cast<std::size_t>(id)].split_value = split;
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::box_bound(const std::vector<double>& offsets) const noexcept {
  double primary = 0.0;
  double aux = 0.0;
  for (int d = 0; d < points_->dim(); ++d) {
    const double o = offsets[static_cast<std::size_t>(d)];
    (d < points_->primary_dim ? primary : aux) += o * o;
  }
  return primary + points_->aux_weight * aux;
}

void KdTree::search(int node_id, std::span<const double> query, std::vector<double>& offsets,
                    double bound, std::vector<Neighbor>& heap, std::size_t k) const {
  // The bound is an exact-arithmetic lower bound computed in floating point;
  // the relative slack keeps rounding from pruning a true neighbor or tie.
  constexpr double slack = 1.0 - 1e-9;
  if (heap.size() == k && bound * slack > heap.front().distance) return;

  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.split_dim < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const auto row = order_[static_cast<std::size_t>(i)];
      offer(heap, k, {row, points_->distance(query, points_->row(static_cast<std::size_t>(row)))});
    }
    return;
  }
  const auto d = static_cast<std::size_t>(node.split_dim);
  const double diff = query[d] - node.split_value;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;

  search(near, query, offsets, bound, heap, k);

  const double saved = offsets[d];
  offsets[d] = std::max(std::abs(diff), saved);
  const double far_bound = box_bound(offsets);
  search(far, query, offsets, far_bound, heap, k);
  offsets[d] = saved;
}

std::vector<Neighbor> KdTree::knn(std::span<const double> query, int k) const {
  std::vector<Neighbor> heap;
  const auto kk = static_cast<std::size_t>(std::clamp<int>(k, 0, static_cast<int>(order_.size())));
  if (kk == 0) return heap;
  heap.reserve(kk + 1);
  std::vector<double> offsets(static_cast<std::size_t>(points_->dim()), 0.0);
  search(0, query, offsets, 0.0, heap, kk);
  std::sort(heap.begin(), heap.end(), closer);
  return heap;
}

Neighbor KdTree::nearest(std::span<const double> query) const {
  auto hits = knn(query, 1);
  return hits.empty() ? Neighbor{} : hits.front();
}

std::vector<Neighbor> exhaustive_knn(const FeatureMatrix& points, std::span<const double> query,
                                     int k) {
  std::vector<Neighbor> heap;
  const auto kk = static_cast<std::size_t>(std::clamp<int>(k, 0, static_cast<int>(points.rows())));
  if (kk == 0) return heap;
  for (std::size_t i = 0; i < points.rows(); ++i)
    offer(heap, kk, {static_cast<std::int32_t>(i), points.distance(query, points.row(i))});
  std::sort(heap.begin(), heap.end(), closer);
  return heap;
}

}  // namespace sds
