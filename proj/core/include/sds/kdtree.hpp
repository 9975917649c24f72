#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sds {

struct Neighbor {
  std::int32_t index = -1;
  double distance = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Dense row-major point matrix whose rows split into a primary block and an
/// auxiliary block; the metric is ||dp||^2 + weight * ||da||^2.
struct FeatureMatrix {
  int primary_dim = 0;
  int aux_dim = 0;
  double aux_weight = 0.0;
  std::vector<double> values;

  int dim() const noexcept { return primary_dim + aux_dim; }
  std::size_t rows() const noexcept {
    return dim() == 0 ? 0 : values.size() / static_cast<std::size_t>(dim());
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  double distance(std::span<const double> a, std::span<const double> b) const noexcept;
};

/// Exact k-nearest-neighbor search. Results are sorted by (distance, index),
/// so equidistant rows resolve to the lowest index regardless of tree shape.
class KdTree {
 public:
  explicit KdTree(const FeatureMatrix& points, int leaf_size = 12);

  std::vector<Neighbor> knn(std::span<const double> query, int k) const;
  Neighbor nearest(std::span<const double> query) const;

 private:
  struct Node {
    int begin = 0;
    int end = 0;
    int split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end);
  void search(int node, std::span<const double> query, std::vector<double>& offsets,
              double bound, std::vector<Neighbor>& heap, std::size_t k) const;
  double box_bound(const std::vector<double>& offsets) const noexcept;

  const FeatureMatrix* points_;
  int leaf_size_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
};

/// Reference k-NN by full scan; same ordering contract as KdTree.
std::vector<Neighbor> exhaustive_knn(const FeatureMatrix& points, std::span<const double> query,
                                     int k);

}  // namespace sds
