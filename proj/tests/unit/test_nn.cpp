#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "oracle.hpp"
#include "sds/error.hpp"
#include "sds/features.hpp"
#include "sds/kdtree.hpp"
#include "sds/nn.hpp"

using namespace sds;

namespace {

FeatureMatrix random_matrix(std::size_t rows, int primary, int aux, double weight, std::mt19937_64& rng,
                            int levels = 0) {
  FeatureMatrix m;
  m.primary_dim = primary;
  m.aux_dim = aux;
  m.aux_weight = weight;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < rows * static_cast<std::size_t>(primary + aux); ++i) {
    const double v = u(rng);
    // Quantized values create many exact ties.
    m.values.push_back(levels > 0 ? std::floor(v * levels) / levels : v);
  }
  return m;
}

}  // namespace

TEST_CASE("kd-tree agrees with the exhaustive scan, ties included") {
  std::mt19937_64 rng(3);
  for (int levels : {0, 3}) {
    for (int trial = 0; trial < 6; ++trial) {
      const FeatureMatrix pts = random_matrix(50 + 37 * trial, 4, 4, 0.5 + trial * 0.5, rng, levels);
      const KdTree tree(pts, 1 + trial * 3);
      for (int q = 0; q < 40; ++q) {
        const FeatureMatrix query = random_matrix(1, 4, 4, 0.0, rng, levels);
        for (int k : {1, 3, 10}) {
          const auto a = tree.knn(query.row(0), k);
          const auto b = exhaustive_knn(pts, query.row(0), k);
          REQUIRE(a == b);
        }
        REQUIRE(tree.nearest(query.row(0)) == exhaustive_knn(pts, query.row(0), 1).front());
      }
    }
  }
}

TEST_CASE("nearest-neighbor index") {
  std::mt19937_64 rng(12);
  const Image img = oracle::random_image(14, 12, 1, rng);
  const PatchSet ps = patchify(img, 2, 2);
  MatchConfig cfg;

  SUBCASE("stored rows come back at distance zero") {
    const NNIndex idx = build_index(ps, cfg);
    CHECK(idx.uses_tree());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const Neighbor n = nn_query(idx, ps.patch(i));
      CHECK(n.index == static_cast<std::int32_t>(i));
      CHECK(n.distance == 0.0);
    }
  }

  SUBCASE("single-patch set answers every query") {
    const PatchSet one = patchify(crop(img, {0, 0, 2, 2}), 2, 2);
    const NNIndex idx = build_index(one, cfg);
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(nn_query(idx, ps.patch(i)).index == 0);
  }

  SUBCASE("equidistant rows resolve to the lower index") {
    Image dup(20, 2, 1, 0.2);
    for (int x = 6; x < 8; ++x)
      for (int y = 0; y < 2; ++y) dup.set(x, y, 0, 0.8);
    for (int x = 14; x < 16; ++x)
      for (int y = 0; y < 2; ++y) dup.set(x, y, 0, 0.8);
    MatchConfig ao;
    ao.distance_mode = DistanceMode::appearance_only;
    const PatchSet d = patchify(dup, 2, 1);
    const NNIndex idx = build_index(d, ao);
    CHECK(nn_query(idx, d.patch(7)).index == 3);
  }

  SUBCASE("random queries match the oracle in every mode") {
    const Image qimg = oracle::random_image(10, 10, 1, rng);
    const PatchSet qs = patchify(qimg, 2, 2);
    const auto tref = oracle::patches(img, img.bounds(), 2, 2);
    const auto qref = oracle::patches(qimg, qimg.bounds(), 2, 2);
    for (auto mode : {DistanceMode::appearance_rank, DistanceMode::appearance_location,
                      DistanceMode::appearance_only})
      for (double lambda : {0.5, 1.0, 2.0}) {
        const NNIndex idx(ps, mode, lambda);
        for (std::size_t j = 0; j < qs.size(); ++j)
          REQUIRE(idx.nearest(qs.patch(j)).index == oracle::nn(qref.patches[j], tref, mode, lambda));
      }
  }

  SUBCASE("wide features use a scan with the same answers") {
    const Image rgb = oracle::random_image(12, 12, 3, rng);
    const PatchSet wide = patchify(rgb, 3, 2);  // 27 appearance values
    const NNIndex idx = build_index(wide, cfg);
    CHECK_FALSE(idx.uses_tree());
    for (std::size_t i = 0; i < wide.size(); ++i) CHECK(idx.nearest(wide.patch(i)).index == static_cast<int>(i));
  }

  SUBCASE("errors") {
    const NNIndex idx = build_index(ps, cfg);
    const PatchSet rgb = patchify(oracle::random_image(4, 4, 3, rng), 2, 2);
    CHECK_THROWS_AS(nn_query(idx, rgb.patch(0)), TypeError);
    CHECK_THROWS_AS(build_index(PatchSet{}, cfg), SizeError);
  }
}

TEST_CASE("ANN table") {
  std::mt19937_64 rng(21);
  const Image timg = oracle::random_image(8, 10, 1, rng);
  const Image qimg = oracle::random_image(40, 60, 1, rng);  // 20 x 30 patches
  const PatchSet t = patchify(timg, 2, 3);
  const PatchSet q = patchify(qimg, 2, 3);
  const auto tref = oracle::patches(timg, timg.bounds(), 2, 3);
  const auto qref = oracle::patches(qimg, qimg.bounds(), 2, 3);

  for (int k : {3, 5, 10}) {
    MatchConfig cfg;
    cfg.ann_k = k;
    const AnnTable table = build_ann_table(t, q, cfg);
    CHECK(table.k == k);
    CHECK_FALSE(table.clamped);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto expect = oracle::knn(tref.patches[i], qref, k, cfg.effective_distance_mode(), cfg.lambda);
      const auto got = table.neighbors(i);
      REQUIRE(std::vector<int>(got.begin(), got.end()) == expect);
    }
    // Transpose soundness in both directions.
    for (std::size_t g = 0; g < q.size(); ++g)
      for (auto i : table.inverted[g]) {
        const auto nb = table.neighbors(static_cast<std::size_t>(i));
        CHECK(std::find(nb.begin(), nb.end(), static_cast<std::int32_t>(g)) != nb.end());
      }
    std::size_t total = 0;
    for (const auto& l : table.inverted) total += l.size();
    CHECK(total == t.size() * static_cast<std::size_t>(k));
    CHECK(build_ann_table(t, q, cfg) == table);
  }

  SUBCASE("self table ranks the identical patch first") {
    const AnnTable self = build_ann_table(t, t, MatchConfig{});
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(self.neighbors(i)[0] == static_cast<std::int32_t>(i));
  }

  SUBCASE("k beyond the target clamps") {
    const PatchSet small = patchify(crop(qimg, {0, 0, 4, 4}), 2, 3);
    MatchConfig cfg;
    cfg.ann_k = 50;
    const AnnTable table = build_ann_table(t, small, cfg);
    CHECK(table.clamped);
    CHECK(table.k == 4);
    for (std::size_t g = 0; g < small.size(); ++g) CHECK(table.tau(g) == static_cast<int>(t.size()));
  }

  SUBCASE("cache round trip") {
    const char* env = std::getenv("SDS_TEST_TMP");
    const auto dir = (env ? std::filesystem::path(env) : std::filesystem::temp_directory_path()) / "ann_cache";
    std::filesystem::remove_all(dir);
    MatchConfig cfg;
    const AnnTable built = cached_ann_table(t, q, cfg, dir);
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
    CHECK(cached_ann_table(t, q, cfg, dir) == built);
    const auto key = ann_cache_key(t, q, cfg);
    MatchConfig other = cfg;
    other.ann_k = 4;
    CHECK(ann_cache_key(t, q, other) != key);
    const auto file = dir / "roundtrip.bin";
    save_ann_table(file, key, built);
    CHECK(load_ann_table(file, key) == built);
    CHECK_FALSE(load_ann_table(file, key + 1).has_value());
  }
}
