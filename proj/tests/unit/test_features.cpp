#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "sds/error.hpp"
#include "sds/features.hpp"

using namespace sds;

namespace {

Image ramp(int w, int h) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, 0, (x + 2.0 * y) / (w + 2.0 * h));
  return img;
}

}  // namespace

TEST_CASE("circle offsets") {
  CHECK(circle_offsets(1).size() == 5);
  CHECK(circle_offsets(2).size() == 13);
  CHECK(circle_offsets(3).size() == 29);
}

TEST_CASE("rank map on a constant image") {
  const Image flat(9, 9, 1, 0.4);
  const RankMap rm = rank_map(flat, 3);
  // Interior pixel: the whole 29-pixel circle ties with the center.
  CHECK(rm.at(4, 4) == doctest::Approx(29.0 / 9.0));
  // Corner: clipped circle, still divided by r^2.
  int corner = 0;
  for (auto [dx, dy] : circle_offsets(3))
    if (dx >= 0 && dy >= 0) ++corner;
  CHECK(rm.at(0, 0) == doctest::Approx(corner / 9.0));
}

TEST_CASE("rank map extremes and the ramp example") {
  std::mt19937_64 rng(2);
  Image img = oracle::random_image(9, 9, 1, rng);
  img.set(4, 4, 0, 0.0);
  CHECK(rank_map(img, 2).at(4, 4) == doctest::Approx(1.0 / 4.0));

  // 7x7 ramp, r = 2: the center's circle holds 13 pixels; the ones with
  // x + 2y <= 9 (the center's value) are counted.
  const Image r7 = ramp(7, 7);
  int expected = 0;
  for (auto [dx, dy] : circle_offsets(2))
    if ((3 + dx) + 2 * (3 + dy) <= 9) ++expected;
  CHECK(expected == 7);
  CHECK(rank_map(r7, 2).at(3, 3) == doctest::Approx(expected / 4.0));
}

TEST_CASE("rank map matches the brute-force oracle") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = oracle::random_image(11, 8, 1, rng);
    for (int r : {1, 2, 3, 4}) {
      const RankMap rm = rank_map(img, r);
      const auto ref = oracle::rank_map(img, r);
      for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(rm.values[i] == ref[i]);
    }
  }
  CHECK_THROWS_AS(rank_map(Image(4, 4, 3), 2), TypeError);
}

TEST_CASE("rank map: monotone invariance and rotation commutation") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Image img = oracle::random_image(12, 10, 1, rng);
    Image warped(12, 10, 1);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x) warped.set(x, y, 0, std::pow(img.at(x, y), 3.0) * 0.5 + 0.1);
    CHECK(rank_map(warped, 3) == rank_map(img, 3));
    // Border pixels only see the clipped circle, and rotation keeps it
    // clipped the same way, so the whole map commutes.
    CHECK(rank_map(rotate90(img), 3) == rotate90(rank_map(img, 3)));
  }
}

TEST_CASE("patchify geometry") {
  const Image img = ramp(4, 4);
  const PatchSet ps = patchify(img, 2, 1);
  CHECK(ps.grid_w() == 2);
  CHECK(ps.grid_h() == 2);
  REQUIRE(ps.size() == 4);
  CHECK(ps.appearance_dim() == 4);
  CHECK(ps.rank_dim() == 4);
  CHECK(ps.location(0) == Point2{0.25, 0.25});
  CHECK(ps.location(1) == Point2{0.75, 0.25});
  CHECK(ps.location(2) == Point2{0.25, 0.75});
  CHECK(ps.location(3) == Point2{0.75, 0.75});
  // Patch 1 covers pixels x in {2,3}, y in {0,1}, row-major.
  CHECK(ps.appearance(1)[0] == img.at(2, 0));
  CHECK(ps.appearance(1)[1] == img.at(3, 0));
  CHECK(ps.appearance(1)[2] == img.at(2, 1));
  CHECK(ps.appearance(1)[3] == img.at(3, 1));

  const PatchSet odd = patchify(ramp(5, 5), 2, 1);
  CHECK(odd.grid_w() == 2);
  CHECK(odd.grid_h() == 2);

  Image rgb(4, 2, 3, 0.5);
  CHECK(patchify(rgb, 2, 1).appearance_dim() == 12);
  CHECK_THROWS_AS(patchify(ramp(1, 4), 2, 1), SizeError);
}

TEST_CASE("patchify matches the oracle features") {
  std::mt19937_64 rng(5);
  const Image img = oracle::random_image(10, 6, 3, rng);
  const PatchSet ps = patchify(img, 2, 2);
  const oracle::Set ref = oracle::patches(img, img.bounds(), 2, 2);
  REQUIRE(ps.size() == ref.patches.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t k = 0; k < ref.patches[i].appearance.size(); ++k)
      REQUIRE(ps.appearance(i)[k] == ref.patches[i].appearance[k]);
    for (std::size_t k = 0; k < ref.patches[i].rank.size(); ++k) REQUIRE(ps.rank(i)[k] == ref.patches[i].rank[k]);
    CHECK(ps.location(i).x == ref.patches[i].lx);
    CHECK(ps.location(i).y == ref.patches[i].ly);
  }
}

TEST_CASE("subgrid re-expresses a window") {
  std::mt19937_64 rng(6);
  const PatchSet host = patchify(oracle::random_image(12, 12, 1, rng), 2, 2);
  const PatchSet w = subgrid(host, {1, 2, 3, 2});
  REQUIRE(w.size() == 6);
  CHECK(w.global_index(0) == 2 * 6 + 1);
  CHECK(w.global_index(5) == 3 * 6 + 3);
  CHECK(w.location(0) == Point2{0.5 / 3, 0.25});
  CHECK(w.position(4) == Point2{1.0, 1.0});
  CHECK(w.centroid() == Point2{1.0, 0.5});
  CHECK(w.appearance(4)[0] == host.appearance(3 * 6 + 2)[0]);
  CHECK_THROWS_AS(subgrid(host, {5, 5, 2, 2}), BoundsError);
  CHECK_THROWS_AS(subgrid(host, {0, 0, 0, 2}), SizeError);
}

TEST_CASE("grid and pixel windows") {
  CHECK(to_grid({4, 6, 8, 2}, 2) == GridWindow{2, 3, 4, 1});
  CHECK_THROWS_AS(to_grid({1, 0, 4, 4}, 2), AlignmentError);
  CHECK_THROWS_AS(to_grid({0, 0, 3, 4}, 2), AlignmentError);
  CHECK(to_pixels({2, 3, 4, 1}, 2) == Window{4, 6, 8, 2});
}

TEST_CASE("distances") {
  const std::vector<double> a{0.1, 0.0, 0.0, 0.0}, b{0.0, 0.0, 0.0, 0.0};
  const std::vector<double> ra{1.0, 0.5, 0.5, 0.5}, rb{0.5, 0.5, 0.5, 0.5};
  const PatchRef pa{a, ra, {0.5, 0.5}};
  const PatchRef pb{b, rb, {0.0, 0.5}};
  CHECK(distance_al(pa, pa, 2.0) == 0.0);
  CHECK(distance_al(pa, pb, 2.0) == doctest::Approx(0.01 + 2.0 * 0.25));
  CHECK(distance_al(pa, pb, 0.0) == doctest::Approx(0.01));
  CHECK(distance_ar(pa, pb, 1.0) == doctest::Approx(0.01 + 0.25));
  CHECK(distance_a(pa, pb) == doctest::Approx(0.01));
  CHECK(distance(DistanceMode::appearance_rank, pa, pb, 1.0) == distance_ar(pa, pb, 1.0));
  CHECK(distance_al(pa, pb, 1.0) == distance_al(pb, pa, 1.0));

  const std::vector<double> shorter{0.0, 0.0};
  CHECK_THROWS_AS(distance_a(pa, PatchRef{shorter, rb, {}}), TypeError);

  SUBCASE("random pair against a scalar evaluation") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(4), y(4), rx(4), ry(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      rx[i] = u(rng) * 3;
      ry[i] = u(rng) * 3;
    }
    double expect = 0.0;
    for (int i = 0; i < 4; ++i) expect += (x[i] - y[i]) * (x[i] - y[i]) + (rx[i] - ry[i]) * (rx[i] - ry[i]);
    CHECK(distance_ar(PatchRef{x, rx, {}}, PatchRef{y, ry, {}}, 1.0) == doctest::Approx(expect).epsilon(1e-14));
  }

  SUBCASE("rank features survive a 90 degree rotation") {
    std::mt19937_64 rng(23);
    const Image img = oracle::random_image(8, 8, 1, rng);
    const PatchSet ps = patchify(img, 1, 2);
    const PatchSet rs = patchify(rotate90(img), 1, 2);
    // Pixel (x, y) moves to (H-1-y, x) under the clockwise turn.
    for (int y = 3; y < 5; ++y)
      for (int x = 3; x < 5; ++x) {
        const auto i = static_cast<std::size_t>(y * 8 + x);
        const auto j = static_cast<std::size_t>(x * 8 + (7 - y));
        CHECK(distance_ar(ps.patch(i), rs.patch(j), 1.0) == 0.0);
      }
  }
}
