#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracle.hpp"
#include "sds/bench.hpp"
#include "sds/error.hpp"
#include "sds/matcher.hpp"
#include "sds/synth.hpp"

using namespace sds;

namespace {

std::size_t total(const std::vector<CandidateScale>& scales) {
  std::size_t n = 0;
  for (const auto& s : scales) n += s.count();
  return n;
}

}  // namespace

TEST_CASE("round to patch") {
  CHECK(round_to_patch(20.0, 2) == 20);
  CHECK(round_to_patch(21.0, 2) == 22);  // half rounds away from zero
  CHECK(round_to_patch(20.9, 2) == 20);
  CHECK(round_to_patch(0.3, 2) == 2);
  CHECK(round_to_patch(13.0, 4) == 12);
}

TEST_CASE("candidate counts") {
  SUBCASE("default grid on 100x100 with a 20x20 template") {
    // Window side 2*k for k = 5..20, each axis independently; positions
    // per axis (100 - 2k)/2 + 1.
    std::size_t per_axis = 0;
    for (int k = 5; k <= 20; ++k) per_axis += static_cast<std::size_t>((100 - 2 * k) / 2 + 1);
    const auto grid = ScaleGrid::range(0.5, 2.0, 0.1, 2);
    const auto scales = candidate_scales(100, 100, 20, 20, grid, 2);
    CHECK(scales.size() == 256);
    CHECK(total(scales) == per_axis * per_axis);
    CHECK(generate_candidates(100, 100, 20, 20, grid, 2).size() == per_axis * per_axis);
  }

  SUBCASE("stride equal to the image width") {
    const auto grid = ScaleGrid::fixed(40);
    const auto c = generate_candidates(40, 100, 10, 10, grid, 2);
    CHECK(c.size() == static_cast<std::size_t>(((40 - 10) / 40 + 1) * ((100 - 10) / 40 + 1)));
    REQUIRE(c.size() == 3);
    CHECK(c[0].window == Window{0, 0, 10, 10});
    CHECK(c[1].window == Window{0, 40, 10, 10});
    CHECK(c[2].window == Window{0, 80, 10, 10});
  }

  SUBCASE("windows stay inside and on the patch grid") {
    const auto grid = ScaleGrid::range(0.5, 2.0, 0.1, 4);
    for (const auto& c : generate_candidates(60, 44, 14, 18, grid, 2)) {
      CHECK(c.window.x % 2 == 0);
      CHECK(c.window.y % 2 == 0);
      CHECK(c.window.w % 2 == 0);
      CHECK(c.window.h % 2 == 0);
      CHECK(c.window.x + c.window.w <= 60);
      CHECK(c.window.y + c.window.h <= 44);
    }
  }

  SUBCASE("duplicate sizes after rounding are dropped") {
    ScaleGrid g;
    g.sx_values = {1.0, 1.02, 1.04};
    g.sy_values = {1.0};
    CHECK(candidate_scales(50, 50, 10, 10, g, 2).size() == 1);
  }

  SUBCASE("tied axes walk the diagonal") {
    const auto grid = ScaleGrid::range(0.5, 2.0, 0.1, 2, true);
    const auto scales = candidate_scales(100, 100, 20, 20, grid, 2);
    CHECK(scales.size() == 16);
    for (const auto& s : scales) CHECK(s.sx == s.sy);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(generate_candidates(10, 10, 20, 20, ScaleGrid::range(1.0, 2.0, 0.5, 2), 2),
                    EmptyResultError);
    CHECK_THROWS_AS(candidate_scales(50, 50, 10, 10, ScaleGrid::fixed(3), 2), AlignmentError);
    CHECK_THROWS_AS(candidate_scales(50, 50, 1, 10, ScaleGrid::fixed(2), 2), SizeError);
  }
}

TEST_CASE("effective grid") {
  const auto grid = ScaleGrid::range(0.5, 2.0, 0.1, 4);
  for (Measure m : {Measure::nsds, Measure::ddis, Measure::bbs, Measure::dis, Measure::ssd, Measure::sad}) {
    const auto g = effective_grid(m, grid);
    CHECK(g.sx_values == std::vector<double>{1.0});
    CHECK(g.sy_values == std::vector<double>{1.0});
    CHECK(g.spatial_stride == 4);
  }
  CHECK(effective_grid(Measure::sds, grid).sx_values.size() == 16);
  CHECK(effective_grid(Measure::sddis, grid).sx_values.size() == 16);
}

TEST_CASE("window scorer equals the standalone measures") {
  std::mt19937_64 rng(77);
  const Image target = oracle::random_image(18, 16, 3, rng);
  const Image templ = oracle::random_image(6, 8, 3, rng);
  for (Measure m : {Measure::sds, Measure::nsds, Measure::ddis, Measure::sddis, Measure::bbs, Measure::dis,
                    Measure::ssd, Measure::sad}) {
    for (auto mode : {DistanceMode::appearance_rank, DistanceMode::appearance_location,
                      DistanceMode::appearance_only}) {
      CAPTURE(to_string(m));
      CAPTURE(to_string(mode));
      MatchConfig cfg;
      cfg.measure = m;
      cfg.distance_mode = mode;
      cfg.lambda = 0.7;
      const PatchSet t = patchify(templ, 2, cfg.rank_radius);
      const PatchSet q = patchify(target, 2, cfg.rank_radius);
      const AnnTable table = build_ann_table(t, q, cfg);
      const WindowScorer scorer(t, q, cfg, &table);
      const bool pixel = m == Measure::ssd || m == Measure::sad;
      for (int gw = 1; gw <= q.grid_w(); ++gw) {
        for (int gh = 1; gh <= q.grid_h(); ++gh) {
          if (pixel && (gw != t.grid_w() || gh != t.grid_h())) continue;
          for (int gy = 0; gy + gh <= q.grid_h(); gy += 2) {
            for (int gx = 0; gx + gw <= q.grid_w(); gx += 3) {
              const GridWindow win{gx, gy, gw, gh};
              const double expect = score_measure(t, subgrid(q, win), &table, cfg);
              const double got = scorer.score(win);
              REQUIRE(std::abs(got - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("ssd matching against a naive scan") {
  std::mt19937_64 rng(5);
  const Image target = oracle::random_image(8, 8, 3, rng);
  const Image templ = oracle::random_image(4, 4, 3, rng);
  MatchConfig cfg;
  cfg.measure = Measure::ssd;
  const auto r = match(templ, target, cfg, ScaleGrid::fixed(2));

  double best = -std::numeric_limits<double>::infinity();
  Window best_win;
  for (int y = 0; y + 4 <= 8; y += 2) {
    for (int x = 0; x + 4 <= 8; x += 2) {
      double s = 0.0;
      for (int yy = 0; yy < 4; ++yy)
        for (int xx = 0; xx < 4; ++xx)
          for (int c = 0; c < 3; ++c) {
            const double d = target.at(x + xx, y + yy, c) - templ.at(xx, yy, c);
            s += d * d;
          }
      CHECK(r.score_map.at(x / 2, y / 2) == doctest::Approx(-s).epsilon(1e-12));
      if (-s > best) {
        best = -s;
        best_win = {x, y, 4, 4};
      }
    }
  }
  CHECK(r.best == best_win);
  CHECK(r.best_score == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.evaluated == 9);
  CHECK(r.score_map.grid_w == 4);
  CHECK(r.score_map.grid_h == 4);
  CHECK(std::isinf(r.score_map.at(3, 3)));
}

TEST_CASE("self match finds the template's own location") {
  std::mt19937_64 rng(9);
  const Image reference = oracle::random_image(40, 36, 3, rng);
  const Window box{10, 14, 12, 12};
  const Image templ = crop(reference, box);
  for (Measure m : {Measure::sds, Measure::nsds, Measure::bbs, Measure::ddis, Measure::ssd, Measure::sad}) {
    CAPTURE(to_string(m));
    MatchConfig cfg;
    cfg.measure = m;
    const auto r = match(templ, reference, cfg, ScaleGrid::range(0.5, 2.0, 0.1, 2, true));
    CHECK(bench::overlap_rate(r.best, box) == doctest::Approx(1.0));
  }
}

TEST_CASE("scale 1.3 paste into a flat background") {
  const Image bg(112, 112, 3, 0.5);
  const Image templ = synth::template_image(0, 28, 4);
  synth::PairSpec spec;
  spec.sx = spec.sy = 1.3;
  spec.seed = 11;
  const auto pair = synth::generate_synthetic_pair(bg, templ, spec);
  CHECK(pair.gt_box.w == 36);
  CHECK(pair.gt_box.h == 36);
  const auto r = match(templ, pair.target, MatchConfig{}, ScaleGrid::range(0.5, 2.0, 0.1, 2));
  CAPTURE(r.best);
  CAPTURE(r.best_sx);
  CAPTURE(r.best_sy);
  CHECK(r.best_sx >= 1.2 - 1e-9);
  CHECK(r.best_sx <= 1.4 + 1e-9);
  CHECK(r.best_sy >= 1.2 - 1e-9);
  CHECK(r.best_sy <= 1.4 + 1e-9);
  CHECK(bench::overlap_rate(r.best, pair.gt_box) >= 0.7);
}

TEST_CASE("match result structure") {
  std::mt19937_64 rng(21);
  const Image target = oracle::random_image(30, 26, 3, rng);
  const Image templ = oracle::random_image(8, 6, 3, rng);
  const auto grid = ScaleGrid::range(0.5, 2.0, 0.25, 2);
  MatchOptions opt;
  opt.keep_per_scale_maps = true;
  const auto r = match(templ, target, MatchConfig{}, grid, opt);

  const auto scales = candidate_scales(30, 26, 8, 6, grid, 2);
  CHECK(r.evaluated == total(scales));
  REQUIRE(r.per_scale_maps.size() == scales.size());
  double global = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.score_map.values.size(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& m : r.per_scale_maps) mx = std::max(mx, m.values[i]);
    CHECK(r.score_map.values[i] == mx);
    global = std::max(global, mx);
  }
  CHECK(r.best_score == global);
  CHECK(r.best.x % 2 == 0);
  CHECK(r.best.y % 2 == 0);
}

TEST_CASE("determinism and worker independence") {
  std::mt19937_64 rng(33);
  const Image target = oracle::random_image(36, 30, 3, rng);
  const Image templ = oracle::random_image(10, 8, 3, rng);
  const auto grid = ScaleGrid::range(0.5, 2.0, 0.1, 2);
  for (Measure m : {Measure::sds, Measure::sddis, Measure::bbs}) {
    CAPTURE(to_string(m));
    MatchConfig cfg;
    cfg.measure = m;
    MatchOptions opt;
    opt.keep_per_scale_maps = true;
    const auto a = match(templ, target, cfg, grid, opt);
    const auto b = match(templ, target, cfg, grid, opt);
    cfg.jobs = 3;
    const auto c = match(templ, target, cfg, grid, opt);
    for (const auto* o : {&b, &c}) {
      CHECK(o->best == a.best);
      CHECK(o->best_sx == a.best_sx);
      CHECK(o->best_sy == a.best_sy);
      CHECK(o->best_score == a.best_score);
      CHECK(o->score_map.values == a.score_map.values);
      REQUIRE(o->per_scale_maps.size() == a.per_scale_maps.size());
      for (std::size_t i = 0; i < a.per_scale_maps.size(); ++i)
        CHECK(o->per_scale_maps[i].values == a.per_scale_maps[i].values);
    }
  }
}

TEST_CASE("nsds runs at a single scale") {
  std::mt19937_64 rng(41);
  const Image target = oracle::random_image(30, 30, 3, rng);
  const Image templ = oracle::random_image(8, 8, 3, rng);
  MatchConfig cfg;
  cfg.measure = Measure::nsds;
  const auto r = match(templ, target, cfg, ScaleGrid::range(0.5, 2.0, 0.1, 2));
  CHECK(r.best_sx == 1.0);
  CHECK(r.best_sy == 1.0);
  CHECK(r.best.w == 8);
  CHECK(r.evaluated == static_cast<std::size_t>(12 * 12));
}

TEST_CASE("ties go to the first window in scan order") {
  const Image flat(20, 20, 1, 0.25);
  const Image templ(6, 6, 1, 0.25);
  MatchConfig cfg;
  cfg.measure = Measure::ssd;
  const auto r = match(templ, flat, cfg, ScaleGrid::fixed(2));
  CHECK(r.best == Window{0, 0, 6, 6});
}
