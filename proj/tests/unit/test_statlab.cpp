#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "sds/error.hpp"
#include "sds/statlab.hpp"

using namespace sds;
using namespace sds::statlab;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("SDS_TEST_TMP");
  const auto base = env ? std::filesystem::path(env) : std::filesystem::temp_directory_path();
  const auto dir = base / ("statlab_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

StatConfig small_config(int trials, std::uint64_t seed = 3) {
  StatConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

double mean_se(const ExpectationMap& m) {
  return std::accumulate(m.stderr_.begin(), m.stderr_.end(), 0.0) / static_cast<double>(m.stderr_.size());
}

}  // namespace

TEST_CASE("point sampling") {
  GaussianSpec g1;
  CHECK(sample_point_set(g1, 50, 9) == sample_point_set(g1, 50, 9));
  CHECK(sample_point_set(g1, 50, 9) != sample_point_set(g1, 50, 10));

  SUBCASE("large-sample mean") {
    const auto pts = sample_point_set(g1, 100000, 1);
    double sum = 0.0, sq = 0.0;
    for (const auto& p : pts) {
      sum += p.x;
      sq += p.x * p.x;
      REQUIRE(p.y == 0.0);
    }
    CHECK(std::abs(sum / 1e5) < 0.02);
    CHECK(sq / 1e5 == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("rotation") {
    GaussianSpec g;
    g.dim = 2;
    g.sigma1 = 1.0;
    g.sigma2 = 3.0;
    const auto base = sample_point_set(g, 200, 4);
    g.theta = 2.0 * std::numbers::pi;
    const auto full_turn = sample_point_set(g, 200, 4);
    g.theta = -std::numbers::pi / 2;
    const auto quarter = sample_point_set(g, 200, 4);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(full_turn[i].x == doctest::Approx(base[i].x).epsilon(1e-12));
      CHECK(full_turn[i].y == doctest::Approx(base[i].y).epsilon(1e-12));
      CHECK(quarter[i].x == doctest::Approx(base[i].y).epsilon(1e-12));
      CHECK(quarter[i].y == doctest::Approx(-base[i].x).epsilon(1e-12));
    }
    // Axis-aligned draws: the spread follows sigma1/sigma2 at theta = 0.
    const auto wide = sample_point_set(GaussianSpec{2, 0.0, 0.0, 1.0, 1.0, 3.0, 0.0}, 20000, 8);
    double vx = 0.0, vy = 0.0;
    for (const auto& p : wide) {
      vx += p.x * p.x;
      vy += p.y * p.y;
    }
    CHECK(vx / 20000 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(vy / 20000 == doctest::Approx(9.0).epsilon(0.05));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(sample_point_set(g1, 0, 1), ParameterError);
    GaussianSpec bad;
    bad.sigma = -1.0;
    CHECK_THROWS_AS(sample_point_set(bad, 5, 1), ParameterError);
  }
}

TEST_CASE("stream generators") {
  auto a = stream_rng(5, 17);
  auto b = stream_rng(5, 17);
  auto c = stream_rng(5, 18);
  auto d = stream_rng(6, 17);
  const auto va = a(), vb = b(), vc = c(), vd = d();
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("index rank") {
  CHECK(index_rank({1.0, 3.0, 2.0}, 1) == std::vector<double>{1.0, 3.0, 1.0});
  CHECK(index_rank({1.0, 3.0, 2.0}, 2) == std::vector<double>{0.25, 0.75, 0.5});
  CHECK(index_rank({4.0, 4.0, 4.0, 4.0}, 1) == std::vector<double>{2.0, 3.0, 3.0, 2.0});
  // Strictly increasing transform leaves the ranks alone.
  const std::vector<double> v{0.3, -1.2, 2.5, 0.31, 0.0, 7.0};
  std::vector<double> e;
  for (double x : v) e.push_back(std::exp(x));
  CHECK(index_rank(v, 2) == index_rank(e, 2));
  CHECK_THROWS_AS(index_rank(v, 0), ParameterError);
}

TEST_CASE("point patch sets") {
  const PatchSet s = points_1d({0.5, -1.0, 2.0, 0.0}, 1);
  REQUIRE(s.size() == 4);
  CHECK(s.appearance_dim() == 1);
  CHECK(s.appearance(2)[0] == 2.0);
  CHECK(s.rank(1)[0] == 1.0);
  CHECK(s.location(0).x == doctest::Approx(0.125));
  CHECK(s.location(3).x == doctest::Approx(0.875));
  CHECK(s.location(3).y == doctest::Approx(0.5));
  CHECK(s.position(2).x == 2.0);

  const std::vector<Point2> pts{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 2.0}};
  const PatchSet p = points_2d(pts, 2.0, 1);
  REQUIRE(p.size() == 3);
  CHECK(p.location(0).x == doctest::Approx(0.75));
  CHECK(p.location(2).y == doctest::Approx(1.0));
  CHECK(p.position(2).y == 2.0);
  // Centroid (0, 2/3): radius of (0, 2) is 4/3, divided by the frame.
  CHECK(p.appearance(2)[0] == doctest::Approx((4.0 / 3.0) / 2.0));
}

TEST_CASE("summary statistics") {
  const auto st = mean_and_stderr({1.0, 2.0, 3.0, 4.0});
  CHECK(st.mean == doctest::Approx(2.5));
  CHECK(st.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_and_stderr({2.0}).stderr_ == 0.0);

  CHECK(pearson({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3, 4}, {-1, -2, -3, -4}) == doctest::Approx(-1.0));
  CHECK(pearson({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));

  ExpectationMap m;
  m.axis1 = {0.0};
  m.axis2 = {0.0, 1.0, 2.0};
  m.mean = {9.0, 10.0, 11.0};
  m.stderr_ = {0.0, 0.0, 0.0};
  CHECK(relative_variation(m, 0) == doctest::Approx(0.2));
  CHECK(m.argmax() == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(m.argmin_in_row(0) == std::pair<std::size_t, std::size_t>{0, 0});
}

TEST_CASE("expectation maps") {
  const std::vector<double> mu{0.0, 1.0}, sigma{0.5, 1.0, 2.0};

  SUBCASE("single-trial maps are reproducible for every measure") {
    for (Measure m : {Measure::sds, Measure::nsds, Measure::bbs, Measure::dis, Measure::ddis, Measure::ssd,
                      Measure::sad}) {
      CAPTURE(to_string(m));
      const auto a = expectation_map_1d(m, 30, 30, mu, sigma, small_config(1));
      const auto b = expectation_map_1d(m, 30, 30, mu, sigma, small_config(1));
      CHECK(a.mean == b.mean);
      CHECK(a.trials == 1);
      REQUIRE(a.mean.size() == 6);
    }
  }

  SUBCASE("worker count does not change the map") {
    auto cfg = small_config(20);
    const auto a = expectation_map_1d(Measure::sds, 40, 20, mu, sigma, cfg);
    cfg.jobs = 3;
    const auto b = expectation_map_1d(Measure::sds, 40, 20, mu, sigma, cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
  }

  SUBCASE("doubling trials shrinks the standard error by about 1/sqrt(2)") {
    const auto a = expectation_map_1d(Measure::sds, 50, 50, mu, sigma, small_config(200));
    const auto b = expectation_map_1d(Measure::sds, 50, 50, mu, sigma, small_config(400));
    const double ratio = mean_se(b) / mean_se(a);
    CHECK(ratio > 0.8 / std::sqrt(2.0));
    CHECK(ratio < 1.2 / std::sqrt(2.0));
  }

  SUBCASE("pixel baselines need equal sizes") {
    CHECK_THROWS_AS(expectation_map_1d(Measure::ssd, 30, 20, mu, sigma, small_config(1)), ParameterError);
  }

  SUBCASE("csv and pgm output") {
    const auto dir = scratch_dir("maps");
    const auto a = expectation_map_1d(Measure::bbs, 20, 20, mu, sigma, small_config(2));
    write_csv(dir / "m.csv", a);
    write_pgm(dir / "m.pgm", a, 4);
    std::ifstream in(dir / "m.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "mu,sigma,mean,stderr,trials");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 6);
    CHECK(std::filesystem::file_size(dir / "m.pgm") > 0);
  }
}

TEST_CASE("scale estimation") {
  const std::vector<double> s_grid{0.5, 1.0, 1.5, 2.0};

  SUBCASE("histograms are normalized and reproducible") {
    const auto a = scale_estimation_trials(Measure::sds, {1.0, 1.5}, s_grid, small_config(10));
    const auto b = scale_estimation_trials(Measure::sds, {1.0, 1.5}, s_grid, small_config(10));
    CHECK(a.histogram == b.histogram);
    for (const auto& row : a.histogram) CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
    CHECK(a.mode(0) == doctest::Approx(1.0));
  }

  SUBCASE("degenerate background copied from the template") {
    ScaleTrialOptions opt;
    opt.background_from_template = true;
    const auto r = scale_estimation_trials(Measure::sds, {1.0}, s_grid, small_config(5), opt);
    REQUIRE(r.histogram.size() == 1);
    CHECK(std::accumulate(r.histogram[0].begin(), r.histogram[0].end(), 0.0) == doctest::Approx(1.0));
  }

  SUBCASE("infeasible scales") {
    CHECK_THROWS_AS(scale_estimation_trials(Measure::sds, {2.5}, s_grid, small_config(1)), ParameterError);
    CHECK_THROWS_AS(scale_estimation_trials(Measure::sds, {1.0}, {3.0}, small_config(1)), ParameterError);
  }
}

TEST_CASE("rotation maps") {
  const std::vector<double> s2{0.5, 2.0};
  const std::vector<double> theta{0.0, -std::numbers::pi / 2, -std::numbers::pi};
  auto cfg = small_config(4);
  const auto a = rotation_map_2d(Measure::sds, 40, s2, theta, cfg);
  cfg.jobs = 2;
  const auto b = rotation_map_2d(Measure::sds, 40, s2, theta, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.mean.size() == 6);
  CHECK_THROWS_AS(rotation_map_2d(Measure::bbs, 40, {0.0}, theta, cfg), ParameterError);
}
