#include <benchmark/benchmark.h>

#include <random>

#include "sds/matcher.hpp"
#include "sds/nn.hpp"
#include "sds/synth.hpp"

using namespace sds;

namespace {

Image noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.set(x, y, c, u(rng));
  return img;
}

}  // namespace

static void BM_PatchifyRank(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(patchify(img, 2, 3));
}
BENCHMARK(BM_PatchifyRank)->Arg(64)->Arg(128);

static void BM_KdTreeKnn(benchmark::State& state) {
  const PatchSet ps = patchify(noise_image(112, 112, 2), 2, 3);
  const FeatureMatrix fm = feature_matrix(ps, DistanceMode::appearance_rank, 1.0);
  const KdTree tree(fm);
  const auto k = static_cast<int>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.knn(fm.row(i), k));
    i = (i + 97) % fm.rows();
  }
}
BENCHMARK(BM_KdTreeKnn)->Arg(1)->Arg(5);

static void BM_ExhaustiveKnn(benchmark::State& state) {
  const PatchSet ps = patchify(noise_image(112, 112, 2), 2, 3);
  const FeatureMatrix fm = feature_matrix(ps, DistanceMode::appearance_rank, 1.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exhaustive_knn(fm, fm.row(i), 5));
    i = (i + 97) % fm.rows();
  }
}
BENCHMARK(BM_ExhaustiveKnn);

static void BM_AnnTable(benchmark::State& state) {
  const PatchSet t = patchify(noise_image(28, 28, 3), 2, 3);
  const PatchSet q = patchify(noise_image(112, 112, 4), 2, 3);
  const MatchConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_ann_table(t, q, cfg));
}
BENCHMARK(BM_AnnTable);

static void BM_WindowScore(benchmark::State& state) {
  const PatchSet t = patchify(noise_image(28, 28, 3), 2, 3);
  const PatchSet q = patchify(noise_image(112, 112, 4), 2, 3);
  MatchConfig cfg;
  cfg.measure = static_cast<Measure>(state.range(0));
  const AnnTable table = build_ann_table(t, q, cfg);
  const WindowScorer scorer(t, q, cfg, &table);
  auto scratch = scorer.make_scratch();
  int x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scorer.score(GridWindow{x, 10, 14, 14}, *scratch));
    x = (x + 1) % 40;
  }
  state.SetLabel(std::string(to_string(cfg.measure)));
}
BENCHMARK(BM_WindowScore)
    ->Arg(static_cast<int>(Measure::sds))
    ->Arg(static_cast<int>(Measure::bbs))
    ->Arg(static_cast<int>(Measure::ddis));

static void BM_MatchSynthetic(benchmark::State& state) {
  const Image bg = synth::background(0, 112, 112, 1);
  const Image templ = synth::template_image(0, 28, 1);
  synth::PairSpec spec;
  spec.sx = spec.sy = 1.5;
  spec.seed = 3;
  const auto pair = synth::generate_synthetic_pair(bg, templ, spec);
  const bool tied = state.range(0) != 0;
  const auto grid = ScaleGrid::range(0.5, 2.0, 0.1, 2, tied);
  for (auto _ : state) benchmark::DoNotOptimize(match(templ, pair.target, MatchConfig{}, grid));
  state.SetLabel(tied ? "tied axes" : "independent axes");
}
BENCHMARK(BM_MatchSynthetic)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
