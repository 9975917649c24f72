#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sds/bench.hpp"
#include "sds/config.hpp"
#include "sds/error.hpp"
#include "sds/image.hpp"
#include "sds/image_io.hpp"
#include "sds/matcher.hpp"
#include "sds/statlab.hpp"
#include "sds/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sds;

namespace {

// Usage and input problems; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every tunable has a default, an optional config-file value and an
// optional flag value; the flag wins, then the file.
struct Settings {
  std::string measure = "sds";
  std::string measures;
  std::optional<std::string> distance;
  int patch_size = 2;
  double lambda = 1.0;
  int rank_radius = 3;
  int ann_k = 5;
  double denom_guard = 1.0;
  std::string radius_scaling = "area";
  double scale_min = 0.5;
  double scale_max = 2.0;
  double scale_step = 0.1;
  bool tied_axes = false;
  int stride = 2;
  std::uint64_t seed = 1;
  int jobs = 1;
  int trials = 200;
  int count = 288;
  double noise = 0.0;
  std::string out = "out";
};

json to_json(const Settings& s) {
  json j = {{"measure", s.measure},
            {"patch_size", s.patch_size},
            {"lambda", s.lambda},
            {"rank_radius", s.rank_radius},
            {"ann_k", s.ann_k},
            {"denom_guard", s.denom_guard},
            {"radius_scaling", s.radius_scaling},
            {"scale_min", s.scale_min},
            {"scale_max", s.scale_max},
            {"scale_step", s.scale_step},
            {"tied_axes", s.tied_axes},
            {"stride", s.stride},
            {"seed", s.seed},
            {"jobs", s.jobs},
            {"trials", s.trials},
            {"count", s.count},
            {"noise", s.noise},
            {"out", s.out}};
  if (!s.measures.empty()) j["measures"] = s.measures;
  if (s.distance) j["distance"] = *s.distance;
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void apply_file(const fs::path& path, Settings& s) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  json j;
  try {
    in >> j;
    take(j, "measure", s.measure);
    take(j, "measures", s.measures);
    if (j.contains("distance")) s.distance = j.at("distance").get<std::string>();
    take(j, "patch_size", s.patch_size);
    take(j, "lambda", s.lambda);
    take(j, "rank_radius", s.rank_radius);
    take(j, "ann_k", s.ann_k);
    take(j, "denom_guard", s.denom_guard);
    take(j, "radius_scaling", s.radius_scaling);
    take(j, "scale_min", s.scale_min);
    take(j, "scale_max", s.scale_max);
    take(j, "scale_step", s.scale_step);
    take(j, "tied_axes", s.tied_axes);
    take(j, "stride", s.stride);
    take(j, "seed", s.seed);
    take(j, "jobs", s.jobs);
    take(j, "trials", s.trials);
    take(j, "count", s.count);
    take(j, "noise", s.noise);
    take(j, "out", s.out);
  } catch (const json::exception& e) {
    throw UsageError("bad config file " + path.string() + ": " + e.what());
  }
}

// Flags are parsed into a scratch copy; only those given on the command line
// are copied over the file-level settings.
struct FlagBinding {
  CLI::Option* option;
  std::function<void(Settings&, const Settings&)> copy;
};

template <typename T>
void bind_flag(CLI::App& app, std::vector<FlagBinding>& bindings, Settings& scratch, const std::string& name,
          T Settings::*member, const std::string& help) {
  auto* opt = app.add_option(name, scratch.*member, help);
  bindings.push_back({opt, [member](Settings& dst, const Settings& src) { dst.*member = src.*member; }});
}

void add_match_flags(CLI::App& app, std::vector<FlagBinding>& b, Settings& s) {
  bind_flag(app, b, s, "--measure", &Settings::measure, "sds|nsds|ddis|sddis|bbs|dis|ssd|sad");
  bind_flag(app, b, s, "--patch-size", &Settings::patch_size, "patch side p in pixels");
  bind_flag(app, b, s, "--lambda", &Settings::lambda, "weight of the rank/location term");
  bind_flag(app, b, s, "--rank-radius", &Settings::rank_radius, "rank-map circle radius r");
  bind_flag(app, b, s, "--ann-k", &Settings::ann_k, "k of the template-side ANN sets");
  bind_flag(app, b, s, "--denom-guard", &Settings::denom_guard, "constant added to the SDS denominator");
  bind_flag(app, b, s, "--radius-scaling", &Settings::radius_scaling, "area|linear");
  bind_flag(app, b, s, "--scale-min", &Settings::scale_min, "smallest scale factor");
  bind_flag(app, b, s, "--scale-max", &Settings::scale_max, "largest scale factor");
  bind_flag(app, b, s, "--scale-step", &Settings::scale_step, "scale step");
  bind_flag(app, b, s, "--stride", &Settings::stride, "window stride in pixels (multiple of the patch size)");
  auto* tied = app.add_flag("--tied-axes", s.tied_axes, "use sx = sy only");
  b.push_back({tied, [](Settings& dst, const Settings& src) { dst.tied_axes = src.tied_axes; }});
  auto* dist = app.add_option("--distance", s.distance, "appearance_rank|appearance_location|appearance_only");
  b.push_back({dist, [](Settings& dst, const Settings& src) { dst.distance = src.distance; }});
}

void add_common_flags(CLI::App& app, std::vector<FlagBinding>& b, Settings& s) {
  bind_flag(app, b, s, "--seed", &Settings::seed, "random seed");
  bind_flag(app, b, s, "--jobs", &Settings::jobs, "worker threads (never changes results)");
  bind_flag(app, b, s, "--out", &Settings::out, "output directory");
}

MatchConfig match_config(const Settings& s, const std::string& measure) {
  MatchConfig cfg;
  try {
    cfg.measure = parse_measure(measure);
    if (s.distance) cfg.distance_mode = parse_distance_mode(*s.distance);
    cfg.radius_scaling = parse_radius_scaling(s.radius_scaling);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  cfg.patch_size = s.patch_size;
  cfg.lambda = s.lambda;
  cfg.rank_radius = s.rank_radius;
  cfg.ann_k = s.ann_k;
  cfg.denom_guard = s.denom_guard;
  cfg.jobs = s.jobs;
  cfg.validate();
  return cfg;
}

ScaleGrid scale_grid(const Settings& s) {
  ScaleGrid g = ScaleGrid::range(s.scale_min, s.scale_max, s.scale_step, s.stride, s.tied_axes);
  g.validate();
  return g;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::optional<fs::path> cache_dir() {
  if (const char* env = std::getenv("SDS_CACHE_DIR"); env && *env) return fs::path(env);
  return std::nullopt;
}

void echo_config(const fs::path& dir, const std::string& command, const Settings& s) {
  fs::create_directories(dir);
  json j = to_json(s);
  j["command"] = command;
  std::ofstream(dir / "config.json") << j.dump(2) << "\n";
}

void write_score_map(const fs::path& stem, const ScoreMap& map) {
  {
    std::ofstream csv(stem.string() + ".csv");
    csv << "gx,gy,score\n" << std::setprecision(17);
    for (int y = 0; y < map.grid_h; ++y)
      for (int x = 0; x < map.grid_w; ++x)
        if (std::isfinite(map.at(x, y))) csv << x << ',' << y << ',' << map.at(x, y) << '\n';
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : map.values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  Image img(std::max(1, map.grid_w), std::max(1, map.grid_h), 1);
  for (int y = 0; y < map.grid_h; ++y)
    for (int x = 0; x < map.grid_w; ++x) {
      const double v = map.at(x, y);
      img.set(x, y, 0, std::isfinite(v) && hi > lo ? (v - lo) / (hi - lo) : 0.0);
    }
  io::write_pnm(stem.string() + ".pgm", img);
}

int cmd_match(const Settings& s, const fs::path& templ_path, const fs::path& target_path) {
  Image templ;
  Image target;
  try {
    templ = io::read_image(templ_path);
    target = io::read_image(target_path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  const MatchConfig cfg = match_config(s, s.measure);
  const ScaleGrid grid = effective_grid(cfg.measure, scale_grid(s));
  MatchOptions opts;
  opts.ann_cache_dir = cache_dir();
  const MatchResult r = match(templ, target, cfg, grid, opts);

  const fs::path out(s.out);
  echo_config(out, "match", s);
  {
    std::ofstream rec(out / "match.txt");
    rec << std::setprecision(17) << "template " << templ_path.string() << "\n"
        << "target " << target_path.string() << "\n"
        << "measure " << to_string(cfg.measure) << "\n"
        << "window " << r.best.x << " " << r.best.y << " " << r.best.w << " " << r.best.h << "\n"
        << "scale " << r.best_sx << " " << r.best_sy << "\n"
        << "score " << r.best_score << "\n"
        << "evaluated " << r.evaluated << "\n";
  }
  write_score_map(out / "score_map", r.score_map);
  std::cout << "best window " << r.best << " scale (" << r.best_sx << ", " << r.best_sy << ") score "
            << std::setprecision(10) << r.best_score << "\n";
  return 0;
}

int cmd_bench(const Settings& s, const fs::path& pairs_csv) {
  std::vector<bench::BenchPair> pairs;
  try {
    pairs = bench::read_annotations(pairs_csv);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  if (pairs.empty()) throw UsageError("no pairs in " + pairs_csv.string());
  const auto names = split_list(s.measures.empty() ? s.measure : s.measures);
  std::vector<MatchConfig> cfgs;
  for (const auto& n : names) cfgs.push_back(match_config(s, n));
  bench::BenchOptions opts;
  opts.grid = scale_grid(s);
  opts.jobs = s.jobs;
  opts.ann_cache_dir = cache_dir();
  const auto thresholds = bench::default_thresholds();
  const auto report = bench::run_benchmark(pairs, cfgs, thresholds, opts, names);

  const fs::path out(s.out);
  echo_config(out, "bench", s);
  bench::write_report(out, report);
  const auto ngt = bench::ngt_curve(pairs, thresholds);
  {
    std::ofstream csv(out / "ngt.csv");
    csv << "threshold,ngt\n" << std::setprecision(17);
    for (std::size_t t = 0; t < thresholds.size(); ++t) csv << thresholds[t] << ',' << ngt.success_rate[t] << '\n';
    csv << "auc," << ngt.auc << '\n';
  }
  for (std::size_t c = 0; c < names.size(); ++c)
    std::cout << names[c] << " auc " << std::setprecision(6) << report.curves[c].auc << "\n";
  std::cout << "ngt auc " << ngt.auc << "\n";
  if (!report.skipped.empty()) std::cout << report.skipped.size() << " pairs skipped\n";
  return 0;
}

int cmd_statlab(const Settings& s, const std::string& figure) {
  statlab::StatConfig sc;
  sc.match = match_config(s, "sds");
  sc.trials = s.trials;
  sc.seed = s.seed;
  sc.jobs = s.jobs;
  const fs::path out(s.out);
  echo_config(out, "statlab " + figure, s);

  if (figure == "fig2") {
    const auto names = split_list(s.measures.empty() ? "sds,bbs,ddis,ssd" : s.measures);
    const auto mu = arange_inclusive(0.0, 4.0, 0.25);
    const auto sigma = arange_inclusive(0.25, 4.0, 0.25);
    for (const auto& n : names) {
      const Measure m = match_config(s, n).measure;
      for (int q : {50, 100, 200}) {
        if ((m == Measure::ssd || m == Measure::sad) && q != 100) continue;
        const auto map = statlab::expectation_map_1d(m, 100, q, mu, sigma, sc);
        const std::string stem = "fig2_" + n + "_q" + std::to_string(q);
        statlab::write_csv(out / (stem + ".csv"), map);
        statlab::write_pgm(out / (stem + ".pgm"), map);
        const auto [r, c] = map.argmax();
        std::cout << stem << " argmax mu=" << map.axis1[r] << " sigma=" << map.axis2[c] << "\n";
      }
    }
  } else if (figure == "fig3") {
    const auto names = split_list(s.measures.empty() ? "sds,bbs" : s.measures);
    const std::vector<double> gt{0.7, 1.0, 1.8};
    const auto grid = arange_inclusive(0.5, 2.0, 0.1);
    for (const auto& n : names) {
      const auto est = statlab::scale_estimation_trials(match_config(s, n).measure, gt, grid, sc);
      statlab::write_csv(out / ("fig3_" + n + ".csv"), est);
      for (std::size_t g = 0; g < gt.size(); ++g)
        std::cout << "fig3_" << n << " gt=" << gt[g] << " mode=" << est.mode(g) << "\n";
    }
  } else if (figure == "fig4") {
    const auto names = split_list(s.measures.empty() ? "sds,bbs" : s.measures);
    const std::vector<double> sigma2{0.25, 1.0, 4.0, 10.0};
    const double pi = std::numbers::pi;
    const std::vector<double> theta{0.0, -pi / 4, -pi / 2, -3 * pi / 4, -pi};
    for (const auto& n : names) {
      const auto map = statlab::rotation_map_2d(match_config(s, n).measure, 100, sigma2, theta, sc);
      statlab::write_csv(out / ("fig4_" + n + ".csv"), map);
      statlab::write_pgm(out / ("fig4_" + n + ".pgm"), map);
      for (std::size_t r = 0; r < sigma2.size(); ++r)
        std::cout << "fig4_" << n << " sigma2=" << sigma2[r]
                  << " variation=" << statlab::relative_variation(map, r)
                  << " argmin_theta=" << theta[map.argmin_in_row(r).second] << "\n";
    }
  } else {
    throw UsageError("unknown statlab figure '" + figure + "' (fig2, fig3, fig4)");
  }
  return 0;
}

int cmd_synth(const Settings& s) {
  synth::SuiteOptions opts;
  opts.count = s.count;
  opts.seed = s.seed;
  opts.noise_sigma = s.noise;
  const fs::path out(s.out);
  echo_config(out, "synth", s);
  const auto pairs = synth::write_suite(out, opts);
  std::cout << pairs.size() << " pairs written to " << (out / "annotations.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale-robust template matching with diversity similarity"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");

  Settings scratch;
  std::vector<FlagBinding> bindings;

  auto* match_cmd = app.add_subcommand("match", "match one template against one target image");
  std::string templ_path, target_path;
  match_cmd->add_option("template", templ_path, "template image")->required();
  match_cmd->add_option("target", target_path, "target image")->required();
  add_match_flags(*match_cmd, bindings, scratch);
  add_common_flags(*match_cmd, bindings, scratch);

  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark over an annotation CSV");
  std::string pairs_csv;
  bench_cmd->add_option("--pairs", pairs_csv, "annotation CSV")->required();
  bind_flag(*bench_cmd, bindings, scratch, "--measures", &Settings::measures, "comma-separated measures");
  add_match_flags(*bench_cmd, bindings, scratch);
  add_common_flags(*bench_cmd, bindings, scratch);

  auto* stat_cmd = app.add_subcommand("statlab", "Monte-Carlo expectation experiments");
  std::string figure;
  stat_cmd->add_option("figure", figure, "fig2 | fig3 | fig4")->required();
  bind_flag(*stat_cmd, bindings, scratch, "--trials", &Settings::trials, "trials per cell");
  bind_flag(*stat_cmd, bindings, scratch, "--measures", &Settings::measures, "comma-separated measures");
  bind_flag(*stat_cmd, bindings, scratch, "--lambda", &Settings::lambda, "weight of the rank/location term");
  bind_flag(*stat_cmd, bindings, scratch, "--rank-radius", &Settings::rank_radius, "index-neighborhood rank radius");
  bind_flag(*stat_cmd, bindings, scratch, "--ann-k", &Settings::ann_k, "k of the template-side ANN sets");
  add_common_flags(*stat_cmd, bindings, scratch);

  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic benchmark suite");
  bind_flag(*synth_cmd, bindings, scratch, "--count", &Settings::count, "number of pairs");
  bind_flag(*synth_cmd, bindings, scratch, "--noise", &Settings::noise, "Gaussian pixel noise sigma");
  add_common_flags(*synth_cmd, bindings, scratch);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Settings settings;
    if (!config_path.empty()) apply_file(config_path, settings);
    for (const auto& b : bindings)
      if (b.option->count() > 0) b.copy(settings, scratch);

    if (match_cmd->parsed()) return cmd_match(settings, templ_path, target_path);
    if (bench_cmd->parsed()) return cmd_bench(settings, pairs_csv);
    if (stat_cmd->parsed()) return cmd_statlab(settings, figure);
    if (synth_cmd->parsed()) return cmd_synth(settings);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AlignmentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const EmptyResultError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
