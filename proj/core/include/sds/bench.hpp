#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sds/config.hpp"
#include "sds/window.hpp"

namespace sds::bench {

struct BenchPair {
  std::string id;
  std::filesystem::path reference_path;
  Window template_box;
  std::filesystem::path target_path;
  Window gt_box;
  std::string tag;  // category first, then ';'-separated key=value parameters
};

/// First ';'-separated token of the tag ("rotation", "scaling", ...).
std::string tag_category(const std::string& tag);
/// Value of `key=` inside the tag, or "" when absent.
std::string tag_value(const std::string& tag, const std::string& key);

/// Columns: ref_path,tx,ty,tw,th,target_path,gx,gy,gw,gh,tag. Relative
/// image paths are resolved against the CSV's directory. A header row is
/// optional; pair ids are the 0-based row numbers.
std::vector<BenchPair> read_annotations(const std::filesystem::path& csv);
void write_annotations(const std::filesystem::path& csv, const std::vector<BenchPair>& pairs);

/// Pixel-count intersection over union.
double overlap_rate(const Window& a, const Window& b);

struct SuccessCurve {
  std::vector<double> thresholds;
  std::vector<double> success_rate;
  double auc = 0.0;

  bool monotone() const;
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_thresholds();

/// Rate at t = fraction of overlaps >= t; auc = mean rate.
SuccessCurve success_curve(const std::vector<double>& overlaps, const std::vector<double>& thresholds);

/// Template-sized box centered on the ground truth's centroid.
Window ngt_window(const BenchPair& pair);
SuccessCurve ngt_curve(const std::vector<BenchPair>& pairs, const std::vector<double>& thresholds);

struct PairResult {
  std::size_t pair_index = 0;
  std::string pair_id;
  std::string label;
  std::string tag;
  Window window;
  double sx = 1.0;
  double sy = 1.0;
  double score = 0.0;
  double overlap = 0.0;
};

struct BenchOptions {
  ScaleGrid grid = ScaleGrid::range(0.5, 2.0, 0.1, 2);
  int jobs = 1;
  double max_skip_fraction = 0.2;
  std::optional<std::filesystem::path> ann_cache_dir;
};

struct BenchmarkReport {
  std::vector<double> thresholds;
  std::vector<std::string> labels;    // one per config
  std::vector<SuccessCurve> curves;   // one per config
  std::vector<PairResult> per_pair;   // pair-major, config-minor
  std::vector<std::size_t> skipped;   // indices of unreadable pairs
  std::vector<std::string> warnings;

  /// Curve of config `cfg_index` over the pairs accepted by `keep`.
  SuccessCurve subset_curve(std::size_t cfg_index,
                            const std::function<bool(const PairResult&)>& keep) const;
};

/// Matches every (pair, config), pairs in parallel. Labels default to the
/// measure names. Unreadable pairs are skipped with a warning; more than
/// max_skip_fraction skipped is an IoError.
BenchmarkReport run_benchmark(const std::vector<BenchPair>& pairs, const std::vector<MatchConfig>& cfgs,
                              const std::vector<double>& thresholds, const BenchOptions& options = {},
                              const std::vector<std::string>& labels = {});

/// curves.csv, auc.csv and per_pair.csv.
void write_report(const std::filesystem::path& dir, const BenchmarkReport& report);

}  // namespace sds::bench
