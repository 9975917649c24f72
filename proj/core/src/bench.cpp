#include "sds/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "sds/error.hpp"
#include "sds/image.hpp"
#include "sds/image_io.hpp"
#include "sds/matcher.hpp"
#include "sds/parallel.hpp"

namespace sds::bench {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

std::string tag_category(const std::string& tag) { return tag.substr(0, tag.find(';')); }

std::string tag_value(const std::string& tag, const std::string& key) {
  for (const auto& part : split(tag, ';')) {
    const auto eq = part.find('=');
    if (eq != std::string::npos && part.substr(0, eq) == key) return part.substr(eq + 1);
  }
  return {};
}

std::vector<BenchPair> read_annotations(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot read annotations " + csv.string());
  const auto base = csv.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  std::vector<BenchPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, ',');
    for (auto& v : f) v = trim(v);
    if (f.size() < 10 || f.size() > 11)
      throw IoError(csv.string() + ":" + std::to_string(line_no) + ": expected 11 columns");
    int nums[8];
    bool numeric = true;
    for (int k = 0; k < 8; ++k) {
      const auto v = parse_int(f[static_cast<std::size_t>(k < 4 ? k + 1 : k + 2)]);
      if (!v) {
        numeric = false;
        break;
      }
      nums[k] = *v;
    }
    if (!numeric) {
      if (pairs.empty() && line_no == 1) continue;  // header
      throw IoError(csv.string() + ":" + std::to_string(line_no) + ": non-integer box coordinate");
    }
    BenchPair p;
    p.id = std::to_string(pairs.size());
    p.reference_path = resolve(f[0]);
    p.template_box = {nums[0], nums[1], nums[2], nums[3]};
    p.target_path = resolve(f[5]);
    p.gt_box = {nums[4], nums[5], nums[6], nums[7]};
    p.tag = f.size() == 11 ? f[10] : std::string{};
    if (!p.template_box.valid() || !p.gt_box.valid())
      throw IoError(csv.string() + ":" + std::to_string(line_no) + ": empty box");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_annotations(const std::filesystem::path& csv, const std::vector<BenchPair>& pairs) {
  std::ofstream out(csv);
  if (!out) throw IoError("cannot write " + csv.string());
  const auto base = csv.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    return base.empty() ? p.generic_string() : p.lexically_relative(base).generic_string();
  };
  out << "ref_path,tx,ty,tw,th,target_path,gx,gy,gw,gh,tag\n";
  for (const auto& p : pairs) {
    const auto& t = p.template_box;
    const auto& g = p.gt_box;
    out << rel(p.reference_path) << ',' << t.x << ',' << t.y << ',' << t.w << ',' << t.h << ','
        << rel(p.target_path) << ',' << g.x << ',' << g.y << ',' << g.w << ',' << g.h << ',' << p.tag
        << '\n';
  }
}

double overlap_rate(const Window& a, const Window& b) {
  const long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long inter = ix * iy;
  const long uni = static_cast<long>(a.w) * a.h + static_cast<long>(b.w) * b.h - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

bool SuccessCurve::monotone() const {
  for (std::size_t i = 1; i < success_rate.size(); ++i)
    if (success_rate[i] > success_rate[i - 1]) return false;
  return std::is_sorted(thresholds.begin(), thresholds.end());
}

std::vector<double> default_thresholds() { return arange_inclusive(0.05, 0.95, 0.05); }

SuccessCurve success_curve(const std::vector<double>& overlaps, const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw ParameterError("no thresholds");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw ParameterError("thresholds must ascend");
  SuccessCurve c;
  c.thresholds = thresholds;
  for (double t : thresholds) {
    const auto hits = std::count_if(overlaps.begin(), overlaps.end(), [t](double o) { return o >= t; });
    c.success_rate.push_back(overlaps.empty() ? 0.0
                                              : static_cast<double>(hits) / static_cast<double>(overlaps.size()));
  }
  c.auc = std::accumulate(c.success_rate.begin(), c.success_rate.end(), 0.0) /
          static_cast<double>(c.success_rate.size());
  return c;
}

Window ngt_window(const BenchPair& pair) {
  const auto& g = pair.gt_box;
  const auto& t = pair.template_box;
  const auto x = static_cast<int>(std::floor((2.0 * g.x + g.w - t.w) / 2.0 + 0.5));
  const auto y = static_cast<int>(std::floor((2.0 * g.y + g.h - t.h) / 2.0 + 0.5));
  return {x, y, t.w, t.h};
}

SuccessCurve ngt_curve(const std::vector<BenchPair>& pairs, const std::vector<double>& thresholds) {
  std::vector<double> overlaps;
  overlaps.reserve(pairs.size());
  for (const auto& p : pairs) overlaps.push_back(overlap_rate(ngt_window(p), p.gt_box));
  return success_curve(overlaps, thresholds);
}

SuccessCurve BenchmarkReport::subset_curve(std::size_t cfg_index,
                                           const std::function<bool(const PairResult&)>& keep) const {
  std::vector<double> overlaps;
  for (const auto& r : per_pair)
    if (r.label == labels.at(cfg_index) && keep(r)) overlaps.push_back(r.overlap);
  return success_curve(overlaps, thresholds);
}

BenchmarkReport run_benchmark(const std::vector<BenchPair>& pairs, const std::vector<MatchConfig>& cfgs,
                              const std::vector<double>& thresholds, const BenchOptions& options,
                              const std::vector<std::string>& labels) {
  if (pairs.empty()) throw ParameterError("no benchmark pairs");
  if (cfgs.empty()) throw ParameterError("no match configurations");
  if (!labels.empty() && labels.size() != cfgs.size())
    throw ParameterError("one label per configuration is required");
  for (const auto& c : cfgs) c.validate();
  options.grid.validate();

  BenchmarkReport report;
  report.thresholds = thresholds;
  for (std::size_t c = 0; c < cfgs.size(); ++c)
    report.labels.push_back(labels.empty() ? std::string(to_string(cfgs[c].measure)) : labels[c]);

  struct Slot {
    std::vector<PairResult> results;
    std::string warning;
  };
  std::vector<Slot> slots(pairs.size());
  MatchOptions mopts;
  mopts.ann_cache_dir = options.ann_cache_dir;

  parallel_for(pairs.size(), options.jobs, [&](std::size_t i, std::size_t) {
    const auto& pair = pairs[i];
    Image templ;
    Image target;
    try {
      const Image reference = io::read_image(pair.reference_path);
      templ = crop(reference, pair.template_box);
      target = io::read_image(pair.target_path);
      if (!pair.gt_box.inside(target.width(), target.height()))
        throw BoundsError("ground-truth box outside the target");
    } catch (const Error& e) {
      slots[i].warning = "pair " + pair.id + " skipped: " + e.what();
      return;
    }
    for (std::size_t c = 0; c < cfgs.size(); ++c) {
      MatchConfig cfg = cfgs[c];
      cfg.jobs = 1;
      const MatchResult m = match(templ, target, cfg, options.grid, mopts);
      PairResult r;
      r.pair_index = i;
      r.pair_id = pair.id;
      r.label = report.labels[c];
      r.tag = pair.tag;
      r.window = m.best;
      r.sx = m.best_sx;
      r.sy = m.best_sy;
      r.score = m.best_score;
      r.overlap = overlap_rate(m.best, pair.gt_box);
      slots[i].results.push_back(r);
    }
  });

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].warning.empty()) {
      report.skipped.push_back(i);
      report.warnings.push_back(slots[i].warning);
      std::clog << "warning: " << slots[i].warning << "\n";
    }
    for (auto& r : slots[i].results) report.per_pair.push_back(std::move(r));
  }
  if (static_cast<double>(report.skipped.size()) > options.max_skip_fraction * static_cast<double>(pairs.size()))
    throw IoError(std::to_string(report.skipped.size()) + " of " + std::to_string(pairs.size()) +
                  " pairs unreadable");
  for (std::size_t c = 0; c < cfgs.size(); ++c)
    report.curves.push_back(report.subset_curve(c, [](const PairResult&) { return true; }));
  return report;
}

void write_report(const std::filesystem::path& dir, const BenchmarkReport& report) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << std::setprecision(17);
    return out;
  };
  {
    auto out = open("curves.csv");
    out << "threshold";
    for (const auto& l : report.labels) out << ',' << l;
    out << '\n';
    for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
      out << report.thresholds[t];
      for (const auto& c : report.curves) out << ',' << c.success_rate[t];
      out << '\n';
    }
  }
  {
    auto out = open("auc.csv");
    out << "measure,auc\n";
    for (std::size_t c = 0; c < report.labels.size(); ++c)
      out << report.labels[c] << ',' << report.curves[c].auc << '\n';
  }
  {
    auto out = open("per_pair.csv");
    out << "pair_id,measure,x,y,w,h,sx,sy,score,overlap,tag\n";
    for (const auto& r : report.per_pair)
      out << r.pair_id << ',' << r.label << ',' << r.window.x << ',' << r.window.y << ',' << r.window.w << ','
          << r.window.h << ',' << r.sx << ',' << r.sy << ',' << r.score << ',' << r.overlap << ',' << r.tag
          << '\n';
  }
}

}  // namespace sds::bench
