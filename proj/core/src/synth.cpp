#include "sds/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sds/error.hpp"
#include "sds/image_io.hpp"

namespace sds::synth {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

struct Rgb {
  double r, g, b;
};

Rgb random_color(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  return {u(rng), u(rng), u(rng)};
}

void put(Image& img, int x, int y, const Rgb& c) {
  img.set(x, y, 0, c.r);
  img.set(x, y, 1, c.g);
  img.set(x, y, 2, c.b);
}

// Sum of random plane waves per channel: smooth, low frequency.
Image wave_field(int w, int h, std::mt19937_64& rng, int waves, double min_period, double max_period) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> period(min_period, max_period);
  struct Wave {
    double kx, ky, phase;
  };
  std::vector<Wave> per_channel[3];
  for (auto& list : per_channel)
    for (int i = 0; i < waves; ++i) {
      const double a = angle(rng);
      const double k = 2.0 * std::numbers::pi / period(rng);
      list.push_back({k * std::cos(a), k * std::sin(a), angle(rng)});
    }
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (const auto& wv : per_channel[c]) v += std::sin(wv.kx * x + wv.ky * y + wv.phase);
        img.set(x, y, c, 0.5 + 0.4 * v / waves);
      }
  return img;
}

// Bilinearly interpolated random lattice colors.
Image value_noise(int w, int h, std::mt19937_64& rng, int cell) {
  const int gw = w / cell + 2;
  const int gh = h / cell + 2;
  std::vector<Rgb> lattice(static_cast<std::size_t>(gw * gh));
  for (auto& c : lattice) c = random_color(rng);
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const double fy = static_cast<double>(y) / cell;
      const int ix = static_cast<int>(fx);
      const int iy = static_cast<int>(fy);
      const double ax = fx - ix;
      const double ay = fy - iy;
      auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(j * gw + i)]; };
      const Rgb c00 = at(ix, iy), c10 = at(ix + 1, iy), c01 = at(ix, iy + 1), c11 = at(ix + 1, iy + 1);
      auto mix = [&](double a, double b, double c, double d) {
        return (1 - ay) * ((1 - ax) * a + ax * b) + ay * ((1 - ax) * c + ax * d);
      };
      put(img, x, y,
          {mix(c00.r, c10.r, c01.r, c11.r), mix(c00.g, c10.g, c01.g, c11.g), mix(c00.b, c10.b, c01.b, c11.b)});
    }
  return img;
}

// Random axis-aligned rectangles painted over a flat color.
Image mosaic(int w, int h, std::mt19937_64& rng, int count, int min_side, int max_side) {
  Image img(w, h, 3);
  const Rgb base = random_color(rng);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) put(img, x, y, base);
  std::uniform_int_distribution<int> side(min_side, max_side);
  for (int i = 0; i < count; ++i) {
    const int rw = side(rng);
    const int rh = side(rng);
    const int x0 = std::uniform_int_distribution<int>(-rw / 2, w - rw / 2)(rng);
    const int y0 = std::uniform_int_distribution<int>(-rh / 2, h - rh / 2)(rng);
    const Rgb c = random_color(rng);
    for (int y = std::max(0, y0); y < std::min(h, y0 + rh); ++y)
      for (int x = std::max(0, x0); x < std::min(w, x0 + rw); ++x) put(img, x, y, c);
  }
  return img;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Image background(int kind, int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1) throw ParameterError("background size must be positive");
  auto rng = make_rng(seed, 0xb0 + static_cast<std::uint64_t>(kind));
  switch (kind) {
    case 0: return wave_field(width, height, rng, 4, 24.0, 80.0);
    case 1: return value_noise(width, height, rng, 12);
    case 2: return mosaic(width, height, rng, 40, 6, 30);
    default: throw ParameterError("background kind must be 0, 1 or 2");
  }
}

Image template_image(int kind, int size, std::uint64_t seed) {
  if (size < 2) throw ParameterError("template size must be >= 2");
  auto rng = make_rng(seed, 0x70 + static_cast<std::uint64_t>(kind));
  switch (kind) {
    case 0: {
      // Gaussian color blobs.
      Image img = value_noise(size, size, rng, std::max(2, size / 3));
      std::uniform_real_distribution<double> pos(0.0, size);
      for (int b = 0; b < 5; ++b) {
        const double cx = pos(rng), cy = pos(rng), rad = size / 6.0 + pos(rng) / 6.0;
        const Rgb c = random_color(rng);
        for (int y = 0; y < size; ++y)
          for (int x = 0; x < size; ++x) {
            const double wgt = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * rad * rad));
            img.set(x, y, 0, (1 - wgt) * img.at(x, y, 0) + wgt * c.r);
            img.set(x, y, 1, (1 - wgt) * img.at(x, y, 1) + wgt * c.g);
            img.set(x, y, 2, (1 - wgt) * img.at(x, y, 2) + wgt * c.b);
          }
      }
      return img;
    }
    case 1: {
      // Concentric rings cut by spokes.
      const Rgb a = random_color(rng), b = random_color(rng), c = random_color(rng);
      const double ring = size / 7.0;
      Image img(size, size, 3);
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const double dx = x + 0.5 - size / 2.0, dy = y + 0.5 - size / 2.0;
          const int band = static_cast<int>(std::sqrt(dx * dx + dy * dy) / ring);
          const int spoke = static_cast<int>((std::atan2(dy, dx) + std::numbers::pi) / (std::numbers::pi / 3));
          put(img, x, y, (band + spoke) % 3 == 0 ? a : ((band + spoke) % 3 == 1 ? b : c));
        }
      return img;
    }
    case 2: return mosaic(size, size, rng, 14, std::max(2, size / 8), std::max(3, size / 2));
    default: throw ParameterError("template kind must be 0, 1 or 2");
  }
}

Image transform_nn(const Image& img, double sx, double sy, double theta, std::vector<std::uint8_t>* mask) {
  if (!(sx > 0.0 && sy > 0.0)) throw ParameterError("scale factors must be > 0");
  const int sw = std::max(1, static_cast<int>(std::lround(sx * img.width())));
  const int sh = std::max(1, static_cast<int>(std::lround(sy * img.height())));
  double c = std::cos(theta);
  double s = std::sin(theta);
  if (std::abs(c) < 1e-12) c = 0.0;
  if (std::abs(s) < 1e-12) s = 0.0;
  const int ow = std::max(1, static_cast<int>(std::ceil(std::abs(c) * sw + std::abs(s) * sh - 1e-9)));
  const int oh = std::max(1, static_cast<int>(std::ceil(std::abs(s) * sw + std::abs(c) * sh - 1e-9)));
  Image out(ow, oh, img.channels());
  if (mask) mask->assign(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh), 0);
  const double fx = static_cast<double>(sw) / img.width();
  const double fy = static_cast<double>(sh) / img.height();
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      const double dx = x + 0.5 - ow / 2.0;
      const double dy = y + 0.5 - oh / 2.0;
      // Inverse rotation (screen y points down, so this turns content counter-clockwise).
      const double u = c * dx - s * dy + sw / 2.0;
      const double v = s * dx + c * dy + sh / 2.0;
      if (u < 0.0 || v < 0.0 || u >= sw || v >= sh) continue;
      const int su = std::min(img.width() - 1, static_cast<int>(std::floor(std::floor(u) / fx + 0.5 / fx)));
      const int sv = std::min(img.height() - 1, static_cast<int>(std::floor(std::floor(v) / fy + 0.5 / fy)));
      for (int ch = 0; ch < img.channels(); ++ch) out.set(x, y, ch, img.at(su, sv, ch));
      if (mask) (*mask)[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = 1;
    }
  return out;
}

std::string category(const PairSpec& spec) {
  const bool rotated = std::fmod(std::abs(spec.theta_deg), 360.0) != 0.0;
  const bool scaled = spec.sx != 1.0 || spec.sy != 1.0;
  if (rotated && scaled) return "rotation-scaling";
  if (rotated) return "rotation";
  if (scaled) return "scaling";
  return "identity";
}

SyntheticPair generate_synthetic_pair(const Image& bg, const Image& templ, const PairSpec& spec) {
  if (bg.channels() != templ.channels()) throw TypeError("background and template channel counts differ");
  if (spec.occlusion < 0.0 || spec.occlusion >= 1.0) throw ParameterError("occlusion must be in [0, 1)");
  if (spec.noise_sigma < 0.0) throw ParameterError("noise sigma must be >= 0");
  std::vector<std::uint8_t> mask;
  const Image pasted = transform_nn(templ, spec.sx, spec.sy, spec.theta_deg * std::numbers::pi / 180.0, &mask);
  int x0 = pasted.width(), y0 = pasted.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < pasted.height(); ++y)
    for (int x = 0; x < pasted.width(); ++x)
      if (mask[static_cast<std::size_t>(y) * static_cast<std::size_t>(pasted.width()) + static_cast<std::size_t>(x)]) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  const int tw = x1 - x0 + 1;
  const int th = y1 - y0 + 1;
  if (x1 < 0 || tw > bg.width() || th > bg.height())
    throw ParameterError("transformed template does not fit in the background");

  if (spec.align < 1) throw ParameterError("paste alignment must be >= 1");
  auto rng = make_rng(spec.seed, 0x5a);
  const int px = spec.align * std::uniform_int_distribution<int>(0, (bg.width() - tw) / spec.align)(rng);
  const int py = spec.align * std::uniform_int_distribution<int>(0, (bg.height() - th) / spec.align)(rng);
  Image target = bg;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (mask[static_cast<std::size_t>(y) * static_cast<std::size_t>(pasted.width()) + static_cast<std::size_t>(x)])
        for (int c = 0; c < bg.channels(); ++c) target.set(px + x - x0, py + y - y0, c, pasted.at(x, y, c));

  const Window gt{px, py, tw, th};
  if (spec.occlusion > 0.0) {
    // A band of foreign texture over one side of the object.
    const int band = static_cast<int>(std::lround(spec.occlusion * tw));
    const bool left = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    const Image cover = background(1, band > 0 ? band : 1, th, spec.seed ^ 0x0cc1);
    for (int y = 0; y < th; ++y)
      for (int x = 0; x < band; ++x)
        for (int c = 0; c < bg.channels(); ++c)
          target.set(gt.x + (left ? x : tw - band + x), gt.y + y, c, cover.at(x, y, c));
  }
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (int y = 0; y < target.height(); ++y)
      for (int x = 0; x < target.width(); ++x)
        for (int c = 0; c < target.channels(); ++c) target.set(x, y, c, target.at(x, y, c) + noise(rng));
  }

  SyntheticPair out;
  out.reference = templ;
  out.template_box = templ.bounds();
  out.target = std::move(target);
  out.gt_box = gt;
  std::ostringstream tag;
  tag << category(spec) << ";theta=" << format_number(spec.theta_deg) << ";sx=" << format_number(spec.sx)
      << ";sy=" << format_number(spec.sy) << ";occ=" << format_number(spec.occlusion)
      << ";noise=" << format_number(spec.noise_sigma) << ";seed=" << spec.seed;
  out.tag = tag.str();
  return out;
}

std::vector<SuiteEntry> default_suite(const SuiteOptions& options) {
  if (options.count < 1) throw ParameterError("suite count must be >= 1");
  static constexpr double kThetas[] = {0.0, 30.0, 60.0, 90.0};
  static constexpr double kScales[] = {0.6, 1.0, 1.5, 1.9};
  static constexpr double kOcclusions[] = {0.0, 0.2};
  std::vector<SuiteEntry> out;
  out.reserve(static_cast<std::size_t>(options.count));
  for (int i = 0; static_cast<int>(out.size()) < options.count; ++i) {
    int k = i % 288;
    SuiteEntry e;
    e.background_kind = k / 96;
    k %= 96;
    e.template_kind = k / 32;
    k %= 32;
    e.spec.theta_deg = kThetas[k / 8];
    k %= 8;
    e.spec.sx = e.spec.sy = kScales[k / 2];
    e.spec.occlusion = kOcclusions[k % 2];
    e.spec.noise_sigma = options.noise_sigma;
    e.spec.seed = options.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    out.push_back(e);
  }
  return out;
}

std::vector<bench::BenchPair> write_suite(const std::filesystem::path& dir, const SuiteOptions& options) {
  std::filesystem::create_directories(dir / "images");
  std::vector<bench::BenchPair> pairs;
  Image bgs[3];
  Image tpls[3];
  for (int k = 0; k < 3; ++k) {
    bgs[k] = background(k, options.background_size, options.background_size, options.seed);
    tpls[k] = template_image(k, options.template_size, options.seed);
  }
  for (int k = 0; k < 3; ++k) io::write_image(dir / "images" / ("template_" + std::to_string(k) + ".png"), tpls[k]);
  const auto entries = default_suite(options);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const SyntheticPair sp = generate_synthetic_pair(bgs[e.background_kind], tpls[e.template_kind], e.spec);
    bench::BenchPair p;
    p.id = std::to_string(i);
    p.reference_path = dir / "images" / ("template_" + std::to_string(e.template_kind) + ".png");
    p.template_box = sp.template_box;
    p.target_path = dir / "images" / ("target_" + std::to_string(i) + ".png");
    p.gt_box = sp.gt_box;
    p.tag = sp.tag + ";bg=" + std::to_string(e.background_kind) + ";tpl=" + std::to_string(e.template_kind);
    io::write_image(p.target_path, sp.target);
    pairs.push_back(std::move(p));
  }
  bench::write_annotations(dir / "annotations.csv", pairs);
  return pairs;
}

}  // namespace sds::synth
