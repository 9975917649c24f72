#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sds/bench.hpp"
#include "sds/image.hpp"

namespace sds::synth {

/// Procedural RGB textures. Kinds 0..2 for both.
Image background(int kind, int width, int height, std::uint64_t seed);
Image template_image(int kind, int size, std::uint64_t seed);

/// Nearest-neighbor scale by (sx, sy), then rotation by theta (radians,
/// counter-clockwise on screen) about the center. `mask` marks pixels that
/// carry template content; the output is the rotated bounding box.
Image transform_nn(const Image& img, double sx, double sy, double theta, std::vector<std::uint8_t>* mask);

struct PairSpec {
  double sx = 1.0;
  double sy = 1.0;
  double theta_deg = 0.0;
  double occlusion = 0.0;  // fraction of the pasted box covered, as a vertical band
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int align = 2;  // paste corner lies on multiples of this (the matcher's patch grid)
};

struct SyntheticPair {
  Image reference;  // the template; template_box spans it
  Window template_box;
  Image target;
  Window gt_box;  // tight box of the pasted pixels
  std::string tag;
};

/// "identity", "rotation", "scaling" or "rotation-scaling".
std::string category(const PairSpec& spec);

/// ParameterError when the transformed template does not fit in bg.
SyntheticPair generate_synthetic_pair(const Image& bg, const Image& templ, const PairSpec& spec);

struct SuiteOptions {
  int count = 288;
  std::uint64_t seed = 1;
  int background_size = 112;
  int template_size = 28;
  double noise_sigma = 0.0;
};

struct SuiteEntry {
  int background_kind = 0;
  int template_kind = 0;
  PairSpec spec;
};

/// 3 backgrounds x 3 templates x theta {0,30,60,90} x s {0.6,1,1.5,1.9} x
/// occlusion {0,0.2}; counts beyond 288 repeat the cycle with new seeds.
std::vector<SuiteEntry> default_suite(const SuiteOptions& options);

/// Writes images plus annotations.csv under dir and returns the pairs.
std::vector<bench::BenchPair> write_suite(const std::filesystem::path& dir, const SuiteOptions& options);

}  // namespace sds::synth
