#pragma once

// Brute-force reference implementations. They share only the Image and
// MatchConfig types with the library: features, distances, searches and
// scores are all recomputed here with plain loops.

#include <cstdint>
#include <random>
#include <vector>

#include "sds/config.hpp"
#include "sds/image.hpp"
#include "sds/window.hpp"

namespace oracle {

struct Patch {
  std::vector<double> appearance;
  std::vector<double> rank;
  double lx = 0.0, ly = 0.0;  // location normalized within the set
  int gx = 0, gy = 0;         // grid coordinates within the set
  int global = 0;             // row-major index in the full target grid
};

struct Set {
  int gw = 0, gh = 0;
  std::vector<Patch> patches;
};

std::vector<double> rank_map(const sds::Image& gray, int r);
double intensity(const sds::Image& img, int x, int y);

/// Patches of the pixel region `win` of `img`; ranks come from the rank map
/// of the whole image.
Set patches(const sds::Image& img, const sds::Window& win, int p, int r);

double dist(const Patch& a, const Patch& b, sds::DistanceMode mode, double lambda);
int nn(const Patch& q, const Set& ref, sds::DistanceMode mode, double lambda);
std::vector<int> knn(const Patch& q, const Set& ref, int k, sds::DistanceMode mode, double lambda);

double u_term(const std::vector<int>& eps, double s);
double sds(const Set& templ, const Set& target, const sds::GridWindow& win, const sds::MatchConfig& cfg);
double bbs(const Set& templ, const Set& window, const sds::MatchConfig& cfg);
double dis(const Set& templ, const Set& window, const sds::MatchConfig& cfg);

/// Sub-set of a full target grid as seen by a window.
Set window_of(const Set& target, const sds::GridWindow& win);

sds::Image random_image(int w, int h, int channels, std::mt19937_64& rng);

}  // namespace oracle
