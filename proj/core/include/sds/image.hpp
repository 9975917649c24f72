#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sds/window.hpp"

namespace sds {

/// Row-major, interleaved-channel image with values in [0,1].
///
/// Channel count is 1 (intensity) or 3 (RGB). The constructor validates the
/// data length and value range; `set` clamps into range so generators that
/// add noise never break the invariant.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);
  Image(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  double at(int x, int y, int c = 0) const noexcept {
    return data_[index(x, y, c)];
  }
  void set(int x, int y, int c, double value);

  std::span<const double> data() const noexcept { return data_; }
  Window bounds() const noexcept { return {0, 0, width_, height_}; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

// Throws BoundsError unless `win` lies fully inside `img`.
Image crop(const Image& img, const Window& win);

// Unweighted RGB mean; 1-channel input is returned unchanged.
Image to_intensity(const Image& img);

Image rotate90(const Image& img);

}  // namespace sds
