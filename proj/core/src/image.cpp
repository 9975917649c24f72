#include "sds/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sds/error.hpp"

namespace sds {

namespace {

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0) throw SizeError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw TypeError("image must have 1 or 3 channels");
}

}  // namespace

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  if (!std::isfinite(fill) || fill < 0.0 || fill > 1.0)
    throw ParameterError("fill value outside [0,1]");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw SizeError("image data length does not match width*height*channels");
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ParameterError("image value outside [0,1]");
  }
}

void Image::set(int x, int y, int c, double value) {
  if (!std::isfinite(value)) throw ParameterError("non-finite pixel value");
  data_[index(x, y, c)] = std::clamp(value, 0.0, 1.0);
}

Image crop(const Image& img, const Window& win) {
  if (!win.inside(img.width(), img.height())) {
    std::ostringstream msg;
    msg << "crop window " << win << " outside " << img.width() << "x" << img.height();
    throw BoundsError(msg.str());
  }
  const int c = img.channels();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(win.area()) * static_cast<std::size_t>(c));
  const auto src = img.data();
  for (int y = win.y; y < win.y + win.h; ++y) {
    const auto row = static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width());
    const auto first = (row + static_cast<std::size_t>(win.x)) * static_cast<std::size_t>(c);
    out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(first),
               src.begin() + static_cast<std::ptrdiff_t>(first + static_cast<std::size_t>(win.w * c)));
  }
  return Image(win.w, win.h, c, std::move(out));
}

Image to_intensity(const Image& img) {
  if (img.channels() == 1) return img;
  std::vector<double> out(img.pixel_count());
  const auto src = img.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (src[3 * i] + src[3 * i + 1] + src[3 * i + 2]) / 3.0;
  return Image(img.width(), img.height(), 1, std::move(out));
}

Image rotate90(const Image& img) {
  // Clockwise: output pixel (x', y') reads input (y', H-1-x').
  const int w = img.height();
  const int h = img.width();
  Image out(w, h, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.set(x, y, c, img.at(y, img.height() - 1 - x, c));
  return out;
}

}  // namespace sds
