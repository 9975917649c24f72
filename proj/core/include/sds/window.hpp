#pragma once

#include <cstdint>
#include <ostream>

namespace sds {

/// Axis-aligned rectangle in pixel coordinates; (x, y) is the top-left corner.
struct Window {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(w) * static_cast<std::int64_t>(h);
  }
  bool valid() const noexcept { return w > 0 && h > 0; }
  bool inside(int width, int height) const noexcept {
    return valid() && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }

  friend bool operator==(const Window&, const Window&) = default;
};

/// Rectangle in patch-grid units.
struct GridWindow {
  int gx = 0;
  int gy = 0;
  int gw = 0;
  int gh = 0;

  int count() const noexcept { return gw * gh; }
  friend bool operator==(const GridWindow&, const GridWindow&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Window& w) {
  return os << "Window(" << w.x << "," << w.y << "," << w.w << "," << w.h << ")";
}

inline std::ostream& operator<<(std::ostream& os, const GridWindow& w) {
  return os << "GridWindow(" << w.gx << "," << w.gy << "," << w.gw << "," << w.gh << ")";
}

}  // namespace sds
