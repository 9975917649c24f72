#pragma once

#include <filesystem>

#include "sds/image.hpp"

namespace sds::io {

// Format is chosen from the extension: .png, .ppm, .pgm (binary P5/P6).
// 8- and 16-bit sources are normalized to [0,1]; gray+alpha and RGBA PNGs
// have alpha dropped.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& img);

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace sds::io
