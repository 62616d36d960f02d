#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace roboaug {

/// 8-bit RGB raster. Row-major, 3 bytes per pixel.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
};

// Encodes as a single-IDAT truecolor PNG (zlib-compressed). Deterministic for
// a given raster.
std::string encode_png(const RgbImage& image);

}  // namespace roboaug
