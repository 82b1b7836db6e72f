#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vstemma {

// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c, std::uint8_t fill = 0);

    std::uint8_t& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    std::uint8_t at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    bool operator==(const RasterImage&) const = default;
};

// Row-major foreground mask; nonzero = ink.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    BinaryImage() = default;
    BinaryImage(int w, int h, bool fill = false);

    bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { mask[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    std::size_t count() const;

    bool operator==(const BinaryImage&) const = default;
};

struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    double center_y() const { return y + h / 2.0; }

    bool operator==(const BoundingBox&) const = default;
};

// One segmented character image.
struct GlyphCrop {
    std::string manuscript_id;
    int index = 0;
    int line = 0;
    BoundingBox box;
    BinaryImage patch;

    // "<manuscript_id>_<index, 5 digits>", shared by crop files and embedding sidecars.
    std::string glyph_id() const;
};

std::string make_glyph_id(const std::string& manuscript_id, int index);

}  // namespace vstemma
