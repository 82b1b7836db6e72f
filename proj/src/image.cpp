#include "vstemma/image.hpp"

#include <algorithm>
#include <cstdio>

#include "vstemma/error.hpp"

namespace vstemma {

RasterImage::RasterImage(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
    if (w < 1 || h < 1) throw InputError("raster image dimensions must be positive");
    if (c != 1 && c != 3) throw InputError("raster image must have 1 or 3 channels, got " + std::to_string(c));
    data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

BinaryImage::BinaryImage(int w, int h, bool fill) : width(w), height(h) {
    if (w < 0 || h < 0) throw InputError("binary image dimensions must be nonnegative");
    mask.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

std::size_t BinaryImage::count() const {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; }));
}

std::string make_glyph_id(const std::string& manuscript_id, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%05d", index);
    return manuscript_id + buf;
}

std::string GlyphCrop::glyph_id() const { return make_glyph_id(manuscript_id, index); }

}  // namespace vstemma
