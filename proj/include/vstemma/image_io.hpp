#pragma once

#include <filesystem>

#include "vstemma/image.hpp"

namespace vstemma {

// Reads PNG or JPEG (by signature). Alpha is dropped; palettes and 16-bit
// samples are expanded to 8-bit gray or RGB.
RasterImage read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RasterImage& img);

// Ink is written black (0) on white (255).
void write_png(const std::filesystem::path& path, const BinaryImage& img);

// Inverse of the binary writer: pixels darker than 128 are ink.
BinaryImage read_binary_png(const std::filesystem::path& path);

}  // namespace vstemma
