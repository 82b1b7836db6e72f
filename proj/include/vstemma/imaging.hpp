#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vstemma/image.hpp"

namespace vstemma {

/// Parameters of connected-component glyph segmentation.
///
/// `max_area_fraction` is relative to the page area; a box larger than that is
/// treated as a border, ruling or illumination and dropped.
struct SegmentParams {
    int kernel = 3;
    long long min_area = 15;
    double max_area_fraction = 0.05;
    int min_side = 3;
    int padding = 2;
    bool ink_is_dark = true;
    // 0 = median height of the filtered boxes on the page.
    int bin_height = 0;
};

RasterImage to_grayscale(const RasterImage& img);

// Smallest threshold maximizing Otsu's between-class variance; pixels <= t form
// the lower class. A single-intensity image returns that intensity.
int otsu_threshold(const RasterImage& gray);

BinaryImage binarize(const RasterImage& gray, int threshold, bool ink_is_dark = true);

// Otsu threshold + binarization, with uniform images mapped to an empty mask.
BinaryImage binarize_otsu(const RasterImage& gray, bool ink_is_dark = true, int* threshold_out = nullptr);

BinaryImage erode(const BinaryImage& img, int kernel);
BinaryImage dilate(const BinaryImage& img, int kernel);
BinaryImage morphological_open(const BinaryImage& img, int kernel);

// Tight boxes of 8-connected foreground components, in row-major order of
// each component's first pixel.
std::vector<BoundingBox> extract_components(const BinaryImage& img);

std::vector<BoundingBox> filter_boxes(std::span<const BoundingBox> boxes, long long min_area, long long max_area,
                                      int min_side);

struct OrderedBox {
    BoundingBox box;
    int line = 0;
};

int median_box_height(std::span<const BoundingBox> boxes);

// Groups boxes into lines by floor(center_y / bin_height); line ordinals are the
// dense rank of those bins. Within a line, boxes run left to right.
std::vector<OrderedBox> sort_reading_order(std::span<const BoundingBox> boxes, int bin_height);

std::vector<GlyphCrop> crop_glyphs(const BinaryImage& img, std::span<const OrderedBox> boxes, int padding,
                                   const std::string& manuscript_id, int first_index = 0, int first_line = 0);

struct PageSegmentation {
    int threshold = 0;
    int bin_height = 0;
    int components = 0;
    std::vector<GlyphCrop> crops;
};

// Full page pass: grayscale, Otsu, opening, components, size filter, reading
// order, padded crops.
PageSegmentation segment_page(const RasterImage& page, const SegmentParams& params, const std::string& manuscript_id,
                              int first_index = 0, int first_line = 0);

}  // namespace vstemma
