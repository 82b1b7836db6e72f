#include "vstemma/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "vstemma/error.hpp"

namespace vstemma {

RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3) throw InputError("unsupported channel count " + std::to_string(img.channels));
    RasterImage out(img.width, img.height, 1);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double lum = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2];
        out.data[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(lum), 0, 255));
    }
    return out;
}

int otsu_threshold(const RasterImage& gray) {
    if (gray.channels != 1) throw InputError("otsu_threshold expects a grayscale image");
    if (gray.data.empty()) throw InputError("otsu_threshold needs at least one pixel");

    std::array<long long, 256> hist{};
    for (auto v : gray.data) ++hist[v];

    const int distinct = static_cast<int>(std::count_if(hist.begin(), hist.end(), [](long long c) { return c > 0; }));
    if (distinct == 1) {
        return static_cast<int>(std::find_if(hist.begin(), hist.end(), [](long long c) { return c > 0; }) - hist.begin());
    }

    const double total = static_cast<double>(gray.data.size());
    double sum_all = 0.0;
    for (int t = 0; t < 256; ++t) sum_all += static_cast<double>(t) * hist[t];

    double w_low = 0.0, sum_low = 0.0;
    double best = -1.0;
    int best_t = 0;
    for (int t = 0; t < 256; ++t) {
        w_low += hist[t];
        sum_low += static_cast<double>(t) * hist[t];
        const double w_high = total - w_low;
        double between = 0.0;
        if (w_low > 0 && w_high > 0) {
            const double diff = sum_low / w_low - (sum_all - sum_low) / w_high;
            between = w_low * w_high * diff * diff;
        }
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

BinaryImage binarize(const RasterImage& gray, int threshold, bool ink_is_dark) {
    if (gray.channels != 1) throw InputError("binarize expects a grayscale image");
    BinaryImage out(gray.width, gray.height);
    for (std::size_t i = 0; i < gray.data.size(); ++i) {
        const bool low = gray.data[i] <= threshold;
        out.mask[i] = (low == ink_is_dark) ? 1 : 0;
    }
    return out;
}

BinaryImage binarize_otsu(const RasterImage& gray, bool ink_is_dark, int* threshold_out) {
    const int t = otsu_threshold(gray);
    if (threshold_out) *threshold_out = t;
    const bool uniform = std::all_of(gray.data.begin(), gray.data.end(), [&](std::uint8_t v) { return v == gray.data[0]; });
    if (uniform) return BinaryImage(gray.width, gray.height);
    return binarize(gray, t, ink_is_dark);
}

namespace {

void check_kernel(int kernel) {
    if (kernel < 1 || kernel % 2 == 0) throw InputError("structuring element size must be odd and >= 1, got " + std::to_string(kernel));
}

// Separable min/max filter over a square window; outside the image counts as
// background for erosion (min) and is ignored for dilation (max).
BinaryImage square_filter(const BinaryImage& img, int kernel, bool erode_mode) {
    const int r = kernel / 2;
    const int w = img.width, h = img.height;
    BinaryImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool acc = erode_mode;
            for (int dx = -r; dx <= r; ++dx) {
                const int xx = x + dx;
                const bool v = (xx >= 0 && xx < w) ? img.at(xx, y) : false;
                if (erode_mode) {
                    if (!v) { acc = false; break; }
                } else if (v) {
                    acc = true;
                    break;
                }
            }
            tmp.set(x, y, acc);
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool acc = erode_mode;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = y + dy;
                const bool v = (yy >= 0 && yy < h) ? tmp.at(x, yy) : false;
                if (erode_mode) {
                    if (!v) { acc = false; break; }
                } else if (v) {
                    acc = true;
                    break;
                }
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

}  // namespace

BinaryImage erode(const BinaryImage& img, int kernel) {
    check_kernel(kernel);
    return square_filter(img, kernel, true);
}

BinaryImage dilate(const BinaryImage& img, int kernel) {
    check_kernel(kernel);
    return square_filter(img, kernel, false);
}

BinaryImage morphological_open(const BinaryImage& img, int kernel) {
    check_kernel(kernel);
    if (kernel == 1) return img;
    return dilate(erode(img, kernel), kernel);
}

std::vector<BoundingBox> extract_components(const BinaryImage& img) {
    std::vector<BoundingBox> boxes;
    const int w = img.width, h = img.height;
    std::vector<std::uint8_t> seen(img.mask.size(), 0);
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!img.mask[idx] || seen[idx]) continue;
            int x0 = x, x1 = x, y0 = y, y1 = y;
            seen[idx] = 1;
            stack.assign(1, {x, y});
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                x0 = std::min(x0, cx);
                x1 = std::max(x1, cx);
                y0 = std::min(y0, cy);
                y1 = std::max(y1, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx, ny = cy + dy;
                        if (!img.inside(nx, ny)) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (img.mask[nidx] && !seen[nidx]) {
                            seen[nidx] = 1;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
            boxes.push_back({x0, y0, x1 - x0 + 1, y1 - y0 + 1});
        }
    }
    return boxes;
}

std::vector<BoundingBox> filter_boxes(std::span<const BoundingBox> boxes, long long min_area, long long max_area,
                                      int min_side) {
    if (min_area > max_area) throw InputError("filter_boxes: min_area exceeds max_area");
    std::vector<BoundingBox> kept;
    for (const auto& b : boxes) {
        if (b.area() >= min_area && b.area() <= max_area && std::min(b.w, b.h) >= min_side) kept.push_back(b);
    }
    return kept;
}

int median_box_height(std::span<const BoundingBox> boxes) {
    if (boxes.empty()) return 1;
    std::vector<int> heights;
    heights.reserve(boxes.size());
    for (const auto& b : boxes) heights.push_back(b.h);
    std::sort(heights.begin(), heights.end());
    return std::max(1, heights[(heights.size() - 1) / 2]);
}

std::vector<OrderedBox> sort_reading_order(std::span<const BoundingBox> boxes, int bin_height) {
    if (bin_height < 1) throw InputError("sort_reading_order: bin height must be >= 1");
    std::vector<std::pair<long long, BoundingBox>> keyed;
    keyed.reserve(boxes.size());
    for (const auto& b : boxes) {
        // Integer form of floor(center_y / bin_height) with center_y = y + h/2.
        const long long twice_center = 2LL * b.y + b.h;
        keyed.emplace_back(twice_center / (2LL * bin_height), b);
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.x < b.second.x;
    });
    std::vector<OrderedBox> out;
    out.reserve(keyed.size());
    int line = -1;
    long long prev_bin = -1;
    for (const auto& [bin, box] : keyed) {
        if (line < 0 || bin != prev_bin) {
            ++line;
            prev_bin = bin;
        }
        out.push_back({box, line});
    }
    return out;
}

std::vector<GlyphCrop> crop_glyphs(const BinaryImage& img, std::span<const OrderedBox> boxes, int padding,
                                   const std::string& manuscript_id, int first_index, int first_line) {
    if (padding < 0) throw InputError("crop padding must be nonnegative");
    std::vector<GlyphCrop> crops;
    crops.reserve(boxes.size());
    int index = first_index;
    for (const auto& ob : boxes) {
        const auto& b = ob.box;
        if (b.w < 1 || b.h < 1 || b.x < 0 || b.y < 0 || b.x + b.w > img.width || b.y + b.h > img.height) {
            throw InputError("crop box lies outside the image");
        }
        GlyphCrop crop;
        crop.manuscript_id = manuscript_id;
        crop.index = index++;
        crop.line = first_line + ob.line;
        crop.box = b;
        crop.patch = BinaryImage(b.w + 2 * padding, b.h + 2 * padding);
        for (int py = 0; py < crop.patch.height; ++py) {
            const int sy = b.y - padding + py;
            if (sy < 0 || sy >= img.height) continue;
            for (int px = 0; px < crop.patch.width; ++px) {
                const int sx = b.x - padding + px;
                if (sx < 0 || sx >= img.width) continue;
                crop.patch.set(px, py, img.at(sx, sy));
            }
        }
        crops.push_back(std::move(crop));
    }
    return crops;
}

PageSegmentation segment_page(const RasterImage& page, const SegmentParams& params, const std::string& manuscript_id,
                              int first_index, int first_line) {
    PageSegmentation result;
    const RasterImage gray = to_grayscale(page);
    const BinaryImage ink = binarize_otsu(gray, params.ink_is_dark, &result.threshold);
    const BinaryImage cleaned = morphological_open(ink, params.kernel);
    const auto components = extract_components(cleaned);
    result.components = static_cast<int>(components.size());
    const auto max_area = static_cast<long long>(std::floor(params.max_area_fraction * page.width * page.height));
    const auto kept = filter_boxes(components, params.min_area, std::max(max_area, params.min_area), params.min_side);
    result.bin_height = params.bin_height > 0 ? params.bin_height : median_box_height(kept);
    const auto ordered = sort_reading_order(kept, result.bin_height);
    result.crops = crop_glyphs(cleaned, ordered, params.padding, manuscript_id, first_index, first_line);
    return result;
}

}  // namespace vstemma
