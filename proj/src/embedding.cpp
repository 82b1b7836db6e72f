#include "vstemma/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "vstemma/error.hpp"
#include "vstemma/parallel.hpp"

namespace vstemma {

void EmbeddingConfig::validate() const {
    if (method == EmbeddingMethod::patch && patch_size < 4) {
        throw InputError("patch size must be at least 4, got " + std::to_string(patch_size));
    }
    if (method == EmbeddingMethod::external && external_path.empty()) {
        throw InputError("external embedding method requires an external path");
    }
}

EmbeddingMethod parse_embedding_method(const std::string& name) {
    if (name == "patch") return EmbeddingMethod::patch;
    if (name == "external") return EmbeddingMethod::external;
    throw InputError("unknown embedding method '" + name + "' (expected patch or external)");
}

std::string to_string(EmbeddingMethod method) { return method == EmbeddingMethod::patch ? "patch" : "external"; }

FeatureVector embed_patch(const GlyphCrop& crop, const EmbeddingConfig& cfg) {
    if (cfg.method != EmbeddingMethod::patch) throw InputError("embed_patch requires the patch method");
    cfg.validate();
    const int S = cfg.patch_size;
    FeatureVector fv{crop.glyph_id(), std::vector<double>(static_cast<std::size_t>(S) * S, 0.0)};

    const BinaryImage& p = crop.patch;
    int x0 = p.width, y0 = p.height, x1 = -1, y1 = -1;
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            if (!p.at(x, y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return fv;

    const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
    const double scale = static_cast<double>(S) / std::max(bw, bh);
    const double off_x = (S - bw * scale) / 2.0;
    const double off_y = (S - bh * scale) / 2.0;
    auto sample = [&](int sx, int sy) -> double {
        sx = std::clamp(sx, 0, bw - 1);
        sy = std::clamp(sy, 0, bh - 1);
        return p.at(x0 + sx, y0 + sy) ? 1.0 : 0.0;
    };

    for (int v = 0; v < S; ++v) {
        const double cy = v + 0.5;
        if (cy < off_y || cy > off_y + bh * scale) continue;
        const double src_y = (cy - off_y) / scale - 0.5;
        const int iy = static_cast<int>(std::floor(src_y));
        const double fy = src_y - iy;
        for (int u = 0; u < S; ++u) {
            const double cx = u + 0.5;
            if (cx < off_x || cx > off_x + bw * scale) continue;
            const double src_x = (cx - off_x) / scale - 0.5;
            const int ix = static_cast<int>(std::floor(src_x));
            const double fx = src_x - ix;
            const double top = sample(ix, iy) * (1 - fx) + sample(ix + 1, iy) * fx;
            const double bottom = sample(ix, iy + 1) * (1 - fx) + sample(ix + 1, iy + 1) * fx;
            fv.values[static_cast<std::size_t>(v) * S + u] = top * (1 - fy) + bottom * fy;
        }
    }

    double norm = 0.0;
    for (double x : fv.values) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& x : fv.values) x /= norm;
    }
    return fv;
}

std::vector<FeatureVector> embed_patches(std::span<const GlyphCrop> crops, const EmbeddingConfig& cfg, int jobs) {
    std::vector<FeatureVector> out(crops.size());
    parallel_for(crops.size(), jobs, [&](std::size_t i) { out[i] = embed_patch(crops[i], cfg); });
    return out;
}

std::vector<FeatureVector> parse_embeddings(std::istream& in, const std::string& source_name) {
    std::vector<FeatureVector> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream tokens(line);
        FeatureVector fv;
        if (!(tokens >> fv.glyph_id)) continue;
        std::string tok;
        while (tokens >> tok) {
            double value = 0.0;
            const auto* first = tok.data();
            const auto* last = tok.data() + tok.size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc() || ptr != last) {
                // strtod also takes forms from_chars rejects, such as a leading '+'.
                char* end = nullptr;
                value = std::strtod(tok.c_str(), &end);
                if (end != tok.c_str() + tok.size()) {
                    throw InputError(source_name + ":" + std::to_string(line_no) + ": glyph " + fv.glyph_id +
                                     ": cannot parse value '" + tok + "'");
                }
            }
            fv.values.push_back(value);
        }
        records.push_back(std::move(fv));
    }
    return records;
}

std::vector<FeatureVector> read_embedding_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embedding file: " + path.string());
    return parse_embeddings(in, path.string());
}

void write_embedding_file(const std::filesystem::path& path, std::span<const FeatureVector> vectors) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write embedding file: " + path.string());
    char buf[40];
    for (const auto& fv : vectors) {
        out << fv.glyph_id;
        for (double v : fv.values) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

std::vector<FeatureVector> match_embeddings(std::span<const FeatureVector> records, std::span<const std::string> glyph_ids) {
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!by_id.emplace(records[i].glyph_id, i).second) {
            throw InputError("embedding file lists glyph " + records[i].glyph_id + " more than once");
        }
    }
    std::vector<FeatureVector> out;
    out.reserve(glyph_ids.size());
    std::size_t dim = 0;
    for (const auto& id : glyph_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError("embedding file has no vector for glyph " + id);
        const FeatureVector& fv = records[it->second];
        if (fv.values.empty()) throw InputError("embedding for glyph " + id + " is empty");
        if (out.empty()) dim = fv.values.size();
        if (fv.values.size() != dim) {
            throw InputError("embedding for glyph " + id + " has dimension " + std::to_string(fv.values.size()) +
                             ", expected " + std::to_string(dim));
        }
        for (std::size_t j = 0; j < fv.values.size(); ++j) {
            if (!std::isfinite(fv.values[j])) {
                throw InputError("embedding for glyph " + id + " has a non-finite entry at position " + std::to_string(j));
            }
        }
        out.push_back(fv);
    }
    return out;
}

std::vector<FeatureVector> load_external_embeddings(const std::filesystem::path& path, std::span<const GlyphCrop> crops) {
    const auto records = read_embedding_file(path);
    std::vector<std::string> ids;
    ids.reserve(crops.size());
    for (const auto& c : crops) ids.push_back(c.glyph_id());
    return match_embeddings(records, ids);
}

}  // namespace vstemma
