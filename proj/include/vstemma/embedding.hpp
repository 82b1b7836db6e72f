#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vstemma/image.hpp"

namespace vstemma {

struct FeatureVector {
    std::string glyph_id;
    std::vector<double> values;
};

enum class EmbeddingMethod { patch, external };

struct EmbeddingConfig {
    EmbeddingMethod method = EmbeddingMethod::patch;
    int patch_size = 32;
    std::filesystem::path external_path;

    void validate() const;
};

EmbeddingMethod parse_embedding_method(const std::string& name);
std::string to_string(EmbeddingMethod method);

/// Letterboxed binary-patch embedding.
///
/// The tight foreground box of the patch is scaled (aspect preserved) to fit an
/// S x S canvas, centred, and sampled bilinearly with ink = 1 and background = 0.
/// The flattened S*S vector is L2-normalised; an empty patch yields zeros.
FeatureVector embed_patch(const GlyphCrop& crop, const EmbeddingConfig& cfg);

std::vector<FeatureVector> embed_patches(std::span<const GlyphCrop> crops, const EmbeddingConfig& cfg, int jobs = 1);

// Sidecar format: one record per line, glyph id followed by D decimal values,
// whitespace separated. Blank lines are ignored.
std::vector<FeatureVector> read_embedding_file(const std::filesystem::path& path);
std::vector<FeatureVector> parse_embeddings(std::istream& in, const std::string& source_name);
void write_embedding_file(const std::filesystem::path& path, std::span<const FeatureVector> vectors);

// Selects, in glyph order, one vector per requested glyph id; every id must be
// present exactly once, with uniform dimension and finite entries.
std::vector<FeatureVector> match_embeddings(std::span<const FeatureVector> records, std::span<const std::string> glyph_ids);

std::vector<FeatureVector> load_external_embeddings(const std::filesystem::path& path, std::span<const GlyphCrop> crops);

}  // namespace vstemma
