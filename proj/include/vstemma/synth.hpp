#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vstemma/distance_matrix.hpp"
#include "vstemma/image.hpp"

namespace vstemma::synth {

// Letters that have a glyph template; every template is a single 8-connected shape.
const std::string& template_alphabet();

// 5 x 7 template of one letter, upscaled by `scale` (each cell becomes a scale x scale block).
BinaryImage glyph_template(char letter, int scale = 3);

struct TraditionParams {
    int witnesses = 8;
    int length = 600;
    std::uint64_t seed = 20240601;
    int min_changes = 4;
    int max_changes = 40;
    // Share of substitutions that follow the copying scribe's habitual letter swap.
    double habit_share = 0.6;
};

struct Witness {
    std::string id;
    std::string text;
    int parent = -1;  // index into witnesses, -1 = copied from the archetype
    int changes = 0;
};

/// A seeded copying history: an archetype drawn from a skewed letter
/// distribution, then witnesses each copied from the archetype or an earlier
/// witness with substitutions, insertions and deletions.
struct Tradition {
    std::string archetype;
    std::vector<Witness> witnesses;

    std::vector<std::string> ids() const;
    std::vector<std::string> texts() const;
};

Tradition generate_tradition(const TraditionParams& params);

struct PageLayout {
    int scale = 3;
    int letter_gap = 9;
    int line_gap = 15;
    int margin = 20;
    int chars_per_line = 40;
    // Isolated single-pixel specks per page (removed again by the opening).
    int specks = 0;
    std::uint64_t speck_seed = 7;
};

// Renders text (template letters only, others are rejected) as dark ink on a
// white grayscale page, left to right, top to bottom.
RasterImage render_page(const std::string& text, const PageLayout& layout = {});

}  // namespace vstemma::synth
