#include "vstemma/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "vstemma/error.hpp"

namespace vstemma::synth {

namespace {

struct Template {
    char letter;
    std::array<const char*, 7> rows;
};

// clang-format off
const std::array<Template, 23> kTemplates = {{
    {'a', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'b', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
    {'c', {".####", "#....", "#....", "#....", "#....", "#....", ".####"}},
    {'d', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
    {'e', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
    {'f', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
    {'g', {".####", "#....", "#....", "#.###", "#...#", "#...#", ".###."}},
    {'h', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'k', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
    {'l', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
    {'m', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
    {'n', {"#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"}},
    {'o', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'p', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {'r', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {'s', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
    {'t', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
    {'u', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'v', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
    {'w', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"}},
    {'x', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
    {'y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
    {'z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
}};
// clang-format on

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)));
}

char weighted_letter(std::mt19937_64& rng, const std::string& alphabet, const std::vector<double>& cumulative) {
    const double u = unit_draw(rng) * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return alphabet[std::min<std::size_t>(alphabet.size() - 1, static_cast<std::size_t>(it - cumulative.begin()))];
}

}  // namespace

const std::string& template_alphabet() {
    static const std::string alphabet = [] {
        std::string s;
        for (const auto& t : kTemplates) s += t.letter;
        return s;
    }();
    return alphabet;
}

BinaryImage glyph_template(char letter, int scale) {
    if (scale < 1) throw InputError("template scale must be >= 1");
    const auto it = std::find_if(kTemplates.begin(), kTemplates.end(), [&](const Template& t) { return t.letter == letter; });
    if (it == kTemplates.end()) throw InputError(std::string("no glyph template for letter '") + letter + "'");
    BinaryImage img(5 * scale, 7 * scale);
    for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 5; ++c) {
            if (it->rows[r][c] != '#') continue;
            for (int dy = 0; dy < scale; ++dy) {
                for (int dx = 0; dx < scale; ++dx) img.set(c * scale + dx, r * scale + dy, true);
            }
        }
    }
    return img;
}

std::vector<std::string> Tradition::ids() const {
    std::vector<std::string> out;
    for (const auto& w : witnesses) out.push_back(w.id);
    return out;
}

std::vector<std::string> Tradition::texts() const {
    std::vector<std::string> out;
    for (const auto& w : witnesses) out.push_back(w.text);
    return out;
}

Tradition generate_tradition(const TraditionParams& params) {
    if (params.witnesses < 2) throw InputError("a tradition needs at least 2 witnesses");
    if (params.length < 1) throw InputError("text length must be positive");
    if (params.min_changes < 0 || params.max_changes < params.min_changes) throw InputError("invalid change range");
    if (params.habit_share < 0.0 || params.habit_share > 1.0) throw InputError("habit share must be in [0, 1]");

    std::mt19937_64 rng(params.seed);
    const std::string& alphabet = template_alphabet();
    // Zipf-like letter weights, as in natural text.
    std::vector<double> cumulative;
    double acc = 0.0;
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        acc += 1.0 / std::pow(static_cast<double>(i) + 1.0, 0.9);
        cumulative.push_back(acc);
    }

    Tradition tradition;
    for (int i = 0; i < params.length; ++i) tradition.archetype += weighted_letter(rng, alphabet, cumulative);

    for (int w = 0; w < params.witnesses; ++w) {
        Witness witness;
        char id[16];
        std::snprintf(id, sizeof id, "w%02d", w + 1);
        witness.id = id;
        witness.parent = w == 0 ? -1 : static_cast<int>(index_draw(rng, static_cast<std::size_t>(w) + 1)) - 1;
        std::string text = witness.parent < 0 ? tradition.archetype : tradition.witnesses[witness.parent].text;
        witness.changes = params.min_changes + static_cast<int>(index_draw(rng, static_cast<std::size_t>(params.max_changes - params.min_changes) + 1));

        // The copying scribe's habit: writes `to` where the exemplar has `from`.
        const char from = weighted_letter(rng, alphabet, cumulative);
        char to = from;
        while (to == from) to = alphabet[index_draw(rng, alphabet.size())];

        for (int c = 0; c < witness.changes; ++c) {
            const double op = unit_draw(rng);
            if (op < 0.7 && !text.empty()) {
                if (unit_draw(rng) < params.habit_share && text.find(from) != std::string::npos) {
                    std::vector<std::size_t> spots;
                    for (std::size_t p = 0; p < text.size(); ++p) {
                        if (text[p] == from) spots.push_back(p);
                    }
                    text[spots[index_draw(rng, spots.size())]] = to;
                } else {
                    const std::size_t p = index_draw(rng, text.size());
                    char repl = text[p];
                    while (repl == text[p]) repl = weighted_letter(rng, alphabet, cumulative);
                    text[p] = repl;
                }
            } else if (op < 0.85 || text.size() <= 1) {
                text.insert(text.begin() + static_cast<long>(index_draw(rng, text.size() + 1)), weighted_letter(rng, alphabet, cumulative));
            } else {
                text.erase(text.begin() + static_cast<long>(index_draw(rng, text.size())));
            }
        }
        witness.text = std::move(text);
        tradition.witnesses.push_back(std::move(witness));
    }
    return tradition;
}

RasterImage render_page(const std::string& text, const PageLayout& layout) {
    if (text.empty()) throw InputError("render_page: empty text");
    if (layout.chars_per_line < 1) throw InputError("render_page: chars_per_line must be >= 1");
    const int gw = 5 * layout.scale, gh = 7 * layout.scale;
    const int pitch_x = gw + layout.letter_gap, pitch_y = gh + layout.line_gap;
    const int lines = (static_cast<int>(text.size()) + layout.chars_per_line - 1) / layout.chars_per_line;
    const int width = 2 * layout.margin + layout.chars_per_line * pitch_x - layout.letter_gap;
    const int height = 2 * layout.margin + lines * pitch_y - layout.line_gap;
    RasterImage page(width, height, 1, 255);

    std::map<char, BinaryImage> cache;
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto it = cache.find(text[i]);
        if (it == cache.end()) it = cache.emplace(text[i], glyph_template(text[i], layout.scale)).first;
        const int col = static_cast<int>(i) % layout.chars_per_line;
        const int row = static_cast<int>(i) / layout.chars_per_line;
        const int ox = layout.margin + col * pitch_x, oy = layout.margin + row * pitch_y;
        for (int y = 0; y < gh; ++y) {
            for (int x = 0; x < gw; ++x) {
                if (it->second.at(x, y)) page.at(ox + x, oy + y) = 0;
            }
        }
    }

    if (layout.specks > 0) {
        // Specks keep a 2 px clearance from ink so they never touch a glyph.
        std::mt19937_64 rng(layout.speck_seed);
        int placed = 0, attempts = 0;
        while (placed < layout.specks && attempts < layout.specks * 100) {
            ++attempts;
            const int x = static_cast<int>(index_draw(rng, static_cast<std::size_t>(width)));
            const int y = static_cast<int>(index_draw(rng, static_cast<std::size_t>(height)));
            bool clear = true;
            for (int dy = -2; dy <= 2 && clear; ++dy) {
                for (int dx = -2; dx <= 2 && clear; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < width && yy < height && page.at(xx, yy) == 0) clear = false;
                }
            }
            if (!clear) continue;
            page.at(x, y) = 0;
            ++placed;
        }
    }
    return page;
}

}  // namespace vstemma::synth
