#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "vstemma/embedding.hpp"
#include "vstemma/error.hpp"

using namespace vstemma;
namespace fs = std::filesystem;

namespace {

GlyphCrop crop_of(BinaryImage patch, int index = 0) {
    GlyphCrop c;
    c.manuscript_id = "m";
    c.index = index;
    c.box = {0, 0, patch.width, patch.height};
    c.patch = std::move(patch);
    return c;
}

BinaryImage shape(int w, int h, int ox, int oy, const std::vector<std::string>& rows, int scale = 1) {
    BinaryImage m(w, h);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            if (rows[r][c] == '#')
                for (int dy = 0; dy < scale; ++dy)
                    for (int dx = 0; dx < scale; ++dx)
                        m.set(ox + static_cast<int>(c) * scale + dx, oy + static_cast<int>(r) * scale + dy, true);
    return m;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot / (norm(a) * norm(b));
}

const std::vector<std::string> kGlyph{"#####", "#...#", "#####", "#....", "#...."};

}  // namespace

TEST_CASE("patch embedding examples") {
    EmbeddingConfig cfg;
    cfg.patch_size = 8;

    const auto blank = embed_patch(crop_of(BinaryImage(6, 6)), cfg);
    CHECK(blank.values.size() == 64);
    CHECK(norm(blank.values) == 0.0);

    const GlyphCrop g = crop_of(shape(9, 9, 2, 2, kGlyph));
    const auto a = embed_patch(g, cfg);
    const auto b = embed_patch(g, cfg);
    CHECK(a.values == b.values);
    CHECK(a.glyph_id == "m_00000");

    cfg.patch_size = 4;
    const auto solid = embed_patch(crop_of(shape(7, 7, 2, 2, {"###", "###", "###"})), cfg);
    REQUIRE(solid.values.size() == 16);
    for (double v : solid.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(norm(solid.values) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("patch embedding is translation normalized") {
    EmbeddingConfig cfg;
    cfg.patch_size = 16;
    const auto ref = embed_patch(crop_of(shape(5, 5, 0, 0, kGlyph)), cfg);
    for (auto [ox, oy] : {std::pair{1, 1}, {4, 0}, {0, 7}, {6, 3}}) {
        const auto moved = embed_patch(crop_of(shape(14, 14, ox, oy, kGlyph)), cfg);
        CHECK(moved.values == ref.values);
    }
}

TEST_CASE("patch embedding is stable under integer scaling of solid shapes") {
    EmbeddingConfig cfg;
    cfg.patch_size = 32;
    const std::vector<std::vector<std::string>> shapes{
        {"####", "####", "####"}, {"#####", "#####"}, {"##", "##", "##", "##", "##"}, {"###", "###", "###"}};
    for (const auto& rows : shapes) {
        const auto base = embed_patch(crop_of(shape(20, 20, 1, 1, rows)), cfg);
        for (int factor = 2; factor <= 4; ++factor) {
            const auto scaled = embed_patch(crop_of(shape(40, 40, 2, 2, rows, factor)), cfg);
            CHECK(cosine(base.values, scaled.values) >= 0.99);
        }
    }
}

TEST_CASE("embedding configuration") {
    EmbeddingConfig cfg;
    cfg.patch_size = 3;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.patch_size = 4;
    CHECK_NOTHROW(cfg.validate());
    cfg.method = EmbeddingMethod::external;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    CHECK(parse_embedding_method("patch") == EmbeddingMethod::patch);
    CHECK(parse_embedding_method("external") == EmbeddingMethod::external);
    CHECK_THROWS_AS(parse_embedding_method("cnn"), InputError);
    CHECK(to_string(EmbeddingMethod::external) == "external");
}

TEST_CASE("parallel patch embedding matches the serial result") {
    std::vector<GlyphCrop> crops;
    for (int i = 0; i < 17; ++i) crops.push_back(crop_of(shape(9, 9, i % 4, i % 3, kGlyph), i));
    EmbeddingConfig cfg;
    const auto serial = embed_patches(crops, cfg, 1);
    const auto parallel = embed_patches(crops, cfg, 4);
    REQUIRE(serial.size() == crops.size());
    for (std::size_t i = 0; i < crops.size(); ++i) {
        CHECK(serial[i].glyph_id == crops[i].glyph_id());
        CHECK(parallel[i].values == serial[i].values);
    }
}

TEST_CASE("external embeddings") {
    std::vector<GlyphCrop> crops;
    for (int i = 0; i < 3; ++i) crops.push_back(crop_of(BinaryImage(2, 2), i));
    const fs::path dir = fs::temp_directory_path() / "vstemma_unit_embed";
    fs::create_directories(dir);

    SUBCASE("complete file with 512 dimensions is accepted") {
        std::vector<FeatureVector> vs;
        for (int i = 2; i >= 0; --i) vs.push_back({crops[i].glyph_id(), std::vector<double>(512, 0.001 * i + 0.1)});
        write_embedding_file(dir / "ok.txt", vs);
        const auto loaded = load_external_embeddings(dir / "ok.txt", crops);
        REQUIRE(loaded.size() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(loaded[i].glyph_id == crops[i].glyph_id());
            CHECK(loaded[i].values.size() == 512);
            CHECK(loaded[i].values[0] == 0.001 * i + 0.1);
        }
    }
    SUBCASE("missing glyph is named") {
        std::istringstream in("m_00000 1 2\nm_00002 3 4\n");
        const auto recs = parse_embeddings(in, "x");
        std::vector<std::string> ids{"m_00000", "m_00001", "m_00002"};
        try {
            match_embeddings(recs, ids);
            FAIL("expected an error");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("m_00001") != std::string::npos);
        }
    }
    SUBCASE("non-finite entry is named with its position") {
        std::ofstream(dir / "nan.txt") << "m_00000 1 2\nm_00001 3 nan\nm_00002 5 6\n";
        try {
            load_external_embeddings(dir / "nan.txt", crops);
            FAIL("expected an error");
        } catch (const InputError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("m_00001") != std::string::npos);
            CHECK(msg.find("position 1") != std::string::npos);
        }
    }
    SUBCASE("dimension mismatch and duplicates are rejected") {
        std::istringstream mixed("m_00000 1 2\nm_00001 3\nm_00002 5 6\n");
        std::vector<std::string> ids{"m_00000", "m_00001", "m_00002"};
        CHECK_THROWS_AS(match_embeddings(parse_embeddings(mixed, "x"), ids), InputError);
        std::istringstream dup("m_00000 1 2\nm_00000 3 4\nm_00001 1 1\nm_00002 5 6\n");
        CHECK_THROWS_AS(match_embeddings(parse_embeddings(dup, "x"), ids), InputError);
    }
    fs::remove_all(dir);
}
