#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "vstemma/error.hpp"
#include "vstemma/image_io.hpp"
#include "vstemma/pipeline.hpp"
#include "vstemma/synth.hpp"

using namespace vstemma;
namespace fs = std::filesystem;
namespace pl = vstemma::pipeline;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("vstemma_unit_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

pl::CorpusManifest page_manifest(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& pages, int k) {
    pl::CorpusManifest m;
    for (const auto& [id, text] : pages) {
        const fs::path png = dir / (id + ".png");
        write_png(png, synth::render_page(text));
        m.manuscripts.push_back({id, {png}, std::nullopt});
    }
    m.parameters.k = k;
    m.parameters.seed = 3;
    return m;
}

}  // namespace

TEST_CASE("glyph templates") {
    const std::string& alphabet = synth::template_alphabet();
    CHECK(alphabet.size() == 23);
    std::set<std::vector<std::uint8_t>> distinct;
    for (char c : alphabet) {
        const BinaryImage g = synth::glyph_template(c, 1);
        CHECK(g.width == 5);
        CHECK(g.height == 7);
        CHECK(extract_components(g).size() == 1);
        distinct.insert(g.mask);
    }
    CHECK(distinct.size() == alphabet.size());
    CHECK(synth::glyph_template('a', 3).width == 15);
    CHECK_THROWS_AS(synth::glyph_template('q'), InputError);
}

TEST_CASE("rendered pages segment into one crop per character") {
    const std::string text = "the quick brown fox jumps over the lazy dog";
    std::string letters;
    for (char c : text)
        if (synth::template_alphabet().find(c) != std::string::npos) letters += c;
    const RasterImage page = synth::render_page(letters);
    const auto seg = segment_page(page, SegmentParams{}, "p");
    CHECK(seg.crops.size() == letters.size());
    CHECK_THROWS_AS(synth::render_page(""), InputError);
}

TEST_CASE("synthetic tradition") {
    const auto a = synth::generate_tradition({});
    const auto b = synth::generate_tradition({});
    CHECK(a.witnesses.size() == 8);
    CHECK(a.texts() == b.texts());
    CHECK(a.ids().front() == "w01");
    for (const auto& w : a.witnesses) {
        CHECK(w.changes >= 4);
        for (char c : w.text) CHECK(synth::template_alphabet().find(c) != std::string::npos);
    }
    synth::TraditionParams bad;
    bad.witnesses = 1;
    CHECK_THROWS_AS(synth::generate_tradition(bad), InputError);
}

TEST_CASE("manifest round trip and validation") {
    TempDir tmp("manifest");
    auto m = page_manifest(tmp.path, {{"A", "abc"}, {"B", "abd"}}, 3);
    m.parameters.discard_fraction = 0.25;
    m.parameters.n_convention = NConvention::all;
    m.parameters.imaging.kernel = 5;
    pl::save_manifest(tmp.path / "manifest.json", m);
    const auto back = pl::load_manifest(tmp.path / "manifest.json");
    CHECK(back.ids() == std::vector<std::string>{"A", "B"});
    CHECK(back.parameters.k == 3);
    CHECK(back.parameters.discard_fraction == 0.25);
    CHECK(back.parameters.n_convention == NConvention::all);
    CHECK(back.parameters.imaging.kernel == 5);
    CHECK(back.manuscripts[0].image_paths == m.manuscripts[0].image_paths);

    auto dup = m;
    dup.manuscripts[1].id = "A";
    CHECK_THROWS_AS(dup.validate(false), InputError);
    auto bad_fraction = m;
    bad_fraction.parameters.discard_fraction = 1.0;
    CHECK_THROWS_AS(bad_fraction.validate(false), InputError);

    std::ofstream(tmp.path / "broken.json") << "{ not json";
    CHECK_THROWS_AS(pl::load_manifest(tmp.path / "broken.json"), InputError);
}

TEST_CASE("segment stage") {
    TempDir tmp("segment");
    auto m = page_manifest(tmp.path, {{"A", "abcab"}}, 2);
    const auto summary = pl::run_segment(m, tmp.path / "out");
    REQUIRE(summary.failures.empty());
    CHECK(summary.glyph_counts == std::vector<std::pair<std::string, int>>{{"A", 5}});
    CHECK(fs::exists(tmp.path / "out" / "A" / "crops.json"));
    CHECK(pl::load_crops(tmp.path / "out" / "A").size() == 5);
    CHECK(fs::exists(tmp.path / "out" / "run_record.json"));

    m.manuscripts.push_back({"B", {tmp.path / "missing.png"}, std::nullopt});
    const auto partial = pl::run_segment(m, tmp.path / "out2");
    REQUIRE(partial.failures.size() == 1);
    CHECK(partial.failures[0].manuscript_id == "B");
    CHECK(partial.failures[0].message.find("missing.png") != std::string::npos);
    CHECK(fs::exists(tmp.path / "out2" / "A" / "crops.json"));
}

TEST_CASE("cluster stage") {
    TempDir tmp("cluster");
    SUBCASE("two-template page clusters purely") {
        const std::string text = "abbaababbbaabab";
        auto m = page_manifest(tmp.path, {{"A", text}, {"B", "bbaab"}}, 2);
        pl::run_segment(m, tmp.path / "out");
        pl::run_embed(m, tmp.path / "out");
        const auto cs = pl::run_cluster(m, tmp.path / "out", true);
        std::vector<std::string> gold;
        for (char c : text) gold.emplace_back(1, c);
        CHECK(cluster_purity(cs[0], gold) == 1.0);
        CHECK(fs::is_directory(tmp.path / "out" / "A" / "clusters" / "cluster_0"));
        const Clustering loaded = pl::load_clustering(tmp.path / "out" / "A" / "clusters.json");
        CHECK(loaded.assignment == cs[0].assignment);
        CHECK(loaded.centroids == cs[0].centroids);
    }
    SUBCASE("k = 1 gives a single cluster") {
        auto m = page_manifest(tmp.path, {{"A", "abc"}, {"B", "abd"}}, 1);
        pl::run_segment(m, tmp.path / "out");
        pl::run_embed(m, tmp.path / "out");
        const auto cs = pl::run_cluster(m, tmp.path / "out");
        CHECK(cs[0].counts == std::vector<long long>{3});
    }
    SUBCASE("k above the glyph count is an error") {
        auto m = page_manifest(tmp.path, {{"A", "abc"}, {"B", "abd"}}, 4);
        pl::run_segment(m, tmp.path / "out");
        pl::run_embed(m, tmp.path / "out");
        CHECK_THROWS_AS(pl::run_cluster(m, tmp.path / "out"), InputError);
    }
    SUBCASE("missing k is an error") {
        auto m = page_manifest(tmp.path, {{"A", "abc"}, {"B", "abd"}}, 0);
        pl::run_segment(m, tmp.path / "out");
        pl::run_embed(m, tmp.path / "out");
        CHECK_THROWS_AS(pl::run_cluster(m, tmp.path / "out"), InputError);
    }
}

TEST_CASE("distances and trees") {
    TempDir tmp("distances");
    auto m = page_manifest(tmp.path, {{"A", "abcabcaab"}, {"Acopy", "abcabcaab"}, {"C", "abbbbccab"}, {"D", "aacacbbab"}}, 3);
    const auto summary = pl::run_all(m, tmp.path / "out");
    REQUIRE(summary.segmentation.failures.empty());
    const DistanceMatrix d = read_distance_csv(tmp.path / "out" / "distances.csv");
    CHECK(d.size() == 4);
    CHECK(d(0, 1) == 0.0);
    CHECK(d.upper_triangle().size() == 6);
    for (const char* f : {"mapping_A_Acopy.json", "mapping_C_D.json"}) CHECK(fs::exists(tmp.path / "out" / "mappings" / f));
    const std::string nj = pl::read_text_file(tmp.path / "out" / "stemma_nj.nwk");
    CHECK(parse_newick(nj).leaf_labels() == std::vector<std::string>{"A", "Acopy", "C", "D"});
    CHECK(fs::exists(tmp.path / "out" / "tree_upgma.nwk"));

    const auto record = nlohmann::json::parse(pl::read_text_file(tmp.path / "out" / "run_record.json"));
    for (const char* stage : {"segment", "embed", "cluster", "distances", "tree"}) CHECK(record["stages"].contains(stage));
    CHECK(record["version"] == pl::kVersion);

    // rerun later stages from persisted outputs
    const std::string before = pl::read_text_file(tmp.path / "out" / "distances.csv");
    fs::remove(tmp.path / "out" / "distances.csv");
    fs::remove_all(tmp.path / "out" / "mappings");
    pl::run_distances(m, tmp.path / "out");
    CHECK(pl::read_text_file(tmp.path / "out" / "distances.csv") == before);

    CHECK(pl::parse_tree_method("upgma") == pl::TreeMethod::upgma);
    CHECK_THROWS_AS(pl::parse_tree_method("mp"), InputError);
}

TEST_CASE("external embeddings through the pipeline") {
    TempDir tmp("external");
    auto m = page_manifest(tmp.path, {{"A", "abab"}, {"B", "aabb"}}, 2);
    pl::run_segment(m, tmp.path / "out");
    std::ofstream ext(tmp.path / "vectors.txt");
    for (const std::string id : {"A", "B"}) {
        for (const auto& crop : pl::load_crops(tmp.path / "out" / id)) ext << crop.glyph_id() << " 1 " << crop.index << "\n";
    }
    ext.close();
    m.parameters.embedding.method = EmbeddingMethod::external;
    m.parameters.embedding.external_path = tmp.path / "vectors.txt";
    pl::run_embed(m, tmp.path / "out");
    const auto vs = read_embedding_file(tmp.path / "out" / "A" / "embeddings.txt");
    REQUIRE(vs.size() == 4);
    CHECK(vs[3].values == std::vector<double>{1.0, 3.0});
}
