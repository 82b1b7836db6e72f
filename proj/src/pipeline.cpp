#include "vstemma/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vstemma/error.hpp"
#include "vstemma/image_io.hpp"
#include "vstemma/parallel.hpp"
#include "vstemma/textmetrics.hpp"

namespace vstemma::pipeline {

using nlohmann::json;

namespace {

json imaging_to_json(const SegmentParams& p) {
    return {{"kernel", p.kernel},       {"min_area", p.min_area}, {"max_area_fraction", p.max_area_fraction},
            {"min_side", p.min_side},   {"padding", p.padding},   {"ink_is_dark", p.ink_is_dark},
            {"bin_height", p.bin_height}};
}

json parameters_to_json(const RunParameters& p) {
    json embedding = {{"method", to_string(p.embedding.method)}, {"patch_size", p.embedding.patch_size}};
    embedding["external_path"] = p.embedding.external_path.empty() ? json(nullptr) : json(p.embedding.external_path.string());
    return {{"k", p.k},
            {"seed", p.seed},
            {"discard_fraction", p.discard_fraction},
            {"n_convention", to_string(p.n_convention)},
            {"embedding", embedding},
            {"imaging", imaging_to_json(p.imaging)},
            {"kmeans", {{"max_iter", p.max_iter}, {"tol", p.tol}}},
            {"jobs", p.jobs}};
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return (base / p).lexically_normal();
}

RunParameters parameters_from_json(const json& j, const fs::path& base) {
    RunParameters p;
    read_opt(j, "k", p.k);
    read_opt(j, "seed", p.seed);
    read_opt(j, "discard_fraction", p.discard_fraction);
    if (j.contains("n_convention")) p.n_convention = parse_n_convention(j.at("n_convention").get<std::string>());
    read_opt(j, "jobs", p.jobs);
    if (j.contains("embedding")) {
        const json& e = j.at("embedding");
        if (e.contains("method")) p.embedding.method = parse_embedding_method(e.at("method").get<std::string>());
        read_opt(e, "patch_size", p.embedding.patch_size);
        if (e.contains("external_path") && !e.at("external_path").is_null()) {
            p.embedding.external_path = resolve(base, e.at("external_path").get<std::string>());
        }
    }
    if (j.contains("imaging")) {
        const json& im = j.at("imaging");
        read_opt(im, "kernel", p.imaging.kernel);
        read_opt(im, "min_area", p.imaging.min_area);
        read_opt(im, "max_area_fraction", p.imaging.max_area_fraction);
        read_opt(im, "min_side", p.imaging.min_side);
        read_opt(im, "padding", p.imaging.padding);
        read_opt(im, "ink_is_dark", p.imaging.ink_is_dark);
        read_opt(im, "bin_height", p.imaging.bin_height);
    }
    if (j.contains("kmeans")) {
        read_opt(j.at("kmeans"), "max_iter", p.max_iter);
        read_opt(j.at("kmeans"), "tol", p.tol);
    }
    return p;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::vector<std::string> glyph_ids_from_crops_json(const fs::path& dir) {
    const json j = read_json(dir / "crops.json");
    const std::string id = j.at("manuscript_id").get<std::string>();
    std::vector<std::string> ids;
    for (const auto& g : j.at("glyphs")) ids.push_back(make_glyph_id(id, g.at("index").get<int>()));
    return ids;
}

}  // namespace

void CorpusManifest::validate(bool check_files) const {
    if (manuscripts.empty()) throw InputError("manifest lists no manuscripts");
    std::set<std::string> seen;
    for (const auto& m : manuscripts) {
        if (m.id.empty()) throw InputError("manifest entry without an id");
        if (m.id.find_first_of("/\\ ,") != std::string::npos) throw InputError("manuscript id '" + m.id + "' contains a path separator, comma or space");
        if (!seen.insert(m.id).second) throw InputError("duplicate manuscript id '" + m.id + "'");
        if (!check_files) continue;
        for (const auto& p : m.image_paths) {
            if (!fs::exists(p)) throw InputError("image not found for " + m.id + ": " + p.string());
        }
        if (m.gold_transcript_path && !fs::exists(*m.gold_transcript_path)) {
            throw InputError("gold transcript not found for " + m.id + ": " + m.gold_transcript_path->string());
        }
    }
    if (parameters.discard_fraction < 0.0 || parameters.discard_fraction >= 1.0) throw InputError("discard_fraction must be in [0, 1)");
    if (parameters.jobs < 1) throw InputError("jobs must be >= 1");
    parameters.embedding.validate();
}

std::vector<std::string> CorpusManifest::ids() const {
    std::vector<std::string> out;
    for (const auto& m : manuscripts) out.push_back(m.id);
    return out;
}

CorpusManifest load_manifest(const fs::path& path) {
    const json j = read_json(path);
    const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    CorpusManifest manifest;
    try {
        for (const auto& e : j.at("manuscripts")) {
            ManuscriptEntry entry;
            entry.id = e.at("id").get<std::string>();
            for (const auto& p : e.at("image_paths")) entry.image_paths.push_back(resolve(base, p.get<std::string>()));
            if (e.contains("gold_transcript_path") && !e.at("gold_transcript_path").is_null()) {
                entry.gold_transcript_path = resolve(base, e.at("gold_transcript_path").get<std::string>());
            }
            manifest.manuscripts.push_back(std::move(entry));
        }
        if (j.contains("parameters")) manifest.parameters = parameters_from_json(j.at("parameters"), base);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    manifest.validate(false);
    return manifest;
}

namespace {

json manifest_to_json(const CorpusManifest& manifest) {
    json ms = json::array();
    for (const auto& m : manifest.manuscripts) {
        json paths = json::array();
        for (const auto& p : m.image_paths) paths.push_back(p.string());
        json e = {{"id", m.id}, {"image_paths", paths}};
        if (m.gold_transcript_path) e["gold_transcript_path"] = m.gold_transcript_path->string();
        ms.push_back(e);
    }
    return {{"manuscripts", ms}, {"parameters", parameters_to_json(manifest.parameters)}};
}

}  // namespace

void save_manifest(const fs::path& path, const CorpusManifest& manifest) { write_json(path, manifest_to_json(manifest)); }

fs::path manuscript_dir(const fs::path& out, const std::string& id) { return out / id; }

SegmentSummary run_segment(const CorpusManifest& manifest, const fs::path& out) {
    manifest.validate(false);
    fs::create_directories(out);
    const auto& params = manifest.parameters;
    const std::size_t n = manifest.manuscripts.size();
    std::vector<int> counts(n, -1);
    std::vector<std::string> errors(n);

    parallel_for(n, params.jobs, [&](std::size_t i) {
        const auto& entry = manifest.manuscripts[i];
        try {
            if (entry.image_paths.empty()) throw InputError("no image paths listed for " + entry.id);
            for (const auto& p : entry.image_paths) {
                if (!fs::exists(p)) throw InputError("image not found: " + p.string());
            }
            const fs::path dir = manuscript_dir(out, entry.id);
            fs::remove_all(dir / "crops");
            fs::create_directories(dir / "crops");
            json pages = json::array();
            json glyphs = json::array();
            int next_index = 0, next_line = 0;
            for (std::size_t page_no = 0; page_no < entry.image_paths.size(); ++page_no) {
                const RasterImage img = read_image(entry.image_paths[page_no]);
                const PageSegmentation seg = segment_page(img, params.imaging, entry.id, next_index, next_line);
                for (const auto& crop : seg.crops) {
                    const std::string file = "crops/" + crop.glyph_id() + ".png";
                    write_png(dir / file, crop.patch);
                    glyphs.push_back({{"index", crop.index},
                                      {"page", page_no},
                                      {"line", crop.line},
                                      {"box", {crop.box.x, crop.box.y, crop.box.w, crop.box.h}},
                                      {"file", file}});
                    next_line = std::max(next_line, crop.line + 1);
                }
                next_index += static_cast<int>(seg.crops.size());
                pages.push_back({{"path", entry.image_paths[page_no].string()},
                                 {"width", img.width},
                                 {"height", img.height},
                                 {"threshold", seg.threshold},
                                 {"bin_height", seg.bin_height},
                                 {"components", seg.components},
                                 {"glyphs", seg.crops.size()}});
            }
            write_json(dir / "crops.json", {{"manuscript_id", entry.id},
                                            {"parameters", imaging_to_json(params.imaging)},
                                            {"pages", pages},
                                            {"glyphs", glyphs}});
            counts[i] = next_index;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    SegmentSummary summary;
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i] >= 0) summary.glyph_counts.emplace_back(manifest.manuscripts[i].id, counts[i]);
        else summary.failures.push_back({manifest.manuscripts[i].id, errors[i]});
    }
    record_stage(out, manifest, "segment");
    return summary;
}

std::vector<GlyphCrop> load_crops(const fs::path& dir) {
    const json j = read_json(dir / "crops.json");
    std::vector<GlyphCrop> crops;
    try {
        const std::string id = j.at("manuscript_id").get<std::string>();
        for (const auto& g : j.at("glyphs")) {
            GlyphCrop crop;
            crop.manuscript_id = id;
            crop.index = g.at("index").get<int>();
            crop.line = g.value("line", 0);
            if (g.contains("box")) {
                const auto& b = g.at("box");
                crop.box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
            }
            crop.patch = read_binary_png(dir / g.at("file").get<std::string>());
            crops.push_back(std::move(crop));
        }
    } catch (const json::exception& e) {
        throw InputError((dir / "crops.json").string() + ": " + e.what());
    }
    return crops;
}

void run_embed(const CorpusManifest& manifest, const fs::path& out) {
    manifest.validate(false);
    const auto& cfg = manifest.parameters.embedding;
    std::vector<FeatureVector> external;
    if (cfg.method == EmbeddingMethod::external) external = read_embedding_file(cfg.external_path);
    for (const auto& entry : manifest.manuscripts) {
        const fs::path dir = manuscript_dir(out, entry.id);
        std::vector<FeatureVector> vectors;
        if (cfg.method == EmbeddingMethod::patch) {
            vectors = embed_patches(load_crops(dir), cfg, manifest.parameters.jobs);
        } else {
            vectors = match_embeddings(external, glyph_ids_from_crops_json(dir));
        }
        write_embedding_file(dir / "embeddings.txt", vectors);
    }
    record_stage(out, manifest, "embed");
}

void save_clustering(const fs::path& path, const Clustering& c, const RunParameters& params) {
    const auto freq = cluster_frequencies(c);
    write_json(path, {{"manuscript_id", c.manuscript_id},
                      {"k", c.k},
                      {"seed", c.seed},
                      {"parameters", {{"max_iter", params.max_iter}, {"tol", params.tol}}},
                      {"iterations", c.iterations},
                      {"converged", c.converged},
                      {"sse_trace", c.sse_trace},
                      {"assignment", c.assignment},
                      {"counts", c.counts},
                      {"frequencies", freq.freq},
                      {"centroids", c.centroids}});
}

Clustering load_clustering(const fs::path& path) {
    const json j = read_json(path);
    Clustering c;
    try {
        c.manuscript_id = j.at("manuscript_id").get<std::string>();
        c.k = j.at("k").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.iterations = j.value("iterations", 0);
        c.converged = j.value("converged", false);
        c.sse_trace = j.value("sse_trace", std::vector<double>{});
        c.assignment = j.at("assignment").get<std::vector<int>>();
        c.counts = j.at("counts").get<std::vector<long long>>();
        c.centroids = j.at("centroids").get<std::vector<Vector>>();
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (static_cast<int>(c.centroids.size()) != c.k || static_cast<int>(c.counts.size()) != c.k) {
        throw InputError(path.string() + ": k does not match the number of centroids or counts");
    }
    return c;
}

std::vector<Clustering> run_cluster(const CorpusManifest& manifest, const fs::path& out, bool copy_crops) {
    manifest.validate(false);
    const auto& params = manifest.parameters;
    if (params.k < 1) throw InputError("k is required for clustering (one value for all manuscripts)");
    const std::size_t n = manifest.manuscripts.size();
    std::vector<Clustering> results(n);
    parallel_for(n, params.jobs, [&](std::size_t i) {
        const auto& entry = manifest.manuscripts[i];
        const fs::path dir = manuscript_dir(out, entry.id);
        const auto records = read_embedding_file(dir / "embeddings.txt");
        const auto vectors = match_embeddings(records, glyph_ids_from_crops_json(dir));
        std::vector<Vector> points;
        points.reserve(vectors.size());
        for (const auto& fv : vectors) points.push_back(fv.values);
        if (points.empty()) throw InputError("manuscript " + entry.id + " has no glyphs to cluster");
        results[i] = kmeans(points, {params.k, params.seed, params.max_iter, params.tol}, entry.id);
        save_clustering(dir / "clusters.json", results[i], params);
        if (copy_crops) {
            const json crops = read_json(dir / "crops.json");
            fs::remove_all(dir / "clusters");
            for (int c = 0; c < params.k; ++c) fs::create_directories(dir / "clusters" / ("cluster_" + std::to_string(c)));
            const auto& glyphs = crops.at("glyphs");
            for (std::size_t g = 0; g < glyphs.size(); ++g) {
                const fs::path src = dir / glyphs[g].at("file").get<std::string>();
                const fs::path dst = dir / "clusters" / ("cluster_" + std::to_string(results[i].assignment[g])) / src.filename();
                fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
            }
        }
    });
    record_stage(out, manifest, "cluster");
    return results;
}

void save_mapping(const fs::path& path, const ClusterMapping& m) {
    json matches = json::array();
    for (const auto& x : m.matches) {
        matches.push_back({{"a", x.a}, {"b", x.b}, {"similarity", x.similarity}, {"retained", x.retained}});
    }
    write_json(path, {{"pair", {m.manuscript_a, m.manuscript_b}},
                      {"discard_fraction", m.discard_fraction},
                      {"retained", m.retained_count()},
                      {"matches", matches}});
}

PairwiseResult run_distances(const CorpusManifest& manifest, const fs::path& out) {
    manifest.validate(false);
    std::vector<Clustering> clusterings;
    for (const auto& entry : manifest.manuscripts) {
        clusterings.push_back(load_clustering(manuscript_dir(out, entry.id) / "clusters.json"));
    }
    const auto& p = manifest.parameters;
    PairwiseResult result = pairwise_distances(clusterings, p.discard_fraction, p.n_convention, p.jobs);
    write_distance_csv(out / "distances.csv", result.distances);
    fs::create_directories(out / "mappings");
    for (const auto& m : result.mappings) {
        save_mapping(out / "mappings" / ("mapping_" + m.manuscript_a + "_" + m.manuscript_b + ".json"), m);
    }
    record_stage(out, manifest, "distances");
    return result;
}

TreeMethod parse_tree_method(const std::string& name) {
    if (name == "nj") return TreeMethod::nj;
    if (name == "upgma") return TreeMethod::upgma;
    throw InputError("unknown tree method '" + name + "' (expected nj or upgma)");
}

PhyloTree run_tree(const fs::path& distances_csv, TreeMethod method, const fs::path& out_file) {
    const DistanceMatrix m = read_distance_csv(distances_csv);
    PhyloTree tree = method == TreeMethod::nj ? neighbor_joining(m) : upgma(m);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    std::ofstream out(out_file);
    if (!out) throw InputError("cannot write " + out_file.string());
    out << to_newick(tree) << '\n';
    return tree;
}

void record_stage(const fs::path& out, const CorpusManifest& manifest, const std::string& stage) {
    fs::create_directories(out);
    const fs::path path = out / "run_record.json";
    json record;
    if (fs::exists(path)) {
        try {
            record = read_json(path);
        } catch (const InputError&) {
            record = json::object();
        }
    }
    record["tool"] = kToolName;
    record["version"] = kVersion;
    record["manifest"] = manifest_to_json(manifest);
    record["stages"][stage] = {{"parameters", parameters_to_json(manifest.parameters)}, {"finished_at", utc_now()}};
    write_json(path, record);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open text file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunSummary run_all(const CorpusManifest& manifest, const fs::path& out) {
    RunSummary summary;
    summary.segmentation = run_segment(manifest, out);
    if (!summary.segmentation.failures.empty()) return summary;
    run_embed(manifest, out);
    run_cluster(manifest, out);
    run_distances(manifest, out);
    summary.nj = run_tree(out / "distances.csv", TreeMethod::nj, out / "stemma_nj.nwk");
    summary.upgma = run_tree(out / "distances.csv", TreeMethod::upgma, out / "tree_upgma.nwk");
    record_stage(out, manifest, "tree");
    return summary;
}

SyntheticCorpus write_synthetic_corpus(const fs::path& out, const synth::TraditionParams& tp,
                                       const synth::PageLayout& layout, std::uint64_t run_seed) {
    SyntheticCorpus corpus;
    corpus.tradition = synth::generate_tradition(tp);
    fs::create_directories(out / "texts");
    fs::create_directories(out / "pages");
    std::set<char> letters;
    for (const auto& w : corpus.tradition.witnesses) {
        std::ofstream(out / "texts" / (w.id + ".txt")) << w.text << '\n';
        write_png(out / "pages" / (w.id + ".png"), synth::render_page(w.text, layout));
        corpus.manifest.manuscripts.push_back(
            {w.id, {out / "pages" / (w.id + ".png")}, out / "texts" / (w.id + ".txt")});
        letters.insert(w.text.begin(), w.text.end());
    }
    corpus.manifest.parameters.k = static_cast<int>(letters.size());
    corpus.manifest.parameters.seed = run_seed;

    CorpusManifest relative = corpus.manifest;
    for (auto& m : relative.manuscripts) {
        m.image_paths = {fs::path("pages") / (m.id + ".png")};
        m.gold_transcript_path = fs::path("texts") / (m.id + ".txt");
    }
    save_manifest(out / "manifest.json", relative);

    const auto ids = corpus.tradition.ids();
    const auto texts = corpus.tradition.texts();
    corpus.gold_levenshtein = levenshtein_matrix(texts, ids);
    corpus.letter_distances = distribution_distance_matrix(texts, ids);
    write_distance_csv(out / "gold_levenshtein.csv", corpus.gold_levenshtein);
    write_distance_csv(out / "letter_distances.csv", corpus.letter_distances);

    json history = json::array();
    for (const auto& w : corpus.tradition.witnesses) {
        history.push_back({{"id", w.id},
                           {"parent", w.parent < 0 ? json("archetype") : json(corpus.tradition.witnesses[w.parent].id)},
                           {"changes", w.changes}});
    }
    write_json(out / "tradition.json", {{"seed", tp.seed}, {"archetype", corpus.tradition.archetype}, {"witnesses", history}});
    return corpus;
}

}  // namespace vstemma::pipeline
