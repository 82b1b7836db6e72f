#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vstemma/assignment.hpp"
#include "vstemma/clustering.hpp"
#include "vstemma/embedding.hpp"
#include "vstemma/error.hpp"
#include "vstemma/imaging.hpp"
#include "vstemma/mapping.hpp"
#include "vstemma/pipeline.hpp"
#include "vstemma/stemma.hpp"
#include "vstemma/synth.hpp"
#include "vstemma/textmetrics.hpp"
#include "vstemma/unicode.hpp"

namespace py = pybind11;
using namespace vstemma;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage raster_from_array(const U8Array& arr) {
    const auto info = arr.request();
    if (info.ndim != 2 && !(info.ndim == 3 && info.shape[2] == 3)) {
        throw InputError("image must have shape (h, w) or (h, w, 3)");
    }
    RasterImage img(static_cast<int>(info.shape[1]), static_cast<int>(info.shape[0]), info.ndim == 2 ? 1 : 3);
    const auto* src = static_cast<const std::uint8_t*>(info.ptr);
    std::copy(src, src + img.data.size(), img.data.begin());
    return img;
}

U8Array array_from_raster(const RasterImage& img) {
    std::vector<py::ssize_t> shape{img.height, img.width};
    if (img.channels == 3) shape.push_back(3);
    U8Array out(shape);
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

py::array_t<bool> array_from_mask(const BinaryImage& m) {
    py::array_t<bool> out({m.height, m.width});
    auto* dst = out.mutable_data();
    for (std::size_t i = 0; i < m.mask.size(); ++i) dst[i] = m.mask[i] != 0;
    return out;
}

BinaryImage mask_from_array(const py::array_t<bool, py::array::c_style | py::array::forcecast>& arr) {
    const auto info = arr.request();
    if (info.ndim != 2) throw InputError("mask must be two-dimensional");
    BinaryImage m(static_cast<int>(info.shape[1]), static_cast<int>(info.shape[0]));
    const auto* src = static_cast<const bool*>(info.ptr);
    for (std::size_t i = 0; i < m.mask.size(); ++i) m.mask[i] = src[i] ? 1 : 0;
    return m;
}

DistanceMatrix matrix_from(const std::vector<std::string>& labels, const std::vector<std::vector<double>>& rows) {
    DistanceMatrix m(labels);
    if (rows.size() != labels.size()) throw InputError("distance matrix needs one row per label");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != labels.size()) throw InputError("distance matrix must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    m.validate();
    return m;
}

NormalizationOptions options(bool lowercase, bool strip_whitespace, bool strip_combining) {
    return {lowercase, strip_whitespace, strip_combining};
}

py::dict distances_dict(const DistanceMatrix& m) {
    py::dict d;
    d["labels"] = m.labels;
    std::vector<std::vector<double>> rows(m.size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) rows[i][j] = m(i, j);
    d["values"] = rows;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Glyph clustering, manuscript distances, stemma trees and OCR text metrics";
    m.attr("__version__") = pipeline::kVersion;

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    // text metrics
    m.def(
        "normalize_text",
        [](const std::string& s, bool lowercase, bool strip_whitespace, bool strip_combining) {
            return normalize_text(std::string_view(s), options(lowercase, strip_whitespace, strip_combining));
        },
        py::arg("text"), py::arg("lowercase") = true, py::arg("strip_whitespace") = true, py::arg("strip_combining") = true);
    m.def("levenshtein", [](const std::string& a, const std::string& b) { return levenshtein(std::string_view(a), std::string_view(b)); },
          py::arg("a"), py::arg("b"));
    m.def(
        "cer",
        [](const std::string& ref, const std::string& hyp, bool lowercase, bool strip_whitespace, bool strip_combining) {
            return cer(ref, hyp, options(lowercase, strip_whitespace, strip_combining));
        },
        py::arg("ref"), py::arg("hyp"), py::arg("lowercase") = true, py::arg("strip_whitespace") = true,
        py::arg("strip_combining") = true);
    m.def("diacritics_cer", [](const std::string& ref, const std::string& hyp) { return diacritics_cer(ref, hyp); },
          py::arg("ref"), py::arg("hyp"));
    m.def(
        "edit_operations",
        [](const std::string& ref, const std::string& hyp) {
            const auto s = edit_alignment(unicode::decode_utf8(ref), unicode::decode_utf8(hyp));
            auto ch = [](char32_t c) { return unicode::encode_utf8(std::u32string(1, c)); };
            py::dict subs, ins, del;
            for (const auto& [k, v] : s.substitutions) subs[py::make_tuple(ch(k.first), ch(k.second))] = v;
            for (const auto& [k, v] : s.insertions) ins[py::str(ch(k))] = v;
            for (const auto& [k, v] : s.deletions) del[py::str(ch(k))] = v;
            py::dict out;
            out["substitutions"] = subs;
            out["insertions"] = ins;
            out["deletions"] = del;
            return out;
        },
        py::arg("ref"), py::arg("hyp"));
    m.def(
        "letter_distribution",
        [](const std::string& text) {
            std::map<std::string, double> out;
            for (const auto& [c, f] : letter_distribution(text)) out[unicode::encode_utf8(std::u32string(1, c))] = f;
            return out;
        },
        py::arg("text"));
    m.def(
        "distribution_distance",
        [](const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
            auto convert = [](const std::map<std::string, double>& in) {
                LetterDistribution out;
                for (const auto& [k, v] : in) {
                    const auto cs = unicode::decode_utf8(k);
                    if (cs.size() != 1) throw InputError("distribution keys must be single characters");
                    out[cs[0]] = v;
                }
                return out;
            };
            return distribution_distance(convert(p), convert(q));
        },
        py::arg("p"), py::arg("q"));
    m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); }, py::arg("x"),
          py::arg("y"));

    // assignment and clustering
    m.def(
        "hungarian_match",
        [](const Matrix& sim) {
            const auto a = hungarian_match(sim);
            return py::make_tuple(a.columns, a.total);
        },
        py::arg("similarity"), "Maximum-similarity bijection; returns (columns, total similarity).");

    py::class_<Clustering>(m, "Clustering")
        .def_readonly("manuscript_id", &Clustering::manuscript_id)
        .def_readonly("k", &Clustering::k)
        .def_readonly("seed", &Clustering::seed)
        .def_readonly("assignment", &Clustering::assignment)
        .def_readonly("centroids", &Clustering::centroids)
        .def_readonly("counts", &Clustering::counts)
        .def_readonly("sse_trace", &Clustering::sse_trace)
        .def_readonly("iterations", &Clustering::iterations)
        .def_readonly("converged", &Clustering::converged)
        .def_property_readonly("sse", &Clustering::sse)
        .def_property_readonly("frequencies", [](const Clustering& c) { return cluster_frequencies(c).freq; })
        .def("purity", [](const Clustering& c, const std::vector<std::string>& labels) { return cluster_purity(c, labels); });

    m.def(
        "kmeans",
        [](const std::vector<Vector>& points, int k, std::uint64_t seed, int max_iter, double tol, const std::string& id) {
            return kmeans(points, {k, seed, max_iter, tol}, id);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 42, py::arg("max_iter") = 300, py::arg("tol") = 1e-6,
        py::arg("manuscript_id") = "");
    m.def(
        "manuscript_distance",
        [](const Clustering& a, const Clustering& b, double fraction, const std::string& convention) {
            const auto mapping = discard_low_similarity(map_clusters(a, b), fraction);
            return manuscript_distance(mapping, cluster_frequencies(a), cluster_frequencies(b), parse_n_convention(convention));
        },
        py::arg("a"), py::arg("b"), py::arg("discard_fraction") = 0.1, py::arg("n_convention") = "retained");

    // trees
    m.def(
        "neighbor_joining",
        [](const std::vector<std::string>& labels, const std::vector<std::vector<double>>& d) {
            return to_newick(neighbor_joining(matrix_from(labels, d)));
        },
        py::arg("labels"), py::arg("distances"), "Unrooted neighbour-joining tree as Newick.");
    m.def(
        "upgma",
        [](const std::vector<std::string>& labels, const std::vector<std::vector<double>>& d) {
            return to_newick(upgma(matrix_from(labels, d)));
        },
        py::arg("labels"), py::arg("distances"), "Rooted UPGMA dendrogram as Newick.");
    m.def(
        "robinson_foulds",
        [](const std::string& a, const std::string& b) { return robinson_foulds(parse_newick(a), parse_newick(b)); },
        py::arg("newick_a"), py::arg("newick_b"));
    m.def(
        "tree_distances", [](const std::string& newick) { return distances_dict(path_distances(parse_newick(newick))); },
        py::arg("newick"), "Leaf-to-leaf path lengths of a Newick tree.");

    // imaging and embedding
    m.def("otsu_threshold", [](const U8Array& gray) { return otsu_threshold(to_grayscale(raster_from_array(gray))); },
          py::arg("image"));
    m.def(
        "segment_page",
        [](const U8Array& image, const std::string& manuscript_id, int kernel, long long min_area, double max_area_fraction,
           int min_side, int padding, bool ink_is_dark, int bin_height) {
            SegmentParams p{kernel, min_area, max_area_fraction, min_side, padding, ink_is_dark, bin_height};
            const auto seg = segment_page(raster_from_array(image), p, manuscript_id);
            py::list crops;
            for (const auto& c : seg.crops) {
                py::dict d;
                d["glyph_id"] = c.glyph_id();
                d["index"] = c.index;
                d["line"] = c.line;
                d["box"] = py::make_tuple(c.box.x, c.box.y, c.box.w, c.box.h);
                d["patch"] = array_from_mask(c.patch);
                crops.append(d);
            }
            return crops;
        },
        py::arg("image"), py::arg("manuscript_id") = "page", py::arg("kernel") = 3, py::arg("min_area") = 15,
        py::arg("max_area_fraction") = 0.05, py::arg("min_side") = 3, py::arg("padding") = 2, py::arg("ink_is_dark") = true,
        py::arg("bin_height") = 0);
    m.def(
        "embed_patch",
        [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& patch, int patch_size) {
            GlyphCrop crop;
            crop.patch = mask_from_array(patch);
            EmbeddingConfig cfg;
            cfg.patch_size = patch_size;
            return embed_patch(crop, cfg).values;
        },
        py::arg("patch"), py::arg("patch_size") = 32);

    // synthetic data
    m.def(
        "generate_tradition",
        [](int witnesses, int length, std::uint64_t seed) {
            synth::TraditionParams tp;
            tp.witnesses = witnesses;
            tp.length = length;
            tp.seed = seed;
            const auto t = synth::generate_tradition(tp);
            py::dict out;
            out["archetype"] = t.archetype;
            out["ids"] = t.ids();
            out["texts"] = t.texts();
            return out;
        },
        py::arg("witnesses") = 8, py::arg("length") = 600, py::arg("seed") = synth::TraditionParams{}.seed);
    m.def("render_page", [](const std::string& text) { return array_from_raster(synth::render_page(text)); }, py::arg("text"));
    m.def(
        "write_synthetic_corpus",
        [](const std::filesystem::path& out, int witnesses, int length, std::uint64_t seed) {
            synth::TraditionParams tp;
            tp.witnesses = witnesses;
            tp.length = length;
            tp.seed = seed;
            pipeline::write_synthetic_corpus(out, tp, {}, 42);
            return out / "manifest.json";
        },
        py::arg("out"), py::arg("witnesses") = 8, py::arg("length") = 600, py::arg("seed") = synth::TraditionParams{}.seed,
        "Writes pages, texts, gold distances and a manifest; returns the manifest path.");

    // pipeline
    m.def(
        "run_pipeline",
        [](const std::filesystem::path& manifest_path, const std::filesystem::path& out) {
            const auto manifest = pipeline::load_manifest(manifest_path);
            const auto summary = pipeline::run_all(manifest, out);
            if (!summary.segmentation.failures.empty()) {
                const auto& f = summary.segmentation.failures.front();
                throw InputError(f.manuscript_id + ": " + f.message);
            }
            return distances_dict(read_distance_csv(out / "distances.csv"));
        },
        py::arg("manifest"), py::arg("out"), "Runs segment, embed, cluster, distances and tree; returns the distance matrix.");
    m.def(
        "read_distances", [](const std::filesystem::path& path) { return distances_dict(read_distance_csv(path)); },
        py::arg("path"));
}
