// vstemma: glyph segmentation, clustering and distance-based stemma building
// from page images, plus text-distance evaluation.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vstemma/error.hpp"
#include "vstemma/pipeline.hpp"
#include "vstemma/textmetrics.hpp"
#include "vstemma/unicode.hpp"

namespace fs = std::filesystem;
namespace pl = vstemma::pipeline;

namespace {

// Flags that override manifest parameters; unset flags leave the manifest alone.
struct Overrides {
    std::optional<int> k;
    std::optional<std::uint64_t> seed;
    std::optional<double> discard_fraction;
    std::optional<std::string> n_convention;
    std::optional<std::string> embedding;
    std::optional<std::string> external_path;
    std::optional<int> patch_size;
    std::optional<int> kernel;
    std::optional<long long> min_area;
    std::optional<double> max_area_fraction;
    std::optional<int> min_side;
    std::optional<int> padding;
    std::optional<int> bin_height;
    bool light_ink = false;
    std::optional<int> max_iter;
    std::optional<double> tol;
    std::optional<int> jobs;

    void apply(pl::RunParameters& p) const {
        if (k) p.k = *k;
        if (seed) p.seed = *seed;
        if (discard_fraction) p.discard_fraction = *discard_fraction;
        if (n_convention) p.n_convention = vstemma::parse_n_convention(*n_convention);
        if (embedding) p.embedding.method = vstemma::parse_embedding_method(*embedding);
        if (external_path) p.embedding.external_path = *external_path;
        if (patch_size) p.embedding.patch_size = *patch_size;
        if (kernel) p.imaging.kernel = *kernel;
        if (min_area) p.imaging.min_area = *min_area;
        if (max_area_fraction) p.imaging.max_area_fraction = *max_area_fraction;
        if (min_side) p.imaging.min_side = *min_side;
        if (padding) p.imaging.padding = *padding;
        if (bin_height) p.imaging.bin_height = *bin_height;
        if (light_ink) p.imaging.ink_is_dark = false;
        if (max_iter) p.max_iter = *max_iter;
        if (tol) p.tol = *tol;
        if (jobs) p.jobs = *jobs;
    }
};

void add_imaging_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--kernel", o.kernel, "Opening structuring element size (odd)");
    cmd->add_option("--min-area", o.min_area, "Smallest kept box area in px^2");
    cmd->add_option("--max-area-fraction", o.max_area_fraction, "Largest kept box area as a fraction of the page");
    cmd->add_option("--min-side", o.min_side, "Smallest kept box side in px");
    cmd->add_option("--padding", o.padding, "Crop padding in px");
    cmd->add_option("--bin-height", o.bin_height, "Line bin height in px (default: median glyph height)");
    cmd->add_flag("--light-ink", o.light_ink, "Ink is lighter than the background");
}

void add_embedding_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--embedding", o.embedding, "patch or external")->check(CLI::IsMember({"patch", "external"}));
    cmd->add_option("--external-path", o.external_path, "Embedding sidecar file for --embedding external");
    cmd->add_option("--patch-size", o.patch_size, "Patch embedding side length S (D = S*S)");
}

void add_cluster_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-k,--k", o.k, "Number of clusters, shared by all manuscripts");
    cmd->add_option("--seed", o.seed, "k-means++ seed");
    cmd->add_option("--max-iter", o.max_iter, "Lloyd iteration cap");
    cmd->add_option("--tol", o.tol, "Centroid movement tolerance");
}

void add_distance_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--discard-fraction", o.discard_fraction, "Fraction of lowest-similarity cluster matches to discard");
    cmd->add_option("--n-convention", o.n_convention, "retained or all")->check(CLI::IsMember({"retained", "all"}));
}

pl::CorpusManifest load_with_overrides(const std::string& path, const Overrides& o) {
    pl::CorpusManifest m = pl::load_manifest(path);
    o.apply(m.parameters);
    m.validate(false);
    return m;
}

void write_or_print(const std::optional<std::string>& path, const std::string& content) {
    if (!path) {
        std::cout << content;
        return;
    }
    std::ofstream out(*path);
    if (!out) throw vstemma::InputError("cannot write " + *path);
    out << content;
}

void log_clamping(const vstemma::PhyloTree& tree, const std::string& what) {
    if (tree.clamped_edges > 0) {
        std::fprintf(stderr, "warning: %s: %d negative branch length(s) clamped to 0 (total deficit %.6g)\n", what.c_str(),
                     tree.clamped_edges, tree.clamped_deficit);
    }
}

std::string format_double(double v, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

int report_segment(const pl::SegmentSummary& s) {
    for (const auto& [id, n] : s.glyph_counts) std::printf("%s: %d glyphs\n", id.c_str(), n);
    for (const auto& f : s.failures) std::fprintf(stderr, "error: %s: %s\n", f.manuscript_id.c_str(), f.message.c_str());
    if (!s.failures.empty()) {
        std::fprintf(stderr, "%zu of %zu manuscripts failed to segment\n", s.failures.size(), s.failures.size() + s.glyph_counts.size());
        return 1;
    }
    return 0;
}

std::string rank_report_csv(const vstemma::RankReport& r) {
    std::string s = "a,b,test,test_rank,gold,gold_rank\n";
    for (const auto& row : r.rows) {
        s += row.a + "," + row.b + "," + format_double(row.test, "%.10g") + "," + format_double(row.test_rank, "%g") + "," +
             format_double(row.gold, "%.10g") + "," + format_double(row.gold_rank, "%g") + "\n";
    }
    s += "spearman," + (r.rho ? format_double(*r.rho, "%.6f") : std::string("NA")) + "\n";
    return s;
}

int cmd_synth(const fs::path& out, const vstemma::synth::TraditionParams& tp, const vstemma::synth::PageLayout& layout,
              std::uint64_t run_seed) {
    const auto corpus = pl::write_synthetic_corpus(out, tp, layout, run_seed);
    const auto rho = vstemma::rank_report(corpus.gold_levenshtein, corpus.letter_distances).rho;
    std::printf("witnesses: %zu\nk: %d\nletter-distribution vs gold Levenshtein spearman: %s\n",
                corpus.tradition.witnesses.size(), corpus.manifest.parameters.k,
                rho ? format_double(*rho).c_str() : "NA");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual stemmatology: glyphs -> clusters -> distances -> stemma"};
    app.set_version_flag("--version", std::string(pl::kVersion));
    app.require_subcommand(1);
    bool error_json = false;
    app.add_flag("--error-json", error_json, "Report failures as a JSON object on stderr");

    Overrides o;
    std::string manifest_path;
    std::string out_dir;

    auto* segment = app.add_subcommand("segment", "Cut page images into glyph crops");
    segment->add_option("--manifest", manifest_path, "Corpus manifest (JSON)")->required();
    segment->add_option("--out", out_dir, "Work directory")->required();
    segment->add_option("--jobs", o.jobs, "Manuscripts processed in parallel");
    add_imaging_flags(segment, o);

    auto* embed = app.add_subcommand("embed", "Compute or import glyph feature vectors");
    embed->add_option("--manifest", manifest_path, "Corpus manifest (JSON)")->required();
    embed->add_option("--out", out_dir, "Work directory")->required();
    embed->add_option("--jobs", o.jobs, "Worker threads");
    add_embedding_flags(embed, o);

    bool copy_crops = false;
    auto* cluster = app.add_subcommand("cluster", "k-means over each manuscript's glyph vectors");
    cluster->add_option("--manifest", manifest_path, "Corpus manifest (JSON)")->required();
    cluster->add_option("--out", out_dir, "Work directory")->required();
    cluster->add_option("--jobs", o.jobs, "Manuscripts processed in parallel");
    cluster->add_flag("--copy-crops", copy_crops, "Copy crops into clusters/cluster_<i>/ for inspection");
    add_cluster_flags(cluster, o);

    auto* distances = app.add_subcommand("distances", "Match clusters pairwise and write distances.csv");
    distances->add_option("--manifest", manifest_path, "Corpus manifest (JSON)")->required();
    distances->add_option("--out", out_dir, "Work directory")->required();
    distances->add_option("--jobs", o.jobs, "Pairs processed in parallel");
    add_distance_flags(distances, o);

    std::string tree_csv, tree_method = "nj";
    std::optional<std::string> tree_output;
    auto* tree = app.add_subcommand("tree", "Build a tree from a distance matrix");
    tree->add_option("--distances", tree_csv, "distances.csv")->required();
    tree->add_option("--method", tree_method, "nj or upgma")->check(CLI::IsMember({"nj", "upgma"}));
    tree->add_option("--output", tree_output, "Newick file (default: stemma_nj.nwk / tree_upgma.nwk next to the CSV)");

    auto* run = app.add_subcommand("run", "segment, embed, cluster, distances and both trees");
    run->add_option("--manifest", manifest_path, "Corpus manifest (JSON)")->required();
    run->add_option("--out", out_dir, "Work directory")->required();
    run->add_option("--jobs", o.jobs, "Parallel workers");
    add_imaging_flags(run, o);
    add_embedding_flags(run, o);
    add_cluster_flags(run, o);
    add_distance_flags(run, o);

    std::vector<std::string> gold_files, hyp_files;
    bool keep_case = false, keep_whitespace = false, keep_diacritics = false, diacritics_only = false;
    std::optional<std::string> eval_output;
    auto* eval_cer = app.add_subcommand("eval-cer", "Per-page and mean character error rate");
    eval_cer->add_option("--gold", gold_files, "Reference transcripts (UTF-8)")->required();
    eval_cer->add_option("--hyp", hyp_files, "Hypothesis transcripts, paired with --gold in order")->required();
    eval_cer->add_flag("--keep-case", keep_case, "Do not lowercase");
    eval_cer->add_flag("--keep-whitespace", keep_whitespace, "Do not remove spaces and line breaks");
    eval_cer->add_flag("--keep-diacritics", keep_diacritics, "Do not remove combining marks");
    eval_cer->add_flag("--diacritics-only", diacritics_only, "Score only the combining-mark sequences");
    eval_cer->add_option("--output", eval_output, "CSV file (default: stdout)");

    std::string test_csv;
    std::optional<std::string> gold_csv, gold_manifest;
    auto* eval_rank = app.add_subcommand("eval-rank", "Compare a distance matrix with gold distances by rank");
    eval_rank->add_option("--test", test_csv, "Distance matrix to evaluate")->required();
    auto* gold_opt = eval_rank->add_option("--gold", gold_csv, "Gold distance matrix CSV");
    eval_rank->add_option("--gold-manifest", gold_manifest, "Manifest with gold transcripts (Levenshtein gold)")->excludes(gold_opt);
    eval_rank->add_flag("--keep-case", keep_case, "Do not lowercase gold transcripts");
    eval_rank->add_flag("--keep-whitespace", keep_whitespace, "Do not remove whitespace from gold transcripts");
    eval_rank->add_flag("--keep-diacritics", keep_diacritics, "Do not remove combining marks from gold transcripts");
    eval_rank->add_option("--output", eval_output, "CSV file (default: stdout)");

    vstemma::synth::TraditionParams tp;
    vstemma::synth::PageLayout layout;
    std::uint64_t synth_run_seed = 42;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic tradition with texts, pages and a manifest");
    synth->add_option("--out", out_dir, "Output directory")->required();
    synth->add_option("--witnesses", tp.witnesses, "Number of witnesses")->capture_default_str();
    synth->add_option("--length", tp.length, "Archetype length in letters")->capture_default_str();
    synth->add_option("--seed", tp.seed, "Tradition seed")->capture_default_str();
    synth->add_option("--min-changes", tp.min_changes, "Fewest edits per copy")->capture_default_str();
    synth->add_option("--max-changes", tp.max_changes, "Most edits per copy")->capture_default_str();
    synth->add_option("--habit-share", tp.habit_share, "Share of substitutions following the scribe's habit")->capture_default_str();
    synth->add_option("--specks", layout.specks, "Noise specks per page")->capture_default_str();
    synth->add_option("--run-seed", synth_run_seed, "k-means seed written into the manifest")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*segment) {
            return report_segment(pl::run_segment(load_with_overrides(manifest_path, o), out_dir));
        }
        if (*embed) {
            pl::run_embed(load_with_overrides(manifest_path, o), out_dir);
            return 0;
        }
        if (*cluster) {
            const auto clusterings = pl::run_cluster(load_with_overrides(manifest_path, o), out_dir, copy_crops);
            for (const auto& c : clusterings) {
                std::printf("%s: k=%d, %d iterations, SSE %.6g%s\n", c.manuscript_id.c_str(), c.k, c.iterations, c.sse(),
                            c.converged ? "" : " (not converged)");
            }
            return 0;
        }
        if (*distances) {
            const auto result = pl::run_distances(load_with_overrides(manifest_path, o), out_dir);
            vstemma::write_distance_csv(std::cout, result.distances);
            return 0;
        }
        if (*tree) {
            const auto method = pl::parse_tree_method(tree_method);
            const fs::path dest = tree_output ? fs::path(*tree_output)
                                              : fs::path(tree_csv).parent_path() / (method == pl::TreeMethod::nj ? "stemma_nj.nwk" : "tree_upgma.nwk");
            const auto t = pl::run_tree(tree_csv, method, dest);
            log_clamping(t, tree_method);
            std::cout << vstemma::to_newick(t) << '\n';
            return 0;
        }
        if (*run) {
            const auto manifest = load_with_overrides(manifest_path, o);
            const auto summary = pl::run_all(manifest, out_dir);
            const int status = report_segment(summary.segmentation);
            if (status != 0) return status;
            log_clamping(*summary.nj, "nj");
            std::cout << pl::read_text_file(fs::path(out_dir) / "distances.csv");
            return 0;
        }
        if (*eval_cer) {
            if (gold_files.size() != hyp_files.size()) throw vstemma::InputError("--gold and --hyp must list the same number of files");
            vstemma::NormalizationOptions opts{!keep_case, !keep_whitespace, !keep_diacritics};
            std::string csv = "page,gold,hyp,levenshtein,reference_length,cer\n";
            double sum = 0.0;
            for (std::size_t i = 0; i < gold_files.size(); ++i) {
                const std::string ref = pl::read_text_file(gold_files[i]);
                const std::string hyp = pl::read_text_file(hyp_files[i]);
                std::size_t lev = 0, len = 0;
                double value = 0.0;
                if (diacritics_only) {
                    value = vstemma::diacritics_cer(ref, hyp);
                    len = 0;
                    lev = 0;
                } else {
                    value = vstemma::cer(ref, hyp, opts);
                    const auto r = vstemma::normalize_text(ref, opts);
                    const auto h = vstemma::normalize_text(hyp, opts);
                    lev = vstemma::levenshtein(r, h);
                    len = vstemma::unicode::decode_utf8(r).size();
                }
                sum += value;
                csv += std::to_string(i + 1) + "," + gold_files[i] + "," + hyp_files[i] + "," +
                       (diacritics_only ? std::string() : std::to_string(lev)) + "," +
                       (diacritics_only ? std::string() : std::to_string(len)) + "," + format_double(value, "%.4f") + "\n";
            }
            csv += "mean,,,,," + format_double(sum / static_cast<double>(gold_files.size()), "%.4f") + "\n";
            write_or_print(eval_output, csv);
            return 0;
        }
        if (*eval_rank) {
            const auto test = vstemma::read_distance_csv(fs::path(test_csv));
            vstemma::DistanceMatrix gold;
            if (gold_csv) {
                gold = vstemma::read_distance_csv(fs::path(*gold_csv));
            } else if (gold_manifest) {
                const auto m = pl::load_manifest(*gold_manifest);
                std::vector<std::string> texts;
                for (const auto& e : m.manuscripts) {
                    if (!e.gold_transcript_path) throw vstemma::InputError("manuscript " + e.id + " has no gold_transcript_path");
                    texts.push_back(pl::read_text_file(*e.gold_transcript_path));
                }
                gold = vstemma::levenshtein_matrix(texts, m.ids(), {!keep_case, !keep_whitespace, !keep_diacritics});
            } else {
                throw vstemma::InputError("eval-rank needs --gold or --gold-manifest");
            }
            write_or_print(eval_output, rank_report_csv(vstemma::rank_report(gold, test)));
            return 0;
        }
        if (*synth) {
            return cmd_synth(out_dir, tp, layout, synth_run_seed);
        }
    } catch (const vstemma::NumericalError& e) {
        if (error_json) std::cerr << nlohmann::json{{"error", "numerical"}, {"message", e.what()}, {"exit_code", 2}}.dump() << '\n';
        else std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        if (error_json) std::cerr << nlohmann::json{{"error", "input"}, {"message", e.what()}, {"exit_code", 1}}.dump() << '\n';
        else std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
