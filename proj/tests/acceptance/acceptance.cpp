// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "vstemma/assignment.hpp"
#include "vstemma/clustering.hpp"
#include "vstemma/pipeline.hpp"
#include "vstemma/stemma.hpp"
#include "vstemma/textmetrics.hpp"
#include "vstemma/unicode.hpp"

using namespace vstemma;
namespace fs = std::filesystem;
namespace pl = vstemma::pipeline;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome assignment_oracle() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> size(1, 7);
    const auto t0 = Clock::now();
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = trial < 7 ? trial + 1 : size(rng);
        Matrix sim(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
        for (auto& row : sim)
            for (double& v : row) v = u(rng);
        Matrix cost(sim);
        for (auto& row : cost)
            for (double& v : row) v = 1.0 - v;
        const Assignment got = hungarian_match(sim);
        const auto best = oracle::brute_force_assignment(cost);
        double got_cost = 0.0;
        for (int r = 0; r < k; ++r) got_cost += cost[r][got.columns[r]];
        if (got_cost != best.total) ++mismatches;
    }
    const double elapsed = seconds_since(t0);
    return {mismatches == 0 && elapsed < 10.0,
            "200 matrices, k<=7: " + std::to_string(mismatches) + " cost mismatches vs brute force, " + fmt("%.3f", elapsed) + " s"};
}

Outcome edit_distance_oracle() {
    std::mt19937_64 rng(2002);
    int mismatches = 0, axiom_failures = 0;
    std::vector<std::u32string> seen;
    for (int trial = 0; trial < 500; ++trial) {
        const int alphabet = 2 + trial % 4;
        const auto a = oracle::random_string(rng, 8, alphabet);
        const auto b = oracle::random_string(rng, 8, alphabet);
        const std::size_t d = levenshtein(a, b);
        if (d != oracle::levenshtein_recursive(a, b)) ++mismatches;
        if (d != levenshtein(b, a)) ++axiom_failures;
        if ((d == 0) != (a == b)) ++axiom_failures;
        if (levenshtein(a, a) != 0) ++axiom_failures;
        seen.push_back(a);
        seen.push_back(b);
    }
    std::uniform_int_distribution<std::size_t> pick(0, seen.size() - 1);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto& x = seen[pick(rng)];
        const auto& y = seen[pick(rng)];
        const auto& z = seen[pick(rng)];
        if (levenshtein(x, z) > levenshtein(x, y) + levenshtein(y, z)) ++axiom_failures;
    }
    return {mismatches == 0 && axiom_failures == 0,
            "500 pairs: " + std::to_string(mismatches) + " mismatches vs recursive oracle, " + std::to_string(axiom_failures) +
                " metric-axiom violations (identity, symmetry, 2000 triangle triples)"};
}

DistanceMatrix induced_distances(const PhyloTree& t) {
    const auto paths = oracle::leaf_path_lengths(t);
    const auto labels = t.leaf_labels();
    DistanceMatrix m(labels);
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = 0; j < labels.size(); ++j)
            if (i != j) m(i, j) = paths.at({labels[i], labels[j]});
    return m;
}

Outcome nj_recovery() {
    std::mt19937_64 rng(3003);
    std::uniform_int_distribution<int> taxa(4, 8);
    int topology_failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const PhyloTree truth = oracle::random_unrooted_tree(taxa(rng), rng, 0.01, 2.0);
        const DistanceMatrix d = induced_distances(truth);
        const PhyloTree nj = neighbor_joining(d);
        if (robinson_foulds(truth, nj) != 0) {
            ++topology_failures;
            continue;
        }
        const auto want = split_lengths(truth);
        const auto got = split_lengths(nj);
        if (want.size() != got.size()) {
            ++topology_failures;
            continue;
        }
        for (const auto& [split, len] : want) {
            const auto it = got.find(split);
            worst = std::max(worst, it == got.end() ? INFINITY : std::abs(it->second - len));
        }
    }
    return {topology_failures == 0 && worst <= 1e-9,
            "100 additive trees (4-8 taxa): " + std::to_string(topology_failures) + " with RF != 0, max branch error " +
                fmt("%.3g", worst)};
}

Outcome kmeans_monotonicity() {
    std::mt19937_64 rng(4004);
    std::uniform_int_distribution<int> size(3, 60), dims(1, 6);
    std::normal_distribution<double> g(0.0, 1.0);
    int increasing = 0, nonzero_full = 0;
    double worst_mean = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng), dim = dims(rng);
        std::uniform_int_distribution<int> blobs(1, 5);
        std::vector<Vector> centers(static_cast<std::size_t>(blobs(rng)), Vector(static_cast<std::size_t>(dim)));
        for (auto& c : centers)
            for (double& v : c) v = 5.0 * g(rng);
        std::uniform_int_distribution<std::size_t> which(0, centers.size() - 1);
        std::vector<Vector> pts(static_cast<std::size_t>(n), Vector(static_cast<std::size_t>(dim)));
        for (auto& p : pts) {
            const auto& c = centers[which(rng)];
            for (int d = 0; d < dim; ++d) p[d] = c[d] + g(rng);
        }
        std::uniform_int_distribution<int> ks(1, std::min(n, 8));
        const Clustering c = kmeans(pts, {ks(rng), static_cast<std::uint64_t>(trial)});
        for (std::size_t t = 1; t < c.sse_trace.size(); ++t)
            if (c.sse_trace[t] > c.sse_trace[t - 1]) ++increasing;

        if (kmeans(pts, {n, static_cast<std::uint64_t>(trial)}).sse() != 0.0) ++nonzero_full;

        const Clustering one = kmeans(pts, {1, static_cast<std::uint64_t>(trial)});
        for (int d = 0; d < dim; ++d) {
            double mean = 0.0;
            for (const auto& p : pts) mean += p[d];
            mean /= n;
            worst_mean = std::max(worst_mean, std::abs(one.centroids[0][d] - mean));
        }
    }
    return {increasing == 0 && nonzero_full == 0 && worst_mean <= 1e-9,
            "100 datasets: " + std::to_string(increasing) + " SSE increases, " + std::to_string(nonzero_full) +
                " nonzero SSE at k=n, max |centroid-mean| at k=1 " + fmt("%.3g", worst_mean)};
}

Outcome perfect_case(const fs::path& work) {
    const auto t0 = Clock::now();
    const auto corpus = pl::write_synthetic_corpus(work / "synth_only", {}, {}, 42);
    const double rho = spearman(corpus.letter_distances.upper_triangle(), corpus.gold_levenshtein.upper_triangle());
    const double elapsed = seconds_since(t0);
    const std::size_t copies = corpus.tradition.witnesses.size();
    return {rho >= 0.9 && copies >= 6 && elapsed < 5.0,
            std::to_string(copies) + " witnesses, letter-distribution vs gold Levenshtein spearman " + fmt("%.4f", rho) +
                " (>= 0.9), " + fmt("%.3f", elapsed) + " s"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome end_to_end(const fs::path& work) {
    const auto corpus = pl::write_synthetic_corpus(work / "corpus", {}, {}, 42);
    pl::CorpusManifest manifest = pl::load_manifest(work / "corpus" / "manifest.json");
    manifest.parameters.discard_fraction = 0.1;
    const fs::path out = work / "run";
    const auto summary = pl::run_all(manifest, out);
    if (!summary.segmentation.failures.empty()) return {false, "segmentation failed: " + summary.segmentation.failures[0].message};

    int count_mismatches = 0;
    double min_purity = 1.0;
    for (std::size_t i = 0; i < corpus.tradition.witnesses.size(); ++i) {
        const auto& w = corpus.tradition.witnesses[i];
        if (summary.segmentation.glyph_counts[i].second != static_cast<int>(w.text.size())) ++count_mismatches;
        const Clustering c = pl::load_clustering(out / w.id / "clusters.json");
        std::vector<std::string> gold;
        for (char ch : w.text) gold.emplace_back(1, ch);
        if (gold.size() == c.assignment.size()) min_purity = std::min(min_purity, cluster_purity(c, gold));
        else min_purity = 0.0;
    }
    const DistanceMatrix visual = read_distance_csv(out / "distances.csv");
    const double rho = rank_report(corpus.gold_levenshtein, visual).rho.value_or(NAN);

    // the same crops with their vectors supplied externally must give the same distances
    std::ofstream ext(work / "external_vectors.txt");
    for (const auto& w : corpus.tradition.witnesses) ext << slurp(out / w.id / "embeddings.txt");
    ext.close();
    pl::CorpusManifest external = manifest;
    external.parameters.embedding.method = EmbeddingMethod::external;
    external.parameters.embedding.external_path = work / "external_vectors.txt";
    pl::run_all(external, work / "run_external");
    const bool external_same = slurp(work / "run_external" / "distances.csv") == slurp(out / "distances.csv");

    return {count_mismatches == 0 && min_purity >= 0.95 && rho >= 0.8 && external_same,
            std::to_string(corpus.tradition.witnesses.size()) + " pages: " + std::to_string(count_mismatches) +
                " glyph-count mismatches, min purity " + fmt("%.4f", min_purity) + " (>= 0.95), spearman vs gold " +
                fmt("%.4f", rho) + " (>= 0.8), external-vector rerun " + (external_same ? "identical" : "DIFFERS")};
}

std::u32string random_unicode(std::mt19937_64& rng) {
    static const std::vector<std::pair<char32_t, char32_t>> ranges{
        {0x20, 0x7E},     {0xA0, 0x17F},   {0x300, 0x36F},   {0x370, 0x3FF},   {0x400, 0x52F}, {0x483, 0x489},
        {0x1E00, 0x1EFF}, {0x2000, 0x200A}, {0x1100, 0x1112}, {0x1161, 0x1175}, {0xAC00, 0xAC40}, {0x1F00, 0x1FFF},
        {0x2DE0, 0x2DFF}, {0xA640, 0xA69F}, {0xFB00, 0xFB06}, {0x1D400, 0x1D433}, {0x3000, 0x3000}, {0x10400, 0x1044F}};
    std::uniform_int_distribution<std::size_t> range(0, ranges.size() - 1);
    std::uniform_int_distribution<int> len(0, 24);
    std::uniform_int_distribution<std::uint32_t> any(0, 0x10FFFF);
    std::bernoulli_distribution wild(0.1);
    std::u32string s;
    for (int i = len(rng); i > 0; --i) {
        char32_t c = 0;
        if (wild(rng)) {
            do c = static_cast<char32_t>(any(rng));
            while (!unicode::is_scalar_value(c));
        } else {
            const auto [lo, hi] = ranges[range(rng)];
            c = static_cast<char32_t>(std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng));
        }
        s.push_back(c);
    }
    return s;
}

Outcome cer_harness() {
    const std::vector<std::string> fixtures{"Ѿ҃ца и сн҃а и ст҃го дх҃а", "In principio erat verbum", "ꙗко бꙑсть",
                                            "Ἐν ἀρχῇ ἦν ὁ λόγος", "abcdefghij"};
    int failures = 0;
    for (const auto& ref : fixtures) {
        if (cer(ref, ref) != 0.0) ++failures;
        if (cer(ref, "") != 1.0) ++failures;
    }
    const std::string ref(2500, 'a'), hyp(3279, 'b');
    const double high = cer(ref, hyp);
    if (fmt("%.4f", high) != "1.3116") ++failures;

    std::mt19937_64 rng(7007);
    int not_idempotent = 0;
    const std::vector<NormalizationOptions> variants{{}, {true, false, false}, {false, true, false}, {false, false, true}};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::u32string s = unicode::nfc(random_unicode(rng));
        for (const auto& opts : variants) {
            const auto once = normalize_text(s, opts);
            if (normalize_text(once, opts) != once) ++not_idempotent;
        }
    }
    return {failures == 0 && not_idempotent == 0,
            std::to_string(fixtures.size()) + " fixtures: " + std::to_string(failures) + " failures, cer above 1 = " +
                fmt("%.4f", high) + ", " + std::to_string(not_idempotent) + " idempotence violations on 1000 random strings"};
}

Outcome determinism(const fs::path& work) {
    pl::write_synthetic_corpus(work / "det_corpus", {}, {}, 42);
    pl::CorpusManifest manifest = pl::load_manifest(work / "det_corpus" / "manifest.json");
    pl::run_all(manifest, work / "det_a");
    pl::run_all(manifest, work / "det_b");
    manifest.parameters.jobs = 4;
    pl::run_all(manifest, work / "det_c");
    int differing = 0;
    for (const char* file : {"distances.csv", "stemma_nj.nwk", "tree_upgma.nwk"}) {
        const std::string a = slurp(work / "det_a" / file);
        if (a.empty() || a != slurp(work / "det_b" / file) || a != slurp(work / "det_c" / file)) ++differing;
    }
    return {differing == 0, "distances.csv, stemma_nj.nwk, tree_upgma.nwk across 3 runs (jobs 1, 1, 4): " +
                                std::to_string(differing) + " files differ"};
}

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / ("vstemma_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"assignment oracle", assignment_oracle},
        {"edit-distance oracle", edit_distance_oracle},
        {"NJ additive recovery", nj_recovery},
        {"k-means monotonicity", kmeans_monotonicity},
        {"perfect-case correlation", [&] { return perfect_case(work); }},
        {"end-to-end synthetic pipeline", [&] { return end_to_end(work); }},
        {"CER harness", cer_harness},
        {"determinism", [&] { return determinism(work); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("criterion %zu %s: %s - %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    fs::remove_all(work);
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
