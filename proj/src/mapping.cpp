#include "vstemma/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vstemma/error.hpp"
#include "vstemma/parallel.hpp"

namespace vstemma {

int ClusterMapping::retained_count() const {
    return static_cast<int>(std::count_if(matches.begin(), matches.end(), [](const ClusterMatch& m) { return m.retained; }));
}

NConvention parse_n_convention(const std::string& name) {
    if (name == "retained") return NConvention::retained;
    if (name == "all") return NConvention::all;
    throw InputError("unknown n convention '" + name + "' (expected retained or all)");
}

std::string to_string(NConvention c) { return c == NConvention::retained ? "retained" : "all"; }

Matrix centroid_similarity_matrix(const Clustering& a, const Clustering& b) {
    if (a.centroids.empty() || b.centroids.empty()) throw InputError("centroid_similarity_matrix: clustering without centroids");
    const std::size_t dim = a.centroids.front().size();
    auto check_dim = [&](const Clustering& c) {
        for (const auto& v : c.centroids) {
            if (v.size() != dim) {
                throw InputError("centroid dimension mismatch between " + a.manuscript_id + " and " + b.manuscript_id);
            }
        }
    };
    check_dim(a);
    check_dim(b);
    auto norm = [](const Vector& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); };
    Matrix sim(a.centroids.size(), std::vector<double>(b.centroids.size(), 0.0));
    for (std::size_t i = 0; i < a.centroids.size(); ++i) {
        const double na = norm(a.centroids[i]);
        for (std::size_t j = 0; j < b.centroids.size(); ++j) {
            const double nb = norm(b.centroids[j]);
            if (na == 0.0 || nb == 0.0) continue;
            const double dot = std::inner_product(a.centroids[i].begin(), a.centroids[i].end(), b.centroids[j].begin(), 0.0);
            sim[i][j] = std::clamp(dot / (na * nb), -1.0, 1.0);
        }
    }
    return sim;
}

ClusterMapping map_clusters(const Clustering& a, const Clustering& b) {
    if (a.k != b.k) {
        throw InputError("cluster counts differ: " + a.manuscript_id + " has k=" + std::to_string(a.k) + ", " +
                         b.manuscript_id + " has k=" + std::to_string(b.k));
    }
    const Matrix sim = centroid_similarity_matrix(a, b);
    const Assignment assignment = hungarian_match(sim);
    ClusterMapping mapping{a.manuscript_id, b.manuscript_id, {}, 0.0};
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const int j = assignment.columns[i];
        mapping.matches.push_back({static_cast<int>(i), j, sim[i][j], true});
    }
    return mapping;
}

int discard_count(int k, double fraction) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw InputError("discard fraction must be in [0, 1)");
    const int drop = static_cast<int>(std::floor(fraction * k + 1e-9));
    return std::clamp(drop, 0, std::max(0, k - 1));
}

ClusterMapping discard_low_similarity(ClusterMapping mapping, double fraction) {
    const int k = static_cast<int>(mapping.matches.size());
    const int drop = discard_count(k, fraction);
    mapping.discard_fraction = fraction;
    for (auto& m : mapping.matches) m.retained = true;
    std::vector<std::size_t> order(mapping.matches.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto& mx = mapping.matches[x];
        const auto& my = mapping.matches[y];
        if (mx.similarity != my.similarity) return mx.similarity < my.similarity;
        return mx.a > my.a;
    });
    for (int i = 0; i < drop; ++i) mapping.matches[order[i]].retained = false;
    return mapping;
}

double manuscript_distance(const ClusterMapping& mapping, const ClusterFrequencies& fa, const ClusterFrequencies& fb,
                           NConvention convention) {
    const int retained = mapping.retained_count();
    if (retained < 1) throw NumericalError("manuscript_distance: no retained matches");
    double sum = 0.0;
    for (const auto& m : mapping.matches) {
        if (!m.retained) continue;
        if (m.a < 0 || static_cast<std::size_t>(m.a) >= fa.freq.size() || m.b < 0 ||
            static_cast<std::size_t>(m.b) >= fb.freq.size()) {
            throw InputError("manuscript_distance: match refers to a cluster without a frequency");
        }
        sum += std::abs(fa.freq[m.a] - fb.freq[m.b]);
    }
    const int n = convention == NConvention::retained ? retained : static_cast<int>(mapping.matches.size());
    return sum / n;
}

PairwiseResult pairwise_distances(std::span<const Clustering> clusterings, double fraction, NConvention convention, int jobs) {
    if (clusterings.size() < 2) throw InputError("pairwise_distances needs at least 2 manuscripts");
    std::vector<std::string> labels;
    for (const auto& c : clusterings) labels.push_back(c.manuscript_id);
    const int k = clusterings.front().k;
    for (const auto& c : clusterings) {
        if (c.k != k) throw InputError("all manuscripts must use the same k; " + c.manuscript_id + " has k=" + std::to_string(c.k));
    }
    std::vector<ClusterFrequencies> freqs;
    for (const auto& c : clusterings) freqs.push_back(cluster_frequencies(c));

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < clusterings.size(); ++i) {
        for (std::size_t j = i + 1; j < clusterings.size(); ++j) pairs.emplace_back(i, j);
    }
    PairwiseResult result{DistanceMatrix(labels), std::vector<ClusterMapping>(pairs.size())};
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        result.mappings[p] = discard_low_similarity(map_clusters(clusterings[i], clusterings[j]), fraction);
        values[p] = manuscript_distance(result.mappings[p], freqs[i], freqs[j], convention);
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) result.distances.set(pairs[p].first, pairs[p].second, values[p]);
    return result;
}

}  // namespace vstemma
