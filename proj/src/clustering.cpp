#include "vstemma/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "vstemma/error.hpp"

namespace vstemma {

namespace {

// Uniform double in [0, 1) from the top 53 bits of one draw.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vector mean_of(std::span<const Vector> points, const std::vector<int>& assignment, int cluster, std::size_t dim) {
    Vector sum(dim, 0.0);
    long long n = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (assignment[i] != cluster) continue;
        for (std::size_t d = 0; d < dim; ++d) sum[d] += points[i][d];
        ++n;
    }
    if (n > 0) {
        for (double& v : sum) v /= static_cast<double>(n);
    }
    return sum;
}

double total_sse(std::span<const Vector> points, const std::vector<int>& assignment, const std::vector<Vector>& centroids) {
    double sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sse += squared_distance(points[i], centroids[assignment[i]]);
    return sse;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

std::vector<std::size_t> kmeanspp_init(std::span<const Vector> points, int k, std::uint64_t seed) {
    const std::size_t n = points.size();
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    std::vector<char> taken(n, 0);
    std::vector<double> mindist(n, std::numeric_limits<double>::infinity());

    chosen.push_back(std::min<std::size_t>(n - 1, static_cast<std::size_t>(unit_draw(rng) * n)));
    taken[chosen.back()] = 1;
    while (chosen.size() < static_cast<std::size_t>(k)) {
        const Vector& last = points[chosen.back()];
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) {
                mindist[i] = 0.0;
                continue;
            }
            mindist[i] = std::min(mindist[i], squared_distance(points[i], last));
            total += mindist[i];
        }
        if (!std::isfinite(total)) throw NumericalError("k-means++ seeding: squared distances overflow");
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = unit_draw(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i] || mindist[i] <= 0.0) continue;
                acc += mindist[i];
                pick = i;
                if (acc > target) break;
            }
        } else {
            // Every remaining point duplicates a chosen one; take a uniform untaken index.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i]) free.push_back(i);
            }
            pick = free[std::min(free.size() - 1, static_cast<std::size_t>(unit_draw(rng) * free.size()))];
        }
        chosen.push_back(pick);
        taken[pick] = 1;
    }
    return chosen;
}

Clustering kmeans(std::span<const Vector> points, const KMeansParams& params, std::string manuscript_id) {
    const int k = params.k;
    if (k <= 0) throw InputError("k must be positive, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > points.size()) {
        throw InputError("k = " + std::to_string(k) + " exceeds the number of vectors (" + std::to_string(points.size()) + ")");
    }
    if (params.max_iter < 1) throw InputError("max_iter must be >= 1");
    if (!(params.tol >= 0.0)) throw InputError("tol must be >= 0");
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw InputError("k-means input vectors differ in dimension");
        for (double v : p) {
            if (!std::isfinite(v)) throw NumericalError("k-means input contains a non-finite value");
        }
    }

    const std::size_t n = points.size();
    Clustering c;
    c.manuscript_id = std::move(manuscript_id);
    c.k = k;
    c.seed = params.seed;
    for (std::size_t idx : kmeanspp_init(points, k, params.seed)) c.centroids.push_back(points[idx]);
    c.assignment.assign(n, -1);

    for (int iter = 0; iter < params.max_iter; ++iter) {
        // Assignment: lowest id among nearest on the first pass, otherwise keep
        // the current cluster unless a strictly closer one exists.
        for (std::size_t i = 0; i < n; ++i) {
            int best = std::max(c.assignment[i], 0);
            double best_d = squared_distance(points[i], c.centroids[best]);
            for (int j = 0; j < k; ++j) {
                const double d = squared_distance(points[i], c.centroids[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            c.assignment[i] = best;
        }

        // Reseed empty clusters.
        std::vector<long long> counts(k, 0);
        for (int a : c.assignment) ++counts[a];
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[c.assignment[i]] < 2) continue;
                const double d = squared_distance(points[i], c.centroids[c.assignment[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == n) throw NumericalError("k-means: no point available to reseed an empty cluster");
            --counts[c.assignment[far]];
            c.assignment[far] = j;
            counts[j] = 1;
        }

        // Update.
        double max_shift = 0.0;
        for (int j = 0; j < k; ++j) {
            Vector updated = mean_of(points, c.assignment, j, dim);
            max_shift = std::max(max_shift, std::sqrt(squared_distance(updated, c.centroids[j])));
            c.centroids[j] = std::move(updated);
        }
        c.counts = std::move(counts);
        c.sse_trace.push_back(total_sse(points, c.assignment, c.centroids));
        if (!std::isfinite(c.sse_trace.back())) throw NumericalError("k-means SSE is not finite; input magnitudes overflow");
        c.iterations = iter + 1;
        if (max_shift < params.tol || max_shift == 0.0) {
            c.converged = true;
            break;
        }
    }
    return c;
}

ClusterFrequencies cluster_frequencies(const Clustering& c) {
    long long total = 0;
    for (auto n : c.counts) total += n;
    if (total <= 0) throw InputError("cluster_frequencies: clustering of " + c.manuscript_id + " has no glyphs");
    ClusterFrequencies f{c.manuscript_id, {}};
    f.freq.reserve(c.counts.size());
    for (auto n : c.counts) f.freq.push_back(static_cast<double>(n) / static_cast<double>(total));
    return f;
}

double cluster_purity(const Clustering& c, std::span<const std::string> gold_labels) {
    if (gold_labels.size() != c.assignment.size()) {
        throw InputError("cluster_purity: " + std::to_string(gold_labels.size()) + " labels for " +
                         std::to_string(c.assignment.size()) + " items");
    }
    if (gold_labels.empty()) throw InputError("cluster_purity: no items");
    std::vector<std::map<std::string, long long>> tally(c.k);
    for (std::size_t i = 0; i < gold_labels.size(); ++i) ++tally[c.assignment[i]][gold_labels[i]];
    long long majority = 0;
    for (const auto& t : tally) {
        long long best = 0;
        for (const auto& [label, n] : t) best = std::max(best, n);
        majority += best;
    }
    return static_cast<double>(majority) / static_cast<double>(gold_labels.size());
}

}  // namespace vstemma
