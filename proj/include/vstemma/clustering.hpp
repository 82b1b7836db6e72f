#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vstemma {

using Vector = std::vector<double>;

struct KMeansParams {
    int k = 0;
    std::uint64_t seed = 0;
    int max_iter = 300;
    double tol = 1e-6;
};

struct Clustering {
    std::string manuscript_id;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> assignment;
    std::vector<Vector> centroids;
    std::vector<long long> counts;
    // Within-cluster SSE after each Lloyd update; non-increasing.
    std::vector<double> sse_trace;
    int iterations = 0;
    bool converged = false;

    double sse() const { return sse_trace.empty() ? 0.0 : sse_trace.back(); }
};

struct ClusterFrequencies {
    std::string manuscript_id;
    std::vector<double> freq;
};

// Seeded k-means++ initialisation; returns indices of the chosen points.
std::vector<std::size_t> kmeanspp_init(std::span<const Vector> points, int k, std::uint64_t seed);

/// Lloyd's k-means from a seeded k-means++ start.
///
/// Points keep their cluster unless another centroid is strictly closer. An
/// empty cluster takes the point farthest from its own centroid (taken from a
/// cluster with at least two members). Stops when no centroid moves by `tol`
/// or more, or after `max_iter` updates.
Clustering kmeans(std::span<const Vector> points, const KMeansParams& params, std::string manuscript_id = {});

ClusterFrequencies cluster_frequencies(const Clustering& c);

// Fraction of items whose cluster's majority gold label equals their own.
double cluster_purity(const Clustering& c, std::span<const std::string> gold_labels);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace vstemma
