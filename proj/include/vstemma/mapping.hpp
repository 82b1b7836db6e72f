#pragma once

#include <span>
#include <string>
#include <vector>

#include "vstemma/assignment.hpp"
#include "vstemma/clustering.hpp"
#include "vstemma/distance_matrix.hpp"

namespace vstemma {

struct ClusterMatch {
    int a = 0;
    int b = 0;
    double similarity = 0.0;
    bool retained = true;
};

// One-to-one correspondence between the clusters of two manuscripts.
struct ClusterMapping {
    std::string manuscript_a;
    std::string manuscript_b;
    std::vector<ClusterMatch> matches;  // ordered by cluster a
    double discard_fraction = 0.0;

    int retained_count() const;
};

// How n in the frequency distance is counted.
enum class NConvention { retained, all };

NConvention parse_n_convention(const std::string& name);
std::string to_string(NConvention c);

// Cosine similarity of centroids; a zero-norm centroid has similarity 0 to everything.
Matrix centroid_similarity_matrix(const Clustering& a, const Clustering& b);

ClusterMapping map_clusters(const Clustering& a, const Clustering& b);

// Marks the floor(fraction * k) lowest-similarity matches as not retained
// (equal similarities: higher cluster-a index goes first); at least one match
// always stays.
ClusterMapping discard_low_similarity(ClusterMapping mapping, double fraction);

int discard_count(int k, double fraction);

// d = (1/n) * sum over retained matches of |fA(a) - fB(b)|.
double manuscript_distance(const ClusterMapping& mapping, const ClusterFrequencies& fa, const ClusterFrequencies& fb,
                           NConvention convention = NConvention::retained);

struct PairwiseResult {
    DistanceMatrix distances;
    std::vector<ClusterMapping> mappings;  // unordered pairs (i < j) in row-major order
};

PairwiseResult pairwise_distances(std::span<const Clustering> clusterings, double fraction,
                                  NConvention convention = NConvention::retained, int jobs = 1);

}  // namespace vstemma
