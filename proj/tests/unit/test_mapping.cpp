#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "vstemma/assignment.hpp"
#include "vstemma/error.hpp"
#include "vstemma/mapping.hpp"

using namespace vstemma;

namespace {

Clustering clustering(std::string id, std::vector<Vector> centroids, std::vector<long long> counts) {
    Clustering c;
    c.manuscript_id = std::move(id);
    c.k = static_cast<int>(centroids.size());
    c.centroids = std::move(centroids);
    c.counts = std::move(counts);
    for (int i = 0; i < c.k; ++i)
        for (long long j = 0; j < c.counts[i]; ++j) c.assignment.push_back(i);
    return c;
}

ClusterMapping mapping_with(std::vector<double> sims) {
    ClusterMapping m;
    m.manuscript_a = "A";
    m.manuscript_b = "B";
    for (int i = 0; i < static_cast<int>(sims.size()); ++i) m.matches.push_back({i, i, sims[i], true});
    return m;
}

Clustering random_clustering(std::mt19937_64& rng, std::string id, int k, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<long long> cnt(1, 30);
    std::vector<Vector> cs(static_cast<std::size_t>(k), Vector(static_cast<std::size_t>(dim)));
    for (auto& c : cs)
        for (double& v : c) v = g(rng);
    std::vector<long long> counts(static_cast<std::size_t>(k));
    for (auto& c : counts) c = cnt(rng);
    return clustering(std::move(id), std::move(cs), std::move(counts));
}

}  // namespace

TEST_CASE("hungarian examples") {
    const auto a = hungarian_match({{0.9, 0.1}, {0.2, 0.8}});
    CHECK(a.columns == std::vector<int>{0, 1});
    CHECK(a.total == doctest::Approx(1.7).epsilon(1e-15));

    const auto eq = hungarian_match(Matrix(4, std::vector<double>(4, 0.3)));
    CHECK(eq.columns == std::vector<int>{0, 1, 2, 3});

    const auto one = hungarian_match({{0.42}});
    CHECK(one.columns == std::vector<int>{0});
    CHECK(one.total == 0.42);

    CHECK_THROWS_AS(hungarian_match({{1.0, 2.0}}), InputError);
    CHECK_THROWS_AS(hungarian_match({{1.0, 2.0}, {std::nan(""), 0.0}}), InputError);
}

TEST_CASE("assignment agrees with brute force, including tie-break") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 150; ++trial) {
        const int k = 1 + trial % 6;
        // coarse values make ties common
        std::uniform_int_distribution<int> coarse(0, 3);
        std::uniform_real_distribution<double> fine(-1.0, 1.0);
        Matrix cost(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
        for (auto& row : cost)
            for (double& v : row) v = trial % 2 ? coarse(rng) * 0.25 : fine(rng);
        const auto got = solve_assignment(cost);
        const auto ref = oracle::brute_force_assignment(cost);
        CHECK(got.total == doctest::Approx(ref.total).epsilon(1e-12));
        CHECK(got.columns == ref.columns);
    }
}

TEST_CASE("centroid similarity") {
    const auto a = clustering("A", {{1.0, 0.0}, {0.0, 3.0}}, {1, 1});
    const auto b = clustering("B", {{2.0, 0.0}, {0.0, 0.0}}, {1, 1});
    const Matrix s = centroid_similarity_matrix(a, b);
    CHECK(s[0][0] == doctest::Approx(1.0));
    CHECK(s[1][0] == doctest::Approx(0.0));
    CHECK(s[0][1] == 0.0);
    CHECK(s[1][1] == 0.0);
    CHECK(centroid_similarity_matrix(a, a)[1][1] == doctest::Approx(1.0));

    const auto c = clustering("C", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}, {1, 1});
    CHECK_THROWS_AS(centroid_similarity_matrix(a, c), InputError);
}

TEST_CASE("discarding low-similarity matches") {
    const auto ten = mapping_with({0.9, 0.8, 0.95, 0.1, 0.7, 0.6, 0.5, 0.99, 0.85, 0.4});
    CHECK(discard_low_similarity(ten, 0.0).retained_count() == 10);
    const auto kept9 = discard_low_similarity(ten, 0.1);
    CHECK(kept9.retained_count() == 9);
    CHECK_FALSE(kept9.matches[3].retained);

    const auto three = discard_low_similarity(mapping_with({0.5, 0.2, 0.9}), 0.5);
    CHECK(three.retained_count() == 2);
    CHECK_FALSE(three.matches[1].retained);

    const auto ties = discard_low_similarity(mapping_with({0.3, 0.3, 0.9}), 0.4);
    CHECK(ties.matches[0].retained);
    CHECK_FALSE(ties.matches[1].retained);

    CHECK(discard_count(10, 0.1) == 1);
    CHECK(discard_count(3, 0.5) == 1);
    CHECK(discard_count(1, 0.9) == 0);
    CHECK(discard_count(4, 0.99) == 3);
    CHECK_THROWS_AS(discard_low_similarity(ten, 1.0), InputError);
    CHECK_THROWS_AS(discard_low_similarity(ten, -0.1), InputError);
}

TEST_CASE("manuscript distance examples") {
    const auto same = mapping_with({1.0, 1.0});
    CHECK(manuscript_distance(same, {"A", {0.4, 0.6}}, {"B", {0.4, 0.6}}) == 0.0);
    CHECK(manuscript_distance(same, {"A", {0.5, 0.5}}, {"B", {0.25, 0.75}}) == 0.25);

    auto three = discard_low_similarity(mapping_with({0.9, 0.8, 0.1}), 0.34);
    CHECK(three.retained_count() == 2);
    const ClusterFrequencies fa{"A", {0.6, 0.3, 0.1}}, fb{"B", {0.5, 0.3, 0.2}};
    CHECK(manuscript_distance(three, fa, fb) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(manuscript_distance(three, fa, fb, NConvention::all) == doctest::Approx(0.1 / 3).epsilon(1e-12));

    CHECK(parse_n_convention("all") == NConvention::all);
    CHECK(to_string(NConvention::retained) == "retained");
    CHECK_THROWS_AS(parse_n_convention("some"), InputError);
}

TEST_CASE("distance is symmetric, bounded and invariant to cluster relabeling") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 2 + trial % 6;
        const auto a = random_clustering(rng, "A", k, 3);
        const auto b = random_clustering(rng, "B", k, 3);
        const double frac = (trial % 3) * 0.2;
        const auto fa = cluster_frequencies(a), fb = cluster_frequencies(b);

        const double ab = manuscript_distance(discard_low_similarity(map_clusters(a, b), frac), fa, fb);
        const double ba = manuscript_distance(discard_low_similarity(map_clusters(b, a), frac), fb, fa);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);

        std::vector<int> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Vector> cs(static_cast<std::size_t>(k));
        std::vector<long long> counts(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            cs[perm[i]] = a.centroids[i];
            counts[perm[i]] = a.counts[i];
        }
        const auto a2 = clustering("A", cs, counts);
        const double relabeled = manuscript_distance(discard_low_similarity(map_clusters(a2, b), frac),
                                                     cluster_frequencies(a2), fb);
        CHECK(relabeled == doctest::Approx(ab).epsilon(1e-12));
    }
}

TEST_CASE("pairwise distances") {
    std::mt19937_64 rng(5);
    const auto a = random_clustering(rng, "A", 4, 3);
    const auto b = random_clustering(rng, "B", 4, 3);
    const auto c = random_clustering(rng, "C", 4, 3);
    auto dup = a;
    dup.manuscript_id = "A2";

    const std::vector<Clustering> twins{a, dup};
    const auto t = pairwise_distances(twins, 0.1);
    CHECK(t.distances(0, 1) == 0.0);

    const std::vector<Clustering> trio{a, b, c};
    const auto serial = pairwise_distances(trio, 0.25, NConvention::retained, 1);
    const auto parallel = pairwise_distances(trio, 0.25, NConvention::retained, 3);
    CHECK(serial.mappings.size() == 3);
    CHECK(serial.distances.values == parallel.distances.values);
    CHECK_NOTHROW(serial.distances.validate());
    CHECK(serial.distances.labels == std::vector<std::string>{"A", "B", "C"});

    const std::vector<Clustering> lonely{a};
    CHECK_THROWS_AS(pairwise_distances(lonely, 0.1), InputError);
    const std::vector<Clustering> uneven{a, random_clustering(rng, "D", 3, 3)};
    CHECK_THROWS_AS(pairwise_distances(uneven, 0.1), InputError);
}

TEST_CASE("distance matrix csv round trip") {
    DistanceMatrix m({"bod", "cam", "hun"});
    m.set(0, 1, 0.013872);
    m.set(0, 2, 1.0 / 3.0);
    m.set(1, 2, 0.026703);
    std::ostringstream out;
    write_distance_csv(out, m);
    CHECK(out.str().rfind(",bod,cam,hun\n", 0) == 0);
    std::istringstream in(out.str());
    const DistanceMatrix back = read_distance_csv(in);
    CHECK(back.labels == m.labels);
    CHECK(back.values == m.values);

    std::istringstream asym(",a,b\na,0,1\nb,2,0\n");
    CHECK_THROWS_AS(read_distance_csv(asym), InputError);
    std::istringstream neg(",a,b\na,0,-1\nb,-1,0\n");
    CHECK_THROWS_AS(read_distance_csv(neg), InputError);
    std::istringstream diag(",a,b\na,1,1\nb,1,0\n");
    CHECK_THROWS_AS(read_distance_csv(diag), InputError);
}
