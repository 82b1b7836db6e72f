#pragma once

#include <map>
#include <string>
#include <vector>

#include "vstemma/distance_matrix.hpp"

namespace vstemma {

struct TreeNode {
    std::string label;  // empty for internal nodes
    double height = 0.0;  // meaningful for rooted (UPGMA) trees only
};

struct TreeEdge {
    int parent = 0;  // for unrooted trees the orientation carries no meaning
    int child = 0;
    double length = 0.0;
};

/// Weighted tree whose leaves are witnesses.
///
/// Rooted trees (UPGMA) orient every edge away from `root`. Unrooted trees
/// (neighbour joining) keep `root == -1`.
struct PhyloTree {
    std::vector<TreeNode> nodes;
    std::vector<TreeEdge> edges;
    bool rooted = false;
    int root = -1;
    // Negative branch lengths clamped to zero during construction.
    int clamped_edges = 0;
    double clamped_deficit = 0.0;

    int add_node(std::string label = {}, double height = 0.0);
    void connect(int parent, int child, double length);

    bool is_leaf(int node) const { return !nodes[node].label.empty(); }
    std::vector<std::string> leaf_labels() const;  // sorted
    std::vector<std::vector<std::pair<int, double>>> adjacency() const;
    int degree(int node) const;
};

// Saitou-Nei neighbour joining. Q-matrix ties go to the lexicographically
// smallest pair of clade representatives (smallest contained leaf label).
PhyloTree neighbor_joining(const DistanceMatrix& m);

// Average-linkage agglomeration; node height = half the merge distance.
PhyloTree upgma(const DistanceMatrix& m);

/// Newick with 6-decimal branch lengths. Children are ordered by the smallest
/// leaf label they contain. Unrooted trees are written from the internal node
/// adjacent to the smallest leaf.
std::string to_newick(const PhyloTree& tree);

// Parses Newick (quoted labels, optional lengths). The top-level node becomes
// the root; the tree is flagged rooted when that node has exactly two children.
PhyloTree parse_newick(const std::string& text);

// Leaf bipartition of every edge, keyed by the side without the smallest leaf
// (as sorted labels). Lengths of edges inducing the same split are summed, so
// degree-2 roots do not count as extra splits.
std::map<std::vector<std::string>, double> split_lengths(const PhyloTree& tree);

// Robinson-Foulds distance over nontrivial splits; leaf sets must match.
int robinson_foulds(const PhyloTree& a, const PhyloTree& b);

// Sum of branch lengths on the path between two leaves.
DistanceMatrix path_distances(const PhyloTree& tree);

}  // namespace vstemma
