#include "vstemma/stemma.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string_view>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "vstemma/error.hpp"

namespace vstemma {

int PhyloTree::add_node(std::string label, double height) {
    nodes.push_back({std::move(label), height});
    return static_cast<int>(nodes.size()) - 1;
}

void PhyloTree::connect(int parent, int child, double length) { edges.push_back({parent, child, length}); }

std::vector<std::string> PhyloTree::leaf_labels() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
        if (!n.label.empty()) out.push_back(n.label);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<std::pair<int, double>>> PhyloTree::adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(nodes.size());
    for (const auto& e : edges) {
        adj[e.parent].emplace_back(e.child, e.length);
        adj[e.child].emplace_back(e.parent, e.length);
    }
    return adj;
}

int PhyloTree::degree(int node) const {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](const TreeEdge& e) { return e.parent == node || e.child == node; }));
}

namespace {

void check_matrix(const DistanceMatrix& m, const char* what) {
    if (m.size() < 2) throw InputError(std::string(what) + " needs at least 2 taxa");
    for (const auto& l : m.labels) {
        if (l.empty()) throw InputError(std::string(what) + ": empty taxon label");
    }
    m.validate(1e-9);
}

double clamp_branch(PhyloTree& tree, double length) {
    if (length < 0.0) {
        ++tree.clamped_edges;
        tree.clamped_deficit += -length;
        return 0.0;
    }
    return length;
}

struct Cluster {
    int node;
    std::string rep;  // smallest leaf label inside
    int size;
};

bool pair_less(const Cluster& a, const Cluster& b, const Cluster& c, const Cluster& d) {
    auto key = [](const Cluster& x, const Cluster& y) { return std::minmax(x.rep, y.rep); };
    return key(a, b) < key(c, d);
}

double max_entry(const DistanceMatrix& m) {
    double mx = 0.0;
    for (double v : m.values) mx = std::max(mx, std::abs(v));
    return mx;
}

}  // namespace

PhyloTree neighbor_joining(const DistanceMatrix& m) {
    check_matrix(m, "neighbor_joining");
    PhyloTree tree;
    tree.rooted = false;
    std::vector<Cluster> active;
    for (const auto& l : m.labels) active.push_back({tree.add_node(l), l, 1});
    std::vector<std::vector<double>> d(m.size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) d[i][j] = m(i, j);
    }
    const double eps = 1e-12 * std::max(1.0, max_entry(m)) * static_cast<double>(m.size());

    if (active.size() == 2) {
        tree.connect(active[0].node, active[1].node, d[0][1]);
        return tree;
    }

    while (active.size() > 3) {
        const std::size_t n = active.size();
        std::vector<double> r(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) r[i] += d[i][j];
        }
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double q = static_cast<double>(n - 2) * d[i][j] - r[i] - r[j];
                const bool better = q < best - eps;
                const bool tie = !better && q <= best + eps && pair_less(active[i], active[j], active[bi], active[bj]);
                if (better || tie) {
                    best = std::min(best, q);
                    bi = i;
                    bj = j;
                }
            }
        }
        const double dij = d[bi][bj];
        const double li = 0.5 * dij + (r[bi] - r[bj]) / (2.0 * static_cast<double>(n - 2));
        const double lj = dij - li;
        const int joined = tree.add_node();
        tree.connect(joined, active[bi].node, clamp_branch(tree, li));
        tree.connect(joined, active[bj].node, clamp_branch(tree, lj));

        std::vector<double> to_new(n);
        for (std::size_t k = 0; k < n; ++k) to_new[k] = 0.5 * (d[bi][k] + d[bj][k] - dij);
        Cluster merged{joined, std::min(active[bi].rep, active[bj].rep), active[bi].size + active[bj].size};

        // Replace bi with the new node and drop bj.
        active[bi] = merged;
        for (std::size_t k = 0; k < n; ++k) {
            d[bi][k] = d[k][bi] = (k == bi) ? 0.0 : to_new[k];
        }
        active.erase(active.begin() + static_cast<long>(bj));
        d.erase(d.begin() + static_cast<long>(bj));
        for (auto& row : d) row.erase(row.begin() + static_cast<long>(bj));
    }

    const int centre = tree.add_node();
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const double len = 0.5 * (d[i][j] + d[i][k] - d[j][k]);
        tree.connect(centre, active[i].node, clamp_branch(tree, len));
    }
    return tree;
}

PhyloTree upgma(const DistanceMatrix& m) {
    check_matrix(m, "upgma");
    PhyloTree tree;
    tree.rooted = true;
    std::vector<Cluster> active;
    for (const auto& l : m.labels) active.push_back({tree.add_node(l, 0.0), l, 1});
    std::vector<std::vector<double>> d(m.size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) d[i][j] = m(i, j);
    }
    const double eps = 1e-12 * std::max(1.0, max_entry(m));

    while (active.size() > 1) {
        const std::size_t n = active.size();
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = d[i][j];
                const bool better = v < best - eps;
                const bool tie = !better && v <= best + eps && pair_less(active[i], active[j], active[bi], active[bj]);
                if (better || tie) {
                    best = std::min(best, v);
                    bi = i;
                    bj = j;
                }
            }
        }
        const double height = 0.5 * d[bi][bj];
        const int joined = tree.add_node({}, height);
        for (std::size_t c : {bi, bj}) {
            tree.connect(joined, active[c].node, clamp_branch(tree, height - tree.nodes[active[c].node].height));
        }
        const double si = active[bi].size, sj = active[bj].size;
        std::vector<double> to_new(n);
        for (std::size_t k = 0; k < n; ++k) to_new[k] = (si * d[bi][k] + sj * d[bj][k]) / (si + sj);
        active[bi] = {joined, std::min(active[bi].rep, active[bj].rep), active[bi].size + active[bj].size};
        for (std::size_t k = 0; k < n; ++k) {
            d[bi][k] = d[k][bi] = (k == bi) ? 0.0 : to_new[k];
        }
        active.erase(active.begin() + static_cast<long>(bj));
        d.erase(d.begin() + static_cast<long>(bj));
        for (auto& row : d) row.erase(row.begin() + static_cast<long>(bj));
    }
    tree.root = active.front().node;
    return tree;
}

namespace {

std::string quote_label(const std::string& label) {
    if (label.find_first_of(" \t\n()[]':;,") == std::string::npos) return label;
    std::string out = "'";
    for (char c : label) {
        if (c == '\'') out += "''";
        else out += c;
    }
    return out + "'";
}

std::string format_length(double len) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", len > 0.0 ? len : 0.0);
    return buf;
}

}  // namespace

std::string to_newick(const PhyloTree& tree) {
    const auto adj = tree.adjacency();
    const auto labels = tree.leaf_labels();
    if (labels.empty()) throw InputError("to_newick: tree has no leaves");

    std::vector<std::string> min_label(tree.nodes.size());
    std::function<std::string(int, int)> smallest = [&](int node, int parent) -> std::string {
        std::string best = tree.nodes[node].label;
        for (auto [next, len] : adj[node]) {
            if (next == parent) continue;
            std::string s = smallest(next, node);
            if (best.empty() || s < best) best = s;
        }
        min_label[node] = best;
        return best;
    };

    std::function<std::string(int, int)> render = [&](int node, int parent) -> std::string {
        std::vector<std::pair<int, double>> children;
        for (auto [next, len] : adj[node]) {
            if (next != parent) children.emplace_back(next, len);
        }
        if (children.empty()) return quote_label(tree.nodes[node].label);
        std::sort(children.begin(), children.end(), [&](const auto& a, const auto& b) { return min_label[a.first] < min_label[b.first]; });
        std::string out = "(";
        for (std::size_t i = 0; i < children.size(); ++i) {
            if (i) out += ',';
            out += render(children[i].first, node) + ":" + format_length(children[i].second);
        }
        out += ')';
        return out;
    };

    int start = tree.root;
    if (!tree.rooted || start < 0) {
        int first_leaf = -1;
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            if (tree.nodes[i].label == labels.front()) first_leaf = static_cast<int>(i);
        }
        start = -1;
        for (auto [next, len] : adj[first_leaf]) {
            if (!tree.is_leaf(next)) start = next;
        }
        if (start < 0) {
            // Two leaves joined directly: no internal node to hang the tree from.
            if (adj[first_leaf].size() != 1) throw InputError("to_newick: malformed unrooted tree");
            const auto [other, len] = adj[first_leaf].front();
            return "(" + quote_label(labels.front()) + ":" + format_length(len) + "," + quote_label(tree.nodes[other].label) +
                   ":" + format_length(0.0) + ");";
        }
    }
    smallest(start, -1);
    return render(start, -1) + ";";
}

namespace {

class NewickParser {
public:
    explicit NewickParser(const std::string& text) : s_(text) {}

    PhyloTree parse() {
        skip_ws();
        const int top = parse_subtree();
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != ';') fail("expected ';'");
        ++pos_;
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters after ';'");
        tree_.root = top;
        tree_.rooted = tree_.degree(top) == 2;
        if (!tree_.rooted) tree_.root = -1;
        return std::move(tree_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("newick parse error at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string parse_label() {
        skip_ws();
        std::string label;
        if (pos_ < s_.size() && s_[pos_] == '\'') {
            ++pos_;
            while (true) {
                if (pos_ >= s_.size()) fail("unterminated quoted label");
                if (s_[pos_] == '\'') {
                    if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
                        label += '\'';
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    break;
                }
                label += s_[pos_++];
            }
            return label;
        }
        while (pos_ < s_.size() && std::string_view("(),:;[]").find(s_[pos_]) == std::string_view::npos &&
               !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            label += s_[pos_++];
        }
        return label;
    }

    double parse_length() {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != ':') return 0.0;
        ++pos_;
        skip_ws();
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected branch length");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    int parse_subtree() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            const int node = tree_.add_node();
            while (true) {
                const int child = parse_subtree();
                const double len = parse_length();
                tree_.connect(node, child, len);
                skip_ws();
                if (pos_ >= s_.size()) fail("unbalanced parentheses");
                if (s_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (s_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ')'");
            }
            parse_label();  // internal node names are not kept
            return node;
        }
        std::string label = parse_label();
        if (label.empty()) fail("leaf without a label");
        return tree_.add_node(std::move(label));
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    PhyloTree tree_;
};

}  // namespace

PhyloTree parse_newick(const std::string& text) { return NewickParser(text).parse(); }

std::map<std::vector<std::string>, double> split_lengths(const PhyloTree& tree) {
    const auto adj = tree.adjacency();
    const auto labels = tree.leaf_labels();
    std::map<std::vector<std::string>, double> splits;
    if (labels.empty()) return splits;
    std::function<void(int, int, std::vector<std::string>&)> collect = [&](int node, int parent, std::vector<std::string>& out) {
        if (tree.is_leaf(node)) out.push_back(tree.nodes[node].label);
        for (auto [next, len] : adj[node]) {
            if (next != parent) collect(next, node, out);
        }
    };
    for (const auto& e : tree.edges) {
        std::vector<std::string> side;
        collect(e.child, e.parent, side);
        std::sort(side.begin(), side.end());
        if (std::binary_search(side.begin(), side.end(), labels.front())) {
            std::vector<std::string> other;
            std::set_difference(labels.begin(), labels.end(), side.begin(), side.end(), std::back_inserter(other));
            side = std::move(other);
        }
        splits[side] += e.length;
    }
    return splits;
}

int robinson_foulds(const PhyloTree& a, const PhyloTree& b) {
    if (a.leaf_labels() != b.leaf_labels()) throw InputError("robinson_foulds: trees have different leaf sets");
    const std::size_t n = a.leaf_labels().size();
    auto nontrivial = [n](const std::map<std::vector<std::string>, double>& splits) {
        std::set<std::vector<std::string>> out;
        for (const auto& [side, len] : splits) {
            if (side.size() >= 2 && side.size() + 2 <= n) out.insert(side);
        }
        return out;
    };
    const auto sa = nontrivial(split_lengths(a));
    const auto sb = nontrivial(split_lengths(b));
    int diff = 0;
    for (const auto& s : sa) diff += sb.count(s) ? 0 : 1;
    for (const auto& s : sb) diff += sa.count(s) ? 0 : 1;
    return diff;
}

DistanceMatrix path_distances(const PhyloTree& tree) {
    const auto adj = tree.adjacency();
    DistanceMatrix out(tree.leaf_labels());
    std::vector<int> leaf_node(out.size(), -1);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.is_leaf(static_cast<int>(i))) leaf_node[out.index_of(tree.nodes[i].label)] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::vector<double> dist(tree.nodes.size(), -1.0);
        std::vector<int> stack{leaf_node[i]};
        dist[leaf_node[i]] = 0.0;
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            for (auto [next, len] : adj[cur]) {
                if (dist[next] >= 0.0) continue;
                dist[next] = dist[cur] + len;
                stack.push_back(next);
            }
        }
        for (std::size_t j = i + 1; j < out.size(); ++j) out.set(i, j, dist[leaf_node[j]]);
    }
    return out;
}

}  // namespace vstemma
