#include "dragonshare/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace dragonshare {

void validate_cut(const Cut& cut) {
    for (std::size_t i = 0; i < cut.points.size(); ++i) {
        double x = cut.points[i];
        if (!std::isfinite(x) || x < -structural_tol || x > 1.0 + structural_tol)
            throw ValidationError("cut point " + std::to_string(i + 1) + " outside [0,1]");
        if (i > 0 && cut.points[i - 1] > x)
            throw ValidationError("cut points must be nondecreasing");
    }
}

std::vector<Tile> tiles_from_cut(const Cut& cut) {
    validate_cut(cut);
    std::vector<Tile> tiles;
    tiles.reserve(cut.points.size() + 1);
    double lo = 0.0;
    for (double x : cut.points) {
        double hi = std::clamp(x, 0.0, 1.0);
        tiles.push_back({lo, hi});
        lo = hi;
    }
    tiles.push_back({lo, 1.0});
    return tiles;
}

void validate_simplex_point(const SimplexPoint& p) {
    if (p.coords.empty()) throw ValidationError("simplex point needs at least one coordinate");
    double sum = 0.0;
    for (double c : p.coords) {
        if (!std::isfinite(c) || c < -structural_tol)
            throw ValidationError("simplex coordinates must be nonnegative");
        sum += c;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("simplex coordinates must sum to 1");
}

SimplexPoint lengths_from_cut(const Cut& cut) {
    auto tiles = tiles_from_cut(cut);
    SimplexPoint p;
    p.coords.reserve(tiles.size());
    for (const Tile& t : tiles) p.coords.push_back(t.length());
    return p;
}

Cut cut_from_lengths(const SimplexPoint& lengths) {
    validate_simplex_point(lengths);
    // Dividing by the running total (instead of trusting it to be 1.0) pins
    // trailing zero-length pieces to exactly 1.0; otherwise rounding in the
    // sum leaves a phantom sliver between the last cut point and 1.
    double total = 0.0;
    for (double c : lengths.coords) total += c;
    Cut cut;
    cut.points.reserve(lengths.coords.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < lengths.coords.size(); ++i) {
        acc += lengths.coords[i];
        cut.points.push_back(std::clamp(acc / total, 0.0, 1.0));
    }
    return cut;
}

namespace {

// Union-find over 1..n, used for the acyclicity part of the tree predicate.
struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n + 1) {
        for (int i = 0; i <= n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

bool is_labeled_spanning_tree(const std::vector<TreeEdge>& edges,
                              int vertex_count,
                              const std::vector<int>& label_set) {
    if (vertex_count < 1) return false;
    if (edges.size() != static_cast<std::size_t>(vertex_count - 1)) return false;
    std::multiset<int> want(label_set.begin(), label_set.end());
    std::multiset<int> got;
    Dsu dsu(vertex_count);
    for (const TreeEdge& e : edges) {
        if (e.u < 1 || e.u > vertex_count || e.w < 1 || e.w > vertex_count || e.u == e.w)
            return false;
        if (!dsu.unite(e.u, e.w)) return false;  // cycle or duplicate edge
        got.insert(e.label);
    }
    if (want.size() != got.size()) return false;
    std::set<int> unique_labels(label_set.begin(), label_set.end());
    if (unique_labels.size() != label_set.size()) return false;
    return want == got;
}

void validate_tree(const LabeledTree& tree) {
    std::vector<int> labels;
    labels.reserve(tree.edges.size());
    for (const TreeEdge& e : tree.edges) labels.push_back(e.label);
    std::sort(labels.begin(), labels.end());
    if (!is_labeled_spanning_tree(tree.edges, tree.vertex_count, labels))
        throw ValidationError("edges do not form a labeled spanning tree");
    for (const TreeEdge& e : tree.edges)
        if (e.u >= e.w) throw ValidationError("tree edges must be stored with u < w");
}

namespace {

std::vector<std::vector<int>> adjacency(const LabeledTree& tree) {
    // adj[v] holds indices into tree.edges
    std::vector<std::vector<int>> adj(tree.vertex_count + 1);
    for (std::size_t k = 0; k < tree.edges.size(); ++k) {
        adj[tree.edges[k].u].push_back(static_cast<int>(k));
        adj[tree.edges[k].w].push_back(static_cast<int>(k));
    }
    return adj;
}

}  // namespace

std::map<int, TreeEdge> root_tree(const LabeledTree& tree, int root) {
    validate_tree(tree);
    if (root < 1 || root > tree.vertex_count)
        throw ValidationError("root out of range");
    auto adj = adjacency(tree);
    std::map<int, TreeEdge> parent;
    std::vector<int> stack = {root};
    std::vector<char> seen(tree.vertex_count + 1, 0);
    seen[root] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int k : adj[v]) {
            const TreeEdge& e = tree.edges[k];
            int other = (e.u == v) ? e.w : e.u;
            if (!seen[other]) {
                seen[other] = 1;
                parent[other] = e;
                stack.push_back(other);
            }
        }
    }
    return parent;
}

std::vector<std::pair<double, double>> tree_choice_probabilities(const LabeledTree& tree) {
    validate_tree(tree);
    const int v = tree.vertex_count;
    auto adj = adjacency(tree);

    // Root at vertex 1 and compute subtree sizes iteratively.
    std::vector<int> order, parent_vertex(v + 1, 0), subtree(v + 1, 1);
    std::vector<int> parent_edge(v + 1, -1);
    order.reserve(v);
    {
        std::vector<int> stack = {1};
        std::vector<char> seen(v + 1, 0);
        seen[1] = 1;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            order.push_back(x);
            for (int k : adj[x]) {
                const TreeEdge& e = tree.edges[k];
                int other = (e.u == x) ? e.w : e.u;
                if (!seen[other]) {
                    seen[other] = 1;
                    parent_vertex[other] = x;
                    parent_edge[other] = k;
                    stack.push_back(other);
                }
            }
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (*it != 1) subtree[parent_vertex[*it]] += subtree[*it];

    // For edge (parent p, child c): c is the non-root endpoint exactly when
    // the root lies outside c's subtree.
    std::vector<std::pair<double, double>> probs(tree.edges.size());
    for (int x = 1; x <= v; ++x) {
        int k = parent_edge[x];
        if (k < 0) continue;
        const TreeEdge& e = tree.edges[k];
        int child_side = subtree[x];
        double p_child = static_cast<double>(v - child_side) / static_cast<double>(v);
        double p_parent = static_cast<double>(child_side) / static_cast<double>(v);
        if (e.u == x)
            probs[k] = {p_child, p_parent};
        else
            probs[k] = {p_parent, p_child};
    }
    return probs;
}

}  // namespace dragonshare
