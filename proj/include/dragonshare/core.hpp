#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dragonshare {

// Absolute tolerance used for structural/representation checks (sorted cuts,
// simplex coordinate sums, cut equality). Solver tolerances are configured
// separately through SolveParams.
inline constexpr double structural_tol = 1e-12;

// ---------------------------------------------------------------------------
// errors

// Malformed input: out-of-range indices, unsorted cuts, bad arities, ...
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input exceeds a documented size guard (e.g. brute force enumerations).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A required combinatorial condition fails; carries the violating index set.
class ConditionViolation : public std::runtime_error {
public:
    ConditionViolation(const std::string& msg, std::vector<int> witness_)
        : std::runtime_error(msg), witness(std::move(witness_)) {}
    std::vector<int> witness;
};

// ---------------------------------------------------------------------------
// basic division geometry

struct Tile {
    double lo = 0.0;
    double hi = 0.0;

    bool degenerate() const { return lo == hi; }
    double length() const { return hi - lo; }
};

// Nondecreasing points in [0,1]; a cut with m points induces m+1 tiles.
struct Cut {
    std::vector<double> points;
};

void validate_cut(const Cut& cut);
std::vector<Tile> tiles_from_cut(const Cut& cut);

// Nonnegative coordinates summing to 1 (within structural_tol).
struct SimplexPoint {
    std::vector<double> coords;
};

void validate_simplex_point(const SimplexPoint& p);

// Cut points of a classical cut <-> tile lengths as simplex coordinates.
SimplexPoint lengths_from_cut(const Cut& cut);
Cut cut_from_lengths(const SimplexPoint& lengths);

// ---------------------------------------------------------------------------
// labeled trees

// Edge of a labeled tree; stored with u < w. Vertices and labels are 1-based.
struct TreeEdge {
    int u = 0;
    int w = 0;
    int label = 0;
};

struct LabeledTree {
    int vertex_count = 0;
    std::vector<TreeEdge> edges;
};

// True iff `edges` form a spanning tree on [1..vertex_count] and the edge
// labels are exactly `label_set` (each used once).
bool is_labeled_spanning_tree(const std::vector<TreeEdge>& edges,
                              int vertex_count,
                              const std::vector<int>& label_set);

void validate_tree(const LabeledTree& tree);

// Parent edge of every non-root vertex: the first edge on the path from the
// vertex to `root`.
std::map<int, TreeEdge> root_tree(const LabeledTree& tree, int root);

// For each edge {u,w}: probability that u (resp. w) ends up as the non-root
// endpoint of that edge when the root is drawn uniformly from all vertices.
// Entry k corresponds to tree.edges[k] and is returned as (p_u, p_w); each
// equals (size of the component hanging off the opposite endpoint) / v.
std::vector<std::pair<double, double>> tree_choice_probabilities(const LabeledTree& tree);

// ---------------------------------------------------------------------------
// assignments

// Final shares after the dragon acted. `dragon` is the grabbed box (scenario
// where the dragon takes a piece) or the swallowed agent (scenario where it
// takes a player). `shares` maps each surviving agent to their box.
struct Assignment {
    int dragon = 0;
    std::map<int, int> shares;
};

}  // namespace dragonshare
