#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dragonshare/core.hpp"

namespace dragonshare {

// Family J_1..J_{n-1} of subsets of {1..n}. Index i is the "edge label",
// ground elements are the vertices.
struct SetFamily {
    int n = 0;
    std::vector<std::vector<int>> sets;
};

void validate_family(const SetFamily& family);

// Two-element representatives e_i = {a_i, b_i} (subset of J_i), one per set.
struct RepresentativeTree {
    std::vector<std::pair<int, int>> pairs;
};

LabeledTree to_labeled_tree(const RepresentativeTree& rep, int n);

// Dragon condition: every k of the sets jointly cover at least k+1 vertices.
bool check_dragon_condition(const SetFamily& family);

// If the condition fails, returns set indices S with |union of J_i, i in S| <= |S|.
std::optional<std::vector<int>> dragon_condition_witness(const SetFamily& family);

// System of distinct representatives avoiding vertex `avoid`; entry i is the
// representative of J_i. Empty when none exists.
std::optional<std::vector<int>> sdr_avoiding(const SetFamily& family, int avoid);

// Optional introspection record for spanning_tree_representatives.
struct ConstructionTrace {
    // (chosen tight index set, number of vertices it covers) per recursion level
    std::vector<std::pair<std::vector<int>, int>> tight_sets;
};

// Constructive algorithm: returns representatives forming a spanning tree on
// {1..n} with e_i subset of J_i. Throws ConditionViolation (with witness) when
// the dragon condition fails.
RepresentativeTree spanning_tree_representatives(const SetFamily& family,
                                                 ConstructionTrace* trace = nullptr);

// Exhaustive search over all 2-element choices; first solution in
// lexicographic order, or empty when none exists. Guarded to n <= 10.
std::optional<RepresentativeTree> brute_force_tree_representatives(const SetFamily& family);

}  // namespace dragonshare
