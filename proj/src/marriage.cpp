#include "dragonshare/marriage.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <numeric>

namespace dragonshare {

void validate_family(const SetFamily& family) {
    if (family.n < 1) throw ValidationError("family needs n >= 1");
    if (family.n > 62) throw CapacityError("set families limited to n <= 62");
    if (family.sets.size() != static_cast<std::size_t>(family.n - 1))
        throw ValidationError("family must contain exactly n-1 sets");
    for (std::size_t i = 0; i < family.sets.size(); ++i) {
        if (family.sets[i].empty())
            throw ValidationError("set " + std::to_string(i + 1) + " is empty");
        std::uint64_t seen = 0;
        for (int v : family.sets[i]) {
            if (v < 1 || v > family.n)
                throw ValidationError("set " + std::to_string(i + 1) + " has an element outside [1,n]");
            std::uint64_t bit = 1ull << (v - 1);
            if (seen & bit)
                throw ValidationError("set " + std::to_string(i + 1) + " has a duplicate element");
            seen |= bit;
        }
    }
}

LabeledTree to_labeled_tree(const RepresentativeTree& rep, int n) {
    LabeledTree tree;
    tree.vertex_count = n;
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        auto [a, b] = rep.pairs[i];
        if (a > b) std::swap(a, b);
        tree.edges.push_back({a, b, static_cast<int>(i) + 1});
    }
    return tree;
}

namespace {

std::vector<std::uint64_t> set_masks(const SetFamily& family) {
    std::vector<std::uint64_t> masks;
    masks.reserve(family.sets.size());
    for (const auto& s : family.sets) {
        std::uint64_t m = 0;
        for (int v : s) m |= 1ull << (v - 1);
        masks.push_back(m);
    }
    return masks;
}

struct MatchResult {
    std::vector<int> of_set;  // position matched to each set, -1 if unmatched
    std::vector<int> of_pos;  // set matched to each position, -1 if free
    int size = 0;
};

// Augmenting-path matching of sets into positions, skipping `banned`.
MatchResult match_sets(const std::vector<std::uint64_t>& masks, int pos_count, int banned) {
    const int L = static_cast<int>(masks.size());
    MatchResult m;
    m.of_set.assign(L, -1);
    m.of_pos.assign(pos_count, -1);
    std::vector<char> used(pos_count, 0);
    std::function<bool(int)> augment = [&](int i) -> bool {
        for (int p = 0; p < pos_count; ++p) {
            if (p == banned || used[p] || !((masks[i] >> p) & 1ull)) continue;
            used[p] = 1;
            if (m.of_pos[p] < 0 || augment(m.of_pos[p])) {
                m.of_pos[p] = i;
                m.of_set[i] = p;
                return true;
            }
        }
        return false;
    };
    for (int i = 0; i < L; ++i) {
        std::fill(used.begin(), used.end(), 0);
        if (augment(i)) ++m.size;
    }
    return m;
}

// Left side of the standard Hall witness: sets reachable from the unmatched
// ones via alternating paths. Covers fewer positions than its own size.
std::uint64_t hall_violator(const std::vector<std::uint64_t>& masks, int pos_count, int banned,
                            const MatchResult& m) {
    const int L = static_cast<int>(masks.size());
    std::vector<char> in_s(L, 0), in_t(pos_count, 0);
    std::vector<int> queue;
    for (int i = 0; i < L; ++i)
        if (m.of_set[i] < 0) {
            in_s[i] = 1;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        int i = queue.back();
        queue.pop_back();
        for (int p = 0; p < pos_count; ++p) {
            if (p == banned || in_t[p] || !((masks[i] >> p) & 1ull)) continue;
            in_t[p] = 1;
            int j = m.of_pos[p];
            if (j >= 0 && !in_s[j]) {
                in_s[j] = 1;
                queue.push_back(j);
            }
        }
    }
    std::uint64_t s = 0;
    for (int i = 0; i < L; ++i)
        if (in_s[i]) s |= 1ull << i;
    return s;
}

// Every set representable while avoiding every single position?
bool avoidance_condition(const std::vector<std::uint64_t>& masks, int pos_count) {
    const int L = static_cast<int>(masks.size());
    for (int banned = 0; banned < pos_count; ++banned)
        if (match_sets(masks, pos_count, banned).size < L) return false;
    return true;
}

std::uint64_t union_of(const std::vector<std::uint64_t>& masks, std::uint64_t subset) {
    std::uint64_t u = 0;
    while (subset) {
        int i = std::countr_zero(subset);
        u |= masks[i];
        subset &= subset - 1;
    }
    return u;
}

// Lexicographic preference between equal-size index sets: the one owning the
// lowest differing index comes first.
bool lex_before(std::uint64_t a, std::uint64_t b) {
    std::uint64_t diff = a ^ b;
    if (!diff) return false;
    return (a >> std::countr_zero(diff)) & 1ull;
}

struct Instance {
    std::vector<int> verts;  // vertex ids, ascending
    std::vector<int> labels;
    std::vector<std::uint64_t> masks;  // over positions in verts
};

// Largest index set whose sets cover exactly one more vertex than its size.
// Ties break toward the lexicographically smallest index set. Returns 0 when
// none found.
std::uint64_t max_tight_set(const std::vector<std::uint64_t>& masks, int pos_count) {
    const int L = static_cast<int>(masks.size());
    const std::uint64_t full = (L == 64) ? ~0ull : ((1ull << L) - 1);
    std::uint64_t best = 0;
    int best_size = 0;
    auto consider = [&](std::uint64_t s) {
        if (!s || s == full) return;
        int size = std::popcount(s);
        if (std::popcount(union_of(masks, s)) != size + 1) return;
        if (size > best_size || (size == best_size && lex_before(s, best))) {
            best = s;
            best_size = size;
        }
    };
    if (L <= 20) {
        // exhaustive sweep; the incremental union table keeps it linear in 2^L
        std::vector<std::uint64_t> uni(1ull << L, 0);
        for (std::uint64_t s = 1; s < (1ull << L); ++s) {
            std::uint64_t low = s & (~s + 1);
            uni[s] = uni[s ^ low] | masks[std::countr_zero(low)];
            if (s != full && std::popcount(uni[s]) == std::popcount(s) + 1) consider(s);
        }
        return best;
    }
    // Larger instances: harvest Hall witnesses from tentative single-incidence
    // removals, then close the collection under unions of overlapping members.
    std::vector<std::uint64_t> found;
    auto add = [&](std::uint64_t s) {
        if (!s || s == full) return;
        if (std::popcount(union_of(masks, s)) != std::popcount(s) + 1) return;
        if (std::find(found.begin(), found.end(), s) == found.end()) found.push_back(s);
    };
    for (int i = 0; i < L; ++i) {
        for (int p = 0; p < pos_count; ++p) {
            if (!((masks[i] >> p) & 1ull)) continue;
            auto masks2 = masks;
            masks2[i] &= ~(1ull << p);
            for (int banned = 0; banned < pos_count; ++banned) {
                MatchResult m = match_sets(masks2, pos_count, banned);
                if (m.size < L) {
                    add(hall_violator(masks2, pos_count, banned, m));
                    break;
                }
            }
        }
    }
    bool grew = true;
    while (grew) {
        grew = false;
        const std::size_t count = found.size();
        for (std::size_t a = 0; a < count; ++a)
            for (std::size_t b = a + 1; b < count; ++b) {
                if (!(found[a] & found[b])) continue;
                std::uint64_t u = found[a] | found[b];
                if (u == found[a] || u == found[b] || u == full) continue;
                if (std::popcount(union_of(masks, u)) == std::popcount(u) + 1 &&
                    std::find(found.begin(), found.end(), u) == found.end()) {
                    found.push_back(u);
                    grew = true;
                }
            }
    }
    for (std::uint64_t s : found) consider(s);
    return best;
}

std::vector<TreeEdge> solve_instance(Instance inst, ConstructionTrace* trace) {
    const int P = static_cast<int>(inst.verts.size());
    const int L = static_cast<int>(inst.masks.size());
    if (P == 1) return {};
    if (!avoidance_condition(inst.masks, P))
        throw CapacityError("representative construction lost the covering condition");

    // Prune incidences to an inclusion-minimal graph, scanning in (label,
    // vertex) order. A removal is kept whenever the avoidance condition
    // survives; once blocked, an incidence stays blocked in any subgraph.
    for (int i = 0; i < L; ++i) {
        for (int p = 0; p < P; ++p) {
            if (!((inst.masks[i] >> p) & 1ull)) continue;
            std::uint64_t saved = inst.masks[i];
            inst.masks[i] &= ~(1ull << p);
            if (!avoidance_condition(inst.masks, P)) inst.masks[i] = saved;
        }
    }

    bool all_pairs = std::all_of(inst.masks.begin(), inst.masks.end(),
                                 [](std::uint64_t m) { return std::popcount(m) == 2; });
    if (all_pairs) {
        std::vector<TreeEdge> edges;
        edges.reserve(L);
        std::vector<int> parent(P);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (int i = 0; i < L; ++i) {
            int a = std::countr_zero(inst.masks[i]);
            int b = std::countr_zero(inst.masks[i] & (inst.masks[i] - 1));
            int ra = find(a), rb = find(b);
            if (ra == rb)
                throw CapacityError("forced pairs formed a cycle; covering condition broken");
            parent[ra] = rb;
            edges.push_back({inst.verts[a], inst.verts[b], inst.labels[i]});
        }
        return edges;
    }

    std::uint64_t tight = max_tight_set(inst.masks, P);
    if (!tight)
        throw CapacityError("no usable tight subfamily found; instance too large for the fallback search");
    std::uint64_t covered = union_of(inst.masks, tight);
    if (trace) {
        std::vector<int> labels;
        for (int i = 0; i < L; ++i)
            if ((tight >> i) & 1ull) labels.push_back(inst.labels[i]);
        trace->tight_sets.push_back({labels, std::popcount(covered)});
    }

    // Split: the tight subfamily lives on the vertices it covers; the rest is
    // restricted to the remaining vertices plus one connector shared by both
    // sides. Each part keeps the covering condition, and gluing the two trees
    // at the connector spans everything.
    auto project = [&](std::uint64_t vert_mask, std::uint64_t set_mask, bool restrict_sets) {
        Instance sub;
        std::vector<int> pos_map(P, -1);
        for (int p = 0; p < P; ++p)
            if ((vert_mask >> p) & 1ull) {
                pos_map[p] = static_cast<int>(sub.verts.size());
                sub.verts.push_back(inst.verts[p]);
            }
        for (int i = 0; i < L; ++i) {
            if (!((set_mask >> i) & 1ull)) continue;
            std::uint64_t m = inst.masks[i];
            if (restrict_sets) m &= vert_mask;
            std::uint64_t proj = 0;
            std::uint64_t scan = m;
            while (scan) {
                int p = std::countr_zero(scan);
                proj |= 1ull << pos_map[p];
                scan &= scan - 1;
            }
            sub.labels.push_back(inst.labels[i]);
            sub.masks.push_back(proj);
        }
        return sub;
    };

    const std::uint64_t full_sets = (L == 64) ? ~0ull : ((1ull << L) - 1);
    const std::uint64_t rest = full_sets & ~tight;
    std::uint64_t rest_cover = union_of(inst.masks, rest);
    std::uint64_t connector_options = covered & rest_cover;
    if (!connector_options)
        throw CapacityError("tight split produced no connector vertex");
    int y = std::countr_zero(connector_options);

    const std::uint64_t full_verts = (P == 64) ? ~0ull : ((1ull << P) - 1);
    std::uint64_t outside = (full_verts & ~covered) | (1ull << y);

    auto edges1 = solve_instance(project(covered, tight, false), trace);
    auto edges2 = solve_instance(project(outside, rest, true), trace);
    edges1.insert(edges1.end(), edges2.begin(), edges2.end());
    return edges1;
}

}  // namespace

bool check_dragon_condition(const SetFamily& family) {
    validate_family(family);
    auto masks = set_masks(family);
    return avoidance_condition(masks, family.n);
}

std::optional<std::vector<int>> dragon_condition_witness(const SetFamily& family) {
    validate_family(family);
    auto masks = set_masks(family);
    const int L = static_cast<int>(masks.size());
    for (int banned = 0; banned < family.n; ++banned) {
        MatchResult m = match_sets(masks, family.n, banned);
        if (m.size < L) {
            std::uint64_t s = hall_violator(masks, family.n, banned, m);
            std::vector<int> witness;
            for (int i = 0; i < L; ++i)
                if ((s >> i) & 1ull) witness.push_back(i + 1);
            return witness;
        }
    }
    return std::nullopt;
}

std::optional<std::vector<int>> sdr_avoiding(const SetFamily& family, int avoid) {
    validate_family(family);
    if (avoid < 1 || avoid > family.n) throw ValidationError("avoided vertex out of range");
    auto masks = set_masks(family);
    MatchResult m = match_sets(masks, family.n, avoid - 1);
    if (m.size < static_cast<int>(masks.size())) return std::nullopt;
    std::vector<int> reps;
    reps.reserve(masks.size());
    for (int p : m.of_set) reps.push_back(p + 1);
    return reps;
}

RepresentativeTree spanning_tree_representatives(const SetFamily& family,
                                                 ConstructionTrace* trace) {
    if (auto witness = dragon_condition_witness(family))
        throw ConditionViolation("family fails the dragon condition", *witness);

    Instance root;
    root.verts.resize(family.n);
    std::iota(root.verts.begin(), root.verts.end(), 1);
    root.labels.resize(family.sets.size());
    std::iota(root.labels.begin(), root.labels.end(), 1);
    root.masks = set_masks(family);

    auto edges = solve_instance(std::move(root), trace);

    RepresentativeTree rep;
    rep.pairs.resize(family.sets.size());
    for (const TreeEdge& e : edges) {
        int a = std::min(e.u, e.w), b = std::max(e.u, e.w);
        rep.pairs[e.label - 1] = {a, b};
    }
    return rep;
}

std::optional<RepresentativeTree> brute_force_tree_representatives(const SetFamily& family) {
    validate_family(family);
    if (family.n > 10) throw CapacityError("brute force representative search limited to n <= 10");
    const int L = family.n - 1;

    std::vector<std::vector<std::pair<int, int>>> choices(L);
    for (int i = 0; i < L; ++i) {
        std::vector<int> s = family.sets[i];
        std::sort(s.begin(), s.end());
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a + 1; b < s.size(); ++b)
                choices[i].push_back({s[a], s[b]});
        if (choices[i].empty()) return std::nullopt;
    }

    std::vector<std::pair<int, int>> picked(L);
    std::function<bool(int, std::vector<int>)> search = [&](int i, std::vector<int> parent) -> bool {
        if (i == L) return true;
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (auto [a, b] : choices[i]) {
            int ra = find(a), rb = find(b);
            if (ra == rb) continue;  // would close a cycle
            auto next = parent;
            next[ra] = rb;
            picked[i] = {a, b};
            if (search(i + 1, std::move(next))) return true;
        }
        return false;
    };

    std::vector<int> parent(family.n + 1);
    std::iota(parent.begin(), parent.end(), 0);
    if (!search(0, std::move(parent))) return std::nullopt;
    return RepresentativeTree{picked};
}

}  // namespace dragonshare
