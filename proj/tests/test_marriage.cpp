#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "dragonshare/marriage.hpp"

using namespace dragonshare;

namespace {

// Independent check: every nonempty collection of k sets covers >= k+1 vertices.
bool condition_oracle(const SetFamily& family) {
    int m = static_cast<int>(family.sets.size());
    for (int mask = 1; mask < (1 << m); ++mask) {
        std::set<int> uni;
        int k = 0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1 << i)) {
                ++k;
                uni.insert(family.sets[i].begin(), family.sets[i].end());
            }
        }
        if (static_cast<int>(uni.size()) < k + 1) return false;
    }
    return true;
}

bool valid_representatives(const SetFamily& family, const RepresentativeTree& rep) {
    if (rep.pairs.size() != family.sets.size()) return false;
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        auto [a, b] = rep.pairs[i];
        const auto& J = family.sets[i];
        if (std::find(J.begin(), J.end(), a) == J.end()) return false;
        if (std::find(J.begin(), J.end(), b) == J.end()) return false;
        if (a == b) return false;
    }
    LabeledTree tree = to_labeled_tree(rep, family.n);
    std::vector<int> labels(family.sets.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i) + 1;
    return is_labeled_spanning_tree(tree.edges, family.n, labels);
}

std::vector<std::vector<int>> nonempty_subsets(int n) {
    std::vector<std::vector<int>> out;
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<int> s;
        for (int v = 1; v <= n; ++v)
            if (mask & (1 << (v - 1))) s.push_back(v);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("validation of set families") {
    validate_family(SetFamily{3, {{1, 2}, {2, 3}}});
    CHECK_THROWS_AS(validate_family(SetFamily{3, {{1, 2}}}), ValidationError);        // arity
    CHECK_THROWS_AS(validate_family(SetFamily{3, {{0, 2}, {2, 3}}}), ValidationError);
    CHECK_THROWS_AS(validate_family(SetFamily{3, {{1, 4}, {2, 3}}}), ValidationError);
    CHECK_THROWS_AS(validate_family(SetFamily{3, {{}, {2, 3}}}), ValidationError);
}

TEST_CASE("dragon condition on hand-built families") {
    // the classic failure: two sets stuck on the same two vertices
    SetFamily bad{3, {{1, 2}, {1, 2}}};
    CHECK_FALSE(check_dragon_condition(bad));
    auto w = dragon_condition_witness(bad);
    REQUIRE(w.has_value());
    CHECK(*w == std::vector<int>{1, 2});
    CHECK_THROWS_AS(spanning_tree_representatives(bad), ConditionViolation);
    try {
        spanning_tree_representatives(bad);
    } catch (const ConditionViolation& e) {
        CHECK(e.witness == std::vector<int>{1, 2});
    }
    CHECK_FALSE(brute_force_tree_representatives(bad).has_value());

    SetFamily good{4, {{1, 2}, {2, 3}, {3, 4}}};
    CHECK(check_dragon_condition(good));
    CHECK_FALSE(dragon_condition_witness(good).has_value());
    RepresentativeTree rep = spanning_tree_representatives(good);
    CHECK(valid_representatives(good, rep));
}

TEST_CASE("avoiding representatives on a small family") {
    SetFamily family{3, {{1, 2}, {2, 3}}};
    for (int avoid = 1; avoid <= 3; ++avoid) {
        auto sdr = sdr_avoiding(family, avoid);
        REQUIRE(sdr.has_value());
        REQUIRE(sdr->size() == 2);
        CHECK((*sdr)[0] != (*sdr)[1]);
        CHECK((*sdr)[0] != avoid);
        CHECK((*sdr)[1] != avoid);
    }
    SetFamily stuck{3, {{1, 2}, {1, 2}}};
    CHECK_FALSE(sdr_avoiding(stuck, 1).has_value());
}

TEST_CASE("exhaustive n=3 equivalences") {
    auto subsets = nonempty_subsets(3);
    int satisfied = 0;
    for (const auto& s1 : subsets) {
        for (const auto& s2 : subsets) {
            SetFamily family{3, {s1, s2}};
            bool oracle = condition_oracle(family);
            CHECK(check_dragon_condition(family) == oracle);
            CHECK(dragon_condition_witness(family).has_value() == !oracle);

            auto brute = brute_force_tree_representatives(family);
            CHECK(brute.has_value() == oracle);
            if (brute) CHECK(valid_representatives(family, *brute));

            bool all_avoiding = true;
            for (int j = 1; j <= 3; ++j)
                if (!sdr_avoiding(family, j)) all_avoiding = false;
            CHECK(all_avoiding == oracle);

            if (oracle) {
                ++satisfied;
                RepresentativeTree rep = spanning_tree_representatives(family);
                CHECK(valid_representatives(family, rep));
            } else {
                CHECK_THROWS_AS(spanning_tree_representatives(family), ConditionViolation);
            }
        }
    }
    CHECK(satisfied > 0);
}

TEST_CASE("spot checks at n=4") {
    auto subsets = nonempty_subsets(4);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        SetFamily family{4, {subsets[rng() % subsets.size()], subsets[rng() % subsets.size()],
                             subsets[rng() % subsets.size()]}};
        bool oracle = condition_oracle(family);
        CHECK(check_dragon_condition(family) == oracle);
        CHECK(brute_force_tree_representatives(family).has_value() == oracle);
        if (oracle) {
            RepresentativeTree rep = spanning_tree_representatives(family);
            CHECK(valid_representatives(family, rep));
        }
    }
}

TEST_CASE("witness describes a genuine violation") {
    SetFamily family{5, {{1, 2}, {2, 1}, {3, 4, 5}, {1, 2, 3}}};
    auto w = dragon_condition_witness(family);
    REQUIRE(w.has_value());
    std::set<int> uni;
    for (int idx : *w) {
        REQUIRE(idx >= 1);
        REQUIRE(idx <= 4);
        uni.insert(family.sets[idx - 1].begin(), family.sets[idx - 1].end());
    }
    CHECK(static_cast<int>(uni.size()) <= static_cast<int>(w->size()));
}

TEST_CASE("construction is deterministic and traced") {
    SetFamily family{6, {{1, 2, 3}, {2, 3}, {3, 4}, {4, 5, 6}, {5, 6}}};
    ConstructionTrace trace;
    RepresentativeTree a = spanning_tree_representatives(family, &trace);
    RepresentativeTree b = spanning_tree_representatives(family);
    CHECK(a.pairs == b.pairs);
    CHECK(valid_representatives(family, a));
    // Pruning to an inclusion-minimal incidence graph always ends at forced
    // pairs (anything outside a representative pair is removable), so the
    // recursive split - and with it the trace - only fires defensively.
    for (const auto& [idxs, covered] : trace.tight_sets) {
        CHECK(covered == static_cast<int>(idxs.size()) + 1);
    }
}

TEST_CASE("brute force capacity guard") {
    SetFamily big{11, {}};
    for (int i = 0; i < 10; ++i) big.sets.push_back({i + 1, i + 2});
    CHECK_THROWS_AS(brute_force_tree_representatives(big), CapacityError);
}

TEST_CASE("constructive and brute force agree on random satisfying families") {
    std::mt19937_64 rng(23);
    int done = 0;
    while (done < 60) {
        int n = 3 + static_cast<int>(rng() % 4);  // 3..6
        SetFamily family{n, {}};
        for (int i = 0; i < n - 1; ++i) {
            std::vector<int> s;
            for (int v = 1; v <= n; ++v)
                if (rng() % 2) s.push_back(v);
            if (s.empty()) s.push_back(static_cast<int>(rng() % n) + 1);
            family.sets.push_back(std::move(s));
        }
        if (!condition_oracle(family)) continue;
        ++done;
        RepresentativeTree rep = spanning_tree_representatives(family);
        CHECK(valid_representatives(family, rep));
        if (n <= 10) {
            auto brute = brute_force_tree_representatives(family);
            REQUIRE(brute.has_value());
            CHECK(valid_representatives(family, *brute));
        }
    }
}
