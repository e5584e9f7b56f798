#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "dragonshare/core.hpp"

using namespace dragonshare;

TEST_CASE("tiles and cuts") {
    Tile t{0.25, 0.25};
    CHECK(t.degenerate());
    CHECK(t.length() == 0.0);
    CHECK_FALSE(Tile{0.0, 0.5}.degenerate());

    Cut cut{{0.25, 0.5}};
    validate_cut(cut);
    auto tiles = tiles_from_cut(cut);
    REQUIRE(tiles.size() == 3);
    CHECK(tiles[0].lo == 0.0);
    CHECK(tiles[0].hi == 0.25);
    CHECK(tiles[1].lo == 0.25);
    CHECK(tiles[1].hi == 0.5);
    CHECK(tiles[2].hi == 1.0);

    CHECK_THROWS_AS(validate_cut(Cut{{0.5, 0.25}}), ValidationError);
    CHECK_THROWS_AS(validate_cut(Cut{{-0.1}}), ValidationError);
    CHECK_THROWS_AS(validate_cut(Cut{{1.1}}), ValidationError);
    // tiny numerical slack is accepted
    validate_cut(Cut{{-1e-13, 1.0}});
}

TEST_CASE("simplex points and length conversions") {
    validate_simplex_point(SimplexPoint{{0.5, 0.5}});
    validate_simplex_point(SimplexPoint{{1.0}});
    CHECK_THROWS_AS(validate_simplex_point(SimplexPoint{{0.7, 0.7}}), ValidationError);
    CHECK_THROWS_AS(validate_simplex_point(SimplexPoint{{1.5, -0.5}}), ValidationError);
    CHECK_THROWS_AS(validate_simplex_point(SimplexPoint{{}}), ValidationError);

    Cut cut{{0.25, 0.5}};
    SimplexPoint lengths = lengths_from_cut(cut);
    REQUIRE(lengths.coords.size() == 3);
    CHECK(lengths.coords[0] == 0.25);
    CHECK(lengths.coords[1] == 0.25);
    CHECK(lengths.coords[2] == 0.5);
    Cut back = cut_from_lengths(lengths);
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(back.points[1] == doctest::Approx(0.5).epsilon(1e-15));

    // degenerate tiles survive the round trip
    SimplexPoint degen{{0.5, 0.0, 0.5}};
    Cut c2 = cut_from_lengths(degen);
    CHECK(c2.points[0] == c2.points[1]);
}

TEST_CASE("labeled spanning tree recognition") {
    std::vector<TreeEdge> path = {{1, 2, 1}, {2, 3, 2}};
    CHECK(is_labeled_spanning_tree(path, 3, {1, 2}));
    CHECK_FALSE(is_labeled_spanning_tree(path, 3, {1, 3}));          // wrong labels
    CHECK_FALSE(is_labeled_spanning_tree({{1, 2, 1}}, 3, {1}));      // not spanning
    std::vector<TreeEdge> cyc = {{1, 2, 1}, {2, 3, 2}, {1, 3, 3}};
    CHECK_FALSE(is_labeled_spanning_tree(cyc, 3, {1, 2, 3}));        // cycle
    std::vector<TreeEdge> dup = {{1, 2, 1}, {1, 2, 2}};
    CHECK_FALSE(is_labeled_spanning_tree(dup, 3, {1, 2}));

    LabeledTree tree{3, path};
    validate_tree(tree);
    LabeledTree bad{3, cyc};
    CHECK_THROWS_AS(validate_tree(bad), ValidationError);
}

TEST_CASE("rooting a path") {
    LabeledTree tree{3, {{1, 2, 1}, {2, 3, 2}}};

    auto at1 = root_tree(tree, 1);
    REQUIRE(at1.size() == 2);
    CHECK(at1.at(2).u == 1);
    CHECK(at1.at(2).w == 2);
    CHECK(at1.at(2).label == 1);
    CHECK(at1.at(3).u == 2);
    CHECK(at1.at(3).w == 3);
    CHECK(at1.at(3).label == 2);

    auto at2 = root_tree(tree, 2);
    CHECK(at2.at(1).label == 1);
    CHECK(at2.at(3).label == 2);

    CHECK_THROWS_AS(root_tree(tree, 0), ValidationError);
    CHECK_THROWS_AS(root_tree(tree, 4), ValidationError);
}

TEST_CASE("choice probabilities on the path 1-2-3") {
    LabeledTree tree{3, {{1, 2, 1}, {2, 3, 2}}};
    auto probs = tree_choice_probabilities(tree);
    REQUIRE(probs.size() == 2);
    // vertex 1 is the non-root endpoint of {1,2} for roots 2 and 3
    CHECK(probs[0].first == 2.0 / 3.0);
    CHECK(probs[0].second == 1.0 / 3.0);
    CHECK(probs[1].first == 1.0 / 3.0);
    CHECK(probs[1].second == 2.0 / 3.0);
}

namespace {

LabeledTree random_tree(std::mt19937_64& rng, int v) {
    LabeledTree tree{v, {}};
    std::vector<int> labels(v - 1);
    for (int i = 0; i < v - 1; ++i) labels[i] = i + 1;
    std::shuffle(labels.begin(), labels.end(), rng);
    for (int i = 2; i <= v; ++i) {
        int p = static_cast<int>(rng() % (i - 1)) + 1;
        tree.edges.push_back({p, i, labels[i - 2]});
    }
    return tree;
}

}  // namespace

TEST_CASE("choice probabilities match root enumeration") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int v = 2 + static_cast<int>(rng() % 7);
        LabeledTree tree = random_tree(rng, v);
        auto probs = tree_choice_probabilities(tree);
        REQUIRE(probs.size() == tree.edges.size());

        for (std::size_t k = 0; k < tree.edges.size(); ++k) {
            int cnt_u = 0, cnt_w = 0;
            for (int root = 1; root <= v; ++root) {
                auto parents = root_tree(tree, root);
                for (const auto& [child, e] : parents) {
                    if (e.u == tree.edges[k].u && e.w == tree.edges[k].w) {
                        if (child == e.u) ++cnt_u;
                        if (child == e.w) ++cnt_w;
                    }
                }
            }
            CHECK(probs[k].first == cnt_u / static_cast<double>(v));
            CHECK(probs[k].second == cnt_w / static_cast<double>(v));
            CHECK(cnt_u + cnt_w == v);
        }
    }
}
