#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "dragonshare/core.hpp"
#include "dragonshare/valuations.hpp"

namespace dragonshare {

// Solver knobs; serialized in configs and echoed in results.
struct SolveParams {
    double tol = 1e-8;
    double budget = 2e6;   // evaluation cap per balanced-point search
    double eps_fuzz = 1e-3;
    double eps_sign = 1e-9;
    std::uint64_t seed = 42;
    int threads = 1;
};

// Fuzzy preference field: at a configuration (given by its tile lengths on a
// simplex) every player spreads one unit of preference weight over the pieces.
struct FunctionalPreferenceMatrix {
    int players = 0;
    int pieces = 0;
    double fuzz = 1e-3;
    // writes f (pieces x players, row-major) for the given lengths
    std::function<void(std::span<const double>, std::vector<double>&)> evaluator;

    std::vector<double> eval(std::span<const double> lengths) const;
};

// Margin-based weights: w_i = max(0, fuzz + v_i - max_k v_k), normalized to
// sum 1. Summation runs in index order so equal inputs give equal bits.
void fuzzy_weights_from_values(std::span<const double> values, double fuzz,
                               std::span<double> out);

// Classical field over cuts: n players, n+1 tiles, valuation-backed margins.
FunctionalPreferenceMatrix functional_from_valuations(const ValuationProfile& profile,
                                                      double fuzz);

struct BalancedPoint {
    SimplexPoint point;  // tile lengths
    double residual = 0.0;
};

class SearchFailure : public std::runtime_error {
public:
    SearchFailure(const std::string& msg, BalancedPoint best_)
        : std::runtime_error(msg), best(std::move(best_)) {}
    BalancedPoint best;
};

// Deterministic grid scan plus pattern-search refinement for a point where
// every piece's average preference equals 1/pieces (within tol, max norm).
BalancedPoint find_balanced_point(const FunctionalPreferenceMatrix& fprefs, double tol,
                                  double budget, std::uint64_t seed);

// Pattern-search-only refinement from a warm start; returns the best point
// reached within the budget and never throws on a miss.
BalancedPoint refine_balanced_point(const FunctionalPreferenceMatrix& fprefs,
                                    std::span<const double> start, double tol,
                                    double budget);

double residual_at(const FunctionalPreferenceMatrix& fprefs, std::span<const double> lengths);

struct SignMatrix {
    std::vector<std::vector<std::uint8_t>> omega;  // [piece][player]
    double threshold = 0.0;
};

SignMatrix sign_matrix(const FunctionalPreferenceMatrix& fprefs,
                       std::span<const double> lengths, double eps_sign);

struct OmegaCheck {
    bool ok = false;
    std::vector<int> witness;  // failing player subset when !ok
};

// Dragon condition on the support sets: every k players must jointly charge
// at least k+1 pieces. Requires pieces == players + 1 (transpose first in the
// player-swallowing orientation).
OmegaCheck check_omega_condition(const SignMatrix& sm);

struct KkmSolution {
    BalancedPoint balanced;
    Cut cut;
    LabeledTree tree;        // vertices = pieces, labels = players
    SignMatrix omega;
    std::vector<double> f;   // preference matrix at the balanced point
};

// Full classical pipeline: balanced point, sign matrix, covering check, and
// two-element representatives forming a piece tree with player-labeled edges.
KkmSolution solve_dragon_kkm(const ValuationProfile& profile, const SolveParams& params);

// For every root piece: the map sending each player label to the non-root
// endpoint of its edge. Each map is a bijection onto the other pieces.
std::map<int, std::map<int, int>> bijections_from_tree(const LabeledTree& tree);

}  // namespace dragonshare
