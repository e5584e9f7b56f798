#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "dragonshare/core.hpp"

namespace dragonshare {

// Densities at or above this (after normalization) count as hungry.
inline constexpr double delta_hungry = 1e-3;

enum class Regime { Hungry, Signed };

// Piecewise-constant density on [0,1]. Values may be negative in the signed
// regime; tiles are valued by integrating the density.
struct PiecewiseDensity {
    std::vector<double> breakpoints;  // 0 = b_0 < ... < b_m = 1
    std::vector<double> values;       // one per piece

    // integral of the density over [0, t], piecewise linear in t
    double prefix_integral(double t) const;
    double total() const;
    double abs_total() const;
};

void validate_density(const PiecewiseDensity& d);

double value(const PiecewiseDensity& d, const Tile& tile);

// Player j prefers tile `tile_index` (1-based) at `cut` iff its value is
// within tol of the best tile value.
bool prefers(const PiecewiseDensity& d, const Cut& cut, int tile_index, double tol = 0.0);

struct ValuationProfile {
    std::vector<PiecewiseDensity> players;
    Regime regime = Regime::Hungry;

    int player_count() const { return static_cast<int>(players.size()); }
    bool hungry() const;
    // value of every tile of `cut` for every player; [player][tile]
    std::vector<std::vector<double>> values_at(const Cut& cut) const;
};

// Normalizes each density (total value 1 in the hungry regime, total absolute
// mass 1 in the signed regime) and validates shape.
ValuationProfile make_profile(std::vector<PiecewiseDensity> players, Regime regime);

// Positional preference agreement across cuts that carve out the same
// non-degenerate tiles: preferences may differ only on degenerate tiles, and
// degenerate-tile preference status must agree. `prefer` answers whether the
// given 1-based tile of the cut is (weakly) preferred.
using PreferenceOracle = std::function<bool(const Cut& cut, int tile_index)>;

bool check_ppe_oracle(const PreferenceOracle& prefer,
                      const std::vector<std::pair<Cut, Cut>>& sample_pairs);

bool check_ppe(const ValuationProfile& profile,
               const std::vector<std::pair<Cut, Cut>>& sample_pairs,
               double tol = 0.0);

// Deterministic generator. Hungry draws values in [0.1, 2] and normalizes the
// total to 1; Signed additionally negates a random subset of pieces and
// normalizes the absolute mass.
ValuationProfile random_profile(std::uint64_t seed, int player_count, Regime regime,
                                int pieces = 4);

}  // namespace dragonshare
