#include "dragonshare/valuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dragonshare {

void validate_density(const PiecewiseDensity& d) {
    if (d.breakpoints.size() < 2) throw ValidationError("density needs at least two breakpoints");
    if (d.values.size() + 1 != d.breakpoints.size())
        throw ValidationError("density needs one value per piece");
    if (std::fabs(d.breakpoints.front()) > structural_tol ||
        std::fabs(d.breakpoints.back() - 1.0) > structural_tol)
        throw ValidationError("density breakpoints must span [0,1]");
    for (std::size_t i = 1; i < d.breakpoints.size(); ++i)
        if (d.breakpoints[i] <= d.breakpoints[i - 1])
            throw ValidationError("density breakpoints must be strictly increasing");
    for (double v : d.values)
        if (!std::isfinite(v)) throw ValidationError("density values must be finite");
}

double PiecewiseDensity::prefix_integral(double t) const {
    if (t <= breakpoints.front()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double lo = breakpoints[i], hi = breakpoints[i + 1];
        if (t >= hi) {
            acc += values[i] * (hi - lo);
        } else {
            acc += values[i] * (t - lo);
            break;
        }
    }
    return acc;
}

double PiecewiseDensity::total() const { return prefix_integral(breakpoints.back()); }

double PiecewiseDensity::abs_total() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        acc += std::fabs(values[i]) * (breakpoints[i + 1] - breakpoints[i]);
    return acc;
}

double value(const PiecewiseDensity& d, const Tile& tile) {
    if (tile.degenerate()) return 0.0;
    return d.prefix_integral(tile.hi) - d.prefix_integral(tile.lo);
}

bool prefers(const PiecewiseDensity& d, const Cut& cut, int tile_index, double tol) {
    auto tiles = tiles_from_cut(cut);
    if (tile_index < 1 || tile_index > static_cast<int>(tiles.size()))
        throw ValidationError("tile index out of range");
    double best = -std::numeric_limits<double>::infinity();
    for (const Tile& t : tiles) best = std::max(best, value(d, t));
    return value(d, tiles[tile_index - 1]) >= best - tol;
}

bool ValuationProfile::hungry() const {
    for (const auto& d : players)
        for (double v : d.values)
            if (v < delta_hungry) return false;
    return !players.empty();
}

std::vector<std::vector<double>> ValuationProfile::values_at(const Cut& cut) const {
    auto tiles = tiles_from_cut(cut);
    std::vector<std::vector<double>> out(players.size());
    for (std::size_t j = 0; j < players.size(); ++j) {
        out[j].reserve(tiles.size());
        for (const Tile& t : tiles) out[j].push_back(value(players[j], t));
    }
    return out;
}

ValuationProfile make_profile(std::vector<PiecewiseDensity> players, Regime regime) {
    if (players.empty()) throw ValidationError("profile needs at least one player");
    for (auto& d : players) {
        validate_density(d);
        d.breakpoints.front() = 0.0;
        d.breakpoints.back() = 1.0;
        if (regime == Regime::Hungry) {
            for (double v : d.values)
                if (v < 0.0) throw ValidationError("hungry densities must be nonnegative");
            double t = d.total();
            if (t <= structural_tol) throw ValidationError("hungry density has no mass");
            // skip an already-normalized density so re-making is exact
            if (std::fabs(t - 1.0) > structural_tol)
                for (double& v : d.values) v /= t;
        } else {
            double t = d.abs_total();
            if (t <= structural_tol) throw ValidationError("signed density has no mass");
            if (std::fabs(t - 1.0) > structural_tol)
                for (double& v : d.values) v /= t;
        }
    }
    return ValuationProfile{std::move(players), regime};
}

namespace {

struct PairShape {
    std::vector<int> nondeg1, nondeg2, deg1, deg2;  // 0-based tile indices
};

PairShape analyze_pair(const Cut& a, const Cut& b) {
    if (a.points.size() != b.points.size())
        throw ValidationError("paired cuts must have the same number of points");
    auto ta = tiles_from_cut(a), tb = tiles_from_cut(b);
    PairShape shape;
    for (std::size_t i = 0; i < ta.size(); ++i)
        (ta[i].degenerate() ? shape.deg1 : shape.nondeg1).push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < tb.size(); ++i)
        (tb[i].degenerate() ? shape.deg2 : shape.nondeg2).push_back(static_cast<int>(i));
    if (shape.nondeg1.size() != shape.nondeg2.size())
        throw ValidationError("paired cuts carve different non-degenerate tiles");
    for (std::size_t k = 0; k < shape.nondeg1.size(); ++k) {
        const Tile& x = ta[shape.nondeg1[k]];
        const Tile& y = tb[shape.nondeg2[k]];
        if (std::fabs(x.lo - y.lo) > structural_tol || std::fabs(x.hi - y.hi) > structural_tol)
            throw ValidationError("paired cuts carve different non-degenerate tiles");
    }
    return shape;
}

}  // namespace

bool check_ppe_oracle(const PreferenceOracle& prefer,
                      const std::vector<std::pair<Cut, Cut>>& sample_pairs) {
    for (const auto& [a, b] : sample_pairs) {
        PairShape shape = analyze_pair(a, b);
        for (std::size_t k = 0; k < shape.nondeg1.size(); ++k)
            if (prefer(a, shape.nondeg1[k] + 1) != prefer(b, shape.nondeg2[k] + 1)) return false;
        bool deg_a = std::any_of(shape.deg1.begin(), shape.deg1.end(),
                                 [&](int i) { return prefer(a, i + 1); });
        bool deg_b = std::any_of(shape.deg2.begin(), shape.deg2.end(),
                                 [&](int i) { return prefer(b, i + 1); });
        if (deg_a != deg_b) return false;
    }
    return true;
}

bool check_ppe(const ValuationProfile& profile,
               const std::vector<std::pair<Cut, Cut>>& sample_pairs, double tol) {
    for (const auto& d : profile.players) {
        PreferenceOracle oracle = [&](const Cut& cut, int tile_index) {
            return prefers(d, cut, tile_index, tol);
        };
        if (!check_ppe_oracle(oracle, sample_pairs)) return false;
    }
    return true;
}

ValuationProfile random_profile(std::uint64_t seed, int player_count, Regime regime, int pieces) {
    if (player_count < 1) throw ValidationError("need at least one player");
    if (pieces < 1 || pieces > 8) throw ValidationError("generator supports 1..8 pieces");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> interior(0.0, 1.0);
    std::uniform_real_distribution<double> val(0.1, 2.0);

    std::vector<PiecewiseDensity> players;
    for (int j = 0; j < player_count; ++j) {
        PiecewiseDensity d;
        while (true) {
            std::vector<double> bps = {0.0};
            for (int k = 0; k + 1 < pieces; ++k) bps.push_back(interior(rng));
            bps.push_back(1.0);
            std::sort(bps.begin(), bps.end());
            bool ok = true;
            for (std::size_t k = 1; k < bps.size(); ++k)
                if (bps[k] - bps[k - 1] < 1e-3) ok = false;
            if (ok) {
                d.breakpoints = bps;
                break;
            }
        }
        for (int k = 0; k < pieces; ++k) d.values.push_back(val(rng));
        if (regime == Regime::Signed) {
            for (int k = 0; k < pieces; ++k)
                if (rng() & 1ull) d.values[k] = -d.values[k];
        }
        players.push_back(std::move(d));
    }
    return make_profile(std::move(players), regime);
}

}  // namespace dragonshare
