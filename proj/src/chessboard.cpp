#include "dragonshare/chessboard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dragonshare {

void validate_permutation(const Permutation& perm, int r) {
    if (static_cast<int>(perm.sigma.size()) != r)
        throw ValidationError("permutation has wrong size");
    std::vector<char> seen(r + 1, 0);
    for (int v : perm.sigma) {
        if (v < 1 || v > r || seen[v]) throw ValidationError("not a bijection on boxes");
        seen[v] = 1;
    }
}

void validate_partition_allocation(const PartitionAllocation& pa) {
    validate_cut(pa.cut);
    if (pa.cut.points.size() % 2 != 0 || pa.cut.points.empty())
        throw ValidationError("long cut needs 2r-2 points with r >= 2");
    const int r = pa.box_count();
    if (static_cast<int>(pa.alloc.box_of.size()) != 2 * r - 1)
        throw ValidationError("allocation arity does not match the cut");
    for (int b : pa.alloc.box_of)
        if (b < 1 || b > r) throw ValidationError("allocation targets a box out of range");
}

void validate_chessboard_point(const ChessboardPoint& cp) {
    if (cp.rooks.empty()) throw ValidationError("chessboard point needs at least one rook");
    std::set<int> boxes, tiles;
    double sum = 0.0;
    int prev_tile = 0;
    for (const Rook& rk : cp.rooks) {
        if (rk.box < 1 || rk.tile < 1) throw ValidationError("rook off the board");
        if (!boxes.insert(rk.box).second || !tiles.insert(rk.tile).second)
            throw ValidationError("rooks attack each other");
        if (rk.tile <= prev_tile) throw ValidationError("rooks must be sorted by tile");
        prev_tile = rk.tile;
        if (!(rk.weight > 0.0)) throw ValidationError("rook weights must be positive");
        sum += rk.weight;
    }
    if (std::fabs(sum - 1.0) > structural_tol)
        throw ValidationError("rook weights must sum to 1");
}

bool is_admissible(const PartitionAllocation& pa) {
    validate_partition_allocation(pa);
    const auto tiles = tiles_from_cut(pa.cut);
    std::vector<char> taken(pa.box_count() + 1, 0);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        if (tiles[t].degenerate()) continue;
        int b = pa.alloc.box_of[t];
        if (taken[b]) return false;
        taken[b] = 1;
    }
    return true;
}

namespace {

void require_admissible(const PartitionAllocation& pa) {
    if (!is_admissible(pa)) throw ValidationError("partition/allocation is not admissible");
}

}  // namespace

bool equivalent(const PartitionAllocation& a, const PartitionAllocation& b) {
    require_admissible(a);
    require_admissible(b);
    if (a.cut.points.size() != b.cut.points.size())
        throw ValidationError("equivalence needs a common cut");
    for (std::size_t i = 0; i < a.cut.points.size(); ++i)
        if (std::fabs(a.cut.points[i] - b.cut.points[i]) > structural_tol)
            throw ValidationError("equivalence needs a common cut");
    const auto ta = tiles_from_cut(a.cut);
    const auto tb = tiles_from_cut(b.cut);
    for (std::size_t t = 0; t < ta.size(); ++t) {
        if (ta[t].degenerate() && tb[t].degenerate()) continue;
        if (a.alloc.box_of[t] != b.alloc.box_of[t]) return false;
    }
    return true;
}

ChessboardPoint to_chessboard_point(const PartitionAllocation& pa) {
    require_admissible(pa);
    const auto tiles = tiles_from_cut(pa.cut);
    ChessboardPoint cp;
    for (std::size_t t = 0; t < tiles.size(); ++t)
        if (!tiles[t].degenerate())
            cp.rooks.push_back({pa.alloc.box_of[t], static_cast<int>(t) + 1,
                                tiles[t].length()});
    return cp;
}

PartitionAllocation from_chessboard_point(const ChessboardPoint& cp, int r) {
    validate_chessboard_point(cp);
    int rmin = static_cast<int>(cp.rooks.size());
    for (const Rook& rk : cp.rooks)
        rmin = std::max({rmin, rk.box, (rk.tile + 2) / 2});
    if (r == 0) r = rmin;
    if (r < rmin) throw ValidationError("rooks do not fit on an r x (2r-1) board");

    std::vector<double> lengths(2 * r - 1, 0.0);
    std::vector<int> box_of(2 * r - 1, 0);
    std::vector<char> used(r + 1, 0);
    for (const Rook& rk : cp.rooks) {
        lengths[rk.tile - 1] = rk.weight;
        box_of[rk.tile - 1] = rk.box;
        used[rk.box] = 1;
    }
    std::vector<int> empty_boxes;
    for (int b = 1; b <= r; ++b)
        if (!used[b]) empty_boxes.push_back(b);
    std::size_t next_empty = 0;
    for (int t = 0; t < 2 * r - 1; ++t) {
        if (box_of[t] != 0) continue;
        box_of[t] = next_empty < empty_boxes.size() ? empty_boxes[next_empty++] : 1;
    }

    PartitionAllocation pa;
    pa.cut = cut_from_lengths(SimplexPoint{lengths});
    pa.alloc.box_of = std::move(box_of);
    return pa;
}

PartitionAllocation canonical_representative(const PartitionAllocation& pa) {
    return from_chessboard_point(to_chessboard_point(pa), pa.box_count());
}

PartitionAllocation act(const Permutation& perm, const PartitionAllocation& pa) {
    validate_partition_allocation(pa);
    validate_permutation(perm, pa.box_count());
    PartitionAllocation out = pa;
    for (int& b : out.alloc.box_of) b = perm.sigma[b - 1];
    return out;
}

std::vector<FacePlacement> enumerate_maximal_faces(int r) {
    if (r < 1) throw ValidationError("need at least one box");
    if (r > 6) throw CapacityError("maximal-face enumeration is guarded to r <= 6");
    const int cols = 2 * r - 1;
    std::vector<FacePlacement> out;
    std::vector<int> tiles(r);
    // choose r tiles in lexicographic order
    for (int i = 0; i < r; ++i) tiles[i] = i + 1;
    while (true) {
        std::vector<int> boxes(r);
        for (int i = 0; i < r; ++i) boxes[i] = i + 1;
        do {
            FacePlacement face;
            face.rooks.reserve(r);
            for (int i = 0; i < r; ++i) face.rooks.emplace_back(boxes[i], tiles[i]);
            out.push_back(std::move(face));
        } while (std::next_permutation(boxes.begin(), boxes.end()));
        // advance the combination
        int i = r - 1;
        while (i >= 0 && tiles[i] == cols - (r - 1 - i)) --i;
        if (i < 0) break;
        ++tiles[i];
        for (int j = i + 1; j < r; ++j) tiles[j] = tiles[j - 1] + 1;
    }
    return out;
}

std::vector<FacePlacement> enumerate_face_representatives(int r) {
    if (r < 1) throw ValidationError("need at least one box");
    if (r > 6) throw CapacityError("maximal-face enumeration is guarded to r <= 6");
    const int cols = 2 * r - 1;
    std::vector<FacePlacement> out;
    std::vector<int> tiles(r);
    for (int i = 0; i < r; ++i) tiles[i] = i + 1;
    while (true) {
        FacePlacement face;
        face.rooks.reserve(r);
        for (int i = 0; i < r; ++i) face.rooks.emplace_back(i + 1, tiles[i]);
        out.push_back(std::move(face));
        int i = r - 1;
        while (i >= 0 && tiles[i] == cols - (r - 1 - i)) --i;
        if (i < 0) break;
        ++tiles[i];
        for (int j = i + 1; j < r; ++j) tiles[j] = tiles[j - 1] + 1;
    }
    return out;
}

PartitionAllocation pa_from_face(const FacePlacement& face, std::span<const double> weights) {
    const int r = static_cast<int>(face.rooks.size());
    if (r < 1) throw ValidationError("empty face");
    if (static_cast<int>(weights.size()) != r)
        throw ValidationError("face point needs one weight per rook");
    std::vector<double> lengths(2 * r - 1, 0.0);
    std::vector<int> box_of(2 * r - 1, 1);
    for (int k = 0; k < r; ++k) {
        const auto& [box, tile] = face.rooks[k];
        if (box < 1 || box > r || tile < 1 || tile > 2 * r - 1)
            throw ValidationError("rook off the board");
        if (weights[k] < 0.0) throw ValidationError("negative face weight");
        lengths[tile - 1] = weights[k];
        box_of[tile - 1] = box;
    }
    PartitionAllocation pa;
    pa.cut = cut_from_lengths(SimplexPoint{lengths});
    pa.alloc.box_of = std::move(box_of);
    return pa;
}

CollapseResult collapse(const PartitionAllocation& pa) { return collapse_variant(pa, 0); }

CollapseResult collapse_variant(const PartitionAllocation& pa, int variant) {
    require_admissible(pa);
    const int r = pa.box_count();
    const auto tiles = tiles_from_cut(pa.cut);
    std::vector<int> nondeg;
    for (std::size_t t = 0; t < tiles.size(); ++t)
        if (!tiles[t].degenerate()) nondeg.push_back(static_cast<int>(t));
    const int m = static_cast<int>(nondeg.size());

    // interior separators between consecutive non-degenerate tiles
    std::vector<double> seps;
    for (int k = 0; k + 1 < m; ++k) seps.push_back(tiles[nondeg[k]].hi);

    double pad;
    if (variant == 0) {
        pad = seps.empty() ? 1.0 : seps.back();
    } else {
        // boundary values 0, s_1, ..., s_{m-1}, 1
        std::vector<double> bounds;
        bounds.push_back(0.0);
        bounds.insert(bounds.end(), seps.begin(), seps.end());
        bounds.push_back(1.0);
        pad = bounds[(variant - 1) % bounds.size()];
    }

    CollapseResult res;
    res.cut.points = seps;
    for (int k = m; k < r; ++k) res.cut.points.push_back(pad);
    std::sort(res.cut.points.begin(), res.cut.points.end());

    const auto short_tiles = tiles_from_cut(res.cut);
    int k = 0;
    for (std::size_t i = 0; i < short_tiles.size(); ++i)
        if (!short_tiles[i].degenerate())
            res.tile_origin[static_cast<int>(i) + 1] = pa.alloc.box_of[nondeg[k++]];
    return res;
}

std::vector<double> LiftedPreferences::at(const PartitionAllocation& pa) const {
    if (pa.box_count() != r) throw ValidationError("partition/allocation has wrong arity");
    const int n = profile.player_count();
    const CollapseResult col = collapse_variant(pa, variant);
    const auto short_tiles = tiles_from_cut(col.cut);
    const int count_deg = r - static_cast<int>(col.tile_origin.size());

    std::vector<char> box_used(r + 1, 0);
    for (const auto& [t, b] : col.tile_origin) box_used[b] = 1;

    std::vector<double> f(static_cast<std::size_t>(r) * n, 0.0);
    std::vector<std::pair<int, double>> vals;  // (box, tile value), in tile order
    for (int j = 0; j < n; ++j) {
        const PiecewiseDensity& dens = profile.players[j];
        vals.clear();
        double vmax = count_deg > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
        for (const auto& [t, b] : col.tile_origin) {
            double v = value(dens, short_tiles[t - 1]);
            vals.emplace_back(b, v);
            vmax = std::max(vmax, v);
        }
        // degenerate tiles all carry value 0, so they share one weight; the
        // normalizer sums non-degenerate weights in tile order and counts the
        // degenerate ones, which keeps the result independent of where the
        // collapse parked them.
        double wdeg = std::max(0.0, fuzz - vmax);
        double z = 0.0;
        for (auto& [b, v] : vals) {
            v = std::max(0.0, fuzz + v - vmax);
            z += v;
        }
        z += count_deg * wdeg;
        for (const auto& [b, w] : vals) f[static_cast<std::size_t>(b - 1) * n + j] = w / z;
        if (count_deg > 0) {
            const double share = wdeg / z;
            for (int b = 1; b <= r; ++b)
                if (!box_used[b]) f[static_cast<std::size_t>(b - 1) * n + j] = share;
        }
    }
    return f;
}

FunctionalPreferenceMatrix LiftedPreferences::on_face(const FacePlacement& face) const {
    if (static_cast<int>(face.rooks.size()) != r)
        throw ValidationError("face has wrong arity");
    FunctionalPreferenceMatrix fp;
    fp.players = profile.player_count();
    fp.pieces = r;
    fp.fuzz = fuzz;
    fp.evaluator = [lift = *this, face](std::span<const double> weights,
                                        std::vector<double>& f) {
        f = lift.at(pa_from_face(face, weights));
    };
    return fp;
}

LiftedPreferences lift_preferences(const ValuationProfile& profile, int r, double fuzz,
                                   int variant) {
    if (r < 2) throw ValidationError("need at least two boxes");
    if (fuzz <= 0.0) throw ValidationError("fuzz must be positive");
    if (profile.player_count() < 1) throw ValidationError("need at least one player");
    return LiftedPreferences{profile, r, fuzz, variant};
}

}  // namespace dragonshare
