#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dragonshare/core.hpp"
#include "dragonshare/kkm.hpp"
#include "dragonshare/valuations.hpp"

namespace dragonshare {

// Assigns each tile of a long cut (2r-1 tiles) to one of r boxes (1-based).
struct AllocationFunction {
    std::vector<int> box_of;  // indexed by tile, 0-based; values in [1, r]
};

// A long cut with 2r-2 points together with an allocation of its 2r-1 tiles
// to r boxes. Admissible when no box holds two non-degenerate tiles, which
// forces at least r-1 tiles to be degenerate.
struct PartitionAllocation {
    Cut cut;
    AllocationFunction alloc;

    int box_count() const { return static_cast<int>(cut.points.size()) / 2 + 1; }
};

struct Rook {
    int box = 0;   // row, 1-based
    int tile = 0;  // column, 1-based
    double weight = 0.0;
};

// Equivalence class of admissible partition/allocations: one rook per
// non-degenerate tile. Rooks are non-attacking (distinct boxes and tiles)
// and their weights are positive and sum to 1.
struct ChessboardPoint {
    std::vector<Rook> rooks;  // sorted by tile
};

struct Permutation {
    std::vector<int> sigma;  // sigma[b-1] = image of box b, 1-based
};

void validate_permutation(const Permutation& perm, int r);
// Shape checks only (sizes, ranges, sortedness); admissibility is separate.
void validate_partition_allocation(const PartitionAllocation& pa);
void validate_chessboard_point(const ChessboardPoint& cp);

// True iff no box receives two non-degenerate tiles.
bool is_admissible(const PartitionAllocation& pa);

// True iff the two (admissible, same-cut) inputs differ only in where
// degenerate tiles are parked.
bool equivalent(const PartitionAllocation& a, const PartitionAllocation& b);

ChessboardPoint to_chessboard_point(const PartitionAllocation& pa);
// r = 0 infers the smallest board consistent with the rooks. Degenerate
// tiles are placed canonically: empty boxes in increasing order are filled
// left-to-right over degenerate tile indices; leftovers go to box 1.
PartitionAllocation from_chessboard_point(const ChessboardPoint& cp, int r = 0);
PartitionAllocation canonical_representative(const PartitionAllocation& pa);

// Renumbers boxes: (x, alpha) -> (x, sigma o alpha).
PartitionAllocation act(const Permutation& perm, const PartitionAllocation& pa);

// A maximal face: r non-attacking rooks, i.e. a choice of r tiles out of
// 2r-1 plus a bijection onto the boxes. Stored sorted by tile.
struct FacePlacement {
    std::vector<std::pair<int, int>> rooks;  // (box, tile), 1-based
};

// All C(2r-1, r) * r! maximal faces; tile subsets in lexicographic order,
// box sequences in lexicographic order within a subset. Guarded to r <= 6.
std::vector<FacePlacement> enumerate_maximal_faces(int r);
// One face per box-renumbering orbit: boxes 1..r in tile order.
std::vector<FacePlacement> enumerate_face_representatives(int r);

// Point of a (closed) maximal face: weights[k] is the length of the k-th
// rook's tile, in tile order. Non-rook tiles are degenerate; they are parked
// in box 1, which keeps the result admissible.
PartitionAllocation pa_from_face(const FacePlacement& face, std::span<const double> weights);

struct CollapseResult {
    Cut cut;                         // r-1 points
    std::map<int, int> tile_origin;  // non-degenerate short-cut tile (1-based) -> box
};

// Drops the superfluous cut points: the short cut keeps the non-degenerate
// tiles with their lengths and order. When fewer than r tiles are
// non-degenerate the short cut is padded by repeating the last cut point
// (1.0 if there is none), so the spare degenerate tiles sit at the right end
// of the point list.
CollapseResult collapse(const PartitionAllocation& pa);
// Same tile content, but the padding duplicates the `variant`-selected
// boundary value instead. Variant 0 is the canonical placement. Lifted
// preferences are invariant under this choice, bit for bit.
CollapseResult collapse_variant(const PartitionAllocation& pa, int variant);

// Classical preferences transferred to boxes: collapse, give each box the
// fuzzy weight of the non-degenerate tile it holds, and split the weight of
// degenerate tiles evenly over the empty boxes. Weights depend only on box
// contents, so renumbering boxes permutes them exactly.
struct LiftedPreferences {
    ValuationProfile profile;
    int r = 0;
    double fuzz = 0.0;
    int variant = 0;  // collapse placement; provably output-neutral

    // boxes x players, row-major
    std::vector<double> at(const PartitionAllocation& pa) const;
    FunctionalPreferenceMatrix on_face(const FacePlacement& face) const;
};

LiftedPreferences lift_preferences(const ValuationProfile& profile, int r, double fuzz,
                                   int variant = 0);

}  // namespace dragonshare
