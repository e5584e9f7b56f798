#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dragonshare/chessboard.hpp"
#include "dragonshare/core.hpp"
#include "dragonshare/kkm.hpp"
#include "dragonshare/valuations.hpp"

namespace dragonshare {

// Envy gate applied to every dragon outcome before a result is returned.
inline constexpr double envy_gate = 1e-6;
// The fuzz continuation tightens the preference margin down to this floor, so
// certified envy margins are bounded below by -continuation_floor.
inline constexpr double continuation_floor = 1e-7;

enum class ScenarioKind { PieceGrab, PlayerSwallow, Kkm };

struct OutcomeReport {
    Assignment assignment;            // assignment.dragon echoes the choice
    std::map<int, double> margins;    // surviving player -> envy margin
};

struct ScenarioResult {
    ScenarioKind scenario = ScenarioKind::PieceGrab;
    PartitionAllocation point;        // unused for Kkm
    LabeledTree tree;
    double residual = 0.0;
    std::vector<OutcomeReport> outcomes;
    Cut classical_cut;                // collapse(point), or the cut itself for Kkm
    std::map<int, int> box_to_classical_tile;  // empty boxes map to padded degenerate tiles
    SolveParams params;               // resolved parameters, echoed for reproducibility
    double final_fuzz = 0.0;          // fuzz at which the sign matrix was taken
    std::string status = "ok";
    std::vector<std::string> warnings;  // e.g. non-prime-power box count
};

// Search gave up with residual above tol; carries the best partial result
// (status "inconclusive", no tree/outcomes).
class ScenarioInconclusive : public std::runtime_error {
public:
    ScenarioInconclusive(const std::string& msg, ScenarioResult partial_)
        : std::runtime_error(msg), partial(std::move(partial_)) {}
    ScenarioResult partial;
};

// An outcome failed the envy gate. The construction guarantees margins down
// to -final_fuzz, so this signals a genuine defect, not noise.
class EnvyFailure : public std::runtime_error {
public:
    EnvyFailure(const std::string& msg, int player_, int dragon_, double margin_)
        : std::runtime_error(msg), player(player_), dragon(dragon_), margin(margin_) {}
    int player = 0;
    int dragon = 0;
    double margin = 0.0;
};

struct EnvyReport {
    bool pass = false;
    double min_margin = 0.0;
    int worst_player = 0;
    std::map<int, double> margins;
};

// Dragon grabs a box: root the tree there; each player takes the endpoint of
// their edge farther from the root.
Assignment resolve_piece_grab(const LabeledTree& tree, int dragon_box);
// Dragon swallows a player: root the tree there; each survivor takes the box
// labeling their parent edge.
Assignment resolve_player_swallow(const LabeledTree& tree, int swallowed);

// Exact-arithmetic envy check, independent of the solver's fuzzy weights.
// margin_j = v_j(own box) - max value of any other box; empty boxes are
// worth exactly 0. Passes iff min margin >= -tol.
EnvyReport verify_envy_free(const ValuationProfile& profile, const PartitionAllocation& point,
                            const Assignment& assignment, double tol);
// Classical variant: boxes are the tiles of the cut.
EnvyReport verify_envy_free(const ValuationProfile& profile, const Cut& cut,
                            const Assignment& assignment, double tol);

// Scenario 1: r boxes, r-1 players; the dragon grabs a box.
ScenarioResult solve_scenario_piece(const ValuationProfile& profile, int r,
                                    const SolveParams& params, int collapse_variant = 0);
// Same, with the classical transfer checked: both endpoint tiles of each
// player's edge carry maximal value within the certified fuzz.
ScenarioResult solve_scenario_piece_classical(const ValuationProfile& profile, int r,
                                              const SolveParams& params,
                                              int collapse_variant = 0);

// Scenario 2: r boxes, r+1 players; the dragon swallows a player. The tree
// lives on players with box-labeled edges.
ScenarioResult solve_scenario_player(const ValuationProfile& profile, int r,
                                     const SolveParams& params, int collapse_variant = 0);
ScenarioResult solve_scenario_player_classical(const ValuationProfile& profile, int r,
                                               const SolveParams& params,
                                               int collapse_variant = 0);

// Classical n players / n+1 pieces packaged with all n+1 grab outcomes.
// Margins are reported but not gated: the fixed-fuzz pipeline only certifies
// them down to -eps_fuzz.
ScenarioResult solve_kkm_result(const ValuationProfile& profile, const SolveParams& params);

struct DivisionReport {
    std::vector<std::pair<int, Tile>> intervals;  // (box, non-degenerate interval)
};

// Scenario-1 division summary: the at-most-r non-degenerate intervals with
// their boxes; re-asserts outcome coverage, bijectivity, and stored margins.
DivisionReport extract_division(const ScenarioResult& result);

}  // namespace dragonshare
