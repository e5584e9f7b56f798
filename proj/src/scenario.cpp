#include "dragonshare/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "dragonshare/marriage.hpp"

namespace dragonshare {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_prime_power(int r) {
    if (r < 2) return false;
    for (int p = 2; p * p <= r; ++p)
        if (r % p == 0) {
            while (r % p == 0) r /= p;
            return r == 1;
        }
    return true;
}

// Work items are independent and land in preassigned slots, so the thread
// count never influences the result.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Fuzz continuation: the first stage is wide enough (half the typical box
// weight) that the preference field has usable gradients everywhere, then
// each stage divides the width by ten down to the floor, warm-starting.
std::vector<double> stage_schedule(double eps_fuzz) {
    // Start wide enough that every box keeps weight >= 0.5 even for signed
    // values (box values lie in [-1, 1], so spreads reach 2): the field then
    // has a live gradient everywhere a cold search can land. Halving keeps
    // each stage's balanced point inside the next stage's tie band, so a
    // warm pattern search can track it; wider ratios strand the start on the
    // flat part of the field where no probe direction improves.
    double fz = std::max(eps_fuzz, 2.5);
    std::vector<double> stages{fz};
    while (fz > continuation_floor) {
        fz = std::max(fz / 2.0, continuation_floor);
        stages.push_back(fz);
    }
    return stages;
}

EnvyReport margins_over_boxes(const std::vector<std::vector<double>>& box_value,
                              const Assignment& a, double tol, int player_count,
                              int box_count) {
    std::vector<char> taken(box_count + 1, 0);
    for (const auto& [player, box] : a.shares) {
        if (player < 1 || player > player_count)
            throw ValidationError("share recorded for an unknown player");
        if (box < 1 || box > box_count) throw ValidationError("share box out of range");
        if (taken[box]) throw ValidationError("two players share one box");
        taken[box] = 1;
    }
    EnvyReport rep;
    rep.min_margin = kInf;
    for (const auto& [player, box] : a.shares) {
        const auto& vals = box_value[player - 1];
        double other = -kInf;
        for (int b = 1; b <= box_count; ++b)
            if (b != box) other = std::max(other, vals[b - 1]);
        double margin = vals[box - 1] - other;
        rep.margins[player] = margin;
        if (margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.worst_player = player;
        }
    }
    if (a.shares.empty()) rep.min_margin = 0.0;
    rep.pass = rep.min_margin >= -tol;
    return rep;
}

}  // namespace

Assignment resolve_piece_grab(const LabeledTree& tree, int dragon_box) {
    Assignment a;
    a.dragon = dragon_box;
    for (const auto& [vertex, edge] : root_tree(tree, dragon_box))
        a.shares[edge.label] = vertex;
    return a;
}

Assignment resolve_player_swallow(const LabeledTree& tree, int swallowed) {
    Assignment a;
    a.dragon = swallowed;
    for (const auto& [vertex, edge] : root_tree(tree, swallowed))
        a.shares[vertex] = edge.label;
    return a;
}

EnvyReport verify_envy_free(const ValuationProfile& profile, const PartitionAllocation& point,
                            const Assignment& assignment, double tol) {
    if (!is_admissible(point)) throw ValidationError("point is not admissible");
    const int r = point.box_count();
    const int n = profile.player_count();
    const auto tiles = tiles_from_cut(point.cut);
    std::vector<std::vector<double>> box_value(n, std::vector<double>(r, 0.0));
    for (int j = 0; j < n; ++j)
        for (std::size_t t = 0; t < tiles.size(); ++t)
            box_value[j][point.alloc.box_of[t] - 1] += value(profile.players[j], tiles[t]);
    return margins_over_boxes(box_value, assignment, tol, n, r);
}

EnvyReport verify_envy_free(const ValuationProfile& profile, const Cut& cut,
                            const Assignment& assignment, double tol) {
    const auto tiles = tiles_from_cut(cut);
    const int p = static_cast<int>(tiles.size());
    const int n = profile.player_count();
    std::vector<std::vector<double>> box_value(n, std::vector<double>(p, 0.0));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < p; ++i) box_value[j][i] = value(profile.players[j], tiles[i]);
    return margins_over_boxes(box_value, assignment, tol, n, p);
}

namespace {

ScenarioResult solve_on_faces(const ValuationProfile& profile, int r,
                              const SolveParams& params, int variant, ScenarioKind kind) {
    const int nplayers = profile.player_count();
    const auto faces = enumerate_face_representatives(r);
    const int face_count = static_cast<int>(faces.size());
    const auto stages = stage_schedule(params.eps_fuzz);

    struct FaceState {
        std::vector<double> w;
        double res = kInf;
    };
    std::vector<FaceState> state(face_count);

    const double face_budget = std::max(5e4, params.budget / face_count);

    auto full_search = [&](double fz, const std::vector<int>& ids, int stage_index,
                           double budget) {
        const LiftedPreferences lift = lift_preferences(profile, r, fz, variant);
        parallel_for(static_cast<int>(ids.size()), params.threads, [&](int k) {
            const int id = ids[k];
            const FunctionalPreferenceMatrix fp = lift.on_face(faces[id]);
            const std::uint64_t seed = params.seed +
                                       1000003ull * static_cast<unsigned>(stage_index) +
                                       static_cast<unsigned>(id);
            try {
                BalancedPoint bp = find_balanced_point(fp, params.tol, budget, seed);
                state[id] = {std::move(bp.point.coords), bp.residual};
            } catch (const SearchFailure& sf) {
                // keep the search's own best: state must describe this fuzz,
                // or a stale earlier-stage root would masquerade as live
                state[id] = {sf.best.point.coords, sf.best.residual};
            }
        });
    };

    // A track that dies on the simplex boundary often continues as a branch
    // with the same positive lengths and the degenerate slot moved elsewhere.
    // Re-insert the collapsed coordinates at every alternative placement and
    // refine each candidate; keep the first that reaches a balanced point.
    auto pivot_rescue = [&](double fz, const std::vector<int>& ids) {
        const LiftedPreferences lift = lift_preferences(profile, r, fz, variant);
        parallel_for(static_cast<int>(ids.size()), params.threads, [&](int k) {
            const int id = ids[k];
            if (state[id].res <= params.tol) return;
            const std::vector<double> w = state[id].w;
            const int p = static_cast<int>(w.size());
            std::vector<double> pos;
            std::vector<int> mask(p, 0);  // 1: slot held a collapsed coordinate
            for (int i = 0; i < p; ++i) {
                if (w[i] > 1e-3) pos.push_back(w[i]);
                else mask[i] = 1;
            }
            const int z = p - static_cast<int>(pos.size());
            if (z == 0 || z == p) return;
            const FunctionalPreferenceMatrix fp = lift.on_face(faces[id]);
            const std::vector<int> original = mask;
            std::sort(mask.begin(), mask.end());
            do {
                if (mask == original) continue;  // that refine already failed
                std::vector<double> cand(p, 0.0);
                for (int i = 0, j = 0; i < p; ++i)
                    if (!mask[i]) cand[i] = pos[j++];
                BalancedPoint bp = refine_balanced_point(fp, cand, params.tol, 3e4);
                if (bp.residual <= params.tol) {
                    state[id] = {std::move(bp.point.coords), bp.residual};
                    return;
                }
            } while (std::next_permutation(mask.begin(), mask.end()));
        });
    };

    // Walk a face's tracked point from fuzz `from` down to `to`; when a step
    // overshoots the shrinking tie band, retry at the geometric midpoint.
    auto refine = [&](double from, double to, const std::vector<int>& ids) {
        parallel_for(static_cast<int>(ids.size()), params.threads, [&](int k) {
            const int id = ids[k];
            double cur = from;
            while (cur > to) {
                double next = to;
                while (true) {
                    const LiftedPreferences lift = lift_preferences(profile, r, next, variant);
                    const FunctionalPreferenceMatrix fp = lift.on_face(faces[id]);
                    BalancedPoint bp = refine_balanced_point(fp, state[id].w, params.tol, 3e4);
                    if (bp.residual <= params.tol) {
                        state[id] = {std::move(bp.point.coords), bp.residual};
                        break;
                    }
                    double mid = std::sqrt(cur * next);
                    if (!(mid < cur * 0.999)) {
                        state[id] = {std::move(bp.point.coords), bp.residual};
                        return;  // stuck even at a negligible step
                    }
                    next = mid;
                }
                cur = next;
            }
        });
    };

    auto ranked = [&](std::vector<int> ids) {
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            if (state[a].res != state[b].res) return state[a].res < state[b].res;
            return a < b;
        });
        return ids;
    };

    // Collapse a face's tracked point to its classical configuration. Faces
    // whose branches meet at the same configuration track identically from
    // there on, so a hedge built from them is no hedge at all; live selection
    // keys on the configuration to keep genuinely distinct branches.
    auto track_key = [&](int id) {
        const CollapseResult col = collapse(pa_from_face(faces[id], state[id].w));
        std::string key;
        for (double c : col.cut.points) key += std::to_string(std::llround(c * 1e5)) + ',';
        for (const auto& [tile, box] : col.tile_origin)
            key += std::to_string(tile) + ':' + std::to_string(box) + ';';
        return key;
    };

    constexpr std::size_t live_width = 6;
    auto pick_live = [&](const std::vector<int>& order) {
        std::vector<int> picked;
        std::set<std::string> seen;
        for (int id : order)  // distinct configurations first
            if (picked.size() < live_width && state[id].res <= params.tol &&
                seen.insert(track_key(id)).second)
                picked.push_back(id);
        for (int id : order) {  // then duplicates, for raw redundancy
            if (picked.size() >= live_width) break;
            if (state[id].res <= params.tol &&
                std::find(picked.begin(), picked.end(), id) == picked.end())
                picked.push_back(id);
        }
        return picked;
    };

    std::vector<int> all_ids(face_count);
    for (int i = 0; i < face_count; ++i) all_ids[i] = i;

    ScenarioResult result;
    result.scenario = kind;
    result.params = params;
    if (!is_prime_power(r))
        result.warnings.push_back("box count " + std::to_string(r) +
                                  " is not a prime power; a balanced point may not exist");

    auto inconclusive = [&](double fz) {
        const int best = ranked(all_ids).front();
        result.status = "inconclusive";
        result.final_fuzz = fz;
        result.residual = state[best].res;
        result.point = pa_from_face(faces[best], state[best].w);
        result.classical_cut = collapse_variant(result.point, variant).cut;
        return ScenarioInconclusive("no balanced point within budget (best residual " +
                                        std::to_string(state[best].res) + ")",
                                    result);
    };

    full_search(stages[0], all_ids, 0, face_budget);
    std::vector<int> order = ranked(all_ids);
    if (state[order.front()].res > params.tol) throw inconclusive(stages[0]);
    std::vector<int> live = pick_live(order);

    for (std::size_t si = 1; si < stages.size(); ++si) {
        const double fz = stages[si];
        const int sidx = static_cast<int>(si);
        refine(stages[si - 1], fz, live);
        std::vector<int> alive;
        for (int id : live)
            if (state[id].res <= params.tol) alive.push_back(id);
        if (alive.empty()) {  // every tracked branch folded: pivot, then go cold
            pivot_rescue(fz, live);
            alive = pick_live(ranked(live));
        }
        if (alive.empty()) {
            full_search(fz, live, sidx, face_budget);
            alive = pick_live(ranked(live));
        }
        if (alive.empty()) {
            full_search(fz, all_ids, sidx, face_budget);
            alive = pick_live(ranked(all_ids));
        }
        if (alive.empty()) {
            // Last resort: a handful of faces get a budget deep enough for
            // fine-grid scans; needle basins a couple orders narrower than
            // the coarse grid are invisible below roughly a million probes.
            order = ranked(all_ids);
            order.resize(std::min<std::size_t>(4, order.size()));
            full_search(fz, order, sidx, std::max(face_budget, 2e6));
            alive = pick_live(ranked(order));
        }
        if (alive.empty()) throw inconclusive(fz);
        live = std::move(alive);
    }

    // Only faces searched at the final fuzz compete for the answer.
    int win = live.front();
    for (int id : live)
        if (state[id].res < state[win].res ||
            (state[id].res == state[win].res && id < win))
            win = id;

    const double fz_final = stages.back();
    const LiftedPreferences lift = lift_preferences(profile, r, fz_final, variant);
    const FacePlacement& face = faces[win];
    const FunctionalPreferenceMatrix fp = lift.on_face(face);
    const std::vector<double>& w = state[win].w;

    result.residual = state[win].res;
    result.final_fuzz = fz_final;
    result.point = pa_from_face(face, w);

    const SignMatrix sm = sign_matrix(fp, w, params.eps_sign);
    SetFamily family;
    if (kind == ScenarioKind::PieceGrab) {
        OmegaCheck oc = check_omega_condition(sm);
        if (!oc.ok)
            throw ConditionViolation("sign matrix fails the covering condition", oc.witness);
        family.n = r;
        family.sets.resize(nplayers);
        for (int j = 0; j < nplayers; ++j)
            for (int i = 0; i < r; ++i)
                if (sm.omega[i][j]) family.sets[j].push_back(i + 1);
        result.tree = to_labeled_tree(spanning_tree_representatives(family), r);
    } else {
        // Players become the ground set and boxes the set labels.
        SignMatrix smt;
        smt.threshold = sm.threshold;
        smt.omega.assign(nplayers, std::vector<std::uint8_t>(r, 0));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < nplayers; ++j) smt.omega[j][i] = sm.omega[i][j];
        OmegaCheck oc = check_omega_condition(smt);
        if (!oc.ok)
            throw ConditionViolation("sign matrix fails the covering condition", oc.witness);
        family.n = nplayers;
        family.sets.resize(r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < nplayers; ++j)
                if (sm.omega[i][j]) family.sets[i].push_back(j + 1);
        result.tree = to_labeled_tree(spanning_tree_representatives(family), nplayers);
    }

    // Every edge endpoint must sit in the support that produced it.
    {
        const std::vector<double> f = fp.eval(w);
        for (const TreeEdge& e : result.tree.edges)
            for (int v : {e.u, e.w}) {
                const int piece = (kind == ScenarioKind::PieceGrab) ? v : e.label;
                const int player = (kind == ScenarioKind::PieceGrab) ? e.label : v;
                if (!(f[static_cast<std::size_t>(piece - 1) * nplayers + player - 1] >
                      params.eps_sign))
                    throw ConditionViolation("tree endpoint lost its support", {e.label});
            }
    }

    const CollapseResult col = collapse_variant(result.point, variant);
    result.classical_cut = col.cut;
    {
        std::vector<char> used_box(r + 1, 0), used_tile(r + 1, 0);
        for (const auto& [t, b] : col.tile_origin) {
            result.box_to_classical_tile[b] = t;
            used_box[b] = 1;
            used_tile[t] = 1;
        }
        std::vector<int> free_tiles;
        for (int t = 1; t <= r; ++t)
            if (!used_tile[t]) free_tiles.push_back(t);
        std::size_t k = 0;
        for (int b = 1; b <= r; ++b)
            if (!used_box[b]) result.box_to_classical_tile[b] = free_tiles[k++];
    }

    const int dragon_count = (kind == ScenarioKind::PieceGrab) ? r : nplayers;
    for (int d = 1; d <= dragon_count; ++d) {
        OutcomeReport rep;
        rep.assignment = (kind == ScenarioKind::PieceGrab)
                             ? resolve_piece_grab(result.tree, d)
                             : resolve_player_swallow(result.tree, d);
        EnvyReport er = verify_envy_free(profile, result.point, rep.assignment, envy_gate);
        if (!er.pass)
            throw EnvyFailure("dragon outcome violates the envy gate", er.worst_player, d,
                              er.min_margin);
        rep.margins = std::move(er.margins);
        result.outcomes.push_back(std::move(rep));
    }
    return result;
}

// Both endpoint tiles of every edge must carry maximal classical value for
// the players the edge certifies, up to the envy gate.
void check_classical_endpoints(const ScenarioResult& res, const ValuationProfile& profile) {
    const auto tiles = tiles_from_cut(res.classical_cut);
    const int n = profile.player_count();
    std::vector<std::vector<double>> tile_value(n, std::vector<double>(tiles.size()));
    std::vector<double> best(n, -kInf);
    for (int j = 0; j < n; ++j)
        for (std::size_t i = 0; i < tiles.size(); ++i) {
            tile_value[j][i] = value(profile.players[j], tiles[i]);
            best[j] = std::max(best[j], tile_value[j][i]);
        }
    auto optimal = [&](int player, int box) {
        const int t = res.box_to_classical_tile.at(box);
        return tile_value[player - 1][t - 1] >= best[player - 1] - envy_gate;
    };
    for (const TreeEdge& e : res.tree.edges) {
        if (res.scenario == ScenarioKind::PieceGrab) {
            if (!optimal(e.label, e.u) || !optimal(e.label, e.w))
                throw ConditionViolation("classical endpoint tile is not value-maximal",
                                         {e.label});
        } else {
            if (!optimal(e.u, e.label) || !optimal(e.w, e.label))
                throw ConditionViolation("classical endpoint tile is not value-maximal",
                                         {e.label});
        }
    }
}

}  // namespace

ScenarioResult solve_scenario_piece(const ValuationProfile& profile, int r,
                                    const SolveParams& params, int collapse_variant) {
    if (r < 2) throw ValidationError("need at least two boxes");
    if (profile.player_count() != r - 1)
        throw ValidationError("piece-grab scenario needs r-1 players");
    return solve_on_faces(profile, r, params, collapse_variant, ScenarioKind::PieceGrab);
}

ScenarioResult solve_scenario_piece_classical(const ValuationProfile& profile, int r,
                                              const SolveParams& params,
                                              int collapse_variant) {
    ScenarioResult res = solve_scenario_piece(profile, r, params, collapse_variant);
    check_classical_endpoints(res, profile);
    return res;
}

ScenarioResult solve_scenario_player(const ValuationProfile& profile, int r,
                                     const SolveParams& params, int collapse_variant) {
    if (r < 2) throw ValidationError("need at least two boxes");
    if (profile.player_count() != r + 1)
        throw ValidationError("player-swallow scenario needs r+1 players");
    return solve_on_faces(profile, r, params, collapse_variant, ScenarioKind::PlayerSwallow);
}

ScenarioResult solve_scenario_player_classical(const ValuationProfile& profile, int r,
                                               const SolveParams& params,
                                               int collapse_variant) {
    ScenarioResult res = solve_scenario_player(profile, r, params, collapse_variant);
    check_classical_endpoints(res, profile);
    return res;
}

ScenarioResult solve_kkm_result(const ValuationProfile& profile, const SolveParams& params) {
    const int pieces = profile.player_count() + 1;
    ScenarioResult res;
    res.scenario = ScenarioKind::Kkm;
    res.params = params;
    res.final_fuzz = std::min(params.eps_fuzz, 1.0 / (2.0 * pieces));
    KkmSolution sol;
    try {
        sol = solve_dragon_kkm(profile, params);
    } catch (const SearchFailure& sf) {
        res.status = "inconclusive";
        res.residual = sf.best.residual;
        res.classical_cut = cut_from_lengths(sf.best.point);
        throw ScenarioInconclusive(sf.what(), res);
    }
    res.tree = sol.tree;
    res.residual = sol.balanced.residual;
    res.classical_cut = sol.cut;
    for (int i = 1; i <= pieces; ++i) res.box_to_classical_tile[i] = i;
    // The fixed-fuzz pipeline certifies margins down to -fuzz only.
    const double certified = res.final_fuzz * (1.0 + 1e-6) + 1e-12;
    for (int d = 1; d <= pieces; ++d) {
        OutcomeReport rep;
        rep.assignment = resolve_piece_grab(sol.tree, d);
        EnvyReport er = verify_envy_free(profile, sol.cut, rep.assignment, certified);
        if (!er.pass)
            throw EnvyFailure("outcome margin fell below the certified fuzz",
                              er.worst_player, d, er.min_margin);
        rep.margins = std::move(er.margins);
        res.outcomes.push_back(std::move(rep));
    }
    return res;
}

DivisionReport extract_division(const ScenarioResult& result) {
    if (result.scenario != ScenarioKind::PieceGrab)
        throw ValidationError("division reports apply to piece-grab results");
    if (result.status != "ok")
        throw ValidationError("no division for an inconclusive result");
    const int r = result.point.box_count();
    const auto tiles = tiles_from_cut(result.point.cut);
    DivisionReport rep;
    for (std::size_t t = 0; t < tiles.size(); ++t)
        if (!tiles[t].degenerate())
            rep.intervals.emplace_back(result.point.alloc.box_of[t], tiles[t]);
    if (static_cast<int>(rep.intervals.size()) > r)
        throw ConditionViolation("more non-degenerate intervals than boxes", {});
    if (static_cast<int>(result.outcomes.size()) != r)
        throw ValidationError("missing dragon outcomes");
    for (int d = 1; d <= r; ++d) {
        const auto& out = result.outcomes[d - 1];
        if (out.assignment.dragon != d) throw ValidationError("outcomes out of order");
        std::vector<char> seen(r + 1, 0);
        seen[d] = 1;
        for (const auto& [player, box] : out.assignment.shares) {
            if (box < 1 || box > r || seen[box])
                throw ConditionViolation("outcome is not a bijection", {d});
            seen[box] = 1;
        }
        for (int b = 1; b <= r; ++b)
            if (!seen[b]) throw ConditionViolation("box left unassigned", {d, b});
        for (const auto& [player, margin] : out.margins)
            if (margin < -envy_gate)
                throw EnvyFailure("stored margin below the envy gate", player, d, margin);
    }
    return rep;
}

}  // namespace dragonshare
