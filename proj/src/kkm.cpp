#include "dragonshare/kkm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "dragonshare/marriage.hpp"

namespace dragonshare {

std::vector<double> FunctionalPreferenceMatrix::eval(std::span<const double> lengths) const {
    std::vector<double> f;
    evaluator(lengths, f);
    return f;
}

void fuzzy_weights_from_values(std::span<const double> values, double fuzz,
                               std::span<double> out) {
    double best = -std::numeric_limits<double>::infinity();
    for (double v : values) best = std::max(best, v);
    double z = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double w = fuzz + values[i] - best;
        out[i] = (w > 0.0) ? w : 0.0;
        z += out[i];
    }
    for (std::size_t i = 0; i < values.size(); ++i) out[i] /= z;
}

FunctionalPreferenceMatrix functional_from_valuations(const ValuationProfile& profile,
                                                      double fuzz) {
    const int n = profile.player_count();
    const int p = n + 1;
    for (const auto& d : profile.players)
        for (double v : d.values)
            if (v < 0.0)
                throw ValidationError("classical pipeline needs nonnegative densities");
    if (fuzz <= 0.0) throw ValidationError("fuzz must be positive");

    FunctionalPreferenceMatrix fp;
    fp.players = n;
    fp.pieces = p;
    fp.fuzz = fuzz;
    fp.evaluator = [profile, n, p, fuzz](std::span<const double> lengths,
                                         std::vector<double>& f) {
        f.assign(static_cast<std::size_t>(p) * n, 0.0);
        std::vector<double> xs(p - 1);
        double acc = 0.0;
        for (int k = 0; k + 1 < p; ++k) {
            acc += lengths[k];
            xs[k] = std::clamp(acc, 0.0, 1.0);
        }
        std::vector<double> vals(p), w(p);
        for (int j = 0; j < n; ++j) {
            const PiecewiseDensity& d = profile.players[j];
            double prev = 0.0;
            for (int i = 0; i < p; ++i) {
                double next = (i + 1 == p) ? d.total() : d.prefix_integral(xs[i]);
                vals[i] = next - prev;
                prev = next;
            }
            fuzzy_weights_from_values(vals, fuzz, w);
            for (int i = 0; i < p; ++i) f[static_cast<std::size_t>(i) * n + j] = w[i];
        }
    };
    return fp;
}

double residual_at(const FunctionalPreferenceMatrix& fprefs, std::span<const double> lengths) {
    std::vector<double> f;
    fprefs.evaluator(lengths, f);
    double target = 1.0 / fprefs.pieces;
    double r = 0.0;
    for (int i = 0; i < fprefs.pieces; ++i) {
        double h = 0.0;
        for (int j = 0; j < fprefs.players; ++j)
            h += f[static_cast<std::size_t>(i) * fprefs.players + j];
        h /= fprefs.players;
        r = std::max(r, std::fabs(h - target));
    }
    return r;
}

namespace {

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double grid_size(int parts, int res) {
    // C(res + parts - 1, parts - 1)
    double c = 1.0;
    for (int i = 1; i < parts; ++i) c = c * (res + i) / i;
    return c;
}

// In-place Gaussian elimination with partial pivoting; returns false on a
// numerically singular system. b receives the solution.
bool solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r2 = c + 1; r2 < n; ++r2)
            if (std::fabs(a[static_cast<std::size_t>(r2) * n + c]) >
                std::fabs(a[static_cast<std::size_t>(piv) * n + c]))
                piv = r2;
        if (std::fabs(a[static_cast<std::size_t>(piv) * n + c]) < 1e-300) return false;
        if (piv != c) {
            for (int k = 0; k < n; ++k)
                std::swap(a[static_cast<std::size_t>(piv) * n + k],
                          a[static_cast<std::size_t>(c) * n + k]);
            std::swap(b[piv], b[c]);
        }
        for (int r2 = c + 1; r2 < n; ++r2) {
            double f = a[static_cast<std::size_t>(r2) * n + c] /
                       a[static_cast<std::size_t>(c) * n + c];
            if (f == 0.0) continue;
            for (int k = c; k < n; ++k)
                a[static_cast<std::size_t>(r2) * n + k] -=
                    f * a[static_cast<std::size_t>(c) * n + k];
            b[r2] -= f * b[c];
        }
    }
    for (int c = n - 1; c >= 0; --c) {
        double acc = b[c];
        for (int k = c + 1; k < n; ++k) acc -= a[static_cast<std::size_t>(c) * n + k] * b[k];
        b[c] = acc / a[static_cast<std::size_t>(c) * n + c];
    }
    return true;
}

struct Searcher {
    const FunctionalPreferenceMatrix& fp;
    long long cap = 0;
    long long evals = 0;
    std::vector<double> fbuf;

    std::vector<double> best;
    double best_res = std::numeric_limits<double>::infinity();

    double residual(const std::vector<double>& x) {
        ++evals;
        fp.evaluator(x, fbuf);
        const int players = fp.players, pieces = fp.pieces;
        double target = 1.0 / pieces;
        double r = 0.0;
        for (int i = 0; i < pieces; ++i) {
            double h = 0.0;
            for (int j = 0; j < players; ++j)
                h += fbuf[static_cast<std::size_t>(i) * players + j];
            h /= players;
            r = std::max(r, std::fabs(h - target));
        }
        return r;
    }

    void consider(const std::vector<double>& x, double r) {
        if (r < best_res || (r == best_res && lex_less(x, best))) {
            best = x;
            best_res = r;
        }
    }

    // Compass search over pairwise mass transfers with halving steps. Steps
    // and grid points are dyadic, so coordinates stay exact until the step
    // drops below representable scale. Stops as soon as `stop` is reached.
    void pattern(std::vector<double>& x, double& r, double step0, long long local_cap,
                 double stop) {
        const int p = static_cast<int>(x.size());
        double step = step0;
        long long used0 = evals;
        std::vector<double> cand;
        while (step >= 1e-15 && r > stop) {
            bool improved = false;
            for (int i = 0; i < p; ++i) {
                for (int k = 0; k < p; ++k) {
                    if (k == i) continue;
                    // re-check the donor each time: an accepted move inside
                    // this sweep may have drained it below one step
                    if (x[i] < step) break;
                    if (evals - used0 >= local_cap || evals >= cap) return;
                    cand = x;
                    cand[i] -= step;
                    cand[k] += step;
                    double rc = residual(cand);
                    if (rc < r) {
                        x.swap(cand);
                        r = rc;
                        improved = true;
                        if (r <= stop) return;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }

    // Damped Newton on the balance system h(x) = 1/p. Coordinates move along
    // mass transfers out of the currently largest coordinate, which always
    // has room for the finite-difference probes. The field is piecewise
    // smooth, so inside one piece this converges quadratically where the
    // compass sweep would crawl along a narrow curved valley; steps that
    // leave the simplex or fail to descend are halved away, and a stall
    // simply returns to the caller's sweep.
    void newton(std::vector<double>& x, double& r, double stop) {
        const int p = static_cast<int>(x.size());
        const int d = p - 1;
        if (d == 0) return;
        const int players = fp.players;
        std::vector<double> g(p), gp(p), J(static_cast<std::size_t>(d) * d);
        std::vector<double> xp, cand, s(d);
        auto gather = [&](const std::vector<double>& pt, std::vector<double>& out) {
            double rr = residual(pt);
            for (int i = 0; i < p; ++i) {
                double h = 0.0;
                for (int j = 0; j < players; ++j)
                    h += fbuf[static_cast<std::size_t>(i) * players + j];
                out[i] = h / players - 1.0 / p;
            }
            return rr;
        };
        for (int it = 0; it < 40 && r > stop && evals < cap; ++it) {
            gather(x, g);
            const int m = static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
            const double delta = std::max(1e-12, fp.fuzz * 1e-4);
            // columns: transfer delta from coordinate m to each k != m;
            // rows: every balance equation except the redundant one at m
            int col = 0;
            for (int k = 0; k < p; ++k) {
                if (k == m) continue;
                xp = x;
                xp[k] += delta;
                xp[m] -= delta;
                gather(xp, gp);
                int row = 0;
                for (int i = 0; i < p; ++i) {
                    if (i == m) continue;
                    J[static_cast<std::size_t>(row) * d + col] = (gp[i] - g[i]) / delta;
                    ++row;
                }
                ++col;
            }
            {
                int row = 0;
                for (int i = 0; i < p; ++i) {
                    if (i == m) continue;
                    s[row++] = -g[i];
                }
            }
            if (!solve_linear(J, s, d)) return;
            double t = 1.0;
            bool accepted = false;
            while (t >= 1e-9) {
                cand = x;
                double moved = 0.0;
                int col2 = 0;
                bool inside = true;
                for (int k = 0; k < p; ++k) {
                    if (k == m) continue;
                    cand[k] += t * s[col2];
                    moved += t * s[col2];
                    if (cand[k] < 0.0) inside = false;
                    ++col2;
                }
                cand[m] -= moved;
                if (cand[m] < 0.0) inside = false;
                if (inside) {
                    double rc = residual(cand);
                    if (rc < r) {
                        x.swap(cand);
                        r = rc;
                        consider(x, r);
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
                if (evals >= cap) return;
            }
            if (!accepted) return;
        }
    }

    // Downhill simplex polish for the needle regime. Near the fuzz floor the
    // roots hug weight-tie manifolds where the residual valley is a narrow
    // curved trench: the compass sweep zig-zags across it and the
    // finite-difference Jacobian sits astride the kink, but a simplex of
    // vertices elongates along the trench and follows it. All moves are
    // affine combinations, so the unit-sum constraint survives; negative
    // coordinates are clipped away and the point renormalized.
    void nelder_mead(std::vector<double>& x, double& r, double stop, double scale,
                     long long local_cap) {
        const int p = static_cast<int>(x.size());
        if (p < 2) return;
        const long long used0 = evals;
        auto project = [&](std::vector<double>& v) {
            double t = 0.0;
            for (double& c : v) {
                if (c < 0.0) c = 0.0;
                t += c;
            }
            if (t <= 0.0) {
                v.assign(static_cast<std::size_t>(p), 1.0 / p);
                return;
            }
            for (double& c : v) c /= t;
        };
        std::vector<std::vector<double>> v(static_cast<std::size_t>(p), x);
        std::vector<double> f(p);
        f[0] = r;
        const int m = static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
        int vi = 1;
        for (int k = 0; k < p; ++k) {
            if (k == m) continue;
            v[vi][k] += scale;
            v[vi][m] -= scale;
            project(v[vi]);
            f[vi] = residual(v[vi]);
            ++vi;
        }
        std::vector<int> idx(p);
        std::vector<double> c(p), xr, xe, xc;
        while (evals - used0 < local_cap && evals < cap) {
            for (int i = 0; i < p; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                if (f[a] != f[b]) return f[a] < f[b];
                return a < b;
            });
            if (f[idx[0]] <= stop) break;
            const int worst = idx[p - 1];
            double spread = 0.0;
            for (int k = 0; k < p; ++k)
                spread = std::max(spread, std::fabs(v[idx[0]][k] - v[worst][k]));
            if (spread < 1e-15) break;
            std::fill(c.begin(), c.end(), 0.0);
            for (int i = 0; i + 1 < p; ++i)
                for (int k = 0; k < p; ++k) c[k] += v[idx[i]][k];
            for (int k = 0; k < p; ++k) c[k] /= p - 1;
            xr = c;
            for (int k = 0; k < p; ++k) xr[k] += c[k] - v[worst][k];
            project(xr);
            const double fr = residual(xr);
            if (fr < f[idx[0]]) {
                xe = c;
                for (int k = 0; k < p; ++k) xe[k] += 2.0 * (c[k] - v[worst][k]);
                project(xe);
                const double fe = residual(xe);
                if (fe < fr) {
                    v[worst] = xe;
                    f[worst] = fe;
                } else {
                    v[worst] = xr;
                    f[worst] = fr;
                }
            } else if (fr < f[idx[p - 2]]) {
                v[worst] = xr;
                f[worst] = fr;
            } else {
                xc = c;
                for (int k = 0; k < p; ++k) xc[k] += 0.5 * (v[worst][k] - c[k]);
                project(xc);
                const double fc = residual(xc);
                if (fc < f[worst]) {
                    v[worst] = xc;
                    f[worst] = fc;
                } else {
                    for (int i = 1; i < p; ++i) {
                        std::vector<double>& vv = v[idx[i]];
                        for (int k = 0; k < p; ++k)
                            vv[k] = v[idx[0]][k] + 0.5 * (vv[k] - v[idx[0]][k]);
                        project(vv);
                        f[idx[i]] = residual(vv);
                    }
                }
            }
        }
        int bi = 0;
        for (int i = 1; i < p; ++i)
            if (f[i] < f[bi]) bi = i;
        if (f[bi] < r) {
            x = v[bi];
            r = f[bi];
            consider(x, r);
        }
    }
};

using Start = std::pair<double, std::vector<double>>;

void keep_top(std::vector<Start>& starts, std::size_t limit, Start s) {
    auto pos = std::lower_bound(starts.begin(), starts.end(), s,
                                [](const Start& a, const Start& b) {
                                    if (a.first != b.first) return a.first < b.first;
                                    return lex_less(a.second, b.second);
                                });
    starts.insert(pos, std::move(s));
    if (starts.size() > limit) starts.pop_back();
}

}  // namespace

BalancedPoint find_balanced_point(const FunctionalPreferenceMatrix& fprefs, double tol,
                                  double budget, std::uint64_t seed) {
    if (fprefs.pieces < 1 || fprefs.players < 1)
        throw ValidationError("preference matrix needs at least one player and one piece");
    if (budget <= 0.0) throw ValidationError("budget must be positive");
    const int p = fprefs.pieces;
    if (p == 1) {
        std::vector<double> x = {1.0};
        return {SimplexPoint{x}, residual_at(fprefs, x)};
    }

    Searcher s{fprefs};
    s.cap = static_cast<long long>(budget);

    const int d = p - 1;
    int res = (d <= 2) ? 32 : std::max(4, 32 >> (d - 2));
    while (res > 4 && grid_size(p, res) > budget / 2.0) res /= 2;

    constexpr std::size_t max_starts = 16;
    std::vector<Start> starts;

    auto scan = [&](int rr) {
        starts.clear();
        std::vector<int> k(p, 0);
        std::vector<double> x(p);
        std::function<void(int, int)> rec = [&](int idx, int rem) {
            if (s.best_res <= tol || s.evals >= s.cap) return;
            if (idx == p - 1) {
                k[idx] = rem;
                for (int i = 0; i < p; ++i) x[i] = static_cast<double>(k[i]) / rr;
                double r = s.residual(x);
                s.consider(x, r);
                keep_top(starts, max_starts, {r, x});
                return;
            }
            for (int v = 0; v <= rem; ++v) {
                k[idx] = v;
                rec(idx + 1, rem - v);
            }
        };
        rec(0, rr);
    };

    scan(res);
    if (s.best_res <= tol) return {SimplexPoint{s.best}, s.best_res};

    // A few seeded interior starts guard against grid-aligned plateaus.
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expd(1.0);
    for (int extra = 0; extra < 4; ++extra) {
        std::vector<double> x(p);
        double z = 0.0;
        for (int i = 0; i < p; ++i) {
            x[i] = expd(rng) + 1e-9;
            z += x[i];
        }
        for (int i = 0; i < p; ++i) x[i] /= z;
        double r = s.residual(x);
        s.consider(x, r);
        keep_top(starts, max_starts, {r, x});
    }

    const long long per_start = 10000;
    auto refine_starts = [&](double step0) {
        auto snapshot = starts;
        for (auto& [r0, x0] : snapshot) {
            std::vector<double> x = x0;
            double r = r0;
            s.newton(x, r, tol);
            if (r > tol) s.pattern(x, r, step0, per_start, tol);
            if (r > tol) s.newton(x, r, tol);
            if (r > tol)
                s.nelder_mead(x, r, tol, std::max(fprefs.fuzz * 0.5, 1e-7), 6000);
            s.consider(x, r);
            if (s.best_res <= tol) break;
        }
    };
    refine_starts(1.0 / res);

    // Escalate resolution while the target is missed and budget remains.
    int rr = res;
    while (s.best_res > tol && s.evals < s.cap && rr < (1 << 20)) {
        rr *= 2;
        if (grid_size(p, rr) <= (budget - static_cast<double>(s.evals)) * 0.5) {
            scan(rr);
            refine_starts(1.0 / rr);
        } else {
            std::vector<double> x = s.best;
            double r = s.best_res;
            s.pattern(x, r, 1.0 / rr, s.cap - s.evals, tol);
            bool stuck = r >= s.best_res;
            s.consider(x, r);
            if (stuck && rr > (1 << 12)) break;
        }
    }

    BalancedPoint bp{SimplexPoint{s.best}, s.best_res};
    if (s.best_res > tol)
        throw SearchFailure("balanced point search exhausted its budget", bp);
    return bp;
}

BalancedPoint refine_balanced_point(const FunctionalPreferenceMatrix& fprefs,
                                    std::span<const double> start, double tol,
                                    double budget) {
    if (budget <= 0.0) throw ValidationError("budget must be positive");
    Searcher s{fprefs};
    s.cap = static_cast<long long>(budget);
    std::vector<double> x(start.begin(), start.end());
    double r = s.residual(x);
    s.consider(x, r);
    s.newton(x, r, tol);
    double step0 = 1.0 / 32;
    while (r > tol && s.evals < s.cap && step0 >= 1e-12) {
        s.pattern(x, r, step0, s.cap - s.evals, tol);
        s.newton(x, r, tol);
        if (r > tol)
            s.nelder_mead(x, r, tol, std::max(fprefs.fuzz * 0.5, 1e-7),
                          s.cap - s.evals);
        s.consider(x, r);
        step0 /= 32;  // restart sweeps at a finer scale if the coarse one stalls
    }
    return {SimplexPoint{s.best}, s.best_res};
}

SignMatrix sign_matrix(const FunctionalPreferenceMatrix& fprefs,
                       std::span<const double> lengths, double eps_sign) {
    std::vector<double> f;
    fprefs.evaluator(lengths, f);
    SignMatrix sm;
    sm.threshold = eps_sign;
    sm.omega.assign(fprefs.pieces, std::vector<std::uint8_t>(fprefs.players, 0));
    for (int i = 0; i < fprefs.pieces; ++i)
        for (int j = 0; j < fprefs.players; ++j)
            sm.omega[i][j] =
                f[static_cast<std::size_t>(i) * fprefs.players + j] > eps_sign ? 1 : 0;
    return sm;
}

OmegaCheck check_omega_condition(const SignMatrix& sm) {
    const int pieces = static_cast<int>(sm.omega.size());
    if (pieces == 0) throw ValidationError("empty sign matrix");
    const int players = static_cast<int>(sm.omega[0].size());
    if (pieces != players + 1)
        throw ValidationError("tree condition needs one more piece than players");
    SetFamily family;
    family.n = pieces;
    family.sets.resize(players);
    for (int j = 0; j < players; ++j)
        for (int i = 0; i < pieces; ++i)
            if (sm.omega[i][j]) family.sets[j].push_back(i + 1);
    if (auto witness = dragon_condition_witness(family)) return {false, *witness};
    return {true, {}};
}

KkmSolution solve_dragon_kkm(const ValuationProfile& profile, const SolveParams& params) {
    const int n = profile.player_count();
    const int p = n + 1;
    const double fuzz = std::min(params.eps_fuzz, 1.0 / (2.0 * p));

    // Anneal the margin width from a smooth field down to the target fuzz;
    // at the target width the balanced region is far too small for a cold
    // grid search, but warm-started refinement tracks it. At width 1 every
    // piece keeps positive weight, so the field has a live gradient at every
    // start. The root moves a constant fraction of each fuzz decrement, so
    // halving keeps the next start inside the next tie band; when a step
    // still overshoots, retry at the geometric midpoint.
    double fz = std::max(fuzz, 1.0);
    FunctionalPreferenceMatrix fp = functional_from_valuations(profile, fz);

    KkmSolution sol;
    sol.balanced = find_balanced_point(fp, params.tol, params.budget, params.seed);
    while (fz > fuzz) {
        double next = std::max(fz / 2.0, fuzz);
        BalancedPoint bp;
        bool tracked = false;
        while (true) {
            fp = functional_from_valuations(profile, next);
            bp = refine_balanced_point(fp, sol.balanced.point.coords, params.tol,
                                       params.budget);
            if (bp.residual <= params.tol) {
                tracked = true;
                break;
            }
            double mid = std::sqrt(fz * next);
            if (!(mid < fz * 0.999)) break;  // continuation step collapsed
            next = mid;
        }
        if (!tracked) {
            try {
                bp = find_balanced_point(fp, params.tol, params.budget, params.seed);
            } catch (const SearchFailure& sf) {
                throw SearchFailure(sf.what(),
                                    bp.residual <= sf.best.residual ? bp : sf.best);
            }
        }
        sol.balanced = bp;
        fz = next;
    }
    sol.cut = cut_from_lengths(sol.balanced.point);
    sol.f = fp.eval(sol.balanced.point.coords);
    sol.omega = sign_matrix(fp, sol.balanced.point.coords, params.eps_sign);

    OmegaCheck oc = check_omega_condition(sol.omega);
    if (!oc.ok)
        throw ConditionViolation("sign matrix fails the covering condition", oc.witness);

    SetFamily family;
    family.n = p;
    family.sets.resize(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < p; ++i)
            if (sol.omega.omega[i][j]) family.sets[j].push_back(i + 1);
    sol.tree = to_labeled_tree(spanning_tree_representatives(family), p);
    return sol;
}

std::map<int, std::map<int, int>> bijections_from_tree(const LabeledTree& tree) {
    validate_tree(tree);
    std::map<int, std::map<int, int>> out;
    for (int root = 1; root <= tree.vertex_count; ++root) {
        std::map<int, int> pi;
        for (const auto& [vertex, edge] : root_tree(tree, root)) pi[edge.label] = vertex;
        out[root] = pi;
    }
    return out;
}

}  // namespace dragonshare
