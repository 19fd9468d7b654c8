#include "ftaplab/metrics.hpp"

#include <algorithm>
#include <cstdint>

#include "ftaplab/lp.hpp"

namespace ftaplab {

namespace {

Rational ceil_rat(const Rational& x) {
    Integer n = rat_num(x), d = rat_den(x);
    Integer q = n / d;
    if (q * d < n) q += 1;
    return Rational(q);
}

// E[ |(K . Z)|* ^ 1 ] for a cell-wise constant K (indexed by non-leaf node).
Rational capped_integral_sup(const AdaptedProcess& z, const Vec& k) {
    const ScenarioTree& t = *z.tree;
    Vec integral(t.size(), Rational(0));
    Vec runmax(t.size(), Rational(0));
    Rational acc = 0;
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        integral[i] = integral[p] + k[p] * (z.v[i] - z.v[p]);
        runmax[i] = std::max(runmax[p], rabs(integral[i]));
        if (t.is_leaf(i)) acc += t.prob(i) * std::min(runmax[i], Rational(1));
    }
    return acc;
}

}  // namespace

Rational ucp_distance(const AdaptedProcess& x, const AdaptedProcess& y) {
    require_same_tree(x.tree, y.tree);
    const ScenarioTree& t = *x.tree;
    Vec runmax(t.size());
    Rational acc = 0;
    runmax[0] = rabs(x.v[0] - y.v[0]);
    if (t.size() == 1) return std::min(runmax[0], Rational(1));
    for (int i = 1; i < t.size(); ++i) {
        runmax[i] = std::max(runmax[t.parent(i)], rabs(x.v[i] - y.v[i]));
        if (t.is_leaf(i)) acc += t.prob(i) * std::min(runmax[i], Rational(1));
    }
    return acc;
}

DistanceResult emery_distance(const AdaptedProcess& x, const AdaptedProcess& y, const Rational& eps) {
    require_same_tree(x.tree, y.tree);
    if (eps <= 0) throw TreeError("emery_distance needs eps > 0");
    const ScenarioTree& t = *x.tree;
    AdaptedProcess z = x - y;

    // weight of a cell = expected absolute increment through it; cells with
    // zero weight cannot influence the objective
    Vec cell_weight(t.size(), Rational(0));
    std::vector<int> active;
    Rational lipschitz = 0;
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        for (int c : t.children(u)) cell_weight[u] += t.prob(c) * rabs(z.v[c] - z.v[u]);
        if (cell_weight[u] > 0) active.push_back(u);
        lipschitz += cell_weight[u];
    }

    DistanceResult out;
    Vec k(t.size(), Rational(0));
    Rational best = capped_integral_sup(z, k);  // K = 0
    std::fill(k.begin(), k.end(), Rational(1));
    best = std::max(best, capped_integral_sup(z, k));  // K = 1
    std::fill(k.begin(), k.end(), Rational(-1));
    best = std::max(best, capped_integral_sup(z, k));

    size_t nact = active.size();
    if (nact > 0 && nact <= 16) {
        // all sign vertices
        std::fill(k.begin(), k.end(), Rational(0));
        for (std::uint32_t mask = 0; mask < (1u << nact); ++mask) {
            for (size_t j = 0; j < nact; ++j) k[active[j]] = (mask >> j) & 1 ? Rational(1) : Rational(-1);
            best = std::max(best, capped_integral_sup(z, k));
        }
    } else if (nact > 16) {
        // coordinate ascent over {-1, 0, +1} from both constant starts
        for (Rational start : {Rational(1), Rational(-1)}) {
            std::fill(k.begin(), k.end(), start);
            Rational cur = capped_integral_sup(z, k);
            bool improved = true;
            while (improved) {
                improved = false;
                for (int u : active) {
                    Rational keep = k[u];
                    for (Rational cand : {Rational(-1), Rational(0), Rational(1)}) {
                        if (cand == keep) continue;
                        k[u] = cand;
                        Rational val = capped_integral_sup(z, k);
                        if (val > cur) {
                            cur = val;
                            keep = cand;
                            improved = true;
                        }
                    }
                    k[u] = keep;
                }
            }
            best = std::max(best, cur);
        }
    }

    Rational upper = std::min(Rational(1), lipschitz);
    out.method = BoundMethod::VertexEnumeration;
    if (upper - best > eps && nact > 0) {
        // Lipschitz grid: spacing 2/m per cell keeps the objective within
        // (1/m) * sum of cell weights of the best grid point
        Rational m_rat = ceil_rat(lipschitz / eps);
        long m = m_rat.convert_to<long>();
        if (m >= 1) {
            double total = 1;
            for (size_t j = 0; j < nact && total < 4.0e6; ++j) total *= double(m + 1);
            if (total <= 4.0e6) {
                std::fill(k.begin(), k.end(), Rational(0));
                std::vector<long> idx(nact, 0);
                Rational grid_best = 0;
                for (;;) {
                    for (size_t j = 0; j < nact; ++j) k[active[j]] = Rational(-1) + Rational(2 * idx[j], m);
                    grid_best = std::max(grid_best, capped_integral_sup(z, k));
                    size_t j = 0;
                    while (j < nact && ++idx[j] > m) idx[j++] = 0;
                    if (j == nact) break;
                }
                best = std::max(best, grid_best);
                upper = std::min(upper, Rational(grid_best + lipschitz / m));
                out.method = BoundMethod::GridCertified;
            }
        }
    } else {
        out.method = BoundMethod::GridCertified;  // bracket already within eps
    }
    out.value = best;
    out.error_bound = std::max(Rational(0), Rational(upper - best));
    return out;
}

Rational l0_quantile(const std::vector<TerminalVariable>& family, const Rational& eta) {
    if (family.empty()) throw TreeError("l0_quantile of empty family");
    if (eta <= 0 || eta >= 1) throw TreeError("quantile level must be in (0,1)");
    Rational worst = 0;
    for (const TerminalVariable& xi : family) {
        const ScenarioTree& t = *xi.tree;
        std::vector<std::pair<Rational, Rational>> atoms;  // (magnitude, prob)
        for (size_t kk = 0; kk < xi.v.size(); ++kk) atoms.emplace_back(rabs(xi.v[kk]), t.prob(t.leaves()[kk]));
        std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        // tail(a) = P[|xi| > a] is a right-continuous step function; the
        // smallest admissible a is 0 or one of the magnitudes
        auto tail = [&](const Rational& a) {
            Rational s = 0;
            for (const auto& [m, p] : atoms)
                if (m > a) s += p;
            return s;
        };
        Rational ans;
        if (tail(Rational(0)) <= eta) {
            ans = 0;
        } else {
            ans = atoms.back().first;
            for (const auto& [m, p] : atoms)
                if (tail(m) <= eta) {
                    ans = m;
                    break;
                }
        }
        worst = std::max(worst, ans);
    }
    return worst;
}

namespace {

// Shared branch-and-bound for both P-UT profile variants. Witness nodes
// carry a sign constraint s.(H.X)_v >= a; a path counts as soon as one of
// its nodes is a chosen witness. Feasibility of a constraint set over
// cell-wise |H| <= 1 is an exact LP.
struct ProfileSearch {
    const AdaptedProcess& x;
    const ScenarioTree& t;
    Rational a;
    long* lp_budget;
    bool* budget_hit;

    std::vector<int> witnesses;                       // candidate nodes, fixed order
    std::vector<std::vector<int>> covered_leaves;     // leaf indices under witness
    std::vector<std::pair<int, int>> chosen;          // (witness position, sign)
    std::vector<char> leaf_covered;
    Rational covered_prob = 0;
    Rational best = 0;

    ProfileSearch(const AdaptedProcess& xx, const Rational& aa, bool running_sup, long* budget,
                  bool* hit)
        : x(xx), t(*xx.tree), a(aa), lp_budget(budget), budget_hit(hit) {
        Vec reach(t.size(), Rational(0));  // max achievable |(H.X)_v|
        for (int i = 1; i < t.size(); ++i) reach[i] = reach[t.parent(i)] + rabs(x.v[i] - x.v[t.parent(i)]);
        for (int i = 1; i < t.size(); ++i) {
            bool candidate = running_sup ? true : t.is_leaf(i);
            if (!candidate || reach[i] < a) continue;
            witnesses.push_back(i);
            covered_leaves.push_back({});
            collect_leaves(i, covered_leaves.back());
        }
        // wide subtrees first: better bounds early
        std::vector<size_t> order(witnesses.size());
        for (size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(), [&](size_t lhs, size_t rhs) {
            return t.prob(witnesses[lhs]) > t.prob(witnesses[rhs]);
        });
        std::vector<int> w2;
        std::vector<std::vector<int>> c2;
        for (size_t j : order) {
            w2.push_back(witnesses[j]);
            c2.push_back(covered_leaves[j]);
        }
        witnesses = std::move(w2);
        covered_leaves = std::move(c2);
        leaf_covered.assign(t.leaves().size(), 0);
    }

    void collect_leaves(int node, std::vector<int>& out) const {
        if (t.is_leaf(node)) {
            out.push_back(t.leaf_index(node));
            return;
        }
        for (int c : t.children(node)) collect_leaves(c, out);
    }

    bool feasible() {
        if (*lp_budget <= 0) {
            *budget_hit = true;
            return false;
        }
        --*lp_budget;
        lp::Builder lpb;
        std::vector<int> cell_var(t.size(), -1);
        for (int u = 0; u < t.size(); ++u) {
            if (t.is_leaf(u)) continue;
            int v = lpb.add_var(false);
            cell_var[u] = v;
            lpb.add_le({{v, Rational(1)}}, Rational(1));
            lpb.add_ge({{v, Rational(1)}}, Rational(-1));
        }
        for (const auto& [pos, sign] : chosen) {
            std::map<int, Rational> row;
            for (int n = witnesses[pos]; t.parent(n) >= 0; n = t.parent(n)) {
                int u = t.parent(n);
                row[cell_var[u]] += Rational(sign) * (x.v[n] - x.v[u]);
            }
            lpb.add_ge(row, a);
        }
        return lpb.solve().status != lp::Status::Infeasible;
    }

    Rational coverable_tail(size_t from) const {
        std::vector<char> seen = leaf_covered;
        Rational s = 0;
        for (size_t j = from; j < witnesses.size(); ++j)
            for (int leaf : covered_leaves[j])
                if (!seen[leaf]) {
                    seen[leaf] = 1;
                    s += t.prob(t.leaves()[leaf]);
                }
        return s;
    }

    void dfs(size_t pos) {
        if (*budget_hit) return;
        best = std::max(best, covered_prob);
        if (pos >= witnesses.size()) return;
        if (covered_prob + coverable_tail(pos) <= best) return;
        // try including this witness with either sign, if it adds coverage
        Rational gain = 0;
        for (int leaf : covered_leaves[pos])
            if (!leaf_covered[leaf]) gain += t.prob(t.leaves()[leaf]);
        if (gain > 0) {
            for (int sign : {+1, -1}) {
                chosen.emplace_back(int(pos), sign);
                if (feasible()) {
                    std::vector<int> newly;
                    for (int leaf : covered_leaves[pos])
                        if (!leaf_covered[leaf]) {
                            leaf_covered[leaf] = 1;
                            newly.push_back(leaf);
                        }
                    covered_prob += gain;
                    dfs(pos + 1);
                    covered_prob -= gain;
                    for (int leaf : newly) leaf_covered[leaf] = 0;
                }
                chosen.pop_back();
                if (*budget_hit) return;
            }
        }
        dfs(pos + 1);  // skip
    }

    Rational run() {
        if (a <= 0) return 1;  // |...| >= a always holds
        dfs(0);
        return best;
    }
};

PUTProfile profile_impl(const std::vector<const AdaptedProcess*>& family, const Vec& a_grid,
                        bool running_sup, long budget) {
    if (family.empty() || a_grid.empty()) throw TreeError("put_profile needs a family and a grid");
    for (size_t i = 1; i < a_grid.size(); ++i)
        if (a_grid[i] <= a_grid[i - 1]) throw TreeError("a_grid must be strictly increasing");
    for (const AdaptedProcess* x : family) require_same_tree(family.front()->tree, x->tree);
    PUTProfile out;
    out.a_grid = a_grid;
    out.family_size = int(family.size());
    long remaining = budget;
    bool hit = false;
    for (const Rational& a : a_grid) {
        Rational sup = 0;
        for (const AdaptedProcess* x : family) {
            ProfileSearch search(*x, a, running_sup, &remaining, &hit);
            sup = std::max(sup, search.run());
        }
        out.values.push_back(sup);
    }
    out.lower_bound_only = hit;
    return out;
}

}  // namespace

PUTProfile put_profile(const std::vector<const AdaptedProcess*>& family, const Vec& a_grid,
                       long budget) {
    return profile_impl(family, a_grid, false, budget);
}

PUTProfile put_profile_sup(const std::vector<const AdaptedProcess*>& family, const Vec& a_grid,
                           long budget) {
    return profile_impl(family, a_grid, true, budget);
}

}  // namespace ftaplab
