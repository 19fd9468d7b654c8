#include "ftaplab/calculus.hpp"

#include <algorithm>
#include <set>

namespace ftaplab {

AdaptedProcess stochastic_integral(const PredictableControl& h, const AdaptedProcess& x) {
    require_same_tree(h.tree, x.tree);
    const ScenarioTree& t = *x.tree;
    AdaptedProcess r(t);
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        r.v[i] = r.v[p] + h.v[p] * (x.v[i] - x.v[p]);
    }
    return r;
}

DoobParts doob_decomposition(const AdaptedProcess& x) {
    const ScenarioTree& t = *x.tree;
    DoobParts out{AdaptedProcess(t), AdaptedProcess(t)};
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        // dB at time(i) is F_{time(i)-1}-measurable: same for all siblings
        Rational drift = 0;
        for (int c : t.children(p)) drift += t.node(c).cond_prob * (x.v[c] - x.v[p]);
        out.B.v[i] = out.B.v[p] + drift;
        out.M.v[i] = out.M.v[p] + (x.v[i] - x.v[p]) - drift;
    }
    return out;
}

Decomposition big_jump_split(const AdaptedProcess& x, const Rational& threshold) {
    if (threshold <= 0) throw TreeError("jump threshold must be positive");
    const ScenarioTree& t = *x.tree;
    Decomposition d;
    d.threshold = threshold;
    d.Xcheck = AdaptedProcess(t);
    AdaptedProcess remainder(t);
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        Rational jump = x.v[i] - x.v[p];
        Rational big = rabs(jump) > threshold ? jump : Rational(0);
        d.Xcheck.v[i] = d.Xcheck.v[p] + big;
        remainder.v[i] = remainder.v[p] + jump - big;
    }
    DoobParts doob = doob_decomposition(remainder);
    d.M = std::move(doob.M);
    d.B = std::move(doob.B);
    return d;
}

Rational jump_threshold(const std::vector<const AdaptedProcess*>& xs) {
    if (xs.empty()) throw TreeError("jump_threshold needs at least one process");
    std::set<Rational> mags;
    for (const AdaptedProcess* x : xs) {
        const ScenarioTree& t = *x->tree;
        for (int i = 1; i < t.size(); ++i) {
            Rational m = rabs(x->v[i] - x->v[t.parent(i)]);
            if (m != 0) mags.insert(m);
        }
    }
    if (mags.empty()) return Rational(1);
    std::vector<Rational> m(mags.begin(), mags.end());
    if (m.size() == 1) return m[0] / 2;
    size_t mid = (m.size() - 1) / 2;
    if (m.size() % 2 == 0) return (m[mid] + m[mid + 1]) / 2;
    // odd count: the median is itself a magnitude; take the midpoint of the
    // tighter neighbouring gap (both straddle the median, both avoid it)
    if (mid == 0) return (m[0] + m[1]) / 2;
    Rational lo_gap = m[mid] - m[mid - 1], hi_gap = m[mid + 1] - m[mid];
    return lo_gap <= hi_gap ? (m[mid - 1] + m[mid]) / 2 : (m[mid] + m[mid + 1]) / 2;
}

Rational jump_threshold(const AdaptedProcess& x) { return jump_threshold({&x}); }

AdaptedProcess variation(const AdaptedProcess& x, VariationKind kind) {
    const ScenarioTree& t = *x.tree;
    AdaptedProcess r(t);
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        Rational jump = x.v[i] - x.v[p];
        r.v[i] = r.v[p] + (kind == VariationKind::Total ? rabs(jump) : jump * jump);
    }
    return r;
}

AdaptedProcess covariation(const AdaptedProcess& x, const AdaptedProcess& y) {
    require_same_tree(x.tree, y.tree);
    const ScenarioTree& t = *x.tree;
    AdaptedProcess r(t);
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        r.v[i] = r.v[p] + (x.v[i] - x.v[p]) * (y.v[i] - y.v[p]);
    }
    return r;
}

IntegrationByParts integration_by_parts(const AdaptedProcess& u, const AdaptedProcess& v) {
    require_same_tree(u.tree, v.tree);
    const ScenarioTree& t = *u.tree;
    IntegrationByParts out{AdaptedProcess(t), AdaptedProcess(t), covariation(u, v)};
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        out.u_minus_dv.v[i] = out.u_minus_dv.v[p] + u.v[p] * (v.v[i] - v.v[p]);
        out.v_minus_du.v[i] = out.v_minus_du.v[p] + v.v[p] * (u.v[i] - u.v[p]);
    }
    return out;
}

Rational cadlag_modulus(const Vec& path, const Rational& delta) {
    if (path.empty()) throw TreeError("cadlag_modulus of empty path");
    int T = int(path.size()) - 1;
    if (T == 0) return 0;
    if (delta <= 0) throw TreeError("delta must be positive");
    if (delta > 1) throw TreeError("delta exceeds the time span");
    // grid point i sits at i/T; a cell [i/T, j/T) holds values path[i..j-1],
    // the final cell [i/T, 1] additionally holds path[T]
    auto osc = [&](int lo, int hi_excl, bool closed_end) -> Rational {
        Rational mn = path[lo], mx = path[lo];
        int hi = closed_end ? hi_excl : hi_excl - 1;
        for (int k = lo; k <= hi; ++k) {
            mn = std::min(mn, path[k]);
            mx = std::max(mx, path[k]);
        }
        return mx - mn;
    };
    // dp[j] = best achievable max-oscillation over partitions of [0, j/T)
    // with every cell at least delta long; infinity encoded via a flag
    std::vector<Rational> dp(T + 1);
    std::vector<char> ok(T + 1, 0);
    dp[0] = 0;
    ok[0] = 1;
    Rational best;
    bool have_best = false;
    for (int j = 1; j <= T; ++j) {
        for (int i = 0; i < j; ++i) {
            if (!ok[i]) continue;
            if (Rational(j - i, T) < delta) continue;
            if (j < T) {
                Rational cand = std::max(dp[i], osc(i, j, false));
                if (!ok[j] || cand < dp[j]) {
                    dp[j] = cand;
                    ok[j] = 1;
                }
            } else {
                Rational cand = std::max(dp[i], osc(i, j, true));
                if (!have_best || cand < best) {
                    best = cand;
                    have_best = true;
                }
            }
        }
    }
    if (!have_best) throw TreeError("no partition with cell length >= delta");
    return best;
}

std::vector<StoppingTime> slicing_times(const AdaptedProcess& n, const Rational& eps) {
    if (eps <= 0) throw TreeError("slicing threshold must be positive");
    const ScenarioTree& t = *n.tree;
    std::vector<StoppingTime> out;
    StoppingTime t0(t);
    t0.in_set[0] = 1;
    out.push_back(t0);
    for (;;) {
        const StoppingTime& prev = out.back();
        StoppingTime next(t);
        bool any = false;
        // anchor[i]: node where the previous slicing time fired on this path,
        // or -1 once the next one has already fired (path done for this round)
        std::vector<int> anchor(t.size(), -1);
        std::vector<char> fired(t.size(), 0);
        for (int i = 0; i < t.size(); ++i) {
            int p = t.parent(i);
            int a = (p < 0) ? -1 : anchor[p];
            char f = (p < 0) ? 0 : fired[p];
            if (!f && a >= 0 && rabs(n.v[i] - n.v[a]) >= eps) {
                next.in_set[i] = 1;
                f = 1;
                any = true;
            }
            if (!f && prev.in_set[i]) a = i;
            anchor[i] = a;
            fired[i] = f;
        }
        if (!any) break;
        out.push_back(std::move(next));
    }
    return out;
}

}  // namespace ftaplab
