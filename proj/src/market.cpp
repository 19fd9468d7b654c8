#include "ftaplab/market.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "ftaplab/duality.hpp"
#include "ftaplab/lp.hpp"

namespace ftaplab {

Mat full_cone(int dim) {
    Mat g;
    for (int k = 0; k < dim; ++k) {
        Vec plus(dim, Rational(0)), minus(dim, Rational(0));
        plus[k] = 1;
        minus[k] = -1;
        g.push_back(plus);
        g.push_back(minus);
    }
    return g;
}

Mat MarketModel::cone_at(int node) const {
    if (node < int(cones.size()) && !cones[node].empty()) return cones[node];
    return full_cone(dim());
}

void MarketModel::validate() const {
    if (tree == nullptr || S.empty()) throw MarketError("model needs a tree and at least one asset");
    if (lambda < 0) throw MarketError("admissibility floor must be nonnegative");
    for (const AdaptedProcess& s : S) require_same_tree(tree, s.tree);
    if (int(cones.size()) != tree->size()) throw MarketError("one cone slot per node required");
    for (int u = 0; u < tree->size(); ++u)
        for (const Vec& r : cones[u])
            if (int(r.size()) != dim()) throw MarketError("generator dimension mismatch at node " + std::to_string(u));
}

namespace {

Rational step_gain(const MarketModel& model, const Vec& position, int child) {
    int p = model.tree->parent(child);
    Rational g = 0;
    for (int k = 0; k < model.dim(); ++k) g += position[k] * (model.S[k].v[child] - model.S[k].v[p]);
    return g;
}

Vec position_at(const std::vector<PredictableControl>& phi, int node) {
    Vec pos(phi.size());
    for (size_t k = 0; k < phi.size(); ++k) pos[k] = phi[k].v[node];
    return pos;
}

bool in_cone(const Mat& generators, const Vec& pos) {
    lp::Builder b;
    std::vector<int> mu;
    for (size_t j = 0; j < generators.size(); ++j) mu.push_back(b.add_var(true));
    for (size_t k = 0; k < pos.size(); ++k) {
        std::map<int, Rational> row;
        for (size_t j = 0; j < generators.size(); ++j)
            if (generators[j][k] != 0) row[mu[j]] += generators[j][k];
        b.add_eq(row, pos[k]);
    }
    return b.solve().status == lp::Status::Optimal;
}

// LP skeleton shared by the arbitrage checkers and maximal_element: cone
// coefficients mu >= 0 per (node, generator) and a free wealth variable per
// non-root node, tied together by the integral recursion.
struct StrategyLp {
    lp::Builder b;
    std::vector<std::vector<int>> mu;  // [node][generator]
    std::vector<int> w;                // [node], -1 at the root

    explicit StrategyLp(const MarketModel& model) {
        const ScenarioTree& t = *model.tree;
        mu.resize(t.size());
        w.assign(t.size(), -1);
        for (int u = 0; u < t.size(); ++u)
            if (!t.is_leaf(u))
                for (size_t j = 0; j < model.cone_at(u).size(); ++j) mu[u].push_back(b.add_var(true));
        for (int i = 1; i < t.size(); ++i) w[i] = b.add_var(false);
        for (int i = 1; i < t.size(); ++i) {
            int p = t.parent(i);
            std::map<int, Rational> row;
            row[w[i]] = 1;
            if (w[p] >= 0) row[w[p]] -= 1;
            Mat gen = model.cone_at(p);
            for (size_t j = 0; j < gen.size(); ++j) {
                Rational g = step_gain(model, gen[j], i);
                if (g != 0) row[mu[p][j]] -= g;
            }
            b.add_eq(row, Rational(0));
        }
    }

    std::vector<PredictableControl> extract_strategy(const MarketModel& model, const Vec& x) const {
        const ScenarioTree& t = *model.tree;
        std::vector<PredictableControl> phi(model.dim(), PredictableControl(t));
        for (int u = 0; u < t.size(); ++u) {
            if (t.is_leaf(u)) continue;
            Mat gen = model.cone_at(u);
            for (size_t j = 0; j < gen.size(); ++j)
                for (int k = 0; k < model.dim(); ++k) phi[k].v[u] += x[mu[u][j]] * gen[j][k];
        }
        return phi;
    }
};

ArbitrageCheck run_arbitrage_lp(const MarketModel& model, bool nonneg_everywhere) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    StrategyLp slp(model);
    std::map<int, Rational> obj;
    for (int leaf : t.leaves()) {
        slp.b.add_ge({{slp.w[leaf], Rational(1)}}, Rational(0));
        slp.b.add_le({{slp.w[leaf], Rational(1)}}, Rational(1));
        obj[slp.w[leaf]] += t.prob(leaf);
    }
    Rational floor = nonneg_everywhere ? Rational(0) : -model.lambda;
    for (int i = 1; i < t.size(); ++i)
        if (!t.is_leaf(i)) slp.b.add_ge({{slp.w[i], Rational(1)}}, floor);
    slp.b.set_objective(obj);
    lp::Solution sol = slp.b.solve();
    if (sol.status != lp::Status::Optimal) throw MarketError("arbitrage LP did not reach an optimum");
    ArbitrageCheck out;
    if (sol.objective == 0) {
        out.holds = true;
        return out;
    }
    out.holds = false;
    out.certificate.kind = nonneg_everywhere ? CertificateKind::NUPBRViolation : CertificateKind::NAViolation;
    out.certificate.strategy = slp.extract_strategy(model, sol.x);
    AdaptedProcess W(t);
    for (int i = 1; i < t.size(); ++i)
        W.v[i] = W.v[t.parent(i)] + step_gain(model, position_at(out.certificate.strategy, t.parent(i)), i);
    out.certificate.wealth_path = W;
    out.certificate.terminal = terminal_of(W);
    verify_certificate(model, out.certificate);
    return out;
}

}  // namespace

WealthProcess wealth(const MarketModel& model, const std::vector<PredictableControl>& phi) {
    model.validate();
    if (int(phi.size()) != model.dim()) throw MarketError("strategy dimension mismatch");
    const ScenarioTree& t = *model.tree;
    for (const PredictableControl& c : phi) require_same_tree(model.tree, c.tree);
    WealthProcess out;
    out.strategy = phi;
    out.wealth = AdaptedProcess(t);
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        if (!model.cones[u].empty() && !in_cone(model.cones[u], position_at(phi, u)))
            throw MarketError("position leaves the cone at node " + std::to_string(u));
    }
    for (int i = 1; i < t.size(); ++i)
        out.wealth.v[i] = out.wealth.v[t.parent(i)] + step_gain(model, position_at(phi, t.parent(i)), i);
    out.admissible = std::all_of(out.wealth.v.begin(), out.wealth.v.end(),
                                 [&](const Rational& x) { return x >= -model.lambda; });
    return out;
}

void verify_certificate(const MarketModel& model, const ArbitrageCertificate& cert) {
    const ScenarioTree& t = *model.tree;
    AdaptedProcess W(t);
    for (int i = 1; i < t.size(); ++i)
        W.v[i] = W.v[t.parent(i)] + step_gain(model, position_at(cert.strategy, t.parent(i)), i);
    if (!(W == cert.wealth_path)) throw MarketError("certificate wealth does not match its strategy");
    bool some_positive = false;
    for (int leaf : t.leaves()) {
        if (W.v[leaf] < 0) throw MarketError("certificate terminal is negative");
        if (W.v[leaf] > 0) some_positive = true;
        if (W.v[leaf] != cert.terminal.v[t.leaf_index(leaf)]) throw MarketError("certificate terminal mismatch");
    }
    if (!some_positive) throw MarketError("certificate terminal vanishes");
    Rational floor = cert.kind == CertificateKind::NUPBRViolation ? Rational(0) : -model.lambda;
    for (const Rational& x : W.v)
        if (x < floor) throw MarketError("certificate wealth breaks the admissibility floor");
}

ArbitrageCheck check_NA(const MarketModel& model) { return run_arbitrage_lp(model, false); }

ArbitrageCheck check_NUPBR(const MarketModel& model) { return run_arbitrage_lp(model, true); }

ArbitrageCheck check_NFLVR(const MarketModel& model) {
    ArbitrageCheck na = check_NA(model);
    ArbitrageCheck nupbr = check_NUPBR(model);
    bool holds = na.holds && nupbr.holds;
    EsmResult esm = esm_exists(model);
    if (holds != esm.exists)
        throw MarketError("internal error: NA+NUPBR verdict disagrees with the separating-measure LP");
    if (holds) return {true, {}};
    return na.holds ? nupbr : na;
}

namespace {

// a . x <= b rows over a fixed variable count
struct Ineq {
    Vec a;
    Rational b;
};

std::optional<Vec> solve_square(Mat a, Vec b) {
    int n = int(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (a[r][col] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) return std::nullopt;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (int r = 0; r < n; ++r) x[r] = b[r] / a[r][r];
    return x;
}

// one-dimensional nullspace of a (L-1) x L system, if it is exactly that
std::optional<Vec> nullspace_dir(Mat a, int nvars) {
    int rows = int(a.size());
    int rank = 0;
    std::vector<int> pivot_col;
    for (int col = 0; col < nvars && rank < rows; ++col) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (a[r][col] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[rank][col];
            for (int c = 0; c < nvars; ++c) a[r][c] -= f * a[rank][c];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    if (rank != nvars - 1) return std::nullopt;
    std::vector<char> is_pivot(nvars, 0);
    for (int c : pivot_col) is_pivot[c] = 1;
    int free_col = 0;
    while (is_pivot[free_col]) ++free_col;
    Vec d(nvars, Rational(0));
    d[free_col] = 1;
    for (int r = 0; r < rank; ++r) d[pivot_col[r]] = -a[r][free_col] / a[r][pivot_col[r]];
    return d;
}

Vec normalized(Vec v) {
    Rational mx = 0;
    for (const Rational& x : v) mx = std::max(mx, rabs(x));
    if (mx == 0) return v;
    for (Rational& x : v) x /= mx;
    return v;
}

constexpr size_t kProjectionBudget = 4000;

// Fourier-Motzkin elimination of every variable with index >= keep.
std::optional<std::vector<Ineq>> fourier_motzkin(std::vector<Ineq> rows, int keep, int total) {
    for (int k = total - 1; k >= keep; --k) {
        std::vector<Ineq> zero, pos, neg;
        for (Ineq& r : rows) {
            if (r.a[k] == 0)
                zero.push_back(std::move(r));
            else if (r.a[k] > 0)
                pos.push_back(std::move(r));
            else
                neg.push_back(std::move(r));
        }
        std::set<Vec> seen;
        auto push = [&](std::vector<Ineq>& out, Ineq r) {
            Rational mx = rabs(r.b);
            for (int c = 0; c < k; ++c) mx = std::max(mx, rabs(r.a[c]));
            if (mx == 0) return;  // 0 <= b with b >= 0 (0 is always feasible here)
            Vec key;
            for (int c = 0; c < k; ++c) key.push_back(r.a[c] / mx);
            key.push_back(r.b / mx);
            if (seen.insert(key).second) out.push_back(std::move(r));
        };
        std::vector<Ineq> next;
        for (Ineq& r : zero) push(next, std::move(r));
        for (const Ineq& p : pos)
            for (const Ineq& n : neg) {
                Ineq r;
                r.a.assign(total, Rational(0));
                for (int c = 0; c < k; ++c) r.a[c] = p.a[c] * (-n.a[k]) + n.a[c] * p.a[k];
                r.b = p.b * (-n.a[k]) + n.b * p.a[k];
                push(next, std::move(r));
                if (next.size() > kProjectionBudget) return std::nullopt;
            }
        rows = std::move(next);
    }
    return rows;
}

}  // namespace

TerminalPolyhedron terminal_cone_generators(const MarketModel& model) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    int L = int(t.leaves().size());
    TerminalPolyhedron out;

    // variable layout: leaf wealths, then internal wealths, then cone weights
    std::vector<int> var_of_node(t.size(), -1);
    int nv = 0;
    for (int leaf : t.leaves()) var_of_node[leaf] = nv++;
    for (int i = 1; i < t.size(); ++i)
        if (!t.is_leaf(i)) var_of_node[i] = nv++;
    std::vector<std::vector<int>> mu(t.size());
    for (int u = 0; u < t.size(); ++u)
        if (!t.is_leaf(u))
            for (size_t j = 0; j < model.cone_at(u).size(); ++j) mu[u].push_back(nv++);

    std::vector<Ineq> rows;
    auto add = [&](const Vec& a, const Rational& b) { rows.push_back({a, b}); };
    for (int i = 1; i < t.size(); ++i) {
        int p = t.parent(i);
        Vec a(nv, Rational(0));
        a[var_of_node[i]] = 1;
        if (p > 0) a[var_of_node[p]] -= 1;
        Mat gen = model.cone_at(p);
        for (size_t j = 0; j < gen.size(); ++j) a[mu[p][j]] -= step_gain(model, gen[j], i);
        add(a, Rational(0));
        for (Rational& x : a) x = -x;
        add(a, Rational(0));
        Vec fl(nv, Rational(0));
        fl[var_of_node[i]] = -1;
        add(fl, model.lambda);
    }
    for (int u = 0; u < t.size(); ++u)
        for (int v : mu[u]) {
            Vec a(nv, Rational(0));
            a[v] = -1;
            add(a, Rational(0));
        }

    auto projected = fourier_motzkin(std::move(rows), L, nv);
    if (!projected) return out;  // budget exceeded, implicit form only
    for (const Ineq& r : *projected) {
        out.A.push_back(Vec(r.a.begin(), r.a.begin() + L));
        out.b.push_back(r.b);
    }
    if (L > 3) return out;

    int m = int(out.A.size());
    auto satisfies = [&](const Vec& y) {
        for (int r = 0; r < m; ++r) {
            Rational s = 0;
            for (int c = 0; c < L; ++c) s += out.A[r][c] * y[c];
            if (s > out.b[r]) return false;
        }
        return true;
    };
    auto in_recession = [&](const Vec& d) {
        for (int r = 0; r < m; ++r) {
            Rational s = 0;
            for (int c = 0; c < L; ++c) s += out.A[r][c] * d[c];
            if (s > 0) return false;
        }
        return true;
    };
    std::set<Vec> vset, rset;
    std::vector<int> idx(L);
    auto try_vertex = [&](const std::vector<int>& pick) {
        Mat a;
        Vec b;
        for (int r : pick) {
            a.push_back(Vec(out.A[r].begin(), out.A[r].begin() + L));
            b.push_back(out.b[r]);
        }
        auto y = solve_square(a, b);
        if (y && satisfies(*y)) vset.insert(*y);
    };
    std::vector<int> pick;
    auto rec_pick = [&](auto&& self, int start, int need) -> void {
        if (need == 0) {
            try_vertex(pick);
            return;
        }
        for (int r = start; r + need <= m; ++r) {
            pick.push_back(r);
            self(self, r + 1, need - 1);
            pick.pop_back();
        }
    };
    rec_pick(rec_pick, 0, L);
    if (L == 1) {
        for (Rational s : {Rational(1), Rational(-1)}) {
            Vec d{s};
            if (in_recession(d)) rset.insert(d);
        }
    } else {
        auto try_ray = [&](const std::vector<int>& pickr) {
            Mat a;
            for (int r : pickr) a.push_back(Vec(out.A[r].begin(), out.A[r].begin() + L));
            auto d = nullspace_dir(a, L);
            if (!d) return;
            for (Rational s : {Rational(1), Rational(-1)}) {
                Vec dd = *d;
                for (Rational& x : dd) x *= s;
                if (in_recession(dd)) rset.insert(normalized(dd));
            }
        };
        auto rec_ray = [&](auto&& self, int start, int need) -> void {
            if (need == 0) {
                try_ray(pick);
                return;
            }
            for (int r = start; r + need <= m; ++r) {
                pick.push_back(r);
                self(self, r + 1, need - 1);
                pick.pop_back();
            }
        };
        rec_ray(rec_ray, 0, L - 1);
    }
    out.explicit_form = true;
    for (const Vec& y : vset) {
        TerminalVariable xi(t);
        xi.v = y;
        out.vertices.push_back(std::move(xi));
    }
    for (const Vec& d : rset) {
        TerminalVariable xi(t);
        xi.v = d;
        out.rays.push_back(std::move(xi));
    }
    return out;
}

MaximalElement maximal_element(const MarketModel& model, const TerminalVariable& f) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    for (const Rational& x : f.v)
        if (x < -model.lambda) throw MarketError("target lies below the admissibility floor");
    StrategyLp slp(model);
    std::map<int, Rational> obj;
    for (int leaf : t.leaves()) {
        slp.b.add_ge({{slp.w[leaf], Rational(1)}}, f.v[t.leaf_index(leaf)]);
        obj[slp.w[leaf]] += t.prob(leaf);
    }
    for (int i = 1; i < t.size(); ++i) slp.b.add_ge({{slp.w[i], Rational(1)}}, -model.lambda);
    slp.b.set_objective(obj);
    lp::Solution sol = slp.b.solve();
    if (sol.status == lp::Status::Infeasible) throw MarketError("no admissible terminal wealth dominates the target");
    if (sol.status == lp::Status::Unbounded)
        throw MarketError("dominating wealth is unbounded (the model admits arbitrage)");
    MaximalElement out;
    out.strategy = slp.extract_strategy(model, sol.x);
    out.h0 = TerminalVariable(t);
    for (int leaf : t.leaves()) out.h0.v[t.leaf_index(leaf)] = sol.x[slp.w[leaf]];
    return out;
}

WealthProcess fork_concatenate(const MarketModel& model, const WealthProcess& X,
                               const WealthProcess& Xtilde, int time, const std::vector<int>& A) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    if (time < 0 || time > t.horizon()) throw MarketError("fork time outside the horizon");
    for (const Rational& w : Xtilde.wealth.v)
        if (w <= -1) throw MarketError("fork target is not strictly positive");
    std::vector<char> in_a(t.size(), 0);
    for (int a : A) {
        if (t.time(a) != time) throw MarketError("fork set is not measurable at the fork time");
        in_a[a] = 1;
    }
    // anchor = the time-t ancestor, once past the fork time
    std::vector<int> anchor(t.size(), -1);
    for (int i = 0; i < t.size(); ++i) {
        if (t.time(i) == time)
            anchor[i] = i;
        else if (t.time(i) > time)
            anchor[i] = anchor[t.parent(i)];
    }
    auto vx = [&](int i) { return Rational(1) + X.wealth.v[i]; };
    auto vt = [&](int i) { return Rational(1) + Xtilde.wealth.v[i]; };
    WealthProcess out;
    out.wealth = AdaptedProcess(t);
    out.strategy.assign(model.dim(), PredictableControl(t));
    for (int i = 0; i < t.size(); ++i) {
        bool forked = anchor[i] >= 0 && in_a[anchor[i]];
        Rational value = forked ? vx(anchor[i]) / vt(anchor[i]) * vt(i) : vx(i);
        out.wealth.v[i] = value - 1;
        if (!t.is_leaf(i))
            for (int k = 0; k < model.dim(); ++k)
                out.strategy[k].v[i] =
                    forked ? vx(anchor[i]) / vt(anchor[i]) * Xtilde.strategy[k].v[i] : X.strategy[k].v[i];
    }
    for (int i = 1; i < t.size(); ++i) {
        Rational dw = out.wealth.v[i] - out.wealth.v[t.parent(i)];
        if (dw != step_gain(model, position_at(out.strategy, t.parent(i)), i))
            throw MarketError("fork strategy does not reproduce the concatenated wealth");
    }
    out.admissible = std::all_of(out.wealth.v.begin(), out.wealth.v.end(),
                                 [](const Rational& w) { return w >= -1; });
    return out;
}

WealthProcess concatenate(const MarketModel& model, const PredictableControl& H,
                          const PredictableControl& G, const WealthProcess& X,
                          const WealthProcess& Y) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    require_same_tree(model.tree, H.tree);
    require_same_tree(model.tree, G.tree);
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        if (H.v[u] < 0 || G.v[u] < 0) throw MarketError("concatenation controls must be nonnegative");
        if (H.v[u] * G.v[u] != 0) throw MarketError("concatenation controls overlap at node " + std::to_string(u));
    }
    WealthProcess out;
    out.wealth = stochastic_integral(H, X.wealth) + stochastic_integral(G, Y.wealth);
    out.strategy.assign(model.dim(), PredictableControl(t));
    for (int u = 0; u < t.size(); ++u)
        for (int k = 0; k < model.dim(); ++k)
            out.strategy[k].v[u] = H.v[u] * X.strategy[k].v[u] + G.v[u] * Y.strategy[k].v[u];
    out.admissible = std::all_of(out.wealth.v.begin(), out.wealth.v.end(),
                                 [&](const Rational& w) { return w >= -model.lambda; });
    return out;
}

}  // namespace ftaplab
