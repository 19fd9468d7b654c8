#include "ftaplab/duality.hpp"

#include <algorithm>
#include <cmath>

#include "ftaplab/lp.hpp"

namespace ftaplab {

namespace {

Rational gain(const MarketModel& model, const Vec& r, int child) {
    int p = model.tree->parent(child);
    Rational g = 0;
    for (int k = 0; k < model.dim(); ++k) g += r[k] * (model.S[k].v[child] - model.S[k].v[p]);
    return g;
}

// leaves below each node, as leaf indices
std::vector<std::vector<int>> leaves_below(const ScenarioTree& t) {
    std::vector<std::vector<int>> below(t.size());
    for (int i = t.size() - 1; i >= 0; --i) {
        if (t.is_leaf(i)) {
            below[i].push_back(t.leaf_index(i));
            continue;
        }
        for (int c : t.children(i))
            below[i].insert(below[i].end(), below[c].begin(), below[c].end());
    }
    return below;
}

// rows "sum_children Q(c) <r, dS_c> <= 0" for every node and generator,
// where Q(c) aggregates the given per-leaf variables
void add_separating_rows(lp::Builder& b, const MarketModel& model, const std::vector<int>& leaf_var,
                         const Vec& leaf_scale, const std::vector<std::vector<int>>& below) {
    const ScenarioTree& t = *model.tree;
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        for (const Vec& r : model.cone_at(u)) {
            std::map<int, Rational> row;
            for (int c : t.children(u)) {
                Rational g = gain(model, r, c);
                if (g == 0) continue;
                for (int leaf : below[c]) row[leaf_var[leaf]] += g * leaf_scale[leaf];
            }
            if (!row.empty()) b.add_le(row, Rational(0));
        }
    }
}

}  // namespace

EsmResult esm_exists(const MarketModel& model) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    auto below = leaves_below(t);
    int L = int(t.leaves().size());

    lp::Builder b;
    std::vector<int> q(L);
    for (int i = 0; i < L; ++i) q[i] = b.add_var(true);
    int tv = b.add_var(false);
    std::map<int, Rational> total;
    for (int i = 0; i < L; ++i) total[q[i]] = 1;
    b.add_eq(total, Rational(1));
    add_separating_rows(b, model, q, Vec(L, Rational(1)), below);
    for (int i = 0; i < L; ++i)
        b.add_ge({{q[i], Rational(1)}, {tv, -t.prob(t.leaves()[i])}}, Rational(0));
    b.set_objective({{tv, Rational(1)}});
    lp::Solution sol = b.solve();

    EsmResult out;
    if (sol.status == lp::Status::Optimal && sol.objective > 0) {
        out.exists = true;
        out.min_ratio = sol.objective;
        out.measure.density = TerminalVariable(t);
        out.measure.q_probs.resize(L);
        for (int i = 0; i < L; ++i) {
            out.measure.q_probs[i] = sol.x[q[i]];
            out.measure.density.v[i] = sol.x[q[i]] / t.prob(t.leaves()[i]);
        }
        verify_separating_measure(model, out.measure);
        return out;
    }
    out.exists = false;
    if (sol.status == lp::Status::Optimal) out.min_ratio = sol.objective;
    ArbitrageCheck na = check_NA(model);
    if (!na.holds) {
        out.free_lunch = na.certificate;
        return out;
    }
    ArbitrageCheck nupbr = check_NUPBR(model);
    if (!nupbr.holds) {
        out.free_lunch = nupbr.certificate;
        return out;
    }
    throw DualityError("internal error: no separating measure yet no arbitrage certificate");
}

void verify_separating_measure(const MarketModel& model, const SeparatingMeasure& m) {
    const ScenarioTree& t = *model.tree;
    int L = int(t.leaves().size());
    if (int(m.density.v.size()) != L || int(m.q_probs.size()) != L)
        throw DualityError("separating measure has wrong size");
    Rational total = 0;
    for (int i = 0; i < L; ++i) {
        if (m.density.v[i] <= 0) throw DualityError("separating density vanishes on an atom");
        if (m.q_probs[i] != m.density.v[i] * t.prob(t.leaves()[i]))
            throw DualityError("separating density and measure disagree");
        total += m.q_probs[i];
    }
    if (total != 1) throw DualityError("separating measure does not normalize");
    auto below = leaves_below(t);
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        for (const Vec& r : model.cone_at(u)) {
            Rational s = 0;
            for (int c : t.children(u)) {
                Rational qc = 0;
                for (int leaf : below[c]) qc += m.q_probs[leaf];
                s += qc * gain(model, r, c);
            }
            if (s > 0) throw DualityError("separating measure fails at node " + std::to_string(u));
        }
    }
}

KrepsYanResult kreps_yan_construct(const MarketModel& model) {
    model.validate();
    const ScenarioTree& t = *model.tree;
    auto below = leaves_below(t);
    int L = int(t.leaves().size());
    Vec p(L);
    for (int i = 0; i < L; ++i) p[i] = t.prob(t.leaves()[i]);

    KrepsYanResult out;
    std::vector<Vec> separators;
    for (int i = 0; i < L; ++i) {
        lp::Builder b;
        std::vector<int> z(L);
        for (int j = 0; j < L; ++j) z[j] = b.add_var(true);
        std::map<int, Rational> norm;
        for (int j = 0; j < L; ++j) norm[z[j]] = p[j];
        b.add_eq(norm, Rational(1));
        add_separating_rows(b, model, z, p, below);
        b.set_objective({{z[i], Rational(1)}});
        lp::Solution sol = b.solve();
        if (sol.status == lp::Status::Infeasible) {
            out.infeasible = true;
            out.failed_atom = i;
            return out;
        }
        if (sol.status != lp::Status::Optimal) throw DualityError("atom LP did not reach an optimum");
        out.atom_optima.push_back(sol.objective);
        if (sol.objective == 0) {
            out.failed_atom = i;
            return out;
        }
        Vec zi(L);
        for (int j = 0; j < L; ++j) zi[j] = sol.x[z[j]];
        separators.push_back(std::move(zi));
    }
    // Z = sum 2^-(i+1) z_i, renormalized to E[Z] = 1
    Vec Z(L, Rational(0));
    Rational weight_total = 0, w = Rational(1, 2);
    for (int i = 0; i < L; ++i, w /= 2) {
        for (int j = 0; j < L; ++j) Z[j] += w * separators[i][j];
        weight_total += w;
    }
    for (int j = 0; j < L; ++j) Z[j] /= weight_total;
    out.success = true;
    out.measure.density = TerminalVariable(t);
    out.measure.density.v = Z;
    out.measure.q_probs.resize(L);
    for (int j = 0; j < L; ++j) out.measure.q_probs[j] = Z[j] * p[j];
    verify_separating_measure(model, out.measure);
    return out;
}

namespace {

struct NodeProblem {
    Vec cond;         // child conditional probabilities
    Mat child_gain;   // [generator][child]
    Mat generators;   // cone rays at the node
    int dim;
};

// exact first-order certificate for a candidate cone position phi:
// children survive (1 + gain > 0), every generator direction has
// nonpositive derivative, and the radial direction has nonnegative one
bool certify_position(const NodeProblem& np, const Vec& phi_gain) {
    int C = int(np.cond.size());
    for (int c = 0; c < C; ++c)
        if (1 + phi_gain[c] <= 0) return false;
    Rational radial = 0;
    for (int c = 0; c < C; ++c) radial += np.cond[c] * phi_gain[c] / (1 + phi_gain[c]);
    if (radial < 0) return false;
    for (size_t j = 0; j < np.generators.size(); ++j) {
        Rational deriv = 0;
        for (int c = 0; c < C; ++c) deriv += np.cond[c] * np.child_gain[j][c] / (1 + phi_gain[c]);
        if (deriv > 0) return false;
    }
    return true;
}

}  // namespace

Deflator numeraire_deflator(const MarketModel& model) {
    model.validate();
    if (!check_NUPBR(model).holds)
        throw DualityError("no deflator: the model admits scalable arbitrage");
    const ScenarioTree& t = *model.tree;
    Deflator out;
    out.D = AdaptedProcess(t, Rational(1));
    out.numeraire_strategy.assign(model.dim(), PredictableControl(t));
    out.strategy_certified = true;

    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        NodeProblem np;
        np.dim = model.dim();
        np.generators = model.cone_at(u);
        for (int c : t.children(u)) np.cond.push_back(t.node(c).cond_prob);
        int C = int(np.cond.size());
        np.child_gain.assign(np.generators.size(), Vec(C));
        for (size_t j = 0; j < np.generators.size(); ++j)
            for (int ci = 0; ci < C; ++ci)
                np.child_gain[j][ci] = gain(model, np.generators[j], t.children(u)[ci]);

        // floating-point projected gradient ascent on the cone weights
        int G = int(np.generators.size());
        std::vector<std::vector<double>> gd(G, std::vector<double>(C));
        std::vector<double> pd(C);
        for (int ci = 0; ci < C; ++ci) pd[ci] = rat_dbl(np.cond[ci]);
        for (int j = 0; j < G; ++j)
            for (int ci = 0; ci < C; ++ci) gd[j][ci] = rat_dbl(np.child_gain[j][ci]);
        auto value = [&](const std::vector<double>& mu) {
            double f = 0;
            for (int ci = 0; ci < C; ++ci) {
                double v = 1;
                for (int j = 0; j < G; ++j) v += mu[j] * gd[j][ci];
                if (v <= 1e-12) return -1e100;
                f += pd[ci] * std::log(v);
            }
            return f;
        };
        std::vector<double> mu(G, 0.0);
        double fcur = value(mu);
        for (int iter = 0; iter < 300; ++iter) {
            std::vector<double> grad(G, 0.0), v(C, 1.0);
            for (int ci = 0; ci < C; ++ci)
                for (int j = 0; j < G; ++j) v[ci] += mu[j] * gd[j][ci];
            for (int j = 0; j < G; ++j)
                for (int ci = 0; ci < C; ++ci) grad[j] += pd[ci] * gd[j][ci] / v[ci];
            double step = 1.0;
            bool moved = false;
            while (step > 1e-14) {
                std::vector<double> trial(G);
                for (int j = 0; j < G; ++j) trial[j] = std::max(0.0, mu[j] + step * grad[j]);
                double ft = value(trial);
                if (ft > fcur + 1e-15) {
                    mu = trial;
                    fcur = ft;
                    moved = true;
                    break;
                }
                step /= 2;
            }
            if (!moved) break;
        }

        // round the ascent result and certify exactly at growing precision
        bool certified = false;
        Vec phi_gain(C);
        for (long den : {1L, 2L, 3L, 4L, 6L, 8L, 12L, 16L, 24L, 64L, 1024L, 1000000L}) {
            Vec mur(G);
            for (int j = 0; j < G; ++j) mur[j] = std::max(Rational(0), rat_approx(mu[j], den));
            for (int ci = 0; ci < C; ++ci) {
                phi_gain[ci] = 0;
                for (int j = 0; j < G; ++j) phi_gain[ci] += mur[j] * np.child_gain[j][ci];
            }
            if (certify_position(np, phi_gain)) {
                certified = true;
                for (int j = 0; j < G; ++j)
                    for (int k = 0; k < model.dim(); ++k)
                        out.numeraire_strategy[k].v[u] += mur[j] * np.generators[j][k];
                for (int ci = 0; ci < C; ++ci)
                    out.D.v[t.children(u)[ci]] = out.D.v[u] / (1 + phi_gain[ci]);
                break;
            }
        }
        if (!certified) {
            // irrational log-optimum: the one-period density LP still yields
            // an exact deflator ratio (no certified strategy at this node)
            out.strategy_certified = false;
            lp::Builder b;
            std::vector<int> q(C);
            for (int ci = 0; ci < C; ++ci) q[ci] = b.add_var(true);
            int tv = b.add_var(false);
            std::map<int, Rational> norm;
            for (int ci = 0; ci < C; ++ci) norm[q[ci]] = 1;
            b.add_eq(norm, Rational(1));
            for (int j = 0; j < G; ++j) {
                std::map<int, Rational> row;
                for (int ci = 0; ci < C; ++ci)
                    if (np.child_gain[j][ci] != 0) row[q[ci]] += np.child_gain[j][ci];
                if (!row.empty()) b.add_le(row, Rational(0));
            }
            for (int ci = 0; ci < C; ++ci) b.add_ge({{q[ci], Rational(1)}, {tv, -np.cond[ci]}}, Rational(0));
            b.set_objective({{tv, Rational(1)}});
            lp::Solution sol = b.solve();
            if (sol.status != lp::Status::Optimal || sol.objective <= 0)
                throw DualityError("internal error: NUPBR holds but a node density LP failed");
            for (int ci = 0; ci < C; ++ci)
                out.D.v[t.children(u)[ci]] = out.D.v[u] * sol.x[q[ci]] / np.cond[ci];
        }
    }
    DeflatorReport report = verify_deflator(model, out);
    if (!report.ok) throw DualityError("internal error: constructed deflator fails verification");
    return out;
}

DeflatorReport verify_deflator(const MarketModel& model, const Deflator& d) {
    const ScenarioTree& t = *model.tree;
    DeflatorReport out;
    out.ok = true;
    auto flag = [&](const std::string& msg, const Rational& slack) {
        out.ok = false;
        out.violations.push_back(msg + " (slack " + rat_str(slack) + ")");
        out.worst_slack = std::min(out.worst_slack, slack);
    };
    for (int i = 0; i < t.size(); ++i)
        if (d.D.v[i] <= 0) flag("deflator not strictly positive at node " + std::to_string(i), d.D.v[i]);
    if (d.D.v[0] > 1) flag("D_0 exceeds 1", Rational(1) - d.D.v[0]);
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        Rational cond_mean = 0;
        for (int c : t.children(u)) cond_mean += t.node(c).cond_prob * d.D.v[c];
        if (cond_mean > d.D.v[u])
            flag("supermartingale property fails at node " + std::to_string(u), d.D.v[u] - cond_mean);
        Mat gens = model.cone_at(u);
        for (size_t j = 0; j < gens.size(); ++j) {
            Rational s = 0;
            for (int c : t.children(u)) s += t.node(c).cond_prob * d.D.v[c] * gain(model, gens[j], c);
            if (s > 0)
                flag("deflated gain positive at node " + std::to_string(u) + " generator " + std::to_string(j), -s);
        }
    }
    return out;
}

}  // namespace ftaplab
