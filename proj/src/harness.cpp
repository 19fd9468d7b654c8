#include "ftaplab/harness.hpp"

#include <algorithm>
#include <sstream>

#include "ftaplab/duality.hpp"

namespace ftaplab {

namespace {

// P[ sup_t |V_t| >= a ]
Rational tail_prob_sup(const AdaptedProcess& v, const Rational& a) {
    const ScenarioTree& t = *v.tree;
    Vec runmax(t.size());
    runmax[0] = rabs(v.v[0]);
    Rational p = 0;
    for (int i = 1; i < t.size(); ++i) {
        runmax[i] = std::max(runmax[t.parent(i)], rabs(v.v[i]));
        if (t.is_leaf(i) && runmax[i] >= a) p += t.prob(i);
    }
    if (t.size() == 1 && runmax[0] >= a) p = 1;
    return p;
}

void require_supermartingale(const AdaptedProcess& s, const char* who) {
    const ScenarioTree& t = *s.tree;
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        Rational m = 0;
        for (int c : t.children(u)) m += t.node(c).cond_prob * s.v[c];
        if (m > s.v[u]) throw HarnessError(std::string(who) + ": not a supermartingale at node " + std::to_string(u));
    }
}

void require_martingale(const AdaptedProcess& s, const char* who) {
    const ScenarioTree& t = *s.tree;
    for (int u = 0; u < t.size(); ++u) {
        if (t.is_leaf(u)) continue;
        Rational m = 0;
        for (int c : t.children(u)) m += t.node(c).cond_prob * s.v[c];
        if (m != s.v[u]) throw HarnessError(std::string(who) + ": not a martingale at node " + std::to_string(u));
    }
}

void require_unit_bound(const PredictableControl& h) {
    for (const Rational& x : h.v)
        if (rabs(x) > 1) throw HarnessError("integrand exceeds the unit bound");
}

Rational terminal_expectation(const AdaptedProcess& x, const Rational& power = 1) {
    const ScenarioTree& t = *x.tree;
    Rational s = 0;
    for (int leaf : t.leaves()) s += t.prob(leaf) * (power == 2 ? x.v[leaf] * x.v[leaf] : rabs(x.v[leaf]));
    return s;
}

std::string profile_lines(const std::string& label, const PUTProfile& p) {
    std::ostringstream out;
    out << label;
    for (size_t i = 0; i < p.a_grid.size(); ++i)
        out << " " << rat_str(p.a_grid[i]) << ":" << rat_str(p.values[i]);
    if (p.lower_bound_only) out << " (lower bounds)";
    out << "\n";
    return out.str();
}

}  // namespace

ExperimentReport check_burkholder_supermartingale(const AdaptedProcess& s,
                                                  const std::vector<PredictableControl>& hs,
                                                  const Vec& a_grid) {
    for (const Rational& x : s.v)
        if (x < 0) throw HarnessError("burkholder: process is not nonnegative");
    require_supermartingale(s, "burkholder");
    ExperimentReport r;
    r.name = "burkholder-supermartingale-9";
    Rational bound = 9 * s.v[0];
    for (const PredictableControl& h : hs) {
        require_unit_bound(h);
        AdaptedProcess v = stochastic_integral(h, s);
        for (const Rational& a : a_grid) {
            if (a <= 0) continue;
            ++r.instances;
            Rational lhs = a * tail_prob_sup(v, a);
            if (s.v[0] > 0) r.worst = std::max(r.worst, Rational(lhs / s.v[0]));
            if (lhs > bound) r.violation(0, "a P exceeds 9 E[S0] at a = " + rat_str(a), bound - lhs);
        }
    }
    return r;
}

ExperimentReport check_burkholder_martingale(const AdaptedProcess& m,
                                             const std::vector<PredictableControl>& hs,
                                             const Vec& a_grid) {
    require_martingale(m, "burkholder");
    ExperimentReport r;
    r.name = "burkholder-martingale-18";
    Rational l1 = terminal_expectation(m);
    Rational bound = 18 * l1;
    for (const PredictableControl& h : hs) {
        require_unit_bound(h);
        AdaptedProcess v = stochastic_integral(h, m);
        for (const Rational& a : a_grid) {
            if (a <= 0) continue;
            ++r.instances;
            Rational lhs = a * tail_prob_sup(v, a);
            if (l1 > 0) r.worst = std::max(r.worst, Rational(lhs / l1));
            if (lhs > bound) r.violation(0, "a P exceeds 18 E|M_T| at a = " + rat_str(a), bound - lhs);
        }
    }
    return r;
}

ExperimentReport check_doob_meyer_bound(const AdaptedProcess& z, const Rational& a) {
    for (const Rational& x : z.v) {
        if (x < 0) throw HarnessError("doob-meyer: process is not nonnegative");
        if (x > a) throw HarnessError("doob-meyer: process exceeds the cap a");
    }
    require_supermartingale(z, "doob-meyer");
    ExperimentReport r;
    r.name = "doob-meyer-2a";
    r.instances = 1;
    // Z = M - A with M_0 = Z_0, A_0 = 0 increasing predictable
    DoobParts dp = doob_decomposition(z);
    const ScenarioTree& t = *z.tree;
    Rational ea2 = 0, em2 = 0;
    for (int leaf : t.leaves()) {
        Rational at = -dp.B.v[leaf];
        Rational mt = z.v[0] + dp.M.v[leaf];
        ea2 += t.prob(leaf) * at * at;
        em2 += t.prob(leaf) * mt * mt;
    }
    Rational cap = 2 * a * z.v[0];
    r.worst = std::min(Rational(em2 - ea2), Rational(cap - em2));
    if (ea2 > em2) r.violation(0, "E[A^2] exceeds E[M^2]", em2 - ea2);
    if (em2 > cap) r.violation(0, "E[M^2] exceeds 2a E[Z_0]", cap - em2);
    return r;
}

ExperimentReport experiment_nupbr_put(const MarketModel& model,
                                      const std::vector<WealthProcess>& xs, const Vec& a_grid) {
    ExperimentReport r;
    r.name = "nupbr-put";
    Deflator defl = numeraire_deflator(model);
    const ScenarioTree& t = *model.tree;

    AdaptedProcess u(t);  // 1/D
    for (int i = 0; i < t.size(); ++i) u.v[i] = 1 / defl.D.v[i];

    std::vector<AdaptedProcess> zs, wealths, t1, t2, t3;
    for (const WealthProcess& x : xs) {
        for (const Rational& w : x.wealth.v)
            if (w < -1) throw HarnessError("sequence member leaves X_1 (wealth below -1)");
        AdaptedProcess z(t);
        for (int i = 0; i < t.size(); ++i) z.v[i] = defl.D.v[i] * (1 + x.wealth.v[i]);
        IntegrationByParts ibp = integration_by_parts(u, z);
        ++r.instances;
        for (int i = 0; i < t.size(); ++i) {
            Rational lhs = 1 + x.wealth.v[i];
            Rational rhs = 1 + ibp.u_minus_dv.v[i] + ibp.v_minus_du.v[i] + ibp.bracket.v[i];
            if (lhs != rhs)
                r.violation(0, "integration-by-parts residual at node " + std::to_string(i), lhs - rhs);
        }
        zs.push_back(std::move(z));
        wealths.push_back(x.wealth);
        t1.push_back(std::move(ibp.u_minus_dv));
        t2.push_back(std::move(ibp.v_minus_du));
        t3.push_back(std::move(ibp.bracket));
    }

    auto ptrs = [](const std::vector<AdaptedProcess>& v) {
        std::vector<const AdaptedProcess*> p;
        for (const AdaptedProcess& x : v) p.push_back(&x);
        return p;
    };
    PUTProfile deflated = put_profile_sup(ptrs(zs), a_grid);
    for (size_t i = 0; i < a_grid.size(); ++i) {
        Rational lhs = a_grid[i] * deflated.values[i];
        r.worst = std::max(r.worst, lhs);
        if (lhs > 9)
            r.violation(0, "deflated tail exceeds 9/a at a = " + rat_str(a_grid[i]), Rational(9) - lhs);
    }
    r.note = profile_lines("profile X:", put_profile_sup(ptrs(wealths), a_grid)) +
             profile_lines("profile (1/D)_-.Z:", put_profile_sup(ptrs(t1), a_grid)) +
             profile_lines("profile Z_-.(1/D):", put_profile_sup(ptrs(t2), a_grid)) +
             profile_lines("profile [1/D,Z]:", put_profile_sup(ptrs(t3), a_grid)) +
             profile_lines("profile D(1+X):", deflated);
    return r;
}

ExperimentReport experiment_memin_slominski(const std::vector<AdaptedProcess>& xs,
                                            const AdaptedProcess& x, const Rational& tolerance) {
    if (xs.empty()) throw HarnessError("empty sequence");
    ExperimentReport r;
    r.name = "memin-slominski";
    Rational prev = -1;
    for (size_t n = 0; n < xs.size(); ++n) {
        Rational d = ucp_distance(xs[n], x);
        if (prev >= 0 && d > prev)
            throw HarnessError("ucp distances are not nonincreasing at index " + std::to_string(n));
        prev = d;
    }
    if (prev > tolerance) throw HarnessError("sequence does not reach the ucp threshold");

    std::vector<const AdaptedProcess*> all{&x};
    for (const AdaptedProcess& xn : xs) all.push_back(&xn);
    Rational c = jump_threshold(all);
    Decomposition lim = big_jump_split(x, c);
    Rational last_m = 0, last_b = 0, last_tv = 0;
    for (size_t n = 0; n < xs.size(); ++n) {
        Decomposition dn = big_jump_split(xs[n], c);
        ++r.instances;
        last_m = emery_distance(dn.M, lim.M, tolerance / 4).upper();
        last_b = ucp_distance(dn.B, lim.B);
        last_tv = terminal_expectation(variation(dn.Xcheck - lim.Xcheck, VariationKind::Total));
    }
    std::ostringstream note;
    note << "threshold C = " << rat_str(c) << "\n"
         << "final M emery upper = " << rat_str(last_m) << "\n"
         << "final B ucp = " << rat_str(last_b) << "\n"
         << "final Xcheck TV = " << rat_str(last_tv) << "\n";
    r.note = note.str();
    r.worst = std::max(last_m, std::max(last_b, last_tv));
    if (last_m > tolerance) r.violation(0, "M-part emery upper bound above tolerance", tolerance - last_m);
    if (last_b > tolerance) r.violation(0, "B-part ucp distance above tolerance", tolerance - last_b);
    if (last_tv > tolerance) r.violation(0, "Xcheck TV distance above tolerance", tolerance - last_tv);
    return r;
}

ExperimentReport experiment_emery_convergence(const MarketModel& model,
                                              const std::vector<AdaptedProcess>& xs,
                                              const AdaptedProcess& x, const Rational& tolerance) {
    if (xs.empty()) throw HarnessError("empty sequence");
    ExperimentReport r;
    r.name = "emery-convergence";
    TerminalVariable xt = terminal_of(x);
    MaximalElement m = maximal_element(model, xt);
    bool maximal = m.h0.v == xt.v;
    if (!maximal) {
        std::ostringstream what;
        what << "limit terminal is not maximal; dominated by";
        for (const Rational& v : m.h0.v) what << " " << rat_str(v);
        r.violation(0, what.str(), expectation(xt) - expectation(m.h0));
    }
    Rational last = 0;
    for (const AdaptedProcess& xn : xs) {
        ++r.instances;
        last = emery_distance(xn, x, tolerance / 4).upper();
    }
    r.worst = last;
    if (last > tolerance) r.violation(0, "emery upper bound above tolerance at the last index", tolerance - last);
    Rational c = jump_threshold({&xs.back(), &x});
    Decomposition dn = big_jump_split(xs.back(), c);
    Decomposition dl = big_jump_split(x, c);
    std::ostringstream note;
    note << "final emery upper = " << rat_str(last) << "\n"
         << "residual B part (ucp) = " << rat_str(ucp_distance(dn.B, dl.B)) << "\n"
         << "residual M part (emery upper) = " << rat_str(emery_distance(dn.M, dl.M, tolerance / 4).upper())
         << "\n"
         << "residual Xcheck part (TV) = "
         << rat_str(terminal_expectation(variation(dn.Xcheck - dl.Xcheck, VariationKind::Total))) << "\n";
    r.note = note.str();
    return r;
}

ExperimentReport check_put_characterization(const std::vector<const AdaptedProcess*>& family,
                                            const Vec& a_grid, const Rational& eta) {
    ExperimentReport r;
    r.name = "put-characterization";
    PUTProfile profile = put_profile_sup(family, a_grid);
    for (size_t i = 1; i < profile.values.size(); ++i)
        if (profile.values[i] > profile.values[i - 1])
            r.violation(0, "profile not monotone at a = " + rat_str(a_grid[i]),
                        profile.values[i - 1] - profile.values[i]);

    Rational c = jump_threshold(family);
    std::vector<TerminalVariable> tv_check, qv_m, tv_b, tv_m, tv_total;
    for (const AdaptedProcess* xp : family) {
        Decomposition d = big_jump_split(*xp, c);
        TerminalVariable a = terminal_of(variation(d.Xcheck, VariationKind::Total));
        TerminalVariable b = terminal_of(variation(d.B, VariationKind::Total));
        TerminalVariable mq = terminal_of(variation(d.M, VariationKind::Quadratic));
        TerminalVariable mt = terminal_of(variation(d.M, VariationKind::Total));
        TerminalVariable tot(*xp->tree);
        for (size_t k = 0; k < tot.v.size(); ++k) tot.v[k] = a.v[k] + b.v[k] + mt.v[k];
        tv_check.push_back(std::move(a));
        tv_b.push_back(std::move(b));
        qv_m.push_back(std::move(mq));
        tv_m.push_back(std::move(mt));
        tv_total.push_back(std::move(tot));
    }

    // |H.X|* <= TV(X) pathwise, so the profile sits below the TV tails
    for (size_t i = 0; i < a_grid.size(); ++i) {
        ++r.instances;
        Rational bound = 0;
        for (const TerminalVariable& tot : tv_total) {
            Rational p = 0;
            for (size_t k = 0; k < tot.v.size(); ++k)
                if (tot.v[k] >= a_grid[i]) p += tot.tree->prob(tot.tree->leaves()[k]);
            bound = std::max(bound, p);
        }
        if (profile.values[i] > bound)
            r.violation(0, "profile exceeds the TV tail at a = " + rat_str(a_grid[i]),
                        bound - profile.values[i]);
    }

    Rational qx = l0_quantile(tv_check, eta);
    Rational qb = l0_quantile(tv_b, eta);
    Rational qm = l0_quantile(tv_m, eta);
    Rational qm_qv = l0_quantile(qv_m, eta);
    Rational a_star = qx + qb + qm + 1;
    PUTProfile linked = put_profile_sup(family, Vec{a_star});
    ++r.instances;
    if (linked.values[0] > 3 * eta)
        r.violation(0, "union-bound linkage fails at a = " + rat_str(a_star), 3 * eta - linked.values[0]);
    r.worst = linked.values[0];
    std::ostringstream note;
    note << "threshold C = " << rat_str(c) << ", eta = " << rat_str(eta) << "\n"
         << "quantiles: TV(Xcheck) = " << rat_str(qx) << ", [M,M] = " << rat_str(qm_qv)
         << ", TV(B) = " << rat_str(qb) << "\n"
         << profile_lines("profile:", profile);
    r.note = note.str();
    return r;
}

ExperimentReport check_slicing_lemma(const AdaptedProcess& n, const Rational& eps,
                                     const Rational& alpha) {
    const ScenarioTree& t = *n.tree;
    if (eps <= 0 || alpha <= 0) throw HarnessError("slicing parameters must be positive");
    for (int i = 1; i < t.size(); ++i)
        if (rabs(n.v[i] - n.v[t.parent(i)]) > eps) throw HarnessError("slicing: a jump exceeds eps");
    require_martingale(n, "slicing");
    ExperimentReport r;
    r.name = "slicing-lemma";
    if (n.v[0] != 0) throw HarnessError("slicing: martingale must start at 0");
    Rational hyp = tail_prob_sup(n, Rational(1));
    if (hyp < 6 * alpha) {
        r.skipped = true;
        r.note = "hypothesis unmet: P[|N|* >= 1] = " + rat_str(hyp) + " < 6 alpha = " + rat_str(6 * alpha) + "\n";
        return r;
    }
    std::vector<StoppingTime> times = slicing_times(n, eps);
    Rational k_rat = alpha / (2 * eps);
    long k = (rat_num(k_rat) / rat_den(k_rat)).convert_to<long>();
    r.note = "k = " + std::to_string(k) + ", slicing times found: " + std::to_string(times.size()) + "\n";
    bool first = true;
    for (long i = 1; i <= k; ++i) {
        ++r.instances;
        Rational p = 0;
        for (int leaf : t.leaves()) {
            auto stopped_value = [&](long idx) {
                if (idx >= long(times.size())) return n.v[leaf];
                int hit = times[idx].first_hit(leaf);
                return hit < 0 ? n.v[leaf] : n.v[hit];
            };
            Rational f = stopped_value(i) - stopped_value(i - 1);
            if (f < -alpha * eps) p += t.prob(leaf);
        }
        Rational margin = p - alpha;
        if (first || margin < r.worst) r.worst = margin;
        first = false;
        if (margin < 0) r.violation(0, "slice " + std::to_string(i) + " drop probability below alpha", margin);
    }
    return r;
}

ExperimentReport check_put_integral_stability(const std::vector<const AdaptedProcess*>& s_family,
                                              const std::vector<const AdaptedProcess*>& h_family,
                                              const Vec& c_grid, const Vec& k_grid) {
    if (s_family.size() != h_family.size()) throw HarnessError("family sizes differ");
    ExperimentReport r;
    r.name = "put-integral-stability";
    std::vector<AdaptedProcess> integrals;
    std::vector<TerminalVariable> h_sups;
    for (size_t n = 0; n < s_family.size(); ++n) {
        require_same_tree(s_family[n]->tree, h_family[n]->tree);
        const ScenarioTree& t = *s_family[n]->tree;
        PredictableControl ctrl(t);
        ctrl.v = h_family[n]->v;
        integrals.push_back(stochastic_integral(ctrl, *s_family[n]));
        // |H|*_1 as a terminal variable
        Vec runmax(t.size());
        runmax[0] = rabs(h_family[n]->v[0]);
        TerminalVariable sup(t);
        for (int i = 1; i < t.size(); ++i) {
            runmax[i] = std::max(runmax[t.parent(i)], rabs(h_family[n]->v[i]));
            if (t.is_leaf(i)) sup.v[t.leaf_index(i)] = runmax[i];
        }
        if (t.size() == 1) sup.v[0] = runmax[0];
        h_sups.push_back(std::move(sup));
    }
    std::vector<const AdaptedProcess*> integral_ptrs;
    for (const AdaptedProcess& x : integrals) integral_ptrs.push_back(&x);

    PUTProfile ps = put_profile_sup(s_family, c_grid);
    bool first = true;
    for (size_t ci = 0; ci < c_grid.size(); ++ci)
        for (const Rational& k : k_grid) {
            if (k <= 0) continue;
            ++r.instances;
            Rational tail = 0;
            for (const TerminalVariable& sup : h_sups) {
                Rational p = 0;
                for (size_t l = 0; l < sup.v.size(); ++l)
                    if (sup.v[l] > k) p += sup.tree->prob(sup.tree->leaves()[l]);
                tail = std::max(tail, p);
            }
            PUTProfile pi = put_profile_sup(integral_ptrs, Vec{c_grid[ci] * k});
            Rational margin = ps.values[ci] + tail - pi.values[0];
            if (first || margin < r.worst) r.worst = margin;
            first = false;
            if (margin < 0)
                r.violation(0,
                            "profile(Ck) exceeds profile_S(C) + tail(k) at C = " + rat_str(c_grid[ci]) +
                                ", k = " + rat_str(k),
                            margin);
        }
    return r;
}

std::string format_report(const ExperimentReport& r) {
    std::ostringstream out;
    out << "experiment: " << r.name << "\n"
        << "instances: " << r.instances << "\n"
        << "status: " << (r.skipped ? "skipped" : r.pass() ? "pass" : "FAIL") << "\n"
        << "worst: " << rat_str(r.worst) << "\n";
    size_t shown = 0;
    for (const auto& v : r.violations) {
        if (++shown > 10) {
            out << "violation: ... " << (r.violations.size() - 10) << " more\n";
            break;
        }
        out << "violation: seed " << v.seed << ": " << v.what << " (slack " << rat_str(v.slack) << ")\n";
    }
    if (!r.note.empty()) out << r.note;
    return out.str();
}

}  // namespace ftaplab
