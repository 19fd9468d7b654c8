#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ftaplab/harness.hpp"

using namespace ftaplab;

namespace {

// recombining-style positive supermartingale: halves or stays
AdaptedProcess drifting_down(const ScenarioTree& t) {
    AdaptedProcess s(t, rat(1));
    for (int i = 1; i < t.size(); ++i) {
        bool up = t.children(t.parent(i))[0] == i;
        s.v[i] = s.v[t.parent(i)] * (up ? rat(1) : rat(1, 2));
    }
    return s;
}

std::vector<PredictableControl> sign_controls(const ScenarioTree& t) {
    std::vector<PredictableControl> hs;
    hs.emplace_back(t, rat(1));
    hs.emplace_back(t, rat(-1));
    PredictableControl alt(t);
    for (int i = 0; i < t.size(); ++i)
        if (!t.is_leaf(i)) alt.v[i] = t.time(i) % 2 == 0 ? rat(1) : rat(-1);
    hs.push_back(alt);
    return hs;
}

}  // namespace

TEST_CASE("burkholder supermartingale bound") {
    ScenarioTree t = ScenarioTree::binary(3, rat(1, 2));
    AdaptedProcess s = drifting_down(t);
    ExperimentReport r = check_burkholder_supermartingale(s, sign_controls(t),
                                                          Vec{rat(1, 4), rat(1), rat(4)});
    CHECK(r.pass());
    CHECK(r.worst <= rat(9));
    CHECK(r.instances > 0);

    SUBCASE("constant process: ratios stay tiny") {
        AdaptedProcess c(t, rat(1));
        ExperimentReport rc =
            check_burkholder_supermartingale(c, sign_controls(t), Vec{rat(1), rat(2)});
        CHECK(rc.pass());
        CHECK(rc.worst == rat(0));  // H.c vanishes
    }
    SUBCASE("negative input is an error") {
        AdaptedProcess neg(t, rat(-1));
        CHECK_THROWS_AS(check_burkholder_supermartingale(neg, sign_controls(t), Vec{rat(1)}),
                        HarnessError);
    }
}

TEST_CASE("burkholder martingale bound") {
    ScenarioTree t = ScenarioTree::binary(3, rat(1, 3));
    AdaptedProcess m(t);
    for (int i = 1; i < t.size(); ++i) {
        bool up = t.children(t.parent(i))[0] == i;
        m.v[i] = m.v[t.parent(i)] + (up ? rat(2) : rat(-1));  // p = 1/3 balances
    }
    ExperimentReport r =
        check_burkholder_martingale(m, sign_controls(t), Vec{rat(1, 2), rat(1), rat(3), rat(10)});
    CHECK(r.pass());
    CHECK(r.worst <= rat(18));

    AdaptedProcess drift(t);
    for (int i = 1; i < t.size(); ++i) drift.v[i] = drift.v[t.parent(i)] + 1;
    CHECK_THROWS_AS(check_burkholder_martingale(drift, sign_controls(t), Vec{rat(1)}),
                    HarnessError);
}

TEST_CASE("doob-meyer square bound") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    SUBCASE("strictly decreasing supermartingale") {
        AdaptedProcess z(t);
        for (int i = 0; i < t.size(); ++i) z.v[i] = rat(4 - t.time(i), 4);
        ExperimentReport r = check_doob_meyer_bound(z, rat(1));
        CHECK(r.pass());
    }
    SUBCASE("kill-on-down example Z = (1, ..., 0)") {
        AdaptedProcess z(t, rat(1));
        for (int i = 1; i < t.size(); ++i) {
            bool up = t.children(t.parent(i))[0] == i;
            z.v[i] = up ? z.v[t.parent(i)] : rat(0);
        }
        ExperimentReport r = check_doob_meyer_bound(z, rat(1));
        CHECK(r.pass());
    }
    SUBCASE("violated hypotheses throw") {
        AdaptedProcess z(t, rat(2));
        CHECK_THROWS_AS(check_doob_meyer_bound(z, rat(1)), HarnessError);  // Z > a
        AdaptedProcess grow(t);
        for (int i = 0; i < t.size(); ++i) grow.v[i] = rat(t.time(i), 4);
        CHECK_THROWS_AS(check_doob_meyer_bound(grow, rat(1)), HarnessError);  // submartingale
    }
}

TEST_CASE("nupbr put experiment") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    MarketModel m(t, 1);
    m.S[0].v[0] = rat(1);
    for (int i = 1; i < t.size(); ++i) {
        bool up = t.children(t.parent(i))[0] == i;
        m.S[0].v[i] = m.S[0].v[t.parent(i)] * (up ? rat(2) : rat(1, 2));
    }
    std::vector<WealthProcess> xs;
    for (int k = 1; k <= 4; ++k) {
        std::vector<PredictableControl> h{PredictableControl(t, rat(1, k))};
        xs.push_back(wealth(m, h));
    }
    ExperimentReport r = experiment_nupbr_put(m, xs, Vec{rat(2), rat(8), rat(32)});
    CHECK(r.pass());
    CHECK(r.instances == 4);
}

TEST_CASE("memin-slominski trend") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    AdaptedProcess x(t);
    for (int i = 1; i < t.size(); ++i) {
        bool up = t.children(t.parent(i))[0] == i;
        x.v[i] = x.v[t.parent(i)] + (up ? rat(1, 8) : rat(-1, 8));
    }
    SUBCASE("constant sequence converges with zero gaps") {
        std::vector<AdaptedProcess> xs(4, x);
        ExperimentReport r = experiment_memin_slominski(xs, x, rat(1, 100));
        CHECK(r.pass());
        CHECK(r.worst == rat(0));
    }
    SUBCASE("geometric approach passes a loose tolerance") {
        std::vector<AdaptedProcess> xs;
        for (int n = 1; n <= 6; ++n) {
            AdaptedProcess xn = x;
            for (int i = 1; i < t.size(); ++i) xn.v[i] += rat(1, 1 << n);
            xs.push_back(xn);
        }
        CHECK(experiment_memin_slominski(xs, x, rat(1, 4)).pass());
        // too-tight threshold is a precondition failure, not a test verdict
        CHECK_THROWS_AS(experiment_memin_slominski(xs, x, rat(1, 1000)), HarnessError);
    }
}

TEST_CASE("emery convergence to a maximal element") {
    ScenarioTree t = ScenarioTree::binary(1, rat(1, 2));
    MarketModel m(t, 1);
    m.S[0].v = {rat(1), rat(2), rat(1, 2)};
    std::vector<PredictableControl> half{PredictableControl(t, rat(1, 2))};
    AdaptedProcess kelly = wealth(m, half).wealth;
    std::vector<AdaptedProcess> xs;
    for (int n = 1; n <= 5; ++n) {
        std::vector<PredictableControl> h{PredictableControl(t, rat(1, 2) - rat(1, 8 * n))};
        xs.push_back(wealth(m, h).wealth);
    }
    ExperimentReport r = experiment_emery_convergence(m, xs, kelly, rat(1, 8));
    CHECK(r.pass());

    SUBCASE("a dominated limit is flagged") {
        // long-only cone, S always drops: NA holds, but holding the asset is
        // strictly dominated by doing nothing
        MarketModel drop(t, 1);
        drop.S[0].v = {rat(1), rat(1, 2), rat(1, 4)};
        drop.cones[0] = {Vec{rat(1)}};
        std::vector<PredictableControl> hold{PredictableControl(t, rat(1))};
        AdaptedProcess lim = wealth(drop, hold).wealth;  // terminal {-1/2, -3/4}
        std::vector<AdaptedProcess> seq(3, lim);
        ExperimentReport bad = experiment_emery_convergence(drop, seq, lim, rat(1, 8));
        CHECK(!bad.pass());
        CHECK(!bad.violations.empty());
    }
}

TEST_CASE("put characterization") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    SUBCASE("zero family is trivially P-UT") {
        AdaptedProcess z(t);
        ExperimentReport r =
            check_put_characterization({&z}, Vec{rat(1), rat(2)}, rat(1, 8));
        CHECK(r.pass());
    }
    SUBCASE("bounded-jump family") {
        std::vector<AdaptedProcess> store;
        for (int n = 1; n <= 3; ++n) {
            AdaptedProcess x(t);
            for (int i = 1; i < t.size(); ++i) {
                bool up = t.children(t.parent(i))[0] == i;
                x.v[i] = x.v[t.parent(i)] + (up ? rat(1, n) : rat(-1, n));
            }
            store.push_back(x);
        }
        std::vector<const AdaptedProcess*> fam;
        for (const AdaptedProcess& x : store) fam.push_back(&x);
        ExperimentReport r =
            check_put_characterization(fam, Vec{rat(1, 2), rat(1), rat(4)}, rat(1, 8));
        CHECK(r.pass());
        CHECK(!format_report(r).empty());
    }
}

TEST_CASE("slicing lemma") {
    ScenarioTree t = ScenarioTree::binary(6, rat(1, 2));
    AdaptedProcess n(t);
    for (int i = 1; i < t.size(); ++i) {
        bool up = t.children(t.parent(i))[0] == i;
        n.v[i] = n.v[t.parent(i)] + (up ? rat(1, 4) : rat(-1, 4));
    }
    SUBCASE("hypothesis fails on a tame walk: skipped, not failed") {
        ExperimentReport r = check_slicing_lemma(n, rat(1, 4), rat(1, 3));
        CHECK(r.skipped);
        CHECK(r.violations.empty());
    }
    SUBCASE("small alpha gives k = 0 and a vacuous pass") {
        ExperimentReport r = check_slicing_lemma(n, rat(1, 4), rat(1, 100));
        if (!r.skipped) CHECK(r.pass());
    }
    SUBCASE("input validation") {
        AdaptedProcess off(t, rat(1));
        CHECK_THROWS_AS(check_slicing_lemma(off, rat(1, 4), rat(1, 8)), HarnessError);  // N0 != 0
        CHECK_THROWS_AS(check_slicing_lemma(n, rat(1, 8), rat(1, 8)), HarnessError);  // |dN| > eps
    }
}

TEST_CASE("put integral stability") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    AdaptedProcess s(t);
    for (int i = 1; i < t.size(); ++i) {
        bool up = t.children(t.parent(i))[0] == i;
        s.v[i] = s.v[t.parent(i)] + (up ? rat(1) : rat(-1));
    }
    SUBCASE("unit integrand: profile shifts are controlled") {
        AdaptedProcess h(t, rat(1));
        ExperimentReport r = check_put_integral_stability({&s}, {&h}, Vec{rat(1), rat(2)},
                                                          Vec{rat(1), rat(2)});
        CHECK(r.pass());
    }
    SUBCASE("zero integrand: left side vanishes") {
        AdaptedProcess h(t);
        ExperimentReport r =
            check_put_integral_stability({&s}, {&h}, Vec{rat(1)}, Vec{rat(1), rat(4)});
        CHECK(r.pass());
        CHECK(r.worst >= rat(0));
    }
    SUBCASE("mixed bounded integrands") {
        AdaptedProcess h1(t, rat(1, 2)), h2(t);
        for (int i = 0; i < t.size(); ++i) h2.v[i] = rat(t.time(i), 2);
        ExperimentReport r = check_put_integral_stability(
            {&s, &s}, {&h1, &h2}, Vec{rat(1, 2), rat(1), rat(2)}, Vec{rat(1), rat(2), rat(4)});
        CHECK(r.pass());
    }
}
