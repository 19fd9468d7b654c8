#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ftaplab/market.hpp"

using namespace ftaplab;

namespace {

// persistent trees for the standard fixtures
ScenarioTree& binomial_tree() {
    static ScenarioTree t = ScenarioTree::binary(1, rat(1, 2));
    return t;
}

// S0 = 1, S1 in {2, 1/2}
MarketModel binomial_market() {
    MarketModel m(binomial_tree(), 1);
    m.S[0].v = {rat(1), rat(2), rat(1, 2)};
    return m;
}

// S0 = 1, S1 in {2, 1}: free money
MarketModel up_or_flat_market() {
    MarketModel m(binomial_tree(), 1);
    m.S[0].v = {rat(1), rat(2), rat(1)};
    return m;
}

MarketModel no_trading_market() {
    MarketModel m = binomial_market();
    m.cones[0] = {Vec{rat(0)}};
    return m;
}

ScenarioTree& line_tree() {
    static ScenarioTree t = ScenarioTree::uniform(1, 2);  // two equal branches
    return t;
}

// deterministic up-move 1 -> 2 (same on both branches)
MarketModel deterministic_up_market() {
    MarketModel m(line_tree(), 1);
    m.S[0].v = {rat(1), rat(2), rat(2)};
    return m;
}

}  // namespace

TEST_CASE("wealth and admissibility") {
    MarketModel m = binomial_market();
    std::vector<PredictableControl> zero{PredictableControl(binomial_tree())};
    WealthProcess w0 = wealth(m, zero);
    CHECK(w0.wealth == AdaptedProcess(binomial_tree()));
    CHECK(w0.admissible);

    std::vector<PredictableControl> one{PredictableControl(binomial_tree(), rat(1))};
    WealthProcess w1 = wealth(m, one);
    CHECK(w1.wealth.v[1] == rat(1));
    CHECK(w1.wealth.v[2] == rat(-1, 2));
    CHECK(w1.admissible);

    std::vector<PredictableControl> three{PredictableControl(binomial_tree(), rat(3))};
    WealthProcess w3 = wealth(m, three);
    CHECK(w3.wealth.v[2] == rat(-3, 2));
    CHECK(!w3.admissible);

    MarketModel nt = no_trading_market();
    CHECK_THROWS_AS(wealth(nt, one), MarketError);
    CHECK(wealth(nt, zero).admissible);
}

TEST_CASE("no-arbitrage checks") {
    SUBCASE("binomial holds everywhere") {
        MarketModel m = binomial_market();
        CHECK(check_NA(m).holds);
        CHECK(check_NUPBR(m).holds);
        CHECK(check_NFLVR(m).holds);
    }
    SUBCASE("up-or-flat fails NA with a verified certificate") {
        MarketModel m = up_or_flat_market();
        ArbitrageCheck r = check_NA(m);
        REQUIRE(!r.holds);
        CHECK(r.certificate.kind == CertificateKind::NAViolation);
        verify_certificate(m, r.certificate);  // throws if bogus
        CHECK(r.certificate.strategy[0].v[0] > 0);
        CHECK(!check_NFLVR(m).holds);
    }
    SUBCASE("deterministic up-move fails NUPBR, scalable certificate") {
        MarketModel m = deterministic_up_market();
        ArbitrageCheck r = check_NUPBR(m);
        REQUIRE(!r.holds);
        CHECK(r.certificate.kind == CertificateKind::NUPBRViolation);
        for (const Rational& x : r.certificate.wealth_path.v) CHECK(x >= 0);
        verify_certificate(m, r.certificate);
    }
    SUBCASE("no trading holds trivially") {
        MarketModel m = no_trading_market();
        CHECK(check_NA(m).holds);
        CHECK(check_NUPBR(m).holds);
        CHECK(check_NFLVR(m).holds);
    }
    SUBCASE("long-only cone turns up-or-flat downward arbitrage off") {
        // S drops: shorting would be free money, but the cone forbids it
        MarketModel m(binomial_tree(), 1);
        m.S[0].v = {rat(1), rat(1), rat(1, 2)};
        CHECK(!check_NA(m).holds);
        m.cones[0] = {Vec{rat(1)}};
        CHECK(check_NA(m).holds);
        CHECK(check_NUPBR(m).holds);
    }
}

TEST_CASE("terminal cone generators") {
    SUBCASE("no trading collapses to the origin") {
        MarketModel m = no_trading_market();
        TerminalPolyhedron p = terminal_cone_generators(m);
        REQUIRE(p.explicit_form);
        REQUIRE(p.vertices.size() == 1);
        CHECK(p.vertices[0].v == Vec{rat(0), rat(0)});
        CHECK(p.rays.empty());
    }
    SUBCASE("one-period binomial segment endpoints") {
        MarketModel m = binomial_market();
        TerminalPolyhedron p = terminal_cone_generators(m);
        REQUIRE(p.explicit_form);
        // floor -1: phi in [-1, 2], endpoints (up, down) = (-1, 1/2) and (2, -1)
        REQUIRE(p.vertices.size() == 2);
        std::vector<Vec> vs{p.vertices[0].v, p.vertices[1].v};
        std::sort(vs.begin(), vs.end());
        CHECK(vs[0] == Vec{rat(-1), rat(1, 2)});
        CHECK(vs[1] == Vec{rat(2), rat(-1)});
        CHECK(p.rays.empty());
    }
    SUBCASE("lambda 0 keeps only nonnegative wealth") {
        MarketModel m = binomial_market();
        m.lambda = 0;
        TerminalPolyhedron p = terminal_cone_generators(m);
        REQUIRE(p.explicit_form);
        for (const TerminalVariable& v : p.vertices)
            for (const Rational& x : v.v) CHECK(x >= 0);
    }
    SUBCASE("arbitrage model has a ray") {
        MarketModel m = deterministic_up_market();
        TerminalPolyhedron p = terminal_cone_generators(m);
        REQUIRE(p.explicit_form);
        CHECK(!p.rays.empty());
        for (const TerminalVariable& r : p.rays)
            for (const Rational& x : r.v) CHECK(x >= 0);
    }
}

TEST_CASE("maximal element") {
    SUBCASE("no trading from the floor") {
        MarketModel m = no_trading_market();
        TerminalVariable f(binomial_tree(), rat(-1));
        MaximalElement me = maximal_element(m, f);
        CHECK(me.h0.v == Vec{rat(0), rat(0)});
    }
    SUBCASE("complete binomial: zero is maximal above zero") {
        MarketModel m = binomial_market();
        TerminalVariable f(binomial_tree(), rat(0));
        MaximalElement me = maximal_element(m, f);
        CHECK(me.h0.v == Vec{rat(0), rat(0)});
    }
    SUBCASE("no single coordinate can be improved") {
        MarketModel m = binomial_market();
        TerminalVariable f(binomial_tree(), rat(-1, 2));
        MaximalElement me = maximal_element(m, f);
        // E_q[h0] = 0 under the EMM q = (1/3, 2/3)
        CHECK(rat(1, 3) * me.h0.v[0] + rat(2, 3) * me.h0.v[1] == rat(0));
        // per-coordinate improvement LPs: fix the others, push one up
        for (size_t k = 0; k < me.h0.v.size(); ++k) {
            TerminalVariable g = me.h0;
            g.v[k] += rat(1, 1000);
            CHECK_THROWS_AS(maximal_element(m, g), MarketError);
        }
    }
    SUBCASE("unbounded in arbitrage models") {
        MarketModel m = deterministic_up_market();
        TerminalVariable f(line_tree(), rat(0));
        CHECK_THROWS_AS(maximal_element(m, f), MarketError);
    }
}

TEST_CASE("fork concatenation") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    MarketModel m(t, 1);
    m.S[0].v[0] = rat(1);
    for (int i = 1; i < t.size(); ++i)
        m.S[0].v[i] = m.S[0].v[t.parent(i)] * (t.children(t.parent(i))[0] == i ? rat(2) : rat(1, 2));
    std::vector<PredictableControl> half{PredictableControl(t, rat(1, 2))};
    WealthProcess x = wealth(m, half);
    std::vector<PredictableControl> zero{PredictableControl(t)};
    WealthProcess cash = wealth(m, zero);  // Xtilde = 1 identically

    SUBCASE("empty set and terminal time are identities") {
        WealthProcess y = fork_concatenate(m, x, cash, 1, {});
        CHECK(y.wealth == x.wealth);
        WealthProcess y2 = fork_concatenate(m, x, cash, 2, t.nodes_at(2));
        CHECK(y2.wealth == x.wealth);
    }
    SUBCASE("forking into cash freezes the wealth") {
        int up = t.children(0)[0];
        WealthProcess y = fork_concatenate(m, x, cash, 1, {up});
        for (int c : t.children(up)) CHECK(y.wealth.v[c] == x.wealth.v[up]);
        int down = t.children(0)[1];
        for (int c : t.children(down)) CHECK(y.wealth.v[c] == x.wealth.v[c]);
        CHECK(y.admissible);
    }
    SUBCASE("fork preserves the 1 + X_1 floor") {
        std::vector<PredictableControl> quarter{PredictableControl(t, rat(1, 4))};
        WealthProcess pos = wealth(m, quarter);  // strictly positive value process
        for (const Rational& w : pos.wealth.v) CHECK(w > rat(-1));
        WealthProcess y = fork_concatenate(m, x, pos, 1, {t.children(0)[1]});
        CHECK(y.admissible);
    }
    SUBCASE("rejects bad inputs") {
        CHECK_THROWS_AS(fork_concatenate(m, x, cash, 1, {0}), MarketError);  // not time-1
        std::vector<PredictableControl> big{PredictableControl(t, rat(2))};
        WealthProcess neg = wealth(m, big);  // hits -1 somewhere below
        CHECK_THROWS_AS(fork_concatenate(m, x, neg, 1, {t.children(0)[0]}), MarketError);
    }
}

TEST_CASE("concatenation with disjoint controls") {
    ScenarioTree t = ScenarioTree::binary(2, rat(1, 2));
    MarketModel m(t, 1);
    m.S[0].v[0] = rat(4);
    for (int i = 1; i < t.size(); ++i)
        m.S[0].v[i] = m.S[0].v[t.parent(i)] + (t.children(t.parent(i))[0] == i ? rat(1) : rat(-1));
    std::vector<PredictableControl> a{PredictableControl(t, rat(1))};
    WealthProcess x = wealth(m, a);
    std::vector<PredictableControl> b{PredictableControl(t, rat(-1, 2))};
    WealthProcess y = wealth(m, b);

    PredictableControl h(t), g(t);
    for (int i = 0; i < t.size(); ++i) {
        if (t.is_leaf(i)) continue;
        if (t.time(i) == 0)
            h.v[i] = rat(1);
        else
            g.v[i] = rat(1);
    }
    WealthProcess z = concatenate(m, h, g, x, y);
    // period-1 wealth from x, period-2 increment from y
    for (int i = 1; i < t.size(); ++i) {
        if (t.time(i) == 1)
            CHECK(z.wealth.v[i] == x.wealth.v[i]);
        else
            CHECK(z.wealth.v[i] == x.wealth.v[t.parent(i)] + y.wealth.v[i] - y.wealth.v[t.parent(i)]);
    }

    PredictableControl ones(t, rat(1));
    CHECK_THROWS_AS(concatenate(m, ones, ones, x, y), MarketError);  // overlap
    PredictableControl negative(t, rat(-1));
    CHECK_THROWS_AS(concatenate(m, negative, g, x, y), MarketError);
    WealthProcess zx = concatenate(m, ones, PredictableControl(t), x, y);
    CHECK(zx.wealth == x.wealth);
}
