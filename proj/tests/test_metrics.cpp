#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ftaplab/metrics.hpp"

using namespace ftaplab;

TEST_CASE("ucp distance") {
    ScenarioTree t = ScenarioTree::binary(1, rat(1, 2));
    AdaptedProcess x(t), y(t);
    CHECK(ucp_distance(x, y) == rat(0));

    y.v = {rat(0), rat(1, 2), rat(0)};
    CHECK(ucp_distance(x, y) == rat(1, 4));

    // cap at 1
    AdaptedProcess big(t, rat(10));
    CHECK(ucp_distance(x, big) == rat(1));

    // running max matters, not the terminal value
    ScenarioTree t2 = ScenarioTree::binary(2, rat(1, 2));
    AdaptedProcess a(t2), b(t2);
    for (int n : t2.nodes_at(1)) b.v[n] = rat(1, 2);  // spike, then back to 0
    CHECK(ucp_distance(a, b) == rat(1, 2));
}

TEST_CASE("emery distance") {
    ScenarioTree t = ScenarioTree::binary(1, rat(1, 2));
    SUBCASE("coincident processes") {
        AdaptedProcess x(t), y(t);
        DistanceResult d = emery_distance(x, y, rat(1, 100));
        CHECK(d.value == rat(0));
        CHECK(d.error_bound == rat(0));
    }
    SUBCASE("deterministic one-period jump attains |c| and 1") {
        ScenarioTree line = ScenarioTree::uniform(1, 2);
        AdaptedProcess x(line), y(line);
        x.v[1] = x.v[2] = rat(-2, 3);
        DistanceResult d = emery_distance(x, y, rat(1, 100));
        CHECK(d.value == rat(2, 3));  // K = -1
        CHECK(d.error_bound == rat(0));
        x.v[1] = x.v[2] = rat(5);
        DistanceResult d2 = emery_distance(x, y, rat(1, 100));
        CHECK(d2.value == rat(1));  // capped
        CHECK(d2.error_bound == rat(0));
    }
    SUBCASE("symmetry and K = 1 lower bound") {
        ScenarioTree t2 = ScenarioTree::binary(2, rat(1, 3));
        AdaptedProcess x(t2), y(t2);
        for (int i = 1; i < t2.size(); ++i) {
            x.v[i] = x.v[t2.parent(i)] + rat((i % 3) - 1, 2);
            y.v[i] = y.v[t2.parent(i)] + rat((i % 4) - 1, 3);
        }
        Rational eps = rat(1, 50);
        DistanceResult d1 = emery_distance(x, y, eps);
        DistanceResult d2 = emery_distance(y, x, eps);
        CHECK(d1.value == d2.value);
        CHECK(d1.error_bound <= eps);
        CHECK(d1.value >= ucp_distance(x - (x - x), y - (y - y)) - 1);  // trivial sanity
        // objective at K = 1 equals the ucp distance of the centered difference
        AdaptedProcess z = x - y;
        AdaptedProcess centered(t2);
        for (int i = 0; i < t2.size(); ++i) centered.v[i] = z.v[i] - z.v[0];
        CHECK(d1.value >= ucp_distance(centered, AdaptedProcess(t2)));
    }
    SUBCASE("triangle inequality through the brackets") {
        ScenarioTree t2 = ScenarioTree::binary(2, rat(1, 2));
        AdaptedProcess x(t2), y(t2), z(t2);
        for (int i = 1; i < t2.size(); ++i) {
            x.v[i] = x.v[t2.parent(i)] + rat(i % 2, 2);
            y.v[i] = y.v[t2.parent(i)] + rat((i + 1) % 3, 4);
            z.v[i] = z.v[t2.parent(i)] - rat(i % 3, 5);
        }
        Rational eps = rat(1, 20);
        CHECK(emery_distance(x, z, eps).value <=
              emery_distance(x, y, eps).upper() + emery_distance(y, z, eps).upper());
    }
}

TEST_CASE("l0 quantile") {
    ScenarioTree t = ScenarioTree::binary(1, rat(1, 2));
    TerminalVariable xi(t);
    CHECK(l0_quantile({xi}, rat(1, 4)) == rat(0));
    xi.v = {rat(2), rat(0)};
    CHECK(l0_quantile({xi}, rat(1, 4)) == rat(2));
    CHECK(l0_quantile({xi}, rat(1, 2)) == rat(0));
    TerminalVariable eta(t);
    eta.v = {rat(-3), rat(1)};
    CHECK(l0_quantile({xi, eta}, rat(1, 4)) == rat(3));  // max over the family
    CHECK_THROWS_AS(l0_quantile({}, rat(1, 4)), TreeError);
    CHECK_THROWS_AS(l0_quantile({xi}, rat(1)), TreeError);
}

TEST_CASE("put profiles") {
    ScenarioTree t = ScenarioTree::binary(1, rat(1, 2));
    SUBCASE("zero family") {
        AdaptedProcess z(t);
        PUTProfile p = put_profile({&z}, Vec{rat(1), rat(2)});
        CHECK(p.values == Vec{rat(0), rat(0)});
        CHECK(!p.lower_bound_only);
    }
    SUBCASE("single step: sup over H picks the best sign per leaf") {
        AdaptedProcess x(t);
        x.v[1] = rat(3);
        x.v[2] = rat(-1);
        // |H| <= 1 on the root cell: reachable |(H.X)_T| is 3 up, 1 down
        PUTProfile p = put_profile({&x}, Vec{rat(1), rat(2), rat(4)});
        CHECK(p.values[0] == rat(1));      // a = 1: both leaves with H = 1
        CHECK(p.values[1] == rat(1, 2));   // a = 2: only the up leaf
        CHECK(p.values[2] == rat(0));      // a = 4: unreachable
        PUTProfile ps = put_profile_sup({&x}, Vec{rat(1), rat(2), rat(4)});
        CHECK(ps.values == p.values);  // one period: identical
    }
    SUBCASE("sup variant dominates the terminal variant") {
        ScenarioTree t2 = ScenarioTree::binary(2, rat(1, 2));
        AdaptedProcess x(t2);
        // spike at time 1 that retraces at time 2
        for (int n : t2.nodes_at(1)) x.v[n] = (n == t2.nodes_at(1)[0]) ? rat(2) : rat(-2);
        Vec grid{rat(1), rat(3)};
        PUTProfile a = put_profile({&x}, grid);
        PUTProfile b = put_profile_sup({&x}, grid);
        for (size_t i = 0; i < grid.size(); ++i) CHECK(b.values[i] >= a.values[i]);
        CHECK(b.values[0] == rat(1));
    }
    SUBCASE("scaled family: larger scale carries the tail") {
        ScenarioTree line = ScenarioTree::binary(1, rat(1, 3));
        AdaptedProcess x1(line), x2(line);
        x1.v[1] = rat(1);   // "xi-step" with prob 1/3
        x2.v[1] = rat(2);
        PUTProfile p = put_profile({&x1, &x2}, Vec{rat(3, 2)});
        CHECK(p.values[0] == rat(1, 3));  // only the doubled member reaches a
    }
    SUBCASE("profile values nonincreasing in a, monotone in family") {
        ScenarioTree t2 = ScenarioTree::binary(2, rat(1, 2));
        AdaptedProcess x(t2), y(t2);
        for (int i = 1; i < t2.size(); ++i) {
            x.v[i] = x.v[t2.parent(i)] + rat((i % 3) - 1);
            y.v[i] = y.v[t2.parent(i)] + rat((i % 2) * 2 - 1, 2);
        }
        Vec grid{rat(1, 2), rat(1), rat(2), rat(3)};
        PUTProfile small = put_profile_sup({&x}, grid);
        PUTProfile big = put_profile_sup({&x, &y}, grid);
        for (size_t i = 1; i < grid.size(); ++i) CHECK(small.values[i] <= small.values[i - 1]);
        for (size_t i = 0; i < grid.size(); ++i) CHECK(big.values[i] >= small.values[i]);
    }
}
