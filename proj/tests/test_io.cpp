#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ftaplab/duality.hpp"
#include "ftaplab/io.hpp"

using namespace ftaplab;

TEST_CASE("minimal file and basic parsing") {
    std::string text =
        "FTAPLAB TREE 1\n"
        "node 0 - 1/1\n"
        "proc S 1 0 3/2\n";
    TreeFile f = parse_tree_file(text);
    CHECK(f.tree->size() == 1);
    CHECK(f.tree->horizon() == 0);
    REQUIRE(f.find("S"));
    CHECK(f.find("S")->comps[0].v[0] == rat(3, 2));
    CHECK(!f.find("X"));
}

TEST_CASE("rejections carry line numbers") {
    SUBCASE("bad header") {
        CHECK_THROWS_WITH_AS(parse_tree_file("FTAPLAB TREE 2\nnode 0 - 1/1\n"),
                             doctest::Contains("line 1"), ParseError);
    }
    SUBCASE("non-canonical rational") {
        std::string text =
            "FTAPLAB TREE 1\n"
            "node 0 - 1/1\n"
            "node 1 0 2/6\n"
            "node 2 0 2/3\n";
        CHECK_THROWS_WITH_AS(parse_tree_file(text), doctest::Contains("line 3"), ParseError);
    }
    SUBCASE("sibling probabilities reported at the parent") {
        std::string text =
            "FTAPLAB TREE 1\n"
            "node 0 - 1/1\n"
            "node 1 0 1/2\n"
            "node 2 0 1/3\n";
        CHECK_THROWS_WITH_AS(parse_tree_file(text), doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("sparse ids") {
        std::string text =
            "FTAPLAB TREE 1\n"
            "node 0 - 1/1\n"
            "node 2 0 1/1\n";
        CHECK_THROWS_AS(parse_tree_file(text), ParseError);
    }
    SUBCASE("proc must cover every node") {
        std::string text =
            "FTAPLAB TREE 1\n"
            "node 0 - 1/1\n"
            "node 1 0 1/2\n"
            "node 2 0 1/2\n"
            "proc S 1 0 1/1\n"
            "proc S 1 1 2/1\n";
        CHECK_THROWS_AS(parse_tree_file(text), ParseError);
    }
    SUBCASE("cones only on interior nodes") {
        std::string text =
            "FTAPLAB TREE 1\n"
            "node 0 - 1/1\n"
            "node 1 0 1/2\n"
            "node 2 0 1/2\n"
            "proc S 1 0 1/1\n"
            "proc S 1 1 2/1\n"
            "proc S 1 2 1/2\n"
            "cone 1 1/1\n";
        CHECK_THROWS_AS(parse_tree_file(text), ParseError);
    }
}

TEST_CASE("render-parse round trip is byte identical") {
    for (std::uint64_t seed : {1ULL, 7ULL, 42ULL}) {
        GenParams p;
        p.seed = seed;
        p.depth = 3;
        p.branching = 3;
        p.dim = 2;
        p.constraint_density = 40;
        TreeFile f = generate_random_model(p);
        std::string text = render_tree_file(f);
        TreeFile g = parse_tree_file(text);
        CHECK(render_tree_file(g) == text);
        CHECK(g.tree->size() == f.tree->size());
    }
}

TEST_CASE("generation is deterministic in the seed") {
    GenParams p;
    p.seed = 99;
    p.depth = 2;
    p.branching = 3;
    p.emm_first = true;
    CHECK(render_tree_file(generate_random_model(p)) ==
          render_tree_file(generate_random_model(p)));
    GenParams q = p;
    q.seed = 100;
    CHECK(render_tree_file(generate_random_model(q)) !=
          render_tree_file(generate_random_model(p)));
}

TEST_CASE("emm-first models always admit a separating measure") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        GenParams p;
        p.seed = seed;
        p.depth = 2;
        p.branching = 3;
        p.dim = 2;
        p.constraint_density = 30;
        p.emm_first = true;
        MarketModel m = to_market(generate_random_model(p));
        CHECK(esm_exists(m).exists);
    }
}

TEST_CASE("free-price models hit both verdicts") {
    int yes = 0, no = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GenParams p;
        p.seed = seed;
        p.depth = 1;
        p.branching = 2;
        MarketModel m = to_market(generate_random_model(p));
        (esm_exists(m).exists ? yes : no)++;
    }
    CHECK(yes > 0);
    CHECK(no > 0);
}

TEST_CASE("to_market wires prices, cones and lambda") {
    GenParams p;
    p.seed = 5;
    p.depth = 2;
    p.dim = 2;
    p.constraint_density = 100;
    TreeFile f = generate_random_model(p);
    MarketModel m = to_market(f, "S", rat(2));
    CHECK(m.dim() == 2);
    CHECK(m.lambda == rat(2));
    for (int i = 0; i < f.tree->size(); ++i)
        if (!f.tree->is_leaf(i)) CHECK(!m.cones[i].empty());
    CHECK_THROWS_AS(to_market(f, "missing"), ParseError);
}
