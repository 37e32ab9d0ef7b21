#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qmbvp/errors.hpp"
#include "qmbvp/grid.hpp"

using namespace qmbvp;

TEST_CASE("grid nodes and step") {
    Grid g(2.0, 8);
    CHECK(g.step() == 0.25);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(8) == 2.0);  // exact endpoint, no rounding drift
    CHECK(g.num_nodes() == 9);
    CHECK(g.node(3) == doctest::Approx(0.75));
}

TEST_CASE("grid preconditions") {
    CHECK_THROWS_AS(Grid(1.0, 1), PreconditionError);
    CHECK_THROWS_AS(Grid(0.0, 10), PreconditionError);
    CHECK_THROWS_AS(Grid(-1.0, 10), PreconditionError);
}

TEST_CASE("vecpath storage and interpolation") {
    Grid g(1.0, 4);
    VecPath p(g, 2, 1.5);
    CHECK(p.dim() == 2);
    CHECK(p(3, 1) == 1.5);
    // Fill with a linear function of t; piecewise-linear interpolation must
    // reproduce it exactly at off-node times.
    for (int k = 0; k <= g.N; ++k) {
        p(k, 0) = 3.0 * g.node(k) - 1.0;
        p(k, 1) = -2.0 * g.node(k);
    }
    auto v = p.value_at(0.3);
    CHECK(v[0] == doctest::Approx(3.0 * 0.3 - 1.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(-0.6).epsilon(1e-15));
    auto ends = p.value_at(1.0);
    CHECK(ends[0] == 2.0);
    CHECK(p.all_finite());
    p(2, 0) = std::nan("");
    CHECK(!p.all_finite());
}

TEST_CASE("vecpath dimension precondition") {
    Grid g(1.0, 4);
    CHECK_THROWS_AS(VecPath(g, 0), PreconditionError);
}

TEST_CASE("pathpair grid agreement") {
    Grid g(1.0, 4), h(1.0, 5);
    CHECK_THROWS_AS(PathPair(VecPath(g, 1), VecPath(h, 1)), ShapeError);
    PathPair ok(VecPath(g, 2), VecPath(g, 1));
    CHECK(ok.grid() == g);
}

TEST_CASE("order helpers") {
    Grid g(1.0, 4);
    VecPath u(g, 1, 0.0), v(g, 1, 1.0);
    CHECK(leq_path(u, v, 0.0));
    CHECK(!leq_path(v, u, 0.5));
    CHECK(leq_path(v, u, 1.0));  // slack covers the gap
    PathPair a{u, v}, b{v, u};
    CHECK(!leq_pair(a, b, 0.0));  // y blocks disagree
    CHECK(sup_distance(u, v) == 1.0);
    CHECK(sup_distance(a, a) == 0.0);

    PathPair mn = pointwise_min(a, b);
    for (int k = 0; k <= g.N; ++k) {
        CHECK(mn.x(k, 0) == 0.0);
        CHECK(mn.y(k, 0) == 0.0);
    }

    VecPath w(g, 2);
    CHECK_THROWS_AS(require_same_shape(u, w), ShapeError);
}

TEST_CASE("csv round trip is bit identical") {
    Grid g(1.0, 3);
    VecPath x(g, 2), y(g, 1);
    // Values with no short decimal representation.
    for (int k = 0; k <= g.N; ++k) {
        x(k, 0) = 1.0 / 3.0 + k;
        x(k, 1) = std::sqrt(2.0) * (k + 1);
        y(k, 0) = std::exp(-double(k)) * 1e-12;
    }
    PathPair p{x, y};
    std::stringstream ss;
    write_csv(p, ss);
    PathPair q = read_csv(ss);
    REQUIRE(q.grid() == p.grid());
    REQUIRE(q.x.dim() == 2);
    REQUIRE(q.y.dim() == 1);
    CHECK(q.x.raw() == p.x.raw());  // exact, every bit
    CHECK(q.y.raw() == p.y.raw());

    // Writing the re-read pair reproduces the same bytes.
    std::stringstream ss2;
    write_csv(q, ss2);
    std::stringstream ss3;
    write_csv(p, ss3);
    CHECK(ss2.str() == ss3.str());
}

TEST_CASE("csv rejects malformed input") {
    {
        std::stringstream ss("");
        CHECK_THROWS_AS(read_csv(ss), ShapeError);
    }
    {
        std::stringstream ss("t,a,b\n0,1,2\n");
        CHECK_THROWS_AS(read_csv(ss), ShapeError);  // no x/y columns
    }
    {
        std::stringstream ss("t,x1,y1\n0,1\n");
        CHECK_THROWS_AS(read_csv(ss), ShapeError);  // row width mismatch
    }
    {
        std::stringstream ss("t,x1,y1\n0,1,2\n1,3,4\n");
        CHECK_THROWS_AS(read_csv(ss), ShapeError);  // too few nodes for a grid
    }
}
