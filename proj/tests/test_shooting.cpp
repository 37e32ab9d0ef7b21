#include <cmath>

#include "doctest.h"
#include "qmbvp/errors.hpp"
#include "qmbvp/shooting.hpp"
#include "qmbvp/system.hpp"

using namespace qmbvp;

TEST_CASE("shooting reproduces the rotation closed form") {
    SystemDef sys = make_oscillator(3.0, 4.0);
    ShootOptions opts;
    opts.grid_N = 4000;
    ShootResult r = shoot(sys, {0.0}, opts);
    REQUIRE(r.solution.has_value());
    CHECK(r.final_residual <= opts.shoot_tol);
    // The map y0 -> y(T) is affine, so damped Newton needs very few steps.
    CHECK(r.newton_iters <= 3);

    PathPair closed = oscillator_closed_form(3.0, 4.0, r.solution->grid());
    CHECK(sup_distance(*r.solution, closed) < 1e-6);
    // y(0) of the closed form is r cos(theta) = 4.
    CHECK(r.y0_found[0] == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("shooting solves the bounded coupled system") {
    SystemDef sys = make_bounded_coupled();
    ShootResult r = shoot(sys, {0.5});
    REQUIRE(r.solution.has_value());
    CHECK(r.final_residual <= 1e-9);
    ResidualReport res = residual(sys, *r.solution);
    CHECK(res.total() < 1e-5);
}

TEST_CASE("shooting input validation") {
    SystemDef sys = make_bounded_coupled();
    CHECK_THROWS_AS(shoot(sys, {0.0, 0.0}), ShapeError);
    CHECK_THROWS_AS(shoot(sys, {std::nan("")}), PreconditionError);
}

TEST_CASE("shooting reports failure instead of throwing on escape") {
    // xdot = x^2 + y^2 + 1 blows up forward from any start; the result simply
    // carries no solution.
    SystemDef sys;
    sys.m = sys.n = 1;
    sys.T = 4.0;
    sys.boundary.x_bar = {1.0};
    sys.boundary.y_bar = {0.0};
    sys.f_eval = [](double, std::span<const double> x, std::span<const double> y,
                    std::span<double> out) { out[0] = x[0] * x[0] + y[0] * y[0] + 1.0; };
    sys.g_eval = [](double, std::span<const double>, std::span<const double>,
                    std::span<double> out) { out[0] = 0.0; };
    ShootResult r = shoot(sys, {0.0});
    CHECK(!r.solution.has_value());
    CHECK(std::isinf(r.final_residual));
}

TEST_CASE("multi-start deduplicates and sorts") {
    SystemDef sys = make_bounded_coupled();
    // Unique solution: every converged start collapses into one entry.
    auto found = multi_start(sys, {{-1.0}, {0.0}, {1e-7}, {1.0}});
    REQUIRE(found.size() == 1);
    CHECK(found[0].final_residual <= 1e-9);

    CHECK_THROWS_AS(multi_start(sys, {}), PreconditionError);
}

TEST_CASE("multi-start execution policies agree bitwise") {
    SystemDef sys = make_oscillator(1.0, 2.0);
    std::vector<std::vector<double>> guesses{{0.0}, {1.0}, {3.0}};
    auto ser = multi_start(sys, guesses, 1e-4, {}, Exec::Serial);
    auto par = multi_start(sys, guesses, 1e-4, {}, Exec::Parallel);
    REQUIRE(ser.size() == par.size());
    for (size_t i = 0; i < ser.size(); ++i) {
        CHECK(ser[i].y0_found == par[i].y0_found);
        CHECK(ser[i].solution->x.raw() == par[i].solution->x.raw());
        CHECK(ser[i].solution->y.raw() == par[i].solution->y.raw());
    }
}
