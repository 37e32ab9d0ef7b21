#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "qmbvp/errors.hpp"
#include "qmbvp/mfg.hpp"
#include "qmbvp/monotone.hpp"
#include "qmbvp/shooting.hpp"
#include "qmbvp/system.hpp"

using namespace qmbvp;

namespace {

// A randomized strict supersolution of the bounded coupled system:
// xdot = 1 + r1 - x >= tanh(y) - x with margin >= r1, integrated forward from
// u0 >= 0; ydot = -1 - r2 - y <= -tanh(x) - y with margin >= r2, integrated
// backward from v0 >= 0.
PathPair random_supersolution(std::mt19937_64& rng, const Grid& g) {
    std::uniform_real_distribution<double> margin(0.01, 1.0), start(0.0, 1.0);
    const double r1 = margin(rng), r2 = margin(rng);
    const double u0 = start(rng), v0 = start(rng);
    FieldEval fx{1, 0,
                 [r1](double, std::span<const double> s, std::span<const double>,
                      std::span<double> out) { out[0] = 1.0 + r1 - s[0]; }};
    FieldEval fy{1, 0,
                 [r2](double, std::span<const double> s, std::span<const double>,
                      std::span<double> out) { out[0] = -1.0 - r2 - s[0]; }};
    double x0[] = {u0}, yT[] = {v0};
    return {integrate_forward(fx, x0, g), integrate_backward(fy, yT, g)};
}

}  // namespace

TEST_CASE("randomized supersolutions descend under one sweep") {
    SystemDef sys = make_bounded_coupled();
    Grid g(1.0, 1000);
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 20; ++trial) {
        PathPair super = random_supersolution(rng, g);
        REQUIRE(is_supersolution(sys, super, 1e-8).pass);
        PathPair once = sweep(sys, super);
        CHECK(leq_pair(once, super, 1e-9));
        // The swept pair is again a supersolution (the induction step of the
        // descending construction), up to the O(h^2) midpoint-defect floor.
        CHECK(is_supersolution(sys, once, 1e-6).pass);
    }
}

TEST_CASE("an exact solution is a fixed point of the sweep") {
    SystemDef sys = make_bounded_coupled();
    ShootResult r = shoot(sys, {0.0});
    REQUIRE(r.solution.has_value());
    CHECK(sup_distance(sweep(sys, *r.solution), *r.solution) <= 1e-12);
    CHECK(sup_distance(sweep(sys, *r.solution, true), *r.solution) <= 1e-12);
}

TEST_CASE("certified start descends to the solution") {
    SystemDef sys = make_bounded_coupled();
    auto cert = certify_condition(sys, Condition::I, *sys.alpha_bounds);
    REQUIRE(cert.verdict);

    SolveOptions opts;
    auto rep = solve_minimal(sys, opts, cert);
    CHECK(rep.converged);
    CHECK(rep.sweeps_used <= 200);
    CHECK(rep.monotone_ok);
    CHECK(rep.residual_history.back() <= opts.tol);
    // Residual history nonincreasing.
    for (size_t i = 1; i < rep.residual_history.size(); ++i)
        CHECK(rep.residual_history[i] <= rep.residual_history[i - 1] + 1e-10);
    // Uniform lower bound from the certificate.
    REQUIRE(rep.m_star.has_value());
    for (double v : rep.solution.x.raw()) CHECK(v >= *rep.m_star - 1e-6);
    for (double v : rep.solution.y.raw()) CHECK(v >= *rep.m_star - 1e-6);

    // Agreement with the shooting oracle, and minimality below it.
    ShootResult sh = shoot(sys, {0.0});
    REQUIRE(sh.solution.has_value());
    CHECK(sup_distance(rep.solution, *sh.solution) <= 1e-5);
    CHECK(leq_pair(rep.solution, *sh.solution, 1e-5));
}

TEST_CASE("condition (ii) start solves the cooperative stationarity system") {
    SystemDef sys = make_mfg_equilibrium_system(make_potential_sqrt(), Convention::B, 8.0);
    auto cert = certify_condition(sys, Condition::II, *sys.beta_bounds);
    REQUIRE(cert.verdict);

    SolveOptions opts;
    opts.tol = 5e-5;  // above the O(h^2) midpoint-defect floor at this grid
    opts.grid_N = 2000;
    auto rep = solve_minimal(sys, opts, cert);
    CHECK(rep.converged);
    CHECK(rep.monotone_ok);
    // Descending from the positive envelope start lands on the nonnegative
    // solution branch.
    for (double v : rep.solution.x.raw()) CHECK(v >= -1e-6);
}

TEST_CASE("initial supersolution construction") {
    SystemDef sys = make_bounded_coupled();
    auto cert = certify_condition(sys, Condition::I, *sys.alpha_bounds);
    PathPair init = initial_supersolution(sys, cert);
    CHECK(init.x.dim() == sys.m);
    // Condition (i) start: x rides gamma2, y rides eta2, node for node.
    CHECK(init.x.raw() == cert.gamma2.raw());
    CHECK(init.y.raw() == cert.eta2.raw());
    CHECK(is_supersolution(sys, init, 1e-8).pass);

    SystemDef osc = make_oscillator(3.0, 4.0);
    auto failed = certify_condition(osc, Condition::I, *osc.alpha_bounds);
    REQUIRE(!failed.verdict);
    CHECK_THROWS_AS(initial_supersolution(osc, failed), PreconditionError);
}

TEST_CASE("uncertified starts only clear the monotone flag by default") {
    SystemDef sys = make_bounded_coupled();
    Grid g(1.0, 200);
    PathPair low{VecPath(g, 1, -5.0), VecPath(g, 1, -5.0)};  // far below the solution

    SolveOptions opts;
    auto rep = solve_minimal(sys, opts, low);
    CHECK(!rep.monotone_ok);
    CHECK(rep.converged);  // the relaxation still contracts to the solution

    opts.require_monotone = true;
    CHECK_THROWS_AS(solve_minimal(sys, opts, low), std::logic_error);
}

TEST_CASE("divergence guard trips on the non-cooperative rotation system") {
    SystemDef osc = make_oscillator(3.0, 4.0);
    Grid g(osc.T, 200);
    PathPair flat{VecPath(g, 1, 3.0), VecPath(g, 1, 4.0)};
    SolveOptions opts;
    CHECK_THROWS_AS(solve_minimal(osc, opts, flat), UnboundedBelowError);
}

TEST_CASE("coarse initial paths are resampled to the solver grid") {
    SystemDef sys = make_bounded_coupled();
    Grid coarse(1.0, 10);
    PathPair init{VecPath(coarse, 1, 2.0), VecPath(coarse, 1, 1.0)};
    SolveOptions opts;
    opts.grid_N = 500;
    auto rep = solve_minimal(sys, opts, init);
    CHECK(rep.solution.grid().N == 500);
    CHECK(rep.initial_supersolution.grid().N == 500);
    CHECK(rep.converged);
}
