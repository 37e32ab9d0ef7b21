#include "qmbvp/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmbvp/errors.hpp"
#include "qmbvp/linalg.hpp"

namespace qmbvp {

namespace {

// Joint forward integration of (x, y) from (x_bar, y0).
std::optional<PathPair> integrate_joint(const SystemDef& sys, std::span<const double> y0,
                                        const Grid& grid, double blowup_threshold) {
    const int m = sys.m, n = sys.n;
    FieldEval joint{m + n, 0,
                    [&sys, m, n](double t, std::span<const double> z, std::span<const double>,
                                 std::span<double> out) {
                        sys.eval_f(t, z.subspan(0, m), z.subspan(m, n), out.subspan(0, m));
                        sys.eval_g(t, z.subspan(0, m), z.subspan(m, n), out.subspan(m, n));
                    }};
    std::vector<double> z0(m + n);
    std::copy(sys.boundary.x_bar.begin(), sys.boundary.x_bar.end(), z0.begin());
    std::copy(y0.begin(), y0.end(), z0.begin() + m);
    VecPath z;
    try {
        z = integrate_forward(joint, z0, grid, nullptr, blowup_threshold);
    } catch (const BlowUpError&) {
        return std::nullopt;
    }
    VecPath x(grid, m), y(grid, n);
    for (int k = 0; k <= grid.N; ++k)
        for (int c = 0; c < m + n; ++c)
            (c < m ? x(k, c) : y(k, c - m)) = z(k, c);
    return PathPair{std::move(x), std::move(y)};
}

std::optional<std::vector<double>> terminal_gap(const SystemDef& sys,
                                               std::span<const double> y0, const Grid& grid,
                                               double blowup_threshold) {
    auto pair = integrate_joint(sys, y0, grid, blowup_threshold);
    if (!pair) return std::nullopt;
    std::vector<double> gap(sys.n);
    for (int c = 0; c < sys.n; ++c)
        gap[c] = pair->y(grid.N, c) - sys.boundary.y_bar[c];
    return gap;
}

double inf_norm(std::span<const double> v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::fabs(x));
    return r;
}

}  // namespace

ShootResult shoot(const SystemDef& sys, std::vector<double> y0_guess,
                  const ShootOptions& opts) {
    if (static_cast<int>(y0_guess.size()) != sys.n)
        throw ShapeError("shoot: guess dimension must equal n");
    for (double v : y0_guess)
        if (!std::isfinite(v)) throw PreconditionError("shoot: guess must be finite");

    const Grid grid(sys.T, opts.grid_N);
    const int n = sys.n;
    ShootResult result;
    result.y0_found = y0_guess;

    auto gap = terminal_gap(sys, y0_guess, grid, opts.blowup_threshold);
    if (!gap) {
        result.final_residual = std::numeric_limits<double>::infinity();
        return result;
    }
    double res = inf_norm(*gap);

    std::vector<double> y0 = y0_guess;
    for (int iter = 0; iter < opts.max_newton_iters && res > opts.shoot_tol; ++iter) {
        ++result.newton_iters;
        // Finite-difference Jacobian, componentwise.
        std::vector<double> J(static_cast<size_t>(n) * n);
        bool jac_ok = true;
        for (int c = 0; c < n && jac_ok; ++c) {
            std::vector<double> y0p = y0;
            y0p[c] += opts.fd_step;
            auto gp = terminal_gap(sys, y0p, grid, opts.blowup_threshold);
            if (!gp) {
                jac_ok = false;
                break;
            }
            for (int r = 0; r < n; ++r) J[r * n + c] = ((*gp)[r] - (*gap)[r]) / opts.fd_step;
        }
        std::vector<double> delta;
        std::vector<double> neg_gap(n);
        for (int r = 0; r < n; ++r) neg_gap[r] = -(*gap)[r];
        if (!jac_ok || !solve_dense(J, neg_gap, n, delta)) break;

        // Backtracking damping (halving).
        bool improved = false;
        for (double lam = 1.0; lam >= opts.min_damping; lam *= 0.5) {
            std::vector<double> y0_try(n);
            for (int c = 0; c < n; ++c) y0_try[c] = y0[c] + lam * delta[c];
            auto g_try = terminal_gap(sys, y0_try, grid, opts.blowup_threshold);
            if (!g_try) continue;
            const double r_try = inf_norm(*g_try);
            if (r_try < res) {
                y0 = std::move(y0_try);
                gap = std::move(g_try);
                res = r_try;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }

    result.y0_found = y0;
    result.final_residual = res;
    if (res <= opts.shoot_tol) {
        result.solution = integrate_joint(sys, y0, grid, opts.blowup_threshold);
        if (!result.solution) result.final_residual = std::numeric_limits<double>::infinity();
    }
    return result;
}

std::vector<ShootResult> multi_start(const SystemDef& sys,
                                     const std::vector<std::vector<double>>& guesses,
                                     double dedup_radius, const ShootOptions& opts,
                                     Exec exec) {
    if (guesses.empty()) throw PreconditionError("multi_start: need at least one guess");
    const int G = static_cast<int>(guesses.size());
    std::vector<ShootResult> all(G);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < G; ++i) all[i] = shoot(sys, guesses[i], opts);
    } else {
        for (int i = 0; i < G; ++i) all[i] = shoot(sys, guesses[i], opts);
    }

    std::vector<ShootResult> distinct;
    for (auto& r : all) {
        if (!r.solution) continue;
        bool dup = false;
        for (const auto& d : distinct)
            if (sup_distance(*d.solution, *r.solution) <= dedup_radius) {
                dup = true;
                break;
            }
        if (!dup) distinct.push_back(std::move(r));
    }
    std::sort(distinct.begin(), distinct.end(), [](const ShootResult& a, const ShootResult& b) {
        auto norm = [](const ShootResult& r) {
            double v = 0.0;
            for (double z : r.solution->x.raw()) v = std::max(v, std::fabs(z));
            for (double z : r.solution->y.raw()) v = std::max(v, std::fabs(z));
            return v;
        };
        return norm(a) < norm(b);
    });
    return distinct;
}

}  // namespace qmbvp
