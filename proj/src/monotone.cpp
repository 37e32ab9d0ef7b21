#include "qmbvp/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qmbvp/errors.hpp"

namespace qmbvp {

namespace {

VecPath resample(const VecPath& p, const Grid& grid) {
    VecPath out(grid, p.dim());
    for (int k = 0; k <= grid.N; ++k) {
        auto row = out.at(k);
        p.value_at(grid.node(k), row);
    }
    return out;
}

PathPair broadcast_blocks(const SystemDef& sys, const VecPath& x_scalar,
                          const VecPath& y_scalar) {
    const Grid& g = x_scalar.grid();
    VecPath x(g, sys.m), y(g, sys.n);
    for (int k = 0; k <= g.N; ++k) {
        for (int c = 0; c < sys.m; ++c) x(k, c) = x_scalar(k, 0);
        for (int c = 0; c < sys.n; ++c) y(k, c) = y_scalar(k, 0);
    }
    return {std::move(x), std::move(y)};
}

double sup_norm(const PathPair& p) {
    double v = 0.0;
    for (double z : p.x.raw()) v = std::max(v, std::fabs(z));
    for (double z : p.y.raw()) v = std::max(v, std::fabs(z));
    return v;
}

double min_value(const PathPair& p) {
    double v = p.x.raw().front();
    for (double z : p.x.raw()) v = std::min(v, z);
    for (double z : p.y.raw()) v = std::min(v, z);
    return v;
}

}  // namespace

PathPair initial_supersolution(const SystemDef& sys, const ConditionCertificate& cert) {
    if (!cert.verdict)
        throw PreconditionError("initial_supersolution: certificate did not pass");
    // Condition (i): every x component rides gamma2, every y component eta2.
    // Condition (ii) is mirrored: x from eta2 (f_max construction), y from
    // gamma2 (beta1 construction).
    const VecPath& xs = (cert.which == Condition::I) ? cert.gamma2 : cert.eta2;
    const VecPath& ys = (cert.which == Condition::I) ? cert.eta2 : cert.gamma2;
    return broadcast_blocks(sys, xs, ys);
}

PathPair sweep(const SystemDef& sys, const PathPair& pair, bool y_first,
               double blowup_threshold) {
    const Grid& grid = pair.grid();
    FieldEval f_frozen_y{sys.m, sys.n,
                         [&sys](double t, std::span<const double> x,
                                std::span<const double> y, std::span<double> out) {
                             sys.eval_f(t, x, y, out);
                         }};
    FieldEval g_frozen_x{sys.n, sys.m,
                         [&sys](double t, std::span<const double> y,
                                std::span<const double> x, std::span<double> out) {
                             sys.eval_g(t, x, y, out);
                         }};
    if (!y_first) {
        VecPath x_new = integrate_forward(f_frozen_y, sys.boundary.x_bar, grid, &pair.y,
                                          blowup_threshold);
        VecPath y_new = integrate_backward(g_frozen_x, sys.boundary.y_bar, grid, &x_new,
                                           blowup_threshold);
        return {std::move(x_new), std::move(y_new)};
    }
    VecPath y_new =
        integrate_backward(g_frozen_x, sys.boundary.y_bar, grid, &pair.x, blowup_threshold);
    VecPath x_new =
        integrate_forward(f_frozen_y, sys.boundary.x_bar, grid, &y_new, blowup_threshold);
    return {std::move(x_new), std::move(y_new)};
}

MinimalSolutionReport solve_minimal(const SystemDef& sys, const SolveOptions& opts,
                                    const PathPair& initial, std::optional<double> m_star) {
    const Grid grid(sys.T, opts.grid_N);
    PathPair cur{resample(initial.x, grid), resample(initial.y, grid)};

    MinimalSolutionReport rep;
    rep.initial_supersolution = cur;
    rep.m_star = m_star;
    rep.residual_history.push_back(residual(sys, cur).total());

    for (int s = 0; s < opts.max_sweeps; ++s) {
        if (rep.residual_history.back() <= opts.tol) break;
        PathPair next = sweep(sys, cur, opts.sweep_y_first, opts.divergence_threshold * 10);

        if (sup_norm(next) > opts.divergence_threshold)
            throw UnboundedBelowError(
                "solve_minimal: iterate escaped the divergence guard; the supersolution "
                "family appears unbounded below (system " + sys.name + ")");

        if (!leq_pair(next, cur, opts.monotone_slack)) {
            rep.monotone_ok = false;
            if (opts.require_monotone) {
                // Locate the first offending node for the error message.
                int bad_node = -1;
                for (int k = 0; k <= grid.N && bad_node < 0; ++k) {
                    for (int c = 0; c < sys.m; ++c)
                        if (next.x(k, c) > cur.x(k, c) + opts.monotone_slack) bad_node = k;
                    for (int c = 0; c < sys.n; ++c)
                        if (next.y(k, c) > cur.y(k, c) + opts.monotone_slack) bad_node = k;
                }
                throw std::logic_error(
                    "solve_minimal: sweep output exceeded its input at node " +
                    std::to_string(bad_node));
            }
        }

        if (m_star && min_value(next) < *m_star - 1e-6)
            throw std::logic_error(
                "solve_minimal: iterate fell below the certified lower bound m_star");

        const double dist = sup_distance(next, cur);
        cur = std::move(next);
        rep.residual_history.push_back(residual(sys, cur).total());
        ++rep.sweeps_used;
        if (dist < opts.stall_tol) break;  // stalled; convergence judged below
    }

    rep.solution = cur;
    rep.converged = rep.residual_history.back() <= opts.tol;
    return rep;
}

MinimalSolutionReport solve_minimal(const SystemDef& sys, const SolveOptions& opts,
                                    const ConditionCertificate& cert) {
    SolveOptions strict = opts;
    strict.require_monotone = true;
    return solve_minimal(sys, strict, initial_supersolution(sys, cert), cert.m_star);
}

}  // namespace qmbvp
