#include "qmbvp/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "qmbvp/errors.hpp"
#include "qmbvp/ivp.hpp"
#include "qmbvp/linalg.hpp"
#include "qmbvp/shooting.hpp"

namespace qmbvp {

namespace {

std::vector<double> hessian_row_sums_at_zero(const PotentialSpec& pot) {
    std::vector<double> zero(pot.d, 0.0), H(static_cast<size_t>(pot.d) * pot.d);
    pot.D2V(zero, H);
    std::vector<double> e(pot.d, 0.0);
    for (int i = 0; i < pot.d; ++i)
        for (int j = 0; j < pot.d; ++j) e[i] += H[static_cast<size_t>(i) * pot.d + j];
    return e;
}

double sup_norm_path(const VecPath& p) {
    double v = 0.0;
    for (double z : p.raw()) v = std::max(v, std::fabs(z));
    return v;
}

}  // namespace

void validate_potential(const PotentialSpec& pot, bool need_positive_gamma) {
    if (pot.d < 1) throw PreconditionError("potential: d must be >= 1");
    if (!pot.V || !pot.DV || !pot.D2V)
        throw PreconditionError("potential: V, DV and D2V evaluators are required");
    std::vector<double> zero(pot.d, 0.0), g(pot.d);
    pot.DV(zero, g);
    for (double v : g)
        if (std::fabs(v) > 1e-12)
            throw PreconditionError("potential " + pot.name + ": DV(0) must vanish");
    // Spot-check Hessian entry nonnegativity on a small deterministic lattice.
    std::vector<double> H(static_cast<size_t>(pot.d) * pot.d);
    std::vector<double> x(pot.d);
    for (int s = 0; s < 41; ++s) {
        const double level = -5.0 + 0.25 * s;
        std::fill(x.begin(), x.end(), level);
        pot.D2V(x, H);
        for (double v : H)
            if (v < -1e-12)
                throw PreconditionError("potential " + pot.name +
                                        ": Hessian entry negative at sampled point");
    }
    if (need_positive_gamma && !(pot.gamma_min > 0.0))
        throw PreconditionError("potential " + pot.name + ": gamma_min must be positive");
}

PotentialSpec make_potential_sqrt() {
    PotentialSpec p;
    p.d = 1;
    p.name = "sqrt";
    p.V = [](std::span<const double> x) { return std::sqrt(1.0 + x[0] * x[0]) - 1.0; };
    p.DV = [](std::span<const double> x, std::span<double> out) {
        out[0] = x[0] / std::sqrt(1.0 + x[0] * x[0]);
    };
    p.D2V = [](std::span<const double> x, std::span<double> out) {
        out[0] = std::pow(1.0 + x[0] * x[0], -1.5);
    };
    p.hess_inf_norm = 1.0;
    p.grad_inf_norm = 1.0;
    p.gamma_min = 1.0;
    p.gamma_max = 1.0;
    return p;
}

PotentialSpec make_potential_zero() {
    PotentialSpec p;
    p.d = 1;
    p.name = "zero";
    p.V = [](std::span<const double>) { return 0.0; };
    p.DV = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    p.D2V = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    p.hess_inf_norm = 0.0;
    p.grad_inf_norm = 0.0;
    p.gamma_min = 0.0;
    p.gamma_max = 0.0;
    return p;
}

PotentialSpec make_potential(const std::string& name) {
    if (name == "sqrt") return make_potential_sqrt();
    if (name == "zero") return make_potential_zero();
    throw PreconditionError("unknown potential: " + name);
}

AdmissibilityReport admissibility(const MFGConfig& cfg) {
    if (!(cfg.kappa > 0.0)) throw PreconditionError("admissibility: kappa must be positive");
    if (!(cfg.T > 0.0)) throw PreconditionError("admissibility: T must be positive");
    validate_potential(cfg.potential, /*need_positive_gamma=*/true);

    AdmissibilityReport r;
    r.kappa_lhs = cfg.kappa;
    r.kappa_rhs = cfg.potential.hess_inf_norm;
    r.kappa_ok = r.kappa_lhs >= r.kappa_rhs;

    const double gmin = cfg.potential.gamma_min;
    const double gmax = cfg.potential.gamma_max;
    const double inv = 1.0 / gmin;
    r.t_lhs = std::pow(cfg.T, 2.0 / 3.0);
    r.t_rhs = std::max(gmax * gmax / (8.0 * gmin),
                       std::pow(inv + std::sqrt(1.0 + inv * inv), 1.5));
    r.t_ok = r.t_lhs >= r.t_rhs;
    r.threshold_T = std::pow(r.t_rhs, 1.5);
    r.pass = r.kappa_ok && r.t_ok;
    return r;
}

namespace {

// The coupled best-response system in (x, v = xdot) with the mean path
// frozen: x(0) = 0, v(T) = 0, vdot = sign * (DV(x) + 2 kappa (x - b(t))).
SystemDef make_response_system(const MFGConfig& cfg, const VecPath* b) {
    const int d = cfg.potential.d;
    const double sign = (cfg.convention == Convention::A) ? 1.0 : -1.0;
    const double kappa = cfg.kappa;
    auto dv = cfg.potential.DV;
    SystemDef s;
    s.m = d;
    s.n = d;
    s.T = cfg.T;
    s.name = "mfg_response";
    s.boundary.x_bar.assign(d, 0.0);
    s.boundary.y_bar.assign(d, 0.0);
    s.f_eval = [](double, std::span<const double>, std::span<const double> v,
                  std::span<double> out) {
        std::copy(v.begin(), v.end(), out.begin());
    };
    s.g_eval = [dv, sign, kappa, b, d](double t, std::span<const double> x,
                                       std::span<const double>, std::span<double> out) {
        dv(x, out);
        std::vector<double> bt(d);
        b->value_at(t, bt);
        for (int c = 0; c < d; ++c) out[c] = sign * (out[c] + 2.0 * kappa * (x[c] - bt[c]));
    };
    return s;
}

}  // namespace

VecPath phi(const MFGConfig& cfg, const VecPath& b) {
    const int d = cfg.potential.d;
    if (b.dim() != d) throw ShapeError("phi: mean path dimension must equal d");
    if (b.grid().N != cfg.N || std::fabs(b.grid().T - cfg.T) > 1e-12 * std::max(1.0, cfg.T))
        throw ShapeError("phi: mean path must live on the config grid");
    if (!b.all_finite()) throw PreconditionError("phi: mean path must be finite");

    SystemDef sys = make_response_system(cfg, &b);
    ShootOptions so;
    so.grid_N = cfg.N;
    // Warm start: near a fixed point the response tracks b, so its initial
    // velocity is close to b's initial slope.
    std::vector<double> guess(d);
    const double h = b.grid().step();
    for (int c = 0; c < d; ++c) guess[c] = (b(1, c) - b(0, c)) / h;
    ShootResult res = shoot(sys, guess, so);
    if (!res.solution)
        throw PhiError("phi: best-response shooting did not converge (residual " +
                           std::to_string(res.final_residual) + ")",
                       res.final_residual, -1);
    return res.solution->x;
}

IterationTrace fixed_point_iterate(const MFGConfig& cfg, const VecPath& b0, int max_iters,
                                   double tol) {
    if (max_iters < 1) throw PreconditionError("fixed_point_iterate: max_iters >= 1");
    if (!(tol >= 0.0)) throw PreconditionError("fixed_point_iterate: tol must be >= 0");

    IterationTrace tr;
    tr.iterates.push_back(b0);
    for (int k = 0; k < max_iters; ++k) {
        VecPath next;
        try {
            next = phi(cfg, tr.iterates.back());
        } catch (const PhiError& e) {
            throw PhiError(std::string(e.what()) + " at fixed-point iterate " +
                               std::to_string(k),
                           e.residual, k);
        }
        const double dist = sup_distance(next, tr.iterates.back());
        tr.step_distances.push_back(dist);
        tr.iterates.push_back(std::move(next));
        if (dist <= tol) {
            tr.converged = true;
            break;
        }
    }

    const VecPath& limit = tr.iterates.back();
    for (const VecPath& it : tr.iterates)
        tr.distances_to_limit.push_back(sup_distance(it, limit));

    // Local contraction estimate: geometric mean of the last few usable
    // successive step-distance ratios.
    std::vector<double> ratios;
    for (size_t k = 0; k + 1 < tr.step_distances.size(); ++k)
        if (tr.step_distances[k] > 1e-13 && tr.step_distances[k + 1] > 1e-13)
            ratios.push_back(tr.step_distances[k + 1] / tr.step_distances[k]);
    if (ratios.empty()) {
        tr.empirical_ratio = std::numeric_limits<double>::quiet_NaN();
    } else {
        const size_t window = std::min<size_t>(10, ratios.size());
        double log_sum = 0.0;
        for (size_t k = ratios.size() - window; k < ratios.size(); ++k)
            log_sum += std::log(ratios[k]);
        tr.empirical_ratio = std::exp(log_sum / static_cast<double>(window));
    }
    return tr;
}

SystemDef make_mfg_equilibrium_system(const PotentialSpec& pot, Convention conv, double T) {
    validate_potential(pot);
    const int d = pot.d;
    const double f_sign = (conv == Convention::A) ? -1.0 : 1.0;
    auto dv = pot.DV;
    SystemDef s;
    s.m = d;
    s.n = d;
    s.T = T;
    s.name = (conv == Convention::A) ? "mfg_equilibrium_A" : "mfg_equilibrium_B";
    s.boundary.x_bar.assign(d, 0.0);
    s.boundary.y_bar.assign(d, 0.0);
    s.f_eval = [f_sign](double, std::span<const double>, std::span<const double> q,
                        std::span<double> out) {
        for (size_t c = 0; c < q.size(); ++c) out[c] = f_sign * q[c];
    };
    s.g_eval = [dv](double, std::span<const double> x, std::span<const double>,
                    std::span<double> out) {
        dv(x, out);
        for (auto& v : out) v = -v;
    };
    const double gb = pot.grad_inf_norm;
    s.beta_bounds = {{[gb](double, double) { return -gb; }, [gb](double, double) { return gb; }}};
    return s;
}

CandidateSupersolution candidate_supersolution(const MFGConfig& cfg, double theta,
                                               double lambda_param,
                                               SupersolutionVariant variant) {
    if (!(theta > 0.0)) throw PreconditionError("candidate_supersolution: theta > 0");
    const double lambda =
        (lambda_param > 0.0) ? lambda_param : 1.0 - std::pow(cfg.T, -4.0 / 3.0);
    if (!(lambda > 0.0 && lambda < 1.0))
        throw PreconditionError("candidate_supersolution: lambda must be in (0, 1)");
    validate_potential(cfg.potential);

    const int d = cfg.potential.d;
    const double T = cfg.T;
    const double tb = lambda * T;
    const std::vector<double> e = hessian_row_sums_at_zero(cfg.potential);
    std::vector<double> h(d);
    for (int c = 0; c < d; ++c)
        h[c] = 2.0 * lambda * e[c] / (1.0 - lambda) -
               2.0 * (1.0 + std::sqrt(theta)) / ((1.0 - lambda) * (1.0 - lambda) * T * T);

    // First-piece sign: the plain reading keeps +theta t e / +theta e, which
    // does not meet the second piece at lambda T; the adjusted variant
    // negates it and is absolutely continuous.
    const double s1 = (variant == SupersolutionVariant::AsPrinted) ? 1.0 : -1.0;

    auto x_piece2 = [&](double t, std::span<double> out) {
        for (int c = 0; c < d; ++c) out[c] = theta * (-tb * e[c] + h[c] * (t - tb));
    };

    const Grid grid(T, cfg.N);
    VecPath x(grid, d), p(grid, d);

    // x at the nodes; the ramp pieces are exactly linear.
    std::vector<double> tmp(d);
    for (int k = 0; k <= grid.N; ++k) {
        const double t = grid.node(k);
        if (t < tb) {
            for (int c = 0; c < d; ++c) x(k, c) = s1 * theta * t * e[c];
        } else {
            x_piece2(t, tmp);
            for (int c = 0; c < d; ++c) x(k, c) = tmp[c];
        }
    }

    // p: constant on the first piece, then p(t) = -theta e - int DV(x2).
    // The running integral is accumulated per node with Simpson's rule on
    // the exact second-piece ramp.
    std::vector<double> integral(d, 0.0), fa(d), fm(d), fb(d), xa(d);
    auto dv_at = [&](double t, std::span<double> out) {
        x_piece2(t, xa);
        cfg.potential.DV(xa, out);
    };
    double t_prev = tb;
    for (int k = 0; k <= grid.N; ++k) {
        const double t = grid.node(k);
        if (t < tb) {
            for (int c = 0; c < d; ++c) p(k, c) = s1 * theta * e[c];
            continue;
        }
        if (t > t_prev) {
            dv_at(t_prev, fa);
            dv_at(0.5 * (t_prev + t), fm);
            dv_at(t, fb);
            const double w = (t - t_prev) / 6.0;
            for (int c = 0; c < d; ++c) integral[c] += w * (fa[c] + 4.0 * fm[c] + fb[c]);
        }
        for (int c = 0; c < d; ++c) p(k, c) = -theta * e[c] - integral[c];
        t_prev = t;
    }

    CandidateSupersolution out;
    out.theta = theta;
    out.lambda = lambda;
    out.h = h;
    out.pair = PathPair{std::move(x), std::move(p)};

    out.continuity.t_break = tb;
    for (int c = 0; c < d; ++c) {
        out.continuity.jump_x =
            std::max(out.continuity.jump_x, std::fabs(s1 * theta * tb * e[c] + theta * tb * e[c]));
        out.continuity.jump_p =
            std::max(out.continuity.jump_p, std::fabs(s1 * theta * e[c] + theta * e[c]));
    }
    out.continuity.continuous =
        std::max(out.continuity.jump_x, out.continuity.jump_p) <= 1e-10 * std::max(1.0, theta * T);

    // The construction targets the cooperative form of the stationarity
    // system; the certificate is always taken against it.
    SystemDef sys = make_mfg_equilibrium_system(cfg.potential, Convention::B, T);
    out.certificate = is_supersolution(sys, out.pair, 1e-6);
    return out;
}

std::vector<PathPair> equilibria(const MFGConfig& cfg, const EquilibriaOptions& opts) {
    try {
        const AdmissibilityReport adm = admissibility(cfg);
        if (!adm.pass)
            std::fprintf(stderr,
                         "equilibria: admissibility check failed (threshold T = %.4f); "
                         "results may be incomplete\n",
                         adm.threshold_T);
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "equilibria: admissibility not applicable: %s\n", e.what());
    }

    SystemDef sys = make_mfg_equilibrium_system(cfg.potential, cfg.convention, cfg.T);
    const int d = cfg.potential.d;
    std::vector<std::vector<double>> guesses;
    guesses.reserve(opts.guess_levels.size());
    for (double level : opts.guess_levels) guesses.emplace_back(d, level);

    ShootOptions so;
    so.grid_N = cfg.N;
    std::vector<ShootResult> found = multi_start(sys, guesses, opts.dedup_radius, so);

    std::vector<PathPair> out;
    for (auto& r : found) out.push_back(std::move(*r.solution));

    if (cfg.convention == Convention::B) {
        // Descending iteration from the explicit small-theta supersolution;
        // it lands on the minimal solution, which multi-start can miss.
        CandidateSupersolution cand =
            candidate_supersolution(cfg, opts.theta, 0.0, SupersolutionVariant::SignAdjusted);
        if (cand.certificate.pass) {
            SolveOptions mo;
            mo.tol = opts.solve_tol;
            mo.max_sweeps = opts.max_sweeps;
            mo.grid_N = cfg.N;
            mo.require_monotone = true;  // the seed is a certified supersolution
            MinimalSolutionReport rep = solve_minimal(sys, mo, cand.pair);
            if (rep.converged) {
                bool dup = false;
                for (const auto& p : out)
                    if (sup_distance(p, rep.solution) <= opts.dedup_radius) {
                        dup = true;
                        break;
                    }
                if (!dup) out.push_back(std::move(rep.solution));
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const PathPair& a, const PathPair& b) {
        return std::max(sup_norm_path(a.x), sup_norm_path(a.y)) <
               std::max(sup_norm_path(b.x), sup_norm_path(b.y));
    });
    return out;
}

namespace {

// One application of the linearized best-response map at the equilibrium:
// solves delta'' = sign * (D2V(xbar(t)) delta + 2 kappa (delta - z)),
// delta(0) = 0, delta'(T) = 0, by superposition of d + 1 forward solves.
VecPath apply_dphi(const MFGConfig& cfg, const VecPath& xbar, const VecPath& z) {
    const int d = cfg.potential.d;
    const double sign = (cfg.convention == Convention::A) ? 1.0 : -1.0;
    const double kappa = cfg.kappa;
    const Grid& grid = xbar.grid();

    // Frozen data: [xbar | z] stacked per node.
    VecPath frozen(grid, 2 * d);
    for (int k = 0; k <= grid.N; ++k)
        for (int c = 0; c < d; ++c) {
            frozen(k, c) = xbar(k, c);
            frozen(k, d + c) = z(k, c);
        }

    auto hess = cfg.potential.D2V;
    auto rhs = [hess, sign, kappa, d](double, std::span<const double> state,
                                      std::span<const double> fr, std::span<double> out,
                                      bool with_forcing) {
        // state = (delta, w), fr = (xbar(t), z(t)).
        std::vector<double> H(static_cast<size_t>(d) * d);
        hess(fr.subspan(0, d), H);
        for (int c = 0; c < d; ++c) out[c] = state[d + c];
        for (int i = 0; i < d; ++i) {
            double a = 2.0 * kappa * state[i];
            for (int j = 0; j < d; ++j) a += H[static_cast<size_t>(i) * d + j] * state[j];
            if (with_forcing) a -= 2.0 * kappa * fr[d + i];
            out[d + i] = sign * a;
        }
    };
    FieldEval forced{2 * d, 2 * d,
                     [rhs](double t, std::span<const double> s, std::span<const double> fr,
                           std::span<double> out) { rhs(t, s, fr, out, true); }};
    FieldEval homogeneous{2 * d, 2 * d,
                          [rhs](double t, std::span<const double> s, std::span<const double> fr,
                                std::span<double> out) { rhs(t, s, fr, out, false); }};

    std::vector<double> z0(2 * d, 0.0);
    VecPath part = integrate_forward(forced, z0, grid, &frozen);
    std::vector<VecPath> homs(d);
    for (int j = 0; j < d; ++j) {
        std::fill(z0.begin(), z0.end(), 0.0);
        z0[d + j] = 1.0;
        homs[j] = integrate_forward(homogeneous, z0, grid, &frozen);
    }

    // Terminal velocity condition: w_p(T) + M c = 0 with M[:,j] = w_hj(T).
    std::vector<double> M(static_cast<size_t>(d) * d), b(d), c;
    for (int i = 0; i < d; ++i) {
        b[i] = -part(grid.N, d + i);
        for (int j = 0; j < d; ++j) M[static_cast<size_t>(i) * d + j] = homs[j](grid.N, d + i);
    }
    if (!solve_dense(M, b, d, c))
        throw PreconditionError("spectrum: singular terminal condition in the linearized solve");

    VecPath out(grid, d);
    for (int k = 0; k <= grid.N; ++k)
        for (int i = 0; i < d; ++i) {
            double v = part(k, i);
            for (int j = 0; j < d; ++j) v += c[j] * homs[j](k, i);
            out(k, i) = v;
        }
    return out;
}

}  // namespace

SpectrumReport spectrum(const MFGConfig& cfg, const PathPair& equilibrium,
                        const SpectrumOptions& opts) {
    validate_potential(cfg.potential);
    SystemDef sys = make_mfg_equilibrium_system(cfg.potential, cfg.convention, cfg.T);
    const double res = residual(sys, equilibrium).total();
    if (res > opts.equilibrium_tol)
        throw PreconditionError("spectrum: input path is not an equilibrium (residual " +
                                std::to_string(res) + ")");

    SpectrumReport rep;
    const int d = cfg.potential.d;
    const bool zero_eq =
        std::max(sup_norm_path(equilibrium.x), sup_norm_path(equilibrium.y)) <= 1e-6;
    rep.equilibrium_label = zero_eq ? "zero" : "nontrivial";

    // Analytic branch: constant coefficients require the zero equilibrium
    // and a diagonal Hessian at the origin.
    if (zero_eq) {
        std::vector<double> zero(d, 0.0), H(static_cast<size_t>(d) * d);
        cfg.potential.D2V(zero, H);
        bool diagonal = true;
        for (int i = 0; i < d && diagonal; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j && std::fabs(H[static_cast<size_t>(i) * d + j]) > 1e-12)
                    diagonal = false;
        if (diagonal) {
            for (int i = 0; i < d; ++i) {
                const double v = H[static_cast<size_t>(i) * d + i];
                for (int q = 1; q <= opts.analytic_modes; ++q) {
                    const double mu =
                        std::pow((2.0 * q - 1.0) * M_PI / (2.0 * cfg.T), 2.0);
                    const double gamma =
                        (cfg.convention == Convention::A) ? -(v + mu) : (mu - v);
                    rep.analytic_lambdas.push_back(2.0 * cfg.kappa /
                                                   (2.0 * cfg.kappa - gamma));
                }
            }
            std::sort(rep.analytic_lambdas.begin(), rep.analytic_lambdas.end(),
                      [](double a, double b) { return std::fabs(a) > std::fabs(b); });
        }
    }

    // Power iteration with Rayleigh quotient on the discretized linearized map.
    const Grid grid(cfg.T, cfg.N);
    VecPath xbar(grid, d);
    for (int k = 0; k <= grid.N; ++k) {
        auto row = xbar.at(k);
        equilibrium.x.value_at(grid.node(k), row);
    }
    VecPath v(grid, d, 1.0);
    double lambda_prev = 0.0;
    for (int it = 0; it < opts.power_max_iters; ++it) {
        ++rep.power_iters;
        VecPath av = apply_dphi(cfg, xbar, v);
        double num = 0.0, den = 0.0, nrm = 0.0;
        for (size_t i = 0; i < v.raw().size(); ++i) {
            num += v.raw()[i] * av.raw()[i];
            den += v.raw()[i] * v.raw()[i];
            nrm += av.raw()[i] * av.raw()[i];
        }
        const double lambda = num / den;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-300) {
            rep.dominant_lambda_power = 0.0;
            rep.power_converged = true;
            break;
        }
        for (int k = 0; k <= grid.N; ++k)
            for (int c = 0; c < d; ++c) v(k, c) = av(k, c) / nrm;
        rep.dominant_lambda_power = lambda;
        if (it > 0 && std::fabs(lambda - lambda_prev) <= opts.power_tol) {
            rep.power_converged = true;
            break;
        }
        lambda_prev = lambda;
    }

    rep.bound = 2.0 * cfg.kappa / (2.0 * cfg.kappa + cfg.potential.gamma_min);
    rep.bound_satisfied = std::fabs(rep.dominant_lambda_power) < rep.bound;
    return rep;
}

}  // namespace qmbvp
