#include "qmbvp/system.hpp"

#include <algorithm>
#include <cmath>

#include "qmbvp/errors.hpp"
#include "qmbvp/kernels.hpp"

namespace qmbvp {

namespace {

void require_pair_matches(const SystemDef& sys, const PathPair& pair) {
    if (pair.x.dim() != sys.m || pair.y.dim() != sys.n)
        throw ShapeError("pair dimensions do not match system (" + sys.name + ")");
    if (std::fabs(pair.grid().T - sys.T) > 1e-12 * std::max(1.0, sys.T))
        throw ShapeError("pair horizon does not match system horizon");
}

// Radical-inverse (Halton) low-discrepancy sequence; deterministic.
double radical_inverse(int base, unsigned long long idx) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (idx > 0) {
        r += f * static_cast<double>(idx % base);
        idx /= base;
        f *= inv;
    }
    return r;
}

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                           37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79};

}  // namespace

ResidualReport residual(const SystemDef& sys, const PathPair& pair) {
    require_pair_matches(sys, pair);
    DefectTable d = midpoint_defects(sys, pair);

    ResidualReport r;
    r.min_x_defect = d.x.empty() ? 0.0 : d.x[0];
    r.max_y_defect = d.y.empty() ? 0.0 : d.y[0];
    const int m = sys.m, n = sys.n;
    for (size_t i = 0; i < d.x.size(); ++i) {
        const double v = d.x[i];
        r.max_abs_x_defect = std::max(r.max_abs_x_defect, std::fabs(v));
        if (v < r.min_x_defect) {
            r.min_x_defect = v;
            r.worst_x_node = static_cast<int>(i) / m;
            r.worst_x_comp = static_cast<int>(i) % m;
        }
    }
    for (size_t j = 0; j < d.y.size(); ++j) {
        const double v = d.y[j];
        r.max_abs_y_defect = std::max(r.max_abs_y_defect, std::fabs(v));
        if (v > r.max_y_defect) {
            r.max_y_defect = v;
            r.worst_y_node = static_cast<int>(j) / n;
            r.worst_y_comp = static_cast<int>(j) % n;
        }
    }
    for (int c = 0; c < m; ++c)
        r.boundary_defect_x =
            std::max(r.boundary_defect_x, std::fabs(pair.x(0, c) - sys.boundary.x_bar[c]));
    for (int c = 0; c < n; ++c)
        r.boundary_defect_y = std::max(
            r.boundary_defect_y, std::fabs(pair.y(pair.grid().N, c) - sys.boundary.y_bar[c]));
    return r;
}

SupersolutionCertificate is_supersolution(const SystemDef& sys, const PathPair& pair,
                                          double tol) {
    if (tol < 0.0) throw PreconditionError("is_supersolution: tol must be >= 0");
    require_pair_matches(sys, pair);
    DefectTable d = midpoint_defects(sys, pair);

    SupersolutionCertificate cert;
    cert.tol = tol;
    const int m = sys.m, n = sys.n, N = pair.grid().N;
    cert.boundary_gap_x.resize(m);
    cert.boundary_gap_y.resize(n);
    for (int c = 0; c < m; ++c) cert.boundary_gap_x[c] = pair.x(0, c) - sys.boundary.x_bar[c];
    for (int c = 0; c < n; ++c) cert.boundary_gap_y[c] = pair.y(N, c) - sys.boundary.y_bar[c];

    cert.worst_x_residual = d.x[0];
    cert.worst_y_residual = d.y[0];
    for (size_t i = 0; i < d.x.size(); ++i)
        if (d.x[i] < cert.worst_x_residual) {
            cert.worst_x_residual = d.x[i];
            cert.worst_x_node = static_cast<int>(i) / m;
            cert.worst_x_comp = static_cast<int>(i) % m;
        }
    for (size_t j = 0; j < d.y.size(); ++j)
        if (d.y[j] > cert.worst_y_residual) {
            cert.worst_y_residual = d.y[j];
            cert.worst_y_node = static_cast<int>(j) / n;
            cert.worst_y_comp = static_cast<int>(j) % n;
        }

    bool boundary_ok = true;
    for (double v : cert.boundary_gap_x) boundary_ok = boundary_ok && v >= -tol;
    for (double v : cert.boundary_gap_y) boundary_ok = boundary_ok && v >= -tol;
    cert.pass = boundary_ok && cert.worst_x_residual >= -tol && cert.worst_y_residual <= tol;
    return cert;
}

MonotonicityReport check_quasi_monotone(const SystemDef& sys, double box_lo, double box_hi,
                                        const QuasiMonotoneOptions& opts) {
    if (opts.samples < 1) throw PreconditionError("check_quasi_monotone: samples >= 1");
    if (!(opts.step > 0.0)) throw PreconditionError("check_quasi_monotone: step > 0");
    return quasi_monotone_kernel(sys, box_lo, box_hi, opts,
                                 opts.parallel ? Exec::Parallel : Exec::Serial);
}

ReducedFields reduce_extremes(const SystemDef& sys) {
    const int m = sys.m, n = sys.n;
    auto f = sys.f_eval;
    auto g = sys.g_eval;
    auto eval_block = [m, n](const auto& fn, int out_dim, double t, double s, double tau,
                             bool take_min) {
        std::vector<double> xs(m, s), ys(n, tau), out(out_dim);
        fn(t, xs, ys, out);
        return take_min ? *std::min_element(out.begin(), out.end())
                        : *std::max_element(out.begin(), out.end());
    };
    ReducedFields r;
    r.f_min = [f, m, n, eval_block](double t, double s, double tau) {
        return eval_block(f, m, t, s, tau, true);
    };
    r.f_max = [f, m, n, eval_block](double t, double s, double tau) {
        return eval_block(f, m, t, s, tau, false);
    };
    r.g_min = [g, m, n, eval_block](double t, double s, double tau) {
        return eval_block(g, n, t, s, tau, true);
    };
    r.g_max = [g, m, n, eval_block](double t, double s, double tau) {
        return eval_block(g, n, t, s, tau, false);
    };
    return r;
}

PathPair reduce_pair(const PathPair& pair) {
    const Grid& g = pair.grid();
    VecPath rx(g, 1), ry(g, 1);
    for (int k = 0; k <= g.N; ++k) {
        auto xs = pair.x.at(k);
        auto ys = pair.y.at(k);
        rx(k, 0) = *std::min_element(xs.begin(), xs.end());
        ry(k, 0) = *std::min_element(ys.begin(), ys.end());
    }
    return {std::move(rx), std::move(ry)};
}

SystemDef make_reduced_system(const SystemDef& sys) {
    ReducedFields rf = reduce_extremes(sys);
    SystemDef red;
    red.m = 1;
    red.n = 1;
    red.T = sys.T;
    red.name = sys.name + "_reduced";
    red.box_lo = sys.box_lo;
    red.box_hi = sys.box_hi;
    red.boundary.x_bar = {
        *std::min_element(sys.boundary.x_bar.begin(), sys.boundary.x_bar.end())};
    red.boundary.y_bar = {
        *std::min_element(sys.boundary.y_bar.begin(), sys.boundary.y_bar.end())};
    auto fmin = rf.f_min;
    auto gmax = rf.g_max;
    red.f_eval = [fmin](double t, std::span<const double> x, std::span<const double> y,
                        std::span<double> out) { out[0] = fmin(t, x[0], y[0]); };
    red.g_eval = [gmax](double t, std::span<const double> x, std::span<const double> y,
                        std::span<double> out) { out[0] = gmax(t, x[0], y[0]); };
    return red;
}

ConditionCertificate certify_condition(const SystemDef& sys, Condition which,
                                       const std::pair<EnvelopeBound, EnvelopeBound>& bounds,
                                       const CertifyOptions& opts) {
    ConditionCertificate cert;
    cert.which = which;
    ReducedFields rf = reduce_extremes(sys);
    const Grid grid(sys.T, opts.grid_N);

    const double xbar_min =
        *std::min_element(sys.boundary.x_bar.begin(), sys.boundary.x_bar.end());
    const double xbar_max =
        *std::max_element(sys.boundary.x_bar.begin(), sys.boundary.x_bar.end());
    const double ybar_min =
        *std::min_element(sys.boundary.y_bar.begin(), sys.boundary.y_bar.end());
    const double ybar_max =
        *std::max_element(sys.boundary.y_bar.begin(), sys.boundary.y_bar.end());

    auto path_min = [](const VecPath& p) {
        return *std::min_element(p.raw().begin(), p.raw().end());
    };
    auto path_max = [](const VecPath& p) {
        return *std::max_element(p.raw().begin(), p.raw().end());
    };

    auto solve = [&](const ScalarField& field, double value, Anchor anchor,
                     const std::string& label) -> std::optional<VecPath> {
        try {
            return solve_scalar_cauchy(field, value, anchor, grid, opts.blowup_threshold);
        } catch (const BlowUpError&) {
            cert.blowup = true;
            if (cert.blowup_problem.empty()) cert.blowup_problem = label;
            return std::nullopt;
        }
    };

    bool solves_ok = true;
    if (which == Condition::I) {
        // gamma: lower/upper comparison paths for the x block (forward solves).
        auto g1 = solve([&bounds](double t, double s) { return bounds.first(t, s); },
                        xbar_min, Anchor::Start, "gamma1: gammadot = alpha1, gamma(0) = min x_bar");
        auto g2 = solve([&bounds](double t, double s) { return bounds.second(t, s); },
                        xbar_max, Anchor::Start, "gamma2: gammadot = alpha2, gamma(0) = max x_bar");
        solves_ok = g1 && g2;
        if (g1) cert.gamma1 = *g1;
        if (g2) cert.gamma2 = *g2;
        if (solves_ok) {
            const double gamma_min = path_min(*g1);
            const double gamma_max = path_max(*g2);
            auto e1 = solve([&rf, gamma_min](double t, double eta) {
                               return rf.g_min(t, gamma_min, eta);
                           },
                           ybar_min, Anchor::End, "eta1: etadot = g_min(t, gamma_min, eta)");
            auto e2 = solve([&rf, gamma_max](double t, double eta) {
                               return rf.g_min(t, gamma_max, eta);
                           },
                           ybar_max, Anchor::End, "eta2: etadot = g_min(t, gamma_max, eta)");
            solves_ok = e1 && e2;
            if (e1) cert.eta1 = *e1;
            if (e2) cert.eta2 = *e2;
            if (solves_ok) cert.m_star = std::min(path_min(*g1), path_min(*e1));
            cert.instances_checked = {
                "gamma(0) = " + std::to_string(xbar_min), "gamma(0) = " + std::to_string(xbar_max),
                "eta(T) = " + std::to_string(ybar_min) + " with M = " + std::to_string(gamma_min),
                "eta(T) = " + std::to_string(ybar_max) + " with M = " + std::to_string(gamma_max)};
        }
    } else {
        // Mirrored construction: beta envelopes bound the y block backward;
        // f_max with a frozen y level bounds the x block forward.
        auto g1 = solve([&bounds](double t, double s) { return bounds.second(t, s); },
                        ybar_min, Anchor::End, "gamma1: gammadot = beta2, gamma(T) = min y_bar");
        auto g2 = solve([&bounds](double t, double s) { return bounds.first(t, s); },
                        ybar_max, Anchor::End, "gamma2: gammadot = beta1, gamma(T) = max y_bar");
        solves_ok = g1 && g2;
        if (g1) cert.gamma1 = *g1;
        if (g2) cert.gamma2 = *g2;
        if (solves_ok) {
            const double gamma_min = path_min(*g1);
            const double gamma_max = path_max(*g2);
            auto e1 = solve([&rf, gamma_min](double t, double eta) {
                               return rf.f_max(t, eta, gamma_min);
                           },
                           xbar_min, Anchor::Start, "eta1: etadot = f_max(t, eta, gamma_min)");
            auto e2 = solve([&rf, gamma_max](double t, double eta) {
                               return rf.f_max(t, eta, gamma_max);
                           },
                           xbar_max, Anchor::Start, "eta2: etadot = f_max(t, eta, gamma_max)");
            solves_ok = e1 && e2;
            if (e1) cert.eta1 = *e1;
            if (e2) cert.eta2 = *e2;
            if (solves_ok) cert.m_star = std::min(path_min(*g1), path_min(*e1));
            cert.instances_checked = {
                "gamma(T) = " + std::to_string(ybar_min), "gamma(T) = " + std::to_string(ybar_max),
                "eta(0) = " + std::to_string(xbar_min) + " with M = " + std::to_string(gamma_min),
                "eta(0) = " + std::to_string(xbar_max) + " with M = " + std::to_string(gamma_max)};
        }
    }

    // Sample-check the envelope inequality on [box]^2 x [0, T].
    cert.envelope_ok = true;
    const double lo = sys.box_lo, hi = sys.box_hi;
    for (int i = 0; i < opts.envelope_samples && cert.envelope_ok; ++i) {
        const double t = sys.T * radical_inverse(2, i + 1);
        const double s = lo + (hi - lo) * radical_inverse(3, i + 1);
        const double tau = lo + (hi - lo) * radical_inverse(5, i + 1);
        if (which == Condition::I) {
            if (bounds.first(t, s) > rf.f_min(t, s, tau) + opts.envelope_tol ||
                rf.f_max(t, s, tau) > bounds.second(t, s) + opts.envelope_tol)
                cert.envelope_ok = false;
        } else {
            if (bounds.first(t, tau) > rf.g_min(t, s, tau) + opts.envelope_tol ||
                rf.g_max(t, s, tau) > bounds.second(t, tau) + opts.envelope_tol)
                cert.envelope_ok = false;
        }
    }

    cert.verdict = solves_ok && cert.envelope_ok;
    return cert;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

SystemDef make_oscillator(double a, double b) {
    SystemDef s;
    s.m = 1;
    s.n = 1;
    s.T = 2.0 * M_PI;
    s.name = "oscillator";
    s.boundary.x_bar = {a};
    s.boundary.y_bar = {b};
    s.f_eval = [](double, std::span<const double>, std::span<const double> y,
                  std::span<double> out) { out[0] = y[0]; };
    s.g_eval = [](double, std::span<const double> x, std::span<const double>,
                  std::span<double> out) { out[0] = -x[0]; };
    s.alpha_bounds = {{[](double, double s_) { return -1.0 - s_; },
                       [](double, double s_) { return 1.0 - s_; }}};
    s.beta_bounds = {{[](double, double tau) { return -1.0 - tau; },
                      [](double, double tau) { return 1.0 - tau; }}};
    return s;
}

PathPair oscillator_closed_form(double a, double b, const Grid& grid) {
    const double r = std::hypot(a, b);
    const double theta = (r == 0.0) ? 0.0 : std::asin(a / r);
    VecPath x(grid, 1), y(grid, 1);
    for (int k = 0; k <= grid.N; ++k) {
        const double t = grid.node(k);
        x(k, 0) = r * std::sin(theta + t);
        y(k, 0) = r * std::cos(theta + t);
    }
    return {std::move(x), std::move(y)};
}

SystemDef make_bounded_coupled() {
    SystemDef s;
    s.m = 1;
    s.n = 1;
    s.T = 1.0;
    s.name = "bounded_coupled";
    s.boundary.x_bar = {0.0};
    s.boundary.y_bar = {0.0};
    s.f_eval = [](double, std::span<const double> x, std::span<const double> y,
                  std::span<double> out) { out[0] = std::tanh(y[0]) - x[0]; };
    s.g_eval = [](double, std::span<const double> x, std::span<const double> y,
                  std::span<double> out) { out[0] = -std::tanh(x[0]) - y[0]; };
    s.alpha_bounds = {{[](double, double s_) { return -1.0 - s_; },
                       [](double, double s_) { return 1.0 - s_; }}};
    s.beta_bounds = {{[](double, double tau) { return -1.0 - tau; },
                      [](double, double tau) { return 1.0 - tau; }}};
    return s;
}

SystemDef make_bounded_hamiltonian(double x_bar, double p_bar, double T) {
    SystemDef s;
    s.m = 1;
    s.n = 1;
    s.T = T;
    s.name = "hamiltonian";
    s.boundary.x_bar = {x_bar};
    s.boundary.y_bar = {p_bar};
    // H(x, p) = sqrt(1 + x^2) + sqrt(1 + p^2)
    s.f_eval = [](double, std::span<const double>, std::span<const double> p,
                  std::span<double> out) { out[0] = p[0] / std::sqrt(1.0 + p[0] * p[0]); };
    s.g_eval = [](double, std::span<const double> x, std::span<const double>,
                  std::span<double> out) { out[0] = -x[0] / std::sqrt(1.0 + x[0] * x[0]); };
    s.alpha_bounds = {{[](double, double) { return -1.0; }, [](double, double) { return 1.0; }}};
    s.beta_bounds = {{[](double, double) { return -1.0; }, [](double, double) { return 1.0; }}};
    return s;
}

SystemDef make_registry_system(const std::string& name, double a, double b, double T) {
    if (name == "oscillator") return make_oscillator(a, b);
    if (name == "bounded_coupled") return make_bounded_coupled();
    if (name == "hamiltonian") return make_bounded_hamiltonian(a, b, T);
    throw PreconditionError("unknown registry system: " + name);
}

}  // namespace qmbvp
