#include "qmbvp/ivp.hpp"

#include <cmath>
#include <string>

#include "qmbvp/errors.hpp"

namespace qmbvp {

namespace {

bool state_ok(std::span<const double> s, double threshold) {
    for (double v : s)
        if (!std::isfinite(v) || std::fabs(v) > threshold) return false;
    return true;
}

[[noreturn]] void throw_blowup(int node, double time) {
    throw BlowUpError("ivp: state exceeded blow-up threshold at node " +
                          std::to_string(node) + " (t = " + std::to_string(time) + ")",
                      node, time);
}

// One RK4 sweep over the grid. `dir` is +1 (forward, start node 0) or -1
// (backward, start node N).
VecPath rk4(const FieldEval& field, std::span<const double> init, const Grid& grid,
            const VecPath* frozen, double threshold, int dir) {
    const int d = field.dim_state;
    if (static_cast<int>(init.size()) != d)
        throw ShapeError("ivp: initial value dimension mismatch");
    if (frozen) {
        if (!(frozen->grid() == grid)) throw ShapeError("ivp: frozen path grid mismatch");
        if (frozen->dim() != field.dim_frozen)
            throw ShapeError("ivp: frozen path dimension mismatch");
    } else if (field.dim_frozen != 0) {
        throw ShapeError("ivp: field expects a frozen path");
    }

    VecPath out(grid, d);
    const int start = (dir > 0) ? 0 : grid.N;
    for (int c = 0; c < d; ++c) out(start, c) = init[c];

    const double h = dir * grid.step();
    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    std::vector<double> fz(field.dim_frozen), fz_mid(field.dim_frozen), fz_end(field.dim_frozen);

    for (int step = 0; step < grid.N; ++step) {
        const int k = (dir > 0) ? step : grid.N - step;
        const int knext = k + dir;
        const double t = grid.node(k);
        const double t_mid = t + 0.5 * h;
        const double t_end = grid.node(knext);
        auto cur = out.at(k);

        if (frozen) {
            frozen->value_at(t, fz);
            frozen->value_at(t_mid, fz_mid);
            frozen->value_at(t_end, fz_end);
        }

        field.eval(t, cur, fz, k1);
        for (int c = 0; c < d; ++c) tmp[c] = cur[c] + 0.5 * h * k1[c];
        field.eval(t_mid, tmp, fz_mid, k2);
        for (int c = 0; c < d; ++c) tmp[c] = cur[c] + 0.5 * h * k2[c];
        field.eval(t_mid, tmp, fz_mid, k3);
        for (int c = 0; c < d; ++c) tmp[c] = cur[c] + h * k3[c];
        field.eval(t_end, tmp, fz_end, k4);

        auto nxt = out.at(knext);
        for (int c = 0; c < d; ++c)
            nxt[c] = cur[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);

        if (!state_ok(nxt, threshold)) throw_blowup(knext, t_end);
    }
    return out;
}

}  // namespace

VecPath integrate_forward(const FieldEval& field, std::span<const double> x0,
                          const Grid& grid, const VecPath* frozen,
                          double blowup_threshold) {
    return rk4(field, x0, grid, frozen, blowup_threshold, +1);
}

VecPath integrate_backward(const FieldEval& field, std::span<const double> yT,
                           const Grid& grid, const VecPath* frozen,
                           double blowup_threshold) {
    return rk4(field, yT, grid, frozen, blowup_threshold, -1);
}

VecPath solve_scalar_cauchy(const ScalarField& field, double value, Anchor anchored_at,
                            const Grid& grid, double blowup_threshold) {
    FieldEval f{1, 0,
                [&field](double t, std::span<const double> s, std::span<const double>,
                         std::span<double> out) { out[0] = field(t, s[0]); }};
    const double init[1] = {value};
    return (anchored_at == Anchor::Start)
               ? integrate_forward(f, init, grid, nullptr, blowup_threshold)
               : integrate_backward(f, init, grid, nullptr, blowup_threshold);
}

}  // namespace qmbvp
