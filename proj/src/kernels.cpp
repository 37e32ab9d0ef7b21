#include "qmbvp/kernels.hpp"

#include <cmath>
#include <vector>

#include "qmbvp/system.hpp"

namespace qmbvp {

namespace {

// Deterministic Halton point; matches the envelope sampler's bases offset.
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

void defect_interval(const SystemDef& sys, const PathPair& pair, int k, double h,
                     double* dx, double* dy) {
    const int m = sys.m, n = sys.n;
    std::vector<double> xm(m), ym(n), fx(m), gy(n);
    const double t_mid = pair.grid().node(k) + 0.5 * h;
    auto x0 = pair.x.at(k);
    auto x1 = pair.x.at(k + 1);
    auto y0 = pair.y.at(k);
    auto y1 = pair.y.at(k + 1);
    for (int c = 0; c < m; ++c) xm[c] = 0.5 * (x0[c] + x1[c]);
    for (int c = 0; c < n; ++c) ym[c] = 0.5 * (y0[c] + y1[c]);
    sys.eval_f(t_mid, xm, ym, fx);
    sys.eval_g(t_mid, xm, ym, gy);
    for (int c = 0; c < m; ++c) dx[c] = (x1[c] - x0[c]) / h - fx[c];
    for (int c = 0; c < n; ++c) dy[c] = (y1[c] - y0[c]) / h - gy[c];
}

struct SamplePoint {
    double t;
    std::vector<double> x;
    std::vector<double> y;
};

SamplePoint halton_point(const SystemDef& sys, double lo, double hi, int idx) {
    SamplePoint p;
    p.x.resize(sys.m);
    p.y.resize(sys.n);
    const unsigned long long i = static_cast<unsigned long long>(idx) + 1;
    p.t = sys.T * radical_inverse(kPrimes[0], i);
    for (int c = 0; c < sys.m; ++c)
        p.x[c] = lo + (hi - lo) * radical_inverse(kPrimes[1 + c], i);
    for (int c = 0; c < sys.n; ++c)
        p.y[c] = lo + (hi - lo) * radical_inverse(kPrimes[1 + sys.m + c], i);
    return p;
}

// Collects (M1)/(M2) violations at one sample point, in a fixed order.
void monotone_point(const SystemDef& sys, const QuasiMonotoneOptions& opts,
                    const SamplePoint& p, std::vector<MonotonicityViolation>& out) {
    const int m = sys.m, n = sys.n;
    std::vector<double> base_f(m), base_g(n), pert_f(m), pert_g(n);
    std::vector<double> xs = p.x, ys = p.y;
    sys.eval_f(p.t, xs, ys, base_f);
    sys.eval_g(p.t, xs, ys, base_g);

    auto record = [&](MonotonicityViolation::Which w, int comp, int pert, double slope) {
        out.push_back({w, comp, pert, p.t, p.x, p.y, slope});
    };

    // Perturb each x_k, then each y_k, once; read off all affected rows.
    for (int pk = 0; pk < m + n; ++pk) {
        const bool in_x = pk < m;
        double& slot = in_x ? xs[pk] : ys[pk - m];
        const double saved = slot;
        slot = saved + opts.step;
        sys.eval_f(p.t, xs, ys, pert_f);
        sys.eval_g(p.t, xs, ys, pert_g);
        slot = saved;

        for (int i = 0; i < m; ++i) {
            // (M1): f_i nondecreasing in x_k (k != i) and in y_j.
            if (in_x && pk == i) continue;
            if (!in_x && !opts.m1_all_y && (pk - m) == i) continue;
            const double slope = (pert_f[i] - base_f[i]) / opts.step;
            if (slope < -opts.slope_tol) record(MonotonicityViolation::Which::M1, i, pk, slope);
        }
        for (int j = 0; j < n; ++j) {
            // (M2): g_j nonincreasing in x_i and in y_k (k != j).
            if (!in_x && (pk - m) == j) continue;
            const double slope = (pert_g[j] - base_g[j]) / opts.step;
            if (slope > opts.slope_tol) record(MonotonicityViolation::Which::M2, j, pk, slope);
        }
    }
}

}  // namespace

DefectTable midpoint_defects(const SystemDef& sys, const PathPair& pair, Exec exec) {
    const int N = pair.grid().N;
    const int m = sys.m, n = sys.n;
    const double h = pair.grid().step();
    DefectTable d;
    d.x.resize(static_cast<size_t>(N) * m);
    d.y.resize(static_cast<size_t>(N) * n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < N; ++k)
            defect_interval(sys, pair, k, h, d.x.data() + static_cast<size_t>(k) * m,
                            d.y.data() + static_cast<size_t>(k) * n);
    } else {
        for (int k = 0; k < N; ++k)
            defect_interval(sys, pair, k, h, d.x.data() + static_cast<size_t>(k) * m,
                            d.y.data() + static_cast<size_t>(k) * n);
    }
    return d;
}

MonotonicityReport quasi_monotone_kernel(const SystemDef& sys, double box_lo, double box_hi,
                                         const QuasiMonotoneOptions& opts, Exec exec) {
    const int S = opts.samples;
    std::vector<std::vector<MonotonicityViolation>> per_sample(S);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int s = 0; s < S; ++s)
            monotone_point(sys, opts, halton_point(sys, box_lo, box_hi, s), per_sample[s]);
    } else {
        for (int s = 0; s < S; ++s)
            monotone_point(sys, opts, halton_point(sys, box_lo, box_hi, s), per_sample[s]);
    }
    MonotonicityReport rep;
    for (auto& v : per_sample)
        rep.violations.insert(rep.violations.end(), v.begin(), v.end());
    rep.pass = rep.violations.empty();
    return rep;
}

}  // namespace qmbvp
