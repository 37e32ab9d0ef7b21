// Micro-benchmark comparing the serial reference kernels against the
// OpenMP-parallel ones. Both must produce bit-identical results; this tool
// reports the speedup actually obtained on the current machine.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "qmbvp/kernels.hpp"
#include "qmbvp/system.hpp"

using namespace qmbvp;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e99;
    for (int r = 0; r < reps; ++r) {
        auto t0 = Clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main() {
    SystemDef sys = make_bounded_coupled();

    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [ms]", "parallel [ms]",
                "speedup");

    for (int N : {20000, 200000, 2000000}) {
        Grid g(1.0, N);
        VecPath x(g, 1), y(g, 1);
        for (int k = 0; k <= N; ++k) {
            x(k, 0) = std::sin(7.0 * g.node(k));
            y(k, 0) = std::cos(3.0 * g.node(k));
        }
        PathPair p{x, y};

        DefectTable ref;
        double ts = time_best_of(5, [&] { ref = midpoint_defects(sys, p, Exec::Serial); });
        DefectTable par;
        double tp = time_best_of(5, [&] { par = midpoint_defects(sys, p, Exec::Parallel); });
        const bool same = ref.x == par.x && ref.y == par.y;
        char label[64];
        std::snprintf(label, sizeof label, "midpoint_defects N=%d", N);
        std::printf("%-28s %12.3f %12.3f %7.2fx %s\n", label, 1e3 * ts, 1e3 * tp, ts / tp,
                    same ? "" : "MISMATCH");
    }

    for (int samples : {2000, 20000, 200000}) {
        QuasiMonotoneOptions opts;
        opts.samples = samples;
        MonotonicityReport ref;
        double ts = time_best_of(3, [&] {
            ref = quasi_monotone_kernel(sys, -10.0, 10.0, opts, Exec::Serial);
        });
        MonotonicityReport par;
        double tp = time_best_of(3, [&] {
            par = quasi_monotone_kernel(sys, -10.0, 10.0, opts, Exec::Parallel);
        });
        const bool same =
            ref.pass == par.pass && ref.violations.size() == par.violations.size();
        char label[64];
        std::snprintf(label, sizeof label, "quasi_monotone n=%d", samples);
        std::printf("%-28s %12.3f %12.3f %7.2fx %s\n", label, 1e3 * ts, 1e3 * tp, ts / tp,
                    same ? "" : "MISMATCH");
    }
    return 0;
}
