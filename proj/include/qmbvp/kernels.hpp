#pragma once

#include <vector>

#include "qmbvp/grid.hpp"

namespace qmbvp {

struct SystemDef;
struct MonotonicityReport;
struct QuasiMonotoneOptions;

/// Execution policy for the data-parallel kernels. Parallel and Serial
/// produce bit-identical results; Serial is the reference implementation
/// kept for testing and benchmarking.
enum class Exec { Serial, Parallel };

/// Per-interval midpoint defects: for interval k and component c,
/// x[k*m + c] = (x_{k+1,c} - x_{k,c}) / h - f_c(t_mid, x_mid, y_mid),
/// y[k*n + c] analogous with g. Defect sign convention matches the
/// supersolution inequalities: x defects should be >= 0, y defects <= 0.
struct DefectTable {
    std::vector<double> x;
    std::vector<double> y;
};

DefectTable midpoint_defects(const SystemDef& sys, const PathPair& pair,
                             Exec exec = Exec::Parallel);

MonotonicityReport quasi_monotone_kernel(const SystemDef& sys, double box_lo, double box_hi,
                                         const QuasiMonotoneOptions& opts, Exec exec);

}  // namespace qmbvp
