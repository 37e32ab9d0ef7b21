#pragma once

#include <optional>
#include <vector>

#include "qmbvp/system.hpp"

namespace qmbvp {

struct SolveOptions {
    double tol = 1e-6;            // residual target
    int max_sweeps = 500;
    double stall_tol = 1e-12;     // sup-distance between consecutive iterates
    int grid_N = 1000;
    double divergence_threshold = 1e8;
    double monotone_slack = 1e-10;
    bool sweep_y_first = false;   // experimental variant; default follows the
                                  // x-then-y construction order
    // When set, a sweep output exceeding its input is an internal-consistency
    // error (certified starts must descend); otherwise it only clears
    // monotone_ok. The certificate overload always enforces it.
    bool require_monotone = false;
};

struct MinimalSolutionReport {
    PathPair solution;
    int sweeps_used = 0;
    std::vector<double> residual_history;
    bool monotone_ok = true;
    bool converged = false;
    PathPair initial_supersolution;
    std::optional<double> m_star;
};

/// Builds the explicit starting supersolution from a passed condition
/// certificate: condition (i) uses (gamma2, eta2) constant-block paths,
/// condition (ii) the mirrored (eta2, gamma2) assignment.
PathPair initial_supersolution(const SystemDef& sys, const ConditionCertificate& cert);

/// One relaxation sweep: x' solves xdot = f(t, x, y frozen) forward from
/// x_bar, then y' solves ydot = g(t, x' frozen, y) backward from y_bar.
PathPair sweep(const SystemDef& sys, const PathPair& pair, bool y_first = false,
               double blowup_threshold = kDefaultBlowupThreshold);

/// Iterates sweeps from an initial supersolution until the residual target,
/// a stall, or max_sweeps. Asserts componentwise nonincrease per sweep and,
/// when m_star is supplied, the uniform lower bound on every iterate.
/// Throws UnboundedBelowError when the divergence guard trips.
MinimalSolutionReport solve_minimal(const SystemDef& sys, const SolveOptions& opts,
                                    const PathPair& initial,
                                    std::optional<double> m_star = std::nullopt);

MinimalSolutionReport solve_minimal(const SystemDef& sys, const SolveOptions& opts,
                                    const ConditionCertificate& cert);

}  // namespace qmbvp
