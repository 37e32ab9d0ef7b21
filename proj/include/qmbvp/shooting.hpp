#pragma once

#include <optional>
#include <vector>

#include "qmbvp/kernels.hpp"
#include "qmbvp/system.hpp"

namespace qmbvp {

struct ShootOptions {
    int grid_N = 1000;
    double shoot_tol = 1e-9;         // terminal residual |y(T) - y_bar|_inf
    int max_newton_iters = 50;
    double fd_step = 1e-6;           // finite-difference Jacobian increment
    double min_damping = 1e-4;       // backtracking floor (halving)
    double blowup_threshold = kDefaultBlowupThreshold;
};

struct ShootResult {
    std::optional<PathPair> solution;
    std::vector<double> y0_found;
    int newton_iters = 0;
    double final_residual = 0.0;
};

/// Single shooting on the unknown y(0): integrates the joint system forward
/// and runs damped Newton on y0 -> y(T) - y_bar.
ShootResult shoot(const SystemDef& sys, std::vector<double> y0_guess,
                  const ShootOptions& opts = {});

/// Runs shoot per guess (in parallel), drops failures, deduplicates
/// solutions within `dedup_radius` in sup-distance, and sorts the distinct
/// ones by sup norm.
std::vector<ShootResult> multi_start(const SystemDef& sys,
                                     const std::vector<std::vector<double>>& guesses,
                                     double dedup_radius = 1e-4,
                                     const ShootOptions& opts = {},
                                     Exec exec = Exec::Parallel);

}  // namespace qmbvp
