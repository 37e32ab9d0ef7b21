#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qmbvp/grid.hpp"

namespace qmbvp {

/// Right-hand side evaluator: (t, state, frozen-path value) -> derivative.
/// `frozen` is empty when no frozen path is attached.
struct FieldEval {
    int dim_state = 1;
    int dim_frozen = 0;
    std::function<void(double t, std::span<const double> state,
                       std::span<const double> frozen, std::span<double> out)>
        eval;
};

inline constexpr double kDefaultBlowupThreshold = 1e12;

/// Classical fixed-step RK4 for xdot = field(t, x, frozen(t)), x(0) = x0.
/// Frozen paths are sampled by linear interpolation at stage times.
/// Throws BlowUpError when the state sup-norm exceeds `blowup_threshold`
/// or turns non-finite; the error names the first bad node.
VecPath integrate_forward(const FieldEval& field, std::span<const double> x0,
                          const Grid& grid, const VecPath* frozen = nullptr,
                          double blowup_threshold = kDefaultBlowupThreshold);

/// Same scheme integrating from t = T down to 0; node N equals yT exactly.
VecPath integrate_backward(const FieldEval& field, std::span<const double> yT,
                           const Grid& grid, const VecPath* frozen = nullptr,
                           double blowup_threshold = kDefaultBlowupThreshold);

enum class Anchor { Start, End };

/// Scalar field on (t, gamma). Convenience wrapper for the certificate solves.
using ScalarField = std::function<double(double t, double gamma)>;

/// Solves gammadot = field(t, gamma) anchored at t=0 (Start) or t=T (End).
VecPath solve_scalar_cauchy(const ScalarField& field, double value, Anchor anchored_at,
                            const Grid& grid,
                            double blowup_threshold = kDefaultBlowupThreshold);

}  // namespace qmbvp
