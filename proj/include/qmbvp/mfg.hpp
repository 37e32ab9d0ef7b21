#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmbvp/monotone.hpp"
#include "qmbvp/system.hpp"

namespace qmbvp {

/// Interaction potential with supplied derivative evaluators and curvature
/// summaries: hess_inf_norm bounds the Hessian sup norm, gamma_min/gamma_max
/// are the min/max row sums of the Hessian at the origin.
struct PotentialSpec {
    int d = 1;
    std::function<double(std::span<const double> x)> V;
    std::function<void(std::span<const double> x, std::span<double> out)> DV;
    // Row-major d x d Hessian.
    std::function<void(std::span<const double> x, std::span<double> out)> D2V;
    double hess_inf_norm = 0.0;
    double grad_inf_norm = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    std::string name;
};

/// Checks DV(0) = 0 and sampled Hessian nonnegativity; when
/// `need_positive_gamma` also gamma_min > 0. Throws PreconditionError.
void validate_potential(const PotentialSpec& pot, bool need_positive_gamma = false);

PotentialSpec make_potential_sqrt();  // V(x) = sqrt(1 + x^2) - 1, d = 1
PotentialSpec make_potential_zero();  // V = 0, d = 1
PotentialSpec make_potential(const std::string& name);

/// Sign convention for the optimality system. The two second-order forms
/// x'' = +(DV + 2 kappa (x - b)) (A) and x'' = -(DV + 2 kappa (x - b)) (B)
/// are both supported; they differ in solution multiplicity and stability.
enum class Convention { A, B };

struct MFGConfig {
    PotentialSpec potential;
    double kappa = 1.0;
    double T = 8.0;
    int N = 2000;
    Convention convention = Convention::B;
};

struct AdmissibilityReport {
    bool pass = false;
    // kappa >= hess_inf_norm
    double kappa_lhs = 0.0, kappa_rhs = 0.0;
    bool kappa_ok = false;
    // T^{2/3} >= max{gamma_max^2 / (8 gamma_min),
    //                (1/gamma_min + sqrt(1 + 1/gamma_min^2))^{3/2}}
    double t_lhs = 0.0, t_rhs = 0.0;
    bool t_ok = false;
    double threshold_T = 0.0;  // smallest horizon passing the T condition
};

AdmissibilityReport admissibility(const MFGConfig& cfg);

/// Thrown when the best-response solve inside phi fails to converge.
struct PhiError : std::runtime_error {
    PhiError(const std::string& msg, double residual_, int iterate_index_)
        : std::runtime_error(msg), residual(residual_), iterate_index(iterate_index_) {}
    double residual;
    int iterate_index;  // fixed-point iterate where the failure occurred, or -1
};

/// One application of the best-response map: solves the coupled two-point
/// problem x(0) = 0, x'(T) = 0 for the configured convention against the
/// frozen mean path b, returning the optimal x-path on the config grid.
VecPath phi(const MFGConfig& cfg, const VecPath& b);

struct IterationTrace {
    std::vector<VecPath> iterates;           // b0, b1, ...
    std::vector<double> step_distances;      // sup-distance between consecutive iterates
    std::vector<double> distances_to_limit;  // sup-distance of each iterate to the last
    bool converged = false;
    // Geometric mean of successive step-distance ratios (local contraction
    // factor); NaN until at least three iterates with usable distances exist.
    double empirical_ratio = 0.0;
};

IterationTrace fixed_point_iterate(const MFGConfig& cfg, const VecPath& b0, int max_iters,
                                   double tol);

/// The stationarity system in (x, q) variables with the congestion term
/// cancelled at the fixed point: xdot = -q (A) or +q (B), qdot = -DV(x),
/// x(0) = 0, q(T) = 0. Convention B satisfies the cooperativity conditions.
SystemDef make_mfg_equilibrium_system(const PotentialSpec& pot, Convention conv, double T);

struct EquilibriaOptions {
    std::vector<double> guess_levels = {-8.0, -6.0, -4.0, -2.0, -1.0, 0.0,
                                        1.0,  2.0,  4.0,  6.0,  8.0};
    double dedup_radius = 1e-3;
    double solve_tol = 5e-5;     // stationarity residual target
    double theta = 0.05;         // seed supersolution scale (convention B)
    int max_sweeps = 500;
};

/// All distinct solutions of the stationarity system found by multi-start
/// shooting; under convention B the descending-iteration solution started
/// from the explicit small-theta supersolution is merged in as well.
std::vector<PathPair> equilibria(const MFGConfig& cfg, const EquilibriaOptions& opts = {});

struct ContinuityReport {
    double t_break = 0.0;  // lambda * T
    double jump_x = 0.0;   // sup-norm mismatch of the two x pieces at t_break
    double jump_p = 0.0;
    bool continuous = false;
};

enum class SupersolutionVariant { AsPrinted, SignAdjusted };

struct CandidateSupersolution {
    PathPair pair;
    SupersolutionCertificate certificate;  // against the convention-B system
    ContinuityReport continuity;
    double theta = 0.0, lambda = 0.0;
    std::vector<double> h;  // ramp slope vector of the second piece
};

/// The explicit piecewise (theta, lambda, h) candidate: a short negative ramp
/// on [0, lambda T] followed by a steep recovery ramp. `AsPrinted` keeps the
/// positive-signed first piece, which is discontinuous at lambda T;
/// `SignAdjusted` negates it, making the path absolutely continuous.
/// Pass lambda <= 0 to use the default 1 - T^{-4/3}.
CandidateSupersolution candidate_supersolution(const MFGConfig& cfg, double theta,
                                               double lambda_param,
                                               SupersolutionVariant variant);

struct SpectrumReport {
    std::string equilibrium_label;         // "zero" or "nontrivial"
    std::vector<double> analytic_lambdas;  // empty when coefficients are non-constant
    double dominant_lambda_power = 0.0;
    int power_iters = 0;
    bool power_converged = false;
    double bound = 0.0;  // 2 kappa / (2 kappa + gamma_min)
    bool bound_satisfied = false;
};

struct SpectrumOptions {
    int analytic_modes = 10;
    double power_tol = 1e-8;
    int power_max_iters = 10000;
    double equilibrium_tol = 1e-3;  // precondition residual on the input path
};

/// Stability analysis of a fixed point: closed-form eigenvalues in the
/// constant-coefficient (zero equilibrium) case plus power iteration on the
/// discretized derivative of the best-response map.
SpectrumReport spectrum(const MFGConfig& cfg, const PathPair& equilibrium,
                        const SpectrumOptions& opts = {});

}  // namespace qmbvp
