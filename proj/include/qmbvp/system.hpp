#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmbvp/grid.hpp"
#include "qmbvp/ivp.hpp"

namespace qmbvp {

/// Scalar envelope bound in variables (t, s): alpha_i of condition (i) or
/// beta_i of condition (ii).
using EnvelopeBound = std::function<double(double t, double s)>;

/// A TPBVP instance: xdot = f(t,x,y), ydot = g(t,x,y), x(0) = x_bar,
/// y(T) = y_bar.
struct SystemDef {
    int m = 1;
    int n = 1;
    std::function<void(double t, std::span<const double> x, std::span<const double> y,
                       std::span<double> out)>
        f_eval;
    std::function<void(double t, std::span<const double> x, std::span<const double> y,
                       std::span<double> out)>
        g_eval;
    double T = 1.0;
    BoundaryData boundary;
    std::string name;

    // Optional registry-supplied envelope bounds for the condition certificates.
    std::optional<std::pair<EnvelopeBound, EnvelopeBound>> alpha_bounds;  // condition (i)
    std::optional<std::pair<EnvelopeBound, EnvelopeBound>> beta_bounds;   // condition (ii)

    // Default sampling box per state component for monotonicity / envelope checks.
    double box_lo = -10.0;
    double box_hi = 10.0;

    void eval_f(double t, std::span<const double> x, std::span<const double> y,
                std::span<double> out) const {
        f_eval(t, x, y, out);
    }
    void eval_g(double t, std::span<const double> x, std::span<const double> y,
                std::span<double> out) const {
        g_eval(t, x, y, out);
    }
};

/// Midpoint defect diagnostics for a discretized pair against a system.
struct ResidualReport {
    // Signed defects: dx = (forward difference) - f(midpoint); analogous for y.
    double max_abs_x_defect = 0.0;
    double max_abs_y_defect = 0.0;
    double min_x_defect = 0.0;  // most negative dx (supersolution-side worst case)
    double max_y_defect = 0.0;  // most positive dy
    int worst_x_node = 0, worst_x_comp = 0;
    int worst_y_node = 0, worst_y_comp = 0;
    double boundary_defect_x = 0.0;  // max |x(0) - x_bar|
    double boundary_defect_y = 0.0;  // max |y(T) - y_bar|

    [[nodiscard]] double total() const {
        double r = std::max(max_abs_x_defect, max_abs_y_defect);
        return std::max(r, std::max(boundary_defect_x, boundary_defect_y));
    }
};

struct SupersolutionCertificate {
    bool pass = false;
    std::vector<double> boundary_gap_x;  // x(0) - x_bar
    std::vector<double> boundary_gap_y;  // y(T) - y_bar
    double worst_x_residual = 0.0;       // min over midpoints of dx (want >= -tol)
    double worst_y_residual = 0.0;       // max over midpoints of dy (want <= +tol)
    int worst_x_node = 0, worst_x_comp = 0;
    int worst_y_node = 0, worst_y_comp = 0;
    double tol = 0.0;
};

struct MonotonicityViolation {
    enum class Which { M1, M2 };
    Which which;
    int component;        // i for M1 rows, j for M2 rows
    int perturbed_index;  // flat index: [0,m) = x block, [m,m+n) = y block
    double t;
    std::vector<double> x_sample;
    std::vector<double> y_sample;
    double signed_slope;
};

struct MonotonicityReport {
    bool pass = false;
    std::vector<MonotonicityViolation> violations;
};

struct QuasiMonotoneOptions {
    int samples = 2000;
    double step = 1e-4;
    double slope_tol = 1e-9;
    // (M1) as stated requires f_i nondecreasing in every y_j including j = i;
    // the j != i reading is selectable here.
    bool m1_all_y = true;
    bool parallel = true;
};

MonotonicityReport check_quasi_monotone(const SystemDef& sys, double box_lo, double box_hi,
                                        const QuasiMonotoneOptions& opts = {});

/// Scalar diagonal-envelope fields in variables (t, s, tau).
struct ReducedFields {
    std::function<double(double, double, double)> f_min, f_max, g_min, g_max;
};

ResidualReport residual(const SystemDef& sys, const PathPair& pair);
SupersolutionCertificate is_supersolution(const SystemDef& sys, const PathPair& pair,
                                          double tol);

ReducedFields reduce_extremes(const SystemDef& sys);

/// Nodewise min over components within each block (scalar comparison reduction).
PathPair reduce_pair(const PathPair& pair);

/// The scalar comparison system (f_min, g_max) with reduced boundary data.
SystemDef make_reduced_system(const SystemDef& sys);

enum class Condition { I, II };

struct ConditionCertificate {
    Condition which = Condition::I;
    VecPath gamma1, gamma2, eta1, eta2;  // scalar paths
    double m_star = 0.0;
    bool verdict = false;
    bool envelope_ok = false;
    bool blowup = false;
    std::string blowup_problem;  // which Cauchy solve failed, when any
    std::vector<std::string> instances_checked;
};

struct CertifyOptions {
    int grid_N = 1000;
    int envelope_samples = 10000;
    double envelope_tol = 1e-9;
    double blowup_threshold = kDefaultBlowupThreshold;
};

/// Solves the four scalar Cauchy problems of the sufficient condition and
/// sample-checks the envelope inequality on [box_lo, box_hi]^2 x [0, T].
/// For condition (i) `bounds` is (alpha1, alpha2); for (ii) it is
/// (beta1, beta2).
ConditionCertificate certify_condition(const SystemDef& sys, Condition which,
                                       const std::pair<EnvelopeBound, EnvelopeBound>& bounds,
                                       const CertifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Linear rotation system of the comparison-failure demo: xdot = y,
/// ydot = -x on [0, 2 pi], x(0) = a, y(2 pi) = b.
SystemDef make_oscillator(double a, double b);

/// Closed-form solution of the oscillator boundary problem:
/// x = r sin(theta + t), y = r cos(theta + t) with r = sqrt(a^2 + b^2),
/// theta = arcsin(a / r).
PathPair oscillator_closed_form(double a, double b, const Grid& grid);

/// Globally bounded coupled 1x1 system: xdot = tanh y - x,
/// ydot = -tanh x - y on [0, 1] with zero boundary data.
SystemDef make_bounded_coupled();

/// Hamiltonian system with bounded derivatives: H(x, p) =
/// sqrt(1 + x^2) + sqrt(1 + p^2), so xdot = D_p H, pdot = -D_x H.
SystemDef make_bounded_hamiltonian(double x_bar, double p_bar, double T);

/// Looks up a registry system by name. Throws PreconditionError for
/// unknown names. Parameters: a, b (oscillator / hamiltonian boundary), T.
SystemDef make_registry_system(const std::string& name, double a, double b, double T);

}  // namespace qmbvp
