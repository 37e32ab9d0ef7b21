// Command-line front end: registry systems, solver runs, CSV/JSON export.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmbvp/mfg.hpp"
#include "qmbvp/monotone.hpp"
#include "qmbvp/shooting.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qmbvp;

namespace {

struct RunConfig {
    std::string command;
    std::string system = "bounded_coupled";
    std::string potential = "sqrt";
    double a = 3.0, b = 4.0;
    double T = 0.0;  // 0 = per-system default
    int N = 1000;
    double tol = 1e-6;
    double kappa = 1.0;
    std::string convention = "B";
    std::string out;
    unsigned long long seed = 12345;
    double theta = 0.05;
    double lambda = 0.0;  // 0 = default 1 - T^{-4/3}
    std::string variant = "sign_adjusted";
    double scale = 2.0;
    int samples = 2000;
    int max_sweeps = 500;
    int max_iters = 50;
    double b0 = 0.01;
    std::vector<double> guesses;
    int random_guesses = 5;
    std::string in_csv;
};

Convention parse_convention(const std::string& s) {
    if (s == "A" || s == "a") return Convention::A;
    if (s == "B" || s == "b") return Convention::B;
    throw PreconditionError("convention must be A or B");
}

double default_T(const RunConfig& rc) {
    if (rc.T > 0.0) return rc.T;
    if (rc.system == "oscillator") return 2.0 * M_PI;
    if (rc.system == "mfg_equilibrium") return 8.0;
    return 1.0;
}

SystemDef build_system(const RunConfig& rc) {
    if (rc.system == "mfg_equilibrium")
        return make_mfg_equilibrium_system(make_potential(rc.potential),
                                           parse_convention(rc.convention), default_T(rc));
    return make_registry_system(rc.system, rc.a, rc.b, default_T(rc));
}

MFGConfig build_mfg(const RunConfig& rc) {
    MFGConfig cfg;
    cfg.potential = make_potential(rc.potential);
    cfg.kappa = rc.kappa;
    cfg.T = (rc.T > 0.0) ? rc.T : 8.0;
    cfg.N = rc.N;
    cfg.convention = parse_convention(rc.convention);
    return cfg;
}

void write_json(const fs::path& file, const json& j) {
    std::ofstream os(file);
    os << j.dump(2) << "\n";
}

void write_pair_csv(const fs::path& file, const PathPair& pair) {
    std::ofstream os(file);
    write_csv(pair, os);
}

json cert_to_json(const ConditionCertificate& c) {
    return json{{"verdict", c.verdict},
                {"envelope_ok", c.envelope_ok},
                {"blowup", c.blowup},
                {"blowup_problem", c.blowup_problem},
                {"m_star", c.m_star},
                {"instances_checked", c.instances_checked}};
}

json super_cert_to_json(const SupersolutionCertificate& c) {
    return json{{"pass", c.pass},
                {"tol", c.tol},
                {"worst_x_residual", c.worst_x_residual},
                {"worst_y_residual", c.worst_y_residual},
                {"boundary_gap_x", c.boundary_gap_x},
                {"boundary_gap_y", c.boundary_gap_y}};
}

int cmd_check(const RunConfig& rc, const fs::path& out) {
    SystemDef sys = build_system(rc);
    QuasiMonotoneOptions qo;
    qo.samples = rc.samples;
    MonotonicityReport mono = check_quasi_monotone(sys, sys.box_lo, sys.box_hi, qo);

    json j;
    j["system"] = sys.name;
    j["monotone"] = {{"pass", mono.pass},
                     {"violations", mono.violations.size()},
                     {"samples", rc.samples}};
    auto run_cert = [&](const char* key,
                        const std::optional<std::pair<EnvelopeBound, EnvelopeBound>>& bounds,
                        Condition which) {
        if (!bounds) {
            j[key] = {{"available", false}};
            return false;
        }
        ConditionCertificate c = certify_condition(sys, which, *bounds);
        json cj = cert_to_json(c);
        cj["available"] = true;
        j[key] = cj;
        return c.verdict;
    };
    const bool ci = run_cert("condition_i", sys.alpha_bounds, Condition::I);
    const bool cii = run_cert("condition_ii", sys.beta_bounds, Condition::II);
    write_json(out / "check.json", j);
    std::printf("check %s: monotone=%s condition_i=%s condition_ii=%s -> %s\n",
                sys.name.c_str(), mono.pass ? "pass" : "fail", ci ? "pass" : "fail",
                cii ? "pass" : "fail", (out / "check.json").c_str());
    return 0;
}

int cmd_solve_minimal(const RunConfig& rc, const fs::path& out) {
    SystemDef sys = build_system(rc);
    SolveOptions so;
    so.tol = rc.tol;
    so.max_sweeps = rc.max_sweeps;
    so.grid_N = rc.N;

    MinimalSolutionReport rep;
    std::string start_kind;
    if (rc.system == "mfg_equilibrium" && parse_convention(rc.convention) == Convention::B) {
        // Seed with the explicit small-theta supersolution; certificate-based
        // starts descend to a different (non-minimal) solution here.
        CandidateSupersolution cand = candidate_supersolution(
            build_mfg(rc), rc.theta, rc.lambda, SupersolutionVariant::SignAdjusted);
        so.require_monotone = cand.certificate.pass;
        rep = solve_minimal(sys, so, cand.pair);
        start_kind = "theta_supersolution";
    } else {
        std::optional<ConditionCertificate> cert;
        if (sys.alpha_bounds) {
            ConditionCertificate c = certify_condition(sys, Condition::I, *sys.alpha_bounds);
            if (c.verdict) cert = c;
        }
        if (!cert && sys.beta_bounds) {
            ConditionCertificate c = certify_condition(sys, Condition::II, *sys.beta_bounds);
            if (c.verdict) cert = c;
        }
        if (cert) {
            rep = solve_minimal(sys, so, *cert);
            start_kind = "certificate";
        } else {
            // No certified start; attempt a descending iteration from the
            // constant boundary pair. Systems without a uniform lower bound
            // trip the divergence guard here.
            const Grid grid(sys.T, rc.N);
            VecPath x(grid, sys.m), y(grid, sys.n);
            for (int k = 0; k <= grid.N; ++k) {
                for (int c = 0; c < sys.m; ++c) x(k, c) = sys.boundary.x_bar[c];
                for (int c = 0; c < sys.n; ++c) y(k, c) = sys.boundary.y_bar[c];
            }
            rep = solve_minimal(sys, so, PathPair{std::move(x), std::move(y)});
            start_kind = "constant_boundary";
        }
    }

    write_pair_csv(out / "solution.csv", rep.solution);
    json j;
    j["system"] = sys.name;
    j["start"] = start_kind;
    j["converged"] = rep.converged;
    j["sweeps_used"] = rep.sweeps_used;
    j["monotone_ok"] = rep.monotone_ok;
    j["residual_history"] = rep.residual_history;
    if (rep.m_star) j["m_star"] = *rep.m_star;
    write_json(out / "solve_minimal.json", j);
    std::printf("solve-minimal %s: converged=%d sweeps=%d residual=%.3e -> %s\n",
                sys.name.c_str(), rep.converged, rep.sweeps_used,
                rep.residual_history.back(), (out / "solution.csv").c_str());
    return rep.converged ? 0 : 1;
}

int cmd_shoot(const RunConfig& rc, const fs::path& out) {
    SystemDef sys = build_system(rc);
    std::vector<std::vector<double>> guesses;
    for (double g : rc.guesses) guesses.emplace_back(sys.n, g);
    if (guesses.empty()) {
        std::mt19937_64 rng(rc.seed);
        std::uniform_real_distribution<double> dist(sys.box_lo, sys.box_hi);
        for (int i = 0; i < rc.random_guesses; ++i) {
            std::vector<double> g(sys.n);
            for (double& v : g) v = dist(rng);
            guesses.push_back(std::move(g));
        }
    }
    ShootOptions so;
    so.grid_N = rc.N;
    std::vector<ShootResult> found = multi_start(sys, guesses, 1e-4, so);

    json j;
    j["system"] = sys.name;
    j["seed"] = rc.seed;
    j["guess_count"] = guesses.size();
    j["solutions"] = json::array();
    for (size_t i = 0; i < found.size(); ++i) {
        const std::string file = "solution_" + std::to_string(i) + ".csv";
        write_pair_csv(out / file, *found[i].solution);
        j["solutions"].push_back({{"file", file},
                                  {"y0_found", found[i].y0_found},
                                  {"final_residual", found[i].final_residual},
                                  {"newton_iters", found[i].newton_iters}});
    }
    write_json(out / "shoot.json", j);
    std::printf("shoot %s: %zu distinct solution(s) from %zu guess(es) -> %s\n",
                sys.name.c_str(), found.size(), guesses.size(),
                (out / "shoot.json").c_str());
    return found.empty() ? 1 : 0;
}

int cmd_demo_oscillator(const RunConfig& rc, const fs::path& out) {
    const int N = (rc.N > 1000) ? rc.N : 4000;
    SystemDef sys = make_oscillator(rc.a, rc.b);
    const Grid grid(sys.T, N);
    PathPair closed = oscillator_closed_form(rc.a, rc.b, grid);

    ShootOptions so;
    so.grid_N = N;
    ShootResult sres = shoot(sys, {rc.b}, so);
    const double shoot_err =
        sres.solution ? sup_distance(closed, *sres.solution) : -1.0;

    // Scaled closed-form paths solve the same fields with inflated boundary
    // data, so each is a supersolution; the family's minimum drops without
    // bound as the scale grows.
    const double c = std::max(rc.scale, 1.0);
    PathPair super = oscillator_closed_form(c * rc.a, c * rc.b, grid);
    double min_x = super.x(0, 0);
    int min_node = 0;
    for (int k = 0; k <= N; ++k)
        if (super.x(k, 0) < min_x) {
            min_x = super.x(k, 0);
            min_node = k;
        }
    // Tolerance above the O(h^2) midpoint-defect floor of the exact paths.
    SupersolutionCertificate cert = is_supersolution(sys, super, 1e-4);

    // Comparison failure: a node where the supersolution lies strictly below
    // the actual solution.
    int witness = -1;
    for (int k = 0; k <= N && witness < 0; ++k)
        if (super.x(k, 0) < closed.x(k, 0) - 1e-9) witness = k;

    write_pair_csv(out / "oscillator_solution.csv", closed);
    write_pair_csv(out / "oscillator_supersolution.csv", super);
    json j;
    j["a"] = rc.a;
    j["b"] = rc.b;
    j["r"] = std::hypot(rc.a, rc.b);
    j["scale"] = c;
    j["shoot_max_error"] = shoot_err;
    j["supersolution_certificate"] = super_cert_to_json(cert);
    j["supersolution_min_x"] = min_x;
    j["supersolution_min_node"] = min_node;
    j["supersolution_min_t"] = grid.node(min_node);
    if (witness >= 0)
        j["comparison_failure_witness"] = {{"node", witness},
                                           {"t", grid.node(witness)},
                                           {"supersolution_x", super.x(witness, 0)},
                                           {"solution_x", closed.x(witness, 0)}};
    write_json(out / "demo_oscillator.json", j);
    std::printf(
        "demo-oscillator(%g,%g): shoot_err=%.2e supersolution_min_x=%.6f witness_node=%d "
        "-> %s\n",
        rc.a, rc.b, shoot_err, min_x, witness, (out / "demo_oscillator.json").c_str());
    return 0;
}

int cmd_mfg_admissibility(const RunConfig& rc, const fs::path& out) {
    AdmissibilityReport r = admissibility(build_mfg(rc));
    json j;
    j["pass"] = r.pass;
    j["kappa"] = {{"lhs", r.kappa_lhs}, {"rhs", r.kappa_rhs}, {"ok", r.kappa_ok}};
    j["horizon"] = {{"lhs", r.t_lhs}, {"rhs", r.t_rhs}, {"ok", r.t_ok}};
    j["threshold_T"] = r.threshold_T;
    write_json(out / "mfg_admissibility.json", j);
    std::printf("mfg-admissibility: pass=%d (threshold T = %.4f) -> %s\n", r.pass,
                r.threshold_T, (out / "mfg_admissibility.json").c_str());
    return 0;
}

int cmd_mfg_phi(const RunConfig& rc, const fs::path& out) {
    MFGConfig cfg = build_mfg(rc);
    const Grid grid(cfg.T, cfg.N);
    VecPath b(grid, cfg.potential.d, rc.b0);
    VecPath result = phi(cfg, b);
    double in_sup = 0.0, out_sup = 0.0;
    for (double v : b.raw()) in_sup = std::max(in_sup, std::fabs(v));
    for (double v : result.raw()) out_sup = std::max(out_sup, std::fabs(v));
    write_pair_csv(out / "phi_output.csv", PathPair{result, VecPath(grid, cfg.potential.d)});
    json j;
    j["b0"] = rc.b0;
    j["input_sup"] = in_sup;
    j["output_sup"] = out_sup;
    write_json(out / "mfg_phi.json", j);
    std::printf("mfg-phi: |b|=%.4g -> |phi(b)|=%.4g -> %s\n", in_sup, out_sup,
                (out / "mfg_phi.json").c_str());
    return 0;
}

int cmd_mfg_fixed_point(const RunConfig& rc, const fs::path& out) {
    MFGConfig cfg = build_mfg(rc);
    const Grid grid(cfg.T, cfg.N);
    VecPath b0(grid, cfg.potential.d, rc.b0);
    IterationTrace tr = fixed_point_iterate(cfg, b0, rc.max_iters, rc.tol);

    {
        std::ofstream os(out / "mfg_fixed_point_trace.csv");
        os << "iter,step_distance,distance_to_limit\n";
        char buf[80];
        for (size_t k = 0; k < tr.distances_to_limit.size(); ++k) {
            const double step = (k < tr.step_distances.size()) ? tr.step_distances[k] : 0.0;
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, step,
                          tr.distances_to_limit[k]);
            os << buf;
        }
    }
    write_pair_csv(out / "mfg_fixed_point_limit.csv",
                   PathPair{tr.iterates.back(), VecPath(grid, cfg.potential.d)});
    json j;
    j["b0"] = rc.b0;
    j["iterations"] = tr.step_distances.size();
    j["converged"] = tr.converged;
    j["empirical_ratio"] = tr.empirical_ratio;
    j["final_step_distance"] =
        tr.step_distances.empty() ? 0.0 : tr.step_distances.back();
    write_json(out / "mfg_fixed_point.json", j);
    std::printf("mfg-fixed-point: iters=%zu converged=%d ratio=%.4f -> %s\n",
                tr.step_distances.size(), tr.converged, tr.empirical_ratio,
                (out / "mfg_fixed_point.json").c_str());
    return tr.converged ? 0 : 1;
}

int cmd_mfg_equilibria(const RunConfig& rc, const fs::path& out) {
    MFGConfig cfg = build_mfg(rc);
    EquilibriaOptions eo;
    eo.theta = rc.theta;
    std::vector<PathPair> eq = equilibria(cfg, eo);
    json j;
    j["convention"] = rc.convention;
    j["count"] = eq.size();
    j["equilibria"] = json::array();
    for (size_t i = 0; i < eq.size(); ++i) {
        const std::string file = "equilibrium_" + std::to_string(i) + ".csv";
        write_pair_csv(out / file, eq[i]);
        double xmin = eq[i].x(0, 0), xmax = xmin;
        for (double v : eq[i].x.raw()) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        j["equilibria"].push_back(
            {{"file", file}, {"x_min", xmin}, {"x_max", xmax}, {"q0", eq[i].y(0, 0)}});
    }
    write_json(out / "mfg_equilibria.json", j);
    std::printf("mfg-equilibria (convention %s): %zu distinct -> %s\n",
                rc.convention.c_str(), eq.size(), (out / "mfg_equilibria.json").c_str());
    return 0;
}

int cmd_mfg_spectrum(const RunConfig& rc, const fs::path& out) {
    MFGConfig cfg = build_mfg(rc);
    PathPair eq;
    if (!rc.in_csv.empty()) {
        std::ifstream is(rc.in_csv);
        if (!is) throw PreconditionError("cannot open " + rc.in_csv);
        eq = read_csv(is);
    } else {
        const Grid grid(cfg.T, cfg.N);
        eq = PathPair{VecPath(grid, cfg.potential.d), VecPath(grid, cfg.potential.d)};
    }
    SpectrumReport sp = spectrum(cfg, eq);
    json j;
    j["equilibrium"] = sp.equilibrium_label;
    j["analytic_lambdas"] = sp.analytic_lambdas;
    j["dominant_lambda_power"] = sp.dominant_lambda_power;
    j["power_iters"] = sp.power_iters;
    j["power_converged"] = sp.power_converged;
    j["bound"] = sp.bound;
    j["bound_satisfied"] = sp.bound_satisfied;
    write_json(out / "mfg_spectrum.json", j);
    std::printf("mfg-spectrum (%s, convention %s): dominant=%.6f bound=%.4f satisfied=%d -> %s\n",
                sp.equilibrium_label.c_str(), rc.convention.c_str(),
                sp.dominant_lambda_power, sp.bound, sp.bound_satisfied,
                (out / "mfg_spectrum.json").c_str());
    return sp.power_converged ? 0 : 1;
}

int cmd_mfg_supersolution(const RunConfig& rc, const fs::path& out) {
    MFGConfig cfg = build_mfg(rc);
    const SupersolutionVariant variant = (rc.variant == "as_printed")
                                             ? SupersolutionVariant::AsPrinted
                                             : SupersolutionVariant::SignAdjusted;
    CandidateSupersolution cs = candidate_supersolution(cfg, rc.theta, rc.lambda, variant);
    write_pair_csv(out / "mfg_supersolution.csv", cs.pair);
    json j;
    j["variant"] = rc.variant;
    j["theta"] = cs.theta;
    j["lambda"] = cs.lambda;
    j["h"] = cs.h;
    j["continuity"] = {{"t_break", cs.continuity.t_break},
                       {"jump_x", cs.continuity.jump_x},
                       {"jump_p", cs.continuity.jump_p},
                       {"continuous", cs.continuity.continuous}};
    j["certificate"] = super_cert_to_json(cs.certificate);
    write_json(out / "mfg_supersolution.json", j);
    std::printf("mfg-supersolution (%s): continuous=%d certified=%d -> %s\n",
                rc.variant.c_str(), cs.continuity.continuous, cs.certificate.pass,
                (out / "mfg_supersolution.json").c_str());
    return 0;
}

// Expands `--config file` into option tokens placed before the explicit
// flags, so command-line values override file values (take-last policy).
std::vector<std::string> merge_config_file(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_file;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_file = args[i].substr(9);
    }
    if (config_file.empty()) return args;

    std::ifstream is(config_file);
    if (!is) throw PreconditionError("cannot open config file: " + config_file);
    std::vector<std::string> merged;
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        merged.push_back(args[0]);  // keep the command first
        args.erase(args.begin());
    }
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw PreconditionError("config line is not key=value: " + line);
        merged.push_back("--" + line.substr(0, eq) + "=" + line.substr(eq + 1));
    }
    merged.insert(merged.end(), args.begin(), args.end());
    return merged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-point boundary value solver suite"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    RunConfig rc;
    const char* env_out = std::getenv("QMBVP_OUT");
    rc.out = env_out ? env_out : "out";

    app.add_option("command", rc.command,
                   "one of: check, solve-minimal, shoot, demo-oscillator, "
                   "mfg-admissibility, mfg-phi, mfg-fixed-point, mfg-equilibria, "
                   "mfg-spectrum, mfg-supersolution")
        ->required();
    app.add_option("--config", "flat key=value config file; flags override it");
    app.add_option("--system", rc.system, "registry system name");
    app.add_option("--potential", rc.potential, "potential name (sqrt, zero)");
    app.add_option("--a", rc.a, "first boundary parameter");
    app.add_option("--b", rc.b, "second boundary parameter");
    app.add_option("--T", rc.T, "horizon (0 = system default)");
    app.add_option("--N", rc.N, "grid intervals")->check(CLI::Range(2, 100000000));
    app.add_option("--tol", rc.tol, "tolerance");
    app.add_option("--kappa", rc.kappa, "control-cost weight");
    app.add_option("--convention", rc.convention, "sign convention: A or B")
        ->check(CLI::IsMember({"A", "B", "a", "b"}));
    app.add_option("--out", rc.out, "output directory (env QMBVP_OUT overrides default)");
    app.add_option("--seed", rc.seed, "seed for randomized guesses");
    app.add_option("--theta", rc.theta, "supersolution scale");
    app.add_option("--lambda", rc.lambda, "supersolution break fraction (0 = default)");
    app.add_option("--variant", rc.variant, "supersolution variant")
        ->check(CLI::IsMember({"as_printed", "sign_adjusted"}));
    app.add_option("--scale", rc.scale, "demo supersolution scale factor");
    app.add_option("--samples", rc.samples, "monotonicity sample count");
    app.add_option("--max-sweeps", rc.max_sweeps, "sweep limit");
    app.add_option("--max-iters", rc.max_iters, "fixed-point iteration limit");
    app.add_option("--b0", rc.b0, "constant initial mean-path level");
    app.add_option("--guess", rc.guesses, "shooting guess level (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--guesses", rc.random_guesses, "number of random guesses");
    app.add_option("--in-csv", rc.in_csv, "input trajectory CSV");

    try {
        std::vector<std::string> args = merge_config_file(argc, argv);
        std::vector<const char*> cargs{argv[0]};
        for (const auto& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return (app.exit(e) == 0) ? 0 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        const fs::path out(rc.out);
        fs::create_directories(out);
        if (rc.command == "check") return cmd_check(rc, out);
        if (rc.command == "solve-minimal") return cmd_solve_minimal(rc, out);
        if (rc.command == "shoot") return cmd_shoot(rc, out);
        if (rc.command == "demo-oscillator") return cmd_demo_oscillator(rc, out);
        if (rc.command == "mfg-admissibility") return cmd_mfg_admissibility(rc, out);
        if (rc.command == "mfg-phi") return cmd_mfg_phi(rc, out);
        if (rc.command == "mfg-fixed-point") return cmd_mfg_fixed_point(rc, out);
        if (rc.command == "mfg-equilibria") return cmd_mfg_equilibria(rc, out);
        if (rc.command == "mfg-spectrum") return cmd_mfg_spectrum(rc, out);
        if (rc.command == "mfg-supersolution") return cmd_mfg_supersolution(rc, out);
        std::fprintf(stderr, "error: unknown command '%s'\n", rc.command.c_str());
        return 2;
    } catch (const UnboundedBelowError& e) {
        std::fprintf(stderr, "unbounded below: %s\n", e.what());
        return 3;
    } catch (const BlowUpError& e) {
        std::fprintf(stderr, "blow-up: %s\n", e.what());
        return 3;
    } catch (const PreconditionError& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
