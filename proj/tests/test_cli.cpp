#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "CLI_PATH must point at the command-line binary");
    return p;
}

int run(const std::string& args, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::string cmd = cli_path() + " " + args + " --out " + out_dir.string() +
                      " > " + (out_dir / "stdout.txt").string() + " 2> " +
                      (out_dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE_MESSAGE(is.good(), ("missing file: " + p.string()).c_str());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path fresh_dir(const std::string& leaf) {
    fs::path d = fs::temp_directory_path() / "qmbvp_cli_tests" / leaf;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("cli help and argument errors") {
    fs::path d = fresh_dir("help");
    CHECK(run("--help", d) == 0);
    CHECK(run("no-such-command", d) == 2);
    CHECK(run("check --system bounded_coupled --N 1", d) == 2);  // grid too small
    CHECK(run("mfg-admissibility --convention Q", d) == 2);
}

TEST_CASE("cli check reports certificates") {
    fs::path d = fresh_dir("check");
    REQUIRE(run("check --system bounded_coupled", d) == 0);
    json j = slurp_json(d / "check.json");
    CHECK(j["system"] == "bounded_coupled");
    CHECK(j["monotone"]["pass"] == true);
    CHECK(j["condition_i"]["verdict"] == true);

    fs::path d2 = fresh_dir("check_osc");
    REQUIRE(run("check --system oscillator --a 3 --b 4", d2) == 0);
    json j2 = slurp_json(d2 / "check.json");
    CHECK(j2["condition_i"]["verdict"] == false);
    CHECK(j2["condition_i"]["envelope_ok"] == false);
}

TEST_CASE("cli solve-minimal succeeds and fails by exit code") {
    fs::path d = fresh_dir("solve_bc");
    REQUIRE(run("solve-minimal --system bounded_coupled", d) == 0);
    json j = slurp_json(d / "solve_minimal.json");
    CHECK(j["converged"] == true);
    CHECK(j["start"] == "certificate");
    CHECK(j["monotone_ok"] == true);
    CHECK(fs::exists(d / "solution.csv"));

    // The rotation system has no certified start and no uniform lower bound:
    // the descending iteration escapes and the tool signals it distinctly.
    fs::path d2 = fresh_dir("solve_osc");
    CHECK(run("solve-minimal --system oscillator --a 3 --b 4", d2) == 3);
}

TEST_CASE("cli demo-oscillator reports the comparison failure") {
    fs::path d = fresh_dir("demo");
    REQUIRE(run("demo-oscillator --a 3 --b 4 --scale 1.2", d) == 0);
    json j = slurp_json(d / "demo_oscillator.json");
    CHECK(j["r"] == doctest::Approx(5.0));
    CHECK(double(j["shoot_max_error"]) < 1e-6);
    CHECK(j["supersolution_certificate"]["pass"] == true);
    CHECK(j["supersolution_min_x"] == doctest::Approx(-6.0).epsilon(1e-4));
    REQUIRE(j.contains("comparison_failure_witness"));
    CHECK(double(j["comparison_failure_witness"]["supersolution_x"]) <
          double(j["comparison_failure_witness"]["solution_x"]));
}

TEST_CASE("cli config file merges under explicit flags") {
    fs::path d = fresh_dir("config");
    fs::path cfg = d / "run.cfg";
    {
        std::ofstream os(cfg);
        os << "a=3\n" << "b=3\n";
    }
    REQUIRE(run("demo-oscillator --config " + cfg.string() + " --b 4", d) == 0);
    json j = slurp_json(d / "demo_oscillator.json");
    CHECK(j["a"] == doctest::Approx(3.0));  // from the file
    CHECK(j["b"] == doctest::Approx(4.0));  // flag wins
}

TEST_CASE("cli mfg admissibility exit codes track the verdict") {
    fs::path d = fresh_dir("adm8");
    REQUIRE(run("mfg-admissibility --potential sqrt --kappa 1 --T 8", d) == 0);
    json j = slurp_json(d / "mfg_admissibility.json");
    CHECK(j["pass"] == true);
    CHECK(j["threshold_T"] == doctest::Approx(7.265).epsilon(1e-3));

    fs::path d2 = fresh_dir("adm7");
    run("mfg-admissibility --potential sqrt --kappa 1 --T 7", d2);
    CHECK(slurp_json(d2 / "mfg_admissibility.json")["pass"] == false);
}

TEST_CASE("cli repeated runs are byte identical") {
    fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
    std::string args = "shoot --system bounded_coupled --guesses 4 --seed 7";
    REQUIRE(run(args, d1) == 0);
    REQUIRE(run(args, d2) == 0);
    CHECK(slurp(d1 / "shoot.json") == slurp(d2 / "shoot.json"));
    CHECK(slurp(d1 / "solution_0.csv") == slurp(d2 / "solution_0.csv"));

    // Different seed, same distinct solution set for this unique-solution
    // problem.
    fs::path d3 = fresh_dir("det3");
    REQUIRE(run("shoot --system bounded_coupled --guesses 4 --seed 8", d3) == 0);
    CHECK(slurp_json(d3 / "shoot.json")["solutions"].size() == 1);
}
