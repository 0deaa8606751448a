#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tauflow/config.hpp"
#include "tauflow/errors.hpp"
#include "tauflow/io.hpp"
#include "tauflow/runner.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace tauflow;
namespace fs = std::filesystem;

namespace {

const char* small_run = R"(
[geometry]
backend = "axisymmetric"
intervals = 32
u_cos = [0.0, 0.05]

[flow]
kind = "tau_flow"
tau = 0.5
dt = 1e-3
horizon = 0.2
output_interval = 0.01

[entropy]
mu_cadence = 0.05
window = 0.1
conjugate_step = 1e-2
)";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tauflow_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error(const std::string& text) {
    try {
        RunConfig::from_file(ConfigFile::parse(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config file parsing") {
    const auto f = ConfigFile::parse("# comment\n[a]\nx = 1.5  # trailing\ns = \"q # r\"\nb = true\nv = [1, 2e-1]\n");
    CHECK(f.number("a.x") == 1.5);
    CHECK(f.string("a.s", "") == "q # r");
    CHECK(f.boolean("a.b", false));
    CHECK(f.array("a.v") == std::vector<double>{1.0, 0.2});
    CHECK(f.number("a.missing", 7.0) == 7.0);
    CHECK_THROWS_AS(ConfigFile::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[a\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("x = what\n"), ConfigError);
}

TEST_CASE("field-level validation messages") {
    CHECK(config_error("[flow]\nkind = \"tau_flow\"\ntau = -0.5\n").find("flow.tau must be > 0") != std::string::npos);
    CHECK(config_error("[flow]\nkind = \"tau_flow\"\n").find("flow.tau") != std::string::npos);
    CHECK(config_error("[flow]\nkind = \"ricci_normalized\"\ntau = 1\n").find("flow.tau") != std::string::npos);
    CHECK(config_error("[flow]\ntau = 0.5\ndt = 0\n").find("flow.dt") != std::string::npos);
    CHECK(config_error("[geometry]\nintervals = 8\n[flow]\ntau = 0.5\n").find("geometry.intervals") !=
          std::string::npos);
    CHECK(config_error("[flow]\ntau = 0.5\nbogus = 1\n").find("flow.bogus") != std::string::npos);
    CHECK(config_error(small_run).empty());
}

TEST_CASE("config hash ignores formatting and output directory") {
    const auto a = RunConfig::from_file(ConfigFile::parse(small_run));
    std::string other = std::string("# reformatted\n") + small_run + "\n[output]\ndirectory = \"elsewhere\"\n";
    const auto b = RunConfig::from_file(ConfigFile::parse(other));
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 64);
    auto c = a;
    c.flow.horizon = 0.3;
    CHECK(c.hash() != a.hash());
    CHECK(RunConfig::from_json(a.to_json()).hash() == a.hash());
}

TEST_CASE("seeded perturbations are reproducible") {
    auto c = RunConfig::from_file(ConfigFile::parse(small_run));
    c.perturbation = {3, 0.01, 42};
    const auto u1 = reduced_unknowns(c.initial_metric());
    const auto u2 = reduced_unknowns(c.initial_metric());
    CHECK(u1 == u2);
    c.perturbation.seed = 43;
    CHECK(reduced_unknowns(c.initial_metric()) != u1);
}

TEST_CASE("tolerance profiles") {
    auto c = RunConfig::from_file(ConfigFile::parse(small_run));
    const double before = c.diagnostics.identity_tolerance;
    apply_profile(c, tolerance_profile_from_string("strict"));
    CHECK(c.diagnostics.identity_tolerance == doctest::Approx(before / 10));
    CHECK(tolerance_profile_from_string("default") == ToleranceProfile::standard);
    CHECK_THROWS_AS(tolerance_profile_from_string("loose"), ConfigError);
}

TEST_CASE("number formatting and CSV layout") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    TimeSeries s("mu", "µ");
    s.push(0.0, 1.0);
    s.push(0.5, -2.0);
    CHECK(series_csv(s) == "t,mu\n0,1\n0.5,-2\n");
    const auto svg = series_svg(s);
    CHECK(svg.find("viewBox=\"0 0 800 500\"") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("trajectory JSON round-trips exactly") {
    StepControl ctl;
    ctl.dt = 1e-3;
    const auto traj = evolve({HomogeneousSU2Metric(1.3, 1.0, 0.9), 0.0}, FlowKind::normalized(), 0.1, ctl, 0.02);
    const auto back = trajectory_from_json(json::parse(trajectory_to_json(traj).dump()));
    REQUIRE(back.samples.size() == traj.samples.size());
    for (std::size_t j = 0; j < traj.samples.size(); ++j) {
        CHECK(back.samples[j].t == traj.samples[j].t);
        CHECK(reduced_unknowns(back.samples[j].metric) == reduced_unknowns(traj.samples[j].metric));
    }
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("run writes artifacts listed in the manifest") {
    const auto config = RunConfig::from_file(ConfigFile::parse(small_run));
    const auto out = scratch("run");
    std::ostringstream log;
    CHECK(run_experiment(config, out, log) == exit_ok);
    const auto manifest = json::parse(read_file(out / "manifest.json"));
    CHECK(manifest.at("complete").get<bool>());
    CHECK(manifest.at("config_hash").get<std::string>() == config.hash());
    for (const auto& f : manifest.at("files")) {
        CHECK(sha256_hex(read_file(out / f.at("path").get<std::string>())) == f.at("sha256").get<std::string>());
    }
    CHECK(fs::exists(out / "series" / "mu.csv"));
    CHECK(fs::exists(out / "plots" / "mu.svg"));
    CHECK(read_file(out / "trajectory.csv").rfind("t,", 0) == 0);
    std::ostringstream summary;
    CHECK(report_directory(out, summary) == exit_ok);
    CHECK(summary.str().find("verdict") != std::string::npos);
}

TEST_CASE("singular run exits 3 and still writes a manifest") {
    auto config = RunConfig::from_file(ConfigFile::parse(
        "[geometry]\nbackend = \"round_scale\"\ndimension = 3\n[flow]\nkind = \"ricci_unnormalized\"\ndt = 1e-4\n"
        "horizon = 1\noutput_interval = 0.01\n"));
    const auto out = scratch("singular");
    std::ostringstream log;
    CHECK(run_experiment(config, out, log) == exit_singularity);
    const auto manifest = json::parse(read_file(out / "manifest.json"));
    CHECK(manifest.at("termination").get<std::string>() == "singularity");
}

TEST_CASE("hypothesis violation exits 2") {
    auto config = RunConfig::from_file(ConfigFile::parse(small_run));
    config.diagnostics.bounds.curvature = 0.5;
    std::ostringstream log;
    CHECK(run_experiment(config, scratch("hyp"), log) == exit_hypothesis);
}

TEST_CASE("resume matches a straight run and checks the digest") {
    auto half = RunConfig::from_file(ConfigFile::parse(small_run));
    half.flow.horizon = 0.1;
    const auto full = RunConfig::from_file(ConfigFile::parse(small_run));
    const auto a = scratch("half"), b = scratch("full"), c = scratch("resumed");
    std::ostringstream log;
    REQUIRE(run_experiment(half, a, log) == exit_ok);
    REQUIRE(run_experiment(full, b, log) == exit_ok);
    CHECK(resume_experiment(a / "checkpoint.json", 0.1, c, log) == exit_ok);
    CHECK(read_file(c / "trajectory.csv") == read_file(b / "trajectory.csv"));
    CHECK(read_file(c / "checkpoint.json") == read_file(b / "checkpoint.json"));

    const auto d = scratch("zero");
    CHECK(resume_experiment(a / "checkpoint.json", 0.0, d, log) == exit_ok);
    CHECK(read_file(d / "trajectory.csv") == read_file(a / "trajectory.csv"));

    write_file(a / "checkpoint.json", read_file(a / "checkpoint.json") + " ");
    std::ostringstream refused;
    CHECK(resume_experiment(a / "checkpoint.json", 0.1, scratch("bad"), refused) == exit_config);
    CHECK(refused.str().find("digest") != std::string::npos);
}

TEST_CASE("verify needs configs") {
    std::ostringstream log;
    CHECK(verify_configs({}, ToleranceProfile::standard, log) == exit_config);
    CHECK(log.str().find("usage") != std::string::npos);
}
